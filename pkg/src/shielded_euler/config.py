"""Scenario schema, presets and strict JSON loading."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .eos import PressureLaw, ShieldedEOS, validate_law
from .errors import ConfigError, ConfigFileError, SchemaError

FORMAT_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LawSpec(_Strict):
    family: Literal["polytropic", "nonpolytropic"] = "polytropic"
    kappa: float = Field(1.0, gt=0)
    gamma: float = 1.4
    beta: float = 0.0

    def build(self) -> PressureLaw:
        beta = self.beta if self.family == "nonpolytropic" else 0.0
        return validate_law(PressureLaw(self.family, self.kappa, self.gamma, beta))


class SchemeSpec(_Strict):
    flux: Literal["rusanov", "lax_friedrichs"] = "rusanov"
    cfl: float = Field(0.45, gt=0, lt=1)
    positivity_floor: float = Field(1e-12, gt=0)
    viscosity: Literal["effective", "physical"] = "effective"
    on_violation: Literal["abort", "clamp"] = "abort"


class RiemannData(_Strict):
    kind: Literal["riemann"] = "riemann"
    x_jump: float = 0.0
    rho_left: float
    u_left: float
    rho_right: float
    u_right: float


class SineData(_Strict):
    kind: Literal["sine"] = "sine"
    rho_mean: float
    amplitude: float
    periods: int = Field(1, ge=1)
    u: float = 0.0


class GaussianData(_Strict):
    kind: Literal["gaussian"] = "gaussian"
    rho_floor: float
    amplitude: float
    center: float = 0.0
    width: float = Field(gt=0)
    u: float = 0.0


class ConstantData(_Strict):
    kind: Literal["constant"] = "constant"
    rho: float
    u: float = 0.0


class PiecewiseData(_Strict):
    """Piecewise-constant data; ``edges`` are the interior breakpoints."""

    kind: Literal["piecewise"] = "piecewise"
    edges: list[float]
    rho: list[float]
    u: list[float]

    @model_validator(mode="after")
    def _lengths(self):
        if len(self.rho) != len(self.edges) + 1 or len(self.u) != len(self.rho):
            raise ValueError("piecewise data needs len(rho) == len(u) == len(edges) + 1")
        if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("piecewise edges must be increasing")
        return self


InitialData = Annotated[
    Union[RiemannData, SineData, GaussianData, ConstantData, PiecewiseData],
    Field(discriminator="kind"),
]


def sample_initial(data, x, domain):
    """Midpoint values ``(rho0, u0)`` of the initial data at cell centres ``x``."""
    x = np.asarray(x, dtype=float)
    if data.kind == "riemann":
        left = x < data.x_jump
        return (np.where(left, data.rho_left, data.rho_right),
                np.where(left, data.u_left, data.u_right))
    if data.kind == "sine":
        length = domain[1] - domain[0]
        phase = 2 * math.pi * data.periods * (x - domain[0]) / length
        return data.rho_mean + data.amplitude * np.sin(phase), np.full_like(x, data.u)
    if data.kind == "gaussian":
        rho = data.rho_floor + data.amplitude * np.exp(-(((x - data.center) / data.width) ** 2))
        return rho, np.full_like(x, data.u)
    if data.kind == "constant":
        return np.full_like(x, data.rho), np.full_like(x, data.u)
    idx = np.searchsorted(np.asarray(data.edges), x, side="right")
    return np.asarray(data.rho)[idx], np.asarray(data.u)[idx]


class OutputSpec(_Strict):
    snapshot_interval: Optional[float] = Field(None, gt=0)
    directory: Optional[str] = None


class ScenarioSpec(_Strict):
    name: str = "custom"
    law: LawSpec = LawSpec()
    delta: float = Field(0.01, ge=0)
    epsilon: Optional[float] = Field(None, ge=0)
    eps_coupling: float = Field(0.1, gt=0)
    domain: tuple[float, float] = (-1.0, 1.0)
    n: int = Field(1024, ge=16)
    t_final: float = Field(0.2, ge=0)
    bc: Literal["periodic", "outflow"] = "outflow"
    scheme: SchemeSpec = SchemeSpec()
    initial: Union[InitialData, str]
    init_mode: Literal["floor", "lift"] = "floor"
    w_slack: float = Field(0.05, gt=0)
    output: OutputSpec = OutputSpec()

    @model_validator(mode="before")
    @classmethod
    def _resolve_preset(cls, values):
        if isinstance(values, dict) and isinstance(values.get("initial"), str):
            base = preset(values["initial"]).model_dump()
            base.update({k: v for k, v in values.items() if k != "initial"})
            return base
        return values

    @model_validator(mode="after")
    def _check(self):
        if not self.domain[1] > self.domain[0]:
            raise ValueError("domain requires x_max > x_min")
        # raises AssumptionError, which pydantic lets through unchanged
        self.law.build()
        return self

    @property
    def eps(self) -> float:
        """Viscosity; defaults to ``eps_coupling * delta`` when not set."""
        return self.epsilon if self.epsilon is not None else self.eps_coupling * self.delta

    @property
    def dx(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.n

    def build_eos(self) -> ShieldedEOS:
        return ShieldedEOS(self.law.build(), self.delta)

    def with_updates(self, **changes) -> "ScenarioSpec":
        data = self.model_dump()
        for key, value in changes.items():
            if "." in key:
                outer, inner = key.split(".", 1)
                data[outer] = {**data[outer], inner: value}
            else:
                data[key] = value
        return ScenarioSpec.model_validate(data)


_PRESETS = {
    "vacuum_riemann": dict(
        law=dict(kappa=0.05, gamma=1.4), domain=(-1.0, 1.0), n=1024, t_final=0.2,
        bc="outflow",
        initial=dict(kind="riemann", rho_left=1.0, u_left=-2.0, rho_right=1.0, u_right=2.0),
    ),
    "shock_tube": dict(
        law=dict(kappa=1.0, gamma=1.4), domain=(-1.0, 1.0), n=1024, t_final=0.2,
        bc="outflow",
        initial=dict(kind="riemann", rho_left=1.0, u_left=0.0, rho_right=0.125, u_right=0.0),
    ),
    "smooth_periodic": dict(
        law=dict(kappa=1.0, gamma=1.4), domain=(0.0, 1.0), n=256, t_final=0.1,
        bc="periodic", initial=dict(kind="sine", rho_mean=1.0, amplitude=0.2),
    ),
    "near_vacuum_pulse": dict(
        law=dict(kappa=1.0, gamma=2.0), domain=(-1.0, 1.0), n=1024, t_final=0.2,
        bc="outflow",
        initial=dict(kind="gaussian", rho_floor=1e-3, amplitude=1.0, width=0.2),
    ),
}


def preset(name: str) -> ScenarioSpec:
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}")
    return ScenarioSpec.model_validate({"name": name, **_PRESETS[name]})


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def _schema_message(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        if e["type"] == "extra_forbidden":
            parts.append(f"unknown key {loc!r}")
        else:
            parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def load_spec(data: dict) -> ScenarioSpec:
    try:
        return ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(_schema_message(exc)) from None


def parse_config(path) -> ScenarioSpec:
    """Read and validate a scenario file; raises a :class:`ConfigError` subclass."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return load_spec(data)
