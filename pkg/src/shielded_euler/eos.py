"""Pressure laws and the weighted-pressure shield.

All density arguments are nondimensional.  Functions accept scalars or numpy
arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .errors import AssumptionError, DomainError

# Relative offset rho - delta below which shielded quantities are evaluated
# from cancellation-free integral forms instead of closed-form differences.
NEAR_BOUNDARY = 0.25
# Below s < TAYLOR_SWITCH * delta the internal-energy integrand is replaced by
# its limit value.
TAYLOR_SWITCH = 1e-8

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

VALIDATION_GRID = np.logspace(-8.0, 8.0, 16 * 64 + 1)


@dataclass(frozen=True)
class PressureLaw:
    """A barotropic law ``P(rho)`` with closed-form first and second derivatives.

    ``family`` is ``"polytropic"`` (``kappa * rho**gamma``) or
    ``"nonpolytropic"`` (``kappa * rho**gamma * (1 + beta*rho/(1+rho))``).
    """

    family: str = "polytropic"
    kappa: float = 1.0
    gamma: float = 1.4
    beta: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.family not in ("polytropic", "nonpolytropic"):
            raise AssumptionError(f"unknown pressure-law family {self.family!r}")
        if not self.label:
            if self.family == "polytropic":
                text = f"polytropic(kappa={self.kappa:g}, gamma={self.gamma:g})"
            else:
                text = (f"nonpolytropic(kappa={self.kappa:g}, gamma={self.gamma:g}, "
                        f"beta={self.beta:g})")
            object.__setattr__(self, "label", text)

    @property
    def gamma_asym(self) -> float:
        return self.gamma

    @property
    def kappa0(self) -> float:
        return self.kappa

    @property
    def kappa_inf(self) -> float:
        return self.kappa * (1.0 + self.beta) if self.family == "nonpolytropic" else self.kappa

    @property
    def theta(self) -> float:
        return 0.5 * (self.gamma - 1.0)

    def _shape(self, rho):
        # f = 1 + beta*rho/(1+rho) and its derivatives; identically 1 when polytropic
        if self.family == "polytropic":
            return 1.0, 0.0, 0.0
        b = self.beta
        return 1.0 + b * rho / (1.0 + rho), b / (1.0 + rho) ** 2, -2.0 * b / (1.0 + rho) ** 3

    def evaluate(self, rho):
        rho = np.asarray(rho, dtype=float)
        f, _, _ = self._shape(rho)
        return self.kappa * rho**self.gamma * f

    def d1(self, rho):
        rho = np.asarray(rho, dtype=float)
        g, k = self.gamma, self.kappa
        f, f1, _ = self._shape(rho)
        return k * (g * rho ** (g - 1.0) * f + rho**g * f1)

    def d2(self, rho):
        rho = np.asarray(rho, dtype=float)
        g, k = self.gamma, self.kappa
        f, f1, f2 = self._shape(rho)
        return k * (g * (g - 1.0) * rho ** (g - 2.0) * f
                    + 2.0 * g * rho ** (g - 1.0) * f1 + rho**g * f2)

    def nonlinearity(self, rho):
        """``2 P'(rho) + rho P''(rho)``; positive for a genuinely nonlinear law."""
        rho = np.asarray(rho, dtype=float)
        return 2.0 * self.d1(rho) + rho * self.d2(rho)

    def to_dict(self) -> dict:
        return {"family": self.family, "kappa": self.kappa, "gamma": self.gamma,
                "beta": self.beta}


def polytropic(kappa=1.0, gamma=1.4) -> PressureLaw:
    return validate_law(PressureLaw("polytropic", float(kappa), float(gamma)))


def nonpolytropic(kappa=1.0, gamma=1.4, beta=0.2) -> PressureLaw:
    return validate_law(PressureLaw("nonpolytropic", float(kappa), float(gamma), float(beta)))


def check_assumptions(law: PressureLaw, grid=VALIDATION_GRID, asym_rtol=1e-4) -> dict:
    """Evaluate the three structural predicates on a log grid.

    Returns a dict of booleans plus the worst observed values so a caller
    can report why a law was rejected.
    """
    with np.errstate(all="ignore"):
        p1 = law.d1(grid)
        gnl = law.nonlinearity(grid)
        ratio = law.evaluate(grid) / grid**law.gamma
    hyperbolic = bool(np.all(np.isfinite(p1)) and np.all(p1 > 0))
    nonlinear = bool(np.all(np.isfinite(gnl)) and np.all(gnl > 0))
    lo_err = abs(ratio[0] / law.kappa0 - 1.0) if law.kappa0 > 0 else math.inf
    hi_err = abs(ratio[-1] / law.kappa_inf - 1.0) if law.kappa_inf > 0 else math.inf
    asymptotic = bool(law.gamma > 1.0 and law.kappa0 > 0 and law.kappa_inf > 0
                      and lo_err < asym_rtol and hi_err < asym_rtol)
    return {
        "hyperbolic": hyperbolic,
        "genuinely_nonlinear": nonlinear,
        "polytropic_asymptotics": asymptotic,
        "min_dP": float(np.nanmin(p1)),
        "min_nonlinearity": float(np.nanmin(gnl)),
        "asymptotic_error_low": float(lo_err),
        "asymptotic_error_high": float(hi_err),
    }


def validate_law(law: PressureLaw) -> PressureLaw:
    if not law.gamma > 1.0:
        raise AssumptionError(f"{law.label}: asymptotic exponent must exceed 1, got {law.gamma}")
    report = check_assumptions(law)
    for key, name in (("hyperbolic", "P'(rho) > 0"),
                      ("genuinely_nonlinear", "2P' + rho P'' > 0"),
                      ("polytropic_asymptotics", "P/rho^gamma -> kappa0, kappa_inf")):
        if not report[key]:
            raise AssumptionError(f"{law.label}: {name} fails on the validation grid ({report})")
    return law


def stiffness(eos, rho):
    """``g(rho) = rho**2 P'(rho)`` of the underlying (unshielded) law."""
    law = eos.law if isinstance(eos, ShieldedEOS) else eos
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("stiffness requires rho > 0")
    return rho * rho * law.d1(rho)


@dataclass(frozen=True)
class ShieldedEOS:
    """A pressure law together with a shield density ``delta >= 0``.

    The shielded law is only defined for ``rho >= delta``; ``delta = 0``
    reproduces the unshielded law.
    """

    law: PressureLaw
    delta: float = 0.0
    g_delta: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.delta >= 0:
            raise DomainError(f"shield density must be >= 0, got {self.delta}")
        object.__setattr__(self, "delta", float(self.delta))
        gd = self.delta * self.delta * float(self.law.d1(self.delta)) if self.delta > 0 else 0.0
        object.__setattr__(self, "g_delta", gd)

    def _check(self, rho, strict=False):
        rho = np.asarray(rho, dtype=float)
        bad = rho <= self.delta if strict else rho < self.delta
        if self.delta == 0 and not strict:
            bad = rho <= 0
        if np.any(bad) or np.any(~np.isfinite(rho)):
            op = ">" if strict or self.delta == 0 else ">="
            raise DomainError(f"density must satisfy rho {op} delta={self.delta}")
        return rho

    # Near the shield the closed forms lose all relative accuracy through
    # cancellation of O(1) terms, so the gaps are integrated directly:
    #   g(d+h) - g(d)   = int_0^h g'(d+s) ds
    #   Ptilde(d+h)     = int_0^h g'(d+s) (h-s) / ((d+s)(d+h)) ds
    def _gl_gap(self, h, with_kernel):
        d = self.delta
        tau = h[..., None] * _GL_X
        r = d + tau
        gp = r * self.law.nonlinearity(r)
        if with_kernel:
            gp = gp * (h[..., None] - tau) / (r * (d + h[..., None]))
        return h * np.sum(gp * _GL_W, axis=-1)

    def _near(self, rho):
        return (rho - self.delta) < NEAR_BOUNDARY * self.delta

    def stiffness_gap(self, rho):
        """``g(rho) - g(delta)``, the shielded stiffness ``rho**2 Ptilde'(rho)``."""
        rho = self._check(rho)
        out = rho * rho * self.law.d1(rho) - self.g_delta
        if self.delta > 0:
            near = self._near(rho)
            if np.any(near):
                out = np.where(near, self._gl_gap(np.where(near, rho - self.delta, 0.0), False), out)
        return out

    def pressure(self, rho, method="auto"):
        """Shielded pressure ``Ptilde(rho)``; zero at ``rho = delta``."""
        rho = self._check(rho)
        if method == "quad":
            return _quad_pressure(self, rho)
        law, d = self.law, self.delta
        if d == 0:
            return law.evaluate(rho)
        out = law.evaluate(rho) - law.evaluate(d) + self.g_delta * (1.0 / rho - 1.0 / d)
        if method == "auto":
            near = self._near(rho)
            if np.any(near):
                out = np.where(near, self._gl_gap(np.where(near, rho - d, 0.0), True), out)
        return out

    def d1(self, rho):
        """``Ptilde'(rho) = c~^2(rho)``."""
        rho = self._check(rho)
        return self.stiffness_gap(rho) / (rho * rho)

    c2 = d1

    def d2(self, rho):
        rho = self._check(rho)
        return self.law.d2(rho) + 2.0 * self.g_delta / rho**3

    def sound_speed(self, rho):
        return np.sqrt(np.maximum(self.c2(rho), 0.0))

    # Offset forms take h = rho - delta directly; forming delta + h first
    # would round h away when h << delta.
    def c2_offset(self, h):
        h = np.asarray(h, dtype=float)
        if self.delta == 0:
            return self.c2(h)
        rho = self.delta + h
        near = h < NEAR_BOUNDARY * self.delta
        gap = np.where(near, self._gl_gap(np.where(near, h, 0.0), False),
                       rho * rho * self.law.d1(rho) - self.g_delta)
        return gap / (rho * rho)

    def pressure_offset(self, h):
        h = np.asarray(h, dtype=float)
        if self.delta == 0:
            return self.pressure(h)
        rho = self.delta + h
        near = h < NEAR_BOUNDARY * self.delta
        far = (self.law.evaluate(rho) - self.law.evaluate(self.delta)
               + self.g_delta * (1.0 / rho - 1.0 / self.delta))
        return np.where(near, self._gl_gap(np.where(near, h, 0.0), True), far)

    def boundary_curvature(self) -> float:
        """``Ptilde''(delta)``, the slope of ``c~^2`` at the shield."""
        if self.delta == 0:
            with np.errstate(divide="ignore"):
                return float(self.law.d2(0.0))
        return float(self.d2(self.delta))

    @cached_property
    def label(self) -> str:
        return f"{self.law.label}, delta={self.delta:g}"


def shielded_pressure(eos: ShieldedEOS, rho, method="auto"):
    return eos.pressure(rho, method=method)


def shielded_c2(eos: ShieldedEOS, rho):
    return eos.c2(rho)


def _quad_pressure(eos, rho):
    d, gd, law = eos.delta, eos.g_delta, eos.law
    lower = d if d > 0 else 0.0

    def integrand(s):
        return float(law.d1(s)) - gd / (s * s)

    vals = [integrate.quad(integrand, lower, float(r), epsabs=0.0, epsrel=1e-12, limit=200)[0]
            if r > lower else 0.0 for r in np.ravel(rho)]
    return np.reshape(np.array(vals), np.shape(rho))


def convexity_residual(eos: ShieldedEOS, rho):
    """``(2 Ptilde' + rho Ptilde'') - (2 P' + rho P'')`` from the closed forms.

    The shielded derivatives are assembled from ``P' - C/rho**2`` and
    ``P'' + 2C/rho**3`` with ``C = delta**2 P'(delta)``; the two singular
    pieces cancel and the result is zero up to rounding.
    """
    rho = eos._check(rho, strict=eos.delta > 0)
    law, c = eos.law, eos.g_delta
    pt1 = law.d1(rho) - c / (rho * rho)
    pt2 = law.d2(rho) + 2.0 * c / rho**3
    return (2.0 * pt1 + rho * pt2) - law.nonlinearity(rho)


def epd_lambda_eff(eos: ShieldedEOS, rho):
    """Index ``(rho - delta) c~'/c~ = (rho - delta)(c~^2)'/(2 c~^2)``; tends to 1/2 at the shield."""
    rho = eos._check(rho, strict=True)
    return (rho - eos.delta) * eos.d2(rho) / (2.0 * eos.c2(rho))


def epd_lambda_physical(eos: ShieldedEOS, rho):
    """Diagnostic ``rho c~'/c~``; unbounded as ``rho -> delta``."""
    rho = eos._check(rho, strict=True)
    return rho * eos.d2(rho) / (2.0 * eos.c2(rho))


def _energy_integrand(eos, s):
    s = np.asarray(s, dtype=float)
    d = eos.delta
    if d == 0:
        return eos.law.evaluate(s) / (s * s)
    small = s < TAYLOR_SWITCH * d
    safe = np.where(small, 1.0, s)
    val = eos.pressure_offset(safe) / (safe * safe)
    return np.where(small, 0.5 * eos.boundary_curvature(), val)


def internal_energy_hat(eos: ShieldedEOS, rho_hat):
    """``e^(rho_hat) = int_0^rho_hat Ptilde(s + delta) / s**2 ds`` by adaptive quadrature."""
    rho_hat = np.asarray(rho_hat, dtype=float)
    if np.any(rho_hat < 0):
        raise DomainError("effective density must be >= 0")
    out = np.empty(rho_hat.shape)
    flat = out.reshape(-1)
    for i, r in enumerate(rho_hat.reshape(-1)):
        flat[i] = _energy_scalar(eos, float(r))
    return out if out.shape else float(out)


def _energy_scalar(eos, r):
    if r == 0.0:
        return 0.0
    d = eos.delta
    if d == 0:
        # rho = r * v**p makes the integrand bounded at v = 0
        law = eos.law
        p = max(1.0, 1.0 / (law.gamma - 1.0))

        def f(v):
            s = r * v**p
            return float(law.evaluate(s)) / (s * s) * r * p * v ** (p - 1.0) if v > 0 else 0.0

        return integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    head = integrate.quad(lambda s: float(_energy_integrand(eos, s)), 0.0, min(r, d),
                          epsabs=0.0, epsrel=1e-12, limit=200)[0]
    if r <= d:
        return head
    # above the shield the integrand is a power law; integrate in log s
    tail = integrate.quad(lambda y: float(_energy_integrand(eos, math.exp(y))) * math.exp(y),
                          math.log(d), math.log(r), epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return head + tail


def lu_pressure_and_pollution(law: PressureLaw, delta, rho):
    """Comparison construction with flux ``rho u - 2 delta u``.

    Returns ``(P1, G_lu)`` where ``P1 = int_{2delta}^rho (s - 2delta)/s P'(s) ds`` and
    ``G_lu = (1 - 2delta/rho)(2P' + rho P'') - (2delta/rho)(P' + rho P'')``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 2 * delta) or np.any(rho <= 0):
        raise DomainError("comparison pressure requires rho >= 2 delta")
    lower = 2.0 * delta

    def integrand(s):
        return (s - lower) / s * float(law.d1(s))

    p1 = np.reshape([integrate.quad(integrand, lower, float(r), epsabs=0.0, epsrel=1e-12,
                                    limit=200)[0] if r > lower else 0.0
                     for r in np.ravel(rho)], rho.shape)
    ratio = lower / rho
    g_lu = (1.0 - ratio) * law.nonlinearity(rho) - ratio * (law.d1(rho) + rho * law.d2(rho))
    return p1, g_lu


def vacuum_derivative_ratio(law: PressureLaw, rho):
    """``P'(rho)**1.5 / (rho P''(rho))``; NaN where ``P'' = 0``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("rho must be positive")
    p2 = law.d2(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p2 != 0, law.d1(rho) ** 1.5 / (rho * p2), np.nan)



def shipped_laws() -> list[PressureLaw]:
    """The four laws used throughout the test and study suites."""
    return [
        polytropic(1.0, 1.4),
        polytropic(1.0, 2.0),
        polytropic(1.0 / 3.0, 3.0),
        nonpolytropic(1.0, 1.6, 0.2),
    ]
