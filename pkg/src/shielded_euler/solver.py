"""Explicit finite-volume integrator for the viscous effective system.

Conserved variables are the effective density ``rho_hat = rho - delta`` and
momentum ``m_hat = rho_hat u``.  Interface fluxes are Rusanov (local speed)
or Lax-Friedrichs (global speed), viscosity is a centred second difference on
the effective variables, and time stepping is Heun's two-stage SSP scheme.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ScenarioSpec, SchemeSpec, sample_initial
from .entropy import entropy_fields
from .eos import ShieldedEOS
from .errors import ConfigError, DomainError, NonFiniteState, PositivityViolation
from .invariants import generator_H

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridState:
    x0: float
    dx: float
    n: int
    rho_hat: np.ndarray
    m_hat: np.ndarray
    t: float = 0.0
    delta: float = 0.0

    @property
    def x(self):
        return self.x0 + (np.arange(self.n) + 0.5) * self.dx

    @property
    def rho(self):
        return self.rho_hat + self.delta

    @property
    def u(self):
        return self.m_hat / self.rho_hat

    @property
    def mass(self):
        return float(np.sum(self.rho_hat) * self.dx)

    @property
    def momentum(self):
        return float(np.sum(self.m_hat) * self.dx)


# ---------------------------------------------------------------------------
# pointwise pieces


def convective_flux(eos: ShieldedEOS, rho_hat, m_hat):
    """Effective Euler flux ``(m_hat, m_hat**2/rho_hat + Ptilde(rho_hat + delta))``."""
    rho_hat = np.asarray(rho_hat, dtype=float)
    m_hat = np.asarray(m_hat, dtype=float)
    if np.any(~(rho_hat > 0)):
        raise DomainError("convective flux requires rho_hat > 0")
    return m_hat, m_hat * m_hat / rho_hat + eos.pressure_offset(rho_hat)


def _speeds(eos, rho_hat, m_hat):
    return np.abs(m_hat / rho_hat) + np.sqrt(eos.c2_offset(rho_hat))


def max_wave_speed(eos: ShieldedEOS, state: GridState) -> float:
    if state.n == 0 or np.size(state.rho_hat) == 0:
        raise ConfigError("empty grid")
    rh = np.asarray(state.rho_hat, dtype=float)
    if np.any(rh < 0):
        raise DomainError("state has rho_hat < 0")
    u = np.where(rh > 0, state.m_hat / np.where(rh > 0, rh, 1.0), 0.0)
    return float(np.max(np.abs(u) + np.sqrt(eos.c2_offset(rh))))


def cfl_dt(config: SchemeSpec, dx, speed, epsilon=0.0, cap=math.inf) -> float:
    """``cfl * min(dx/speed, dx**2/(2 eps))``; the cap applies when both are infinite."""
    hyper = dx / speed if speed > 0 else math.inf
    para = dx * dx / (2.0 * epsilon) if epsilon > 0 else math.inf
    dt = config.cfl * min(hyper, para)
    if not math.isfinite(dt):
        if not math.isfinite(cap):
            raise ConfigError("zero wave speed and zero viscosity need an explicit time-step cap")
        return cap
    return min(dt, cap)


def dissipation_K(eos: ShieldedEOS, rho):
    """``(c~ (rho - delta))' / (rho - delta)**2``, the damping weight of the invariants."""
    rho = eos._check(rho, strict=True)
    h = rho - eos.delta
    c = np.sqrt(eos.c2_offset(h))
    dc = eos.d2(rho) / (2.0 * c)
    return (dc * h + c) / (h * h)


# ---------------------------------------------------------------------------
# spatial operator


def _ghost(a, bc):
    if bc == "periodic":
        return np.concatenate([a[-1:], a, a[:1]])
    return np.concatenate([a[:1], a, a[-1:]])


def _rhs(eos, rho_hat, m_hat, dx, epsilon, scheme: SchemeSpec, bc, delta):
    r = _ghost(rho_hat, bc)
    m = _ghost(m_hat, bc)
    f1, f2 = convective_flux(eos, r, m)
    a = _speeds(eos, r, m)
    if scheme.flux == "rusanov":
        alpha = np.maximum(a[:-1], a[1:])
    else:
        alpha = np.full(len(a) - 1, a.max())
    # interface i+1/2 between ghosted cells i and i+1
    g1 = 0.5 * (f1[:-1] + f1[1:]) - 0.5 * alpha * (r[1:] - r[:-1])
    g2 = 0.5 * (f2[:-1] + f2[1:]) - 0.5 * alpha * (m[1:] - m[:-1])
    d1 = -(g1[1:] - g1[:-1]) / dx
    d2 = -(g2[1:] - g2[:-1]) / dx
    if epsilon > 0:
        lap = lambda v: (v[:-2] - 2.0 * v[1:-1] + v[2:]) / (dx * dx)  # noqa: E731
        d1 = d1 + epsilon * lap(r)
        if scheme.viscosity == "effective":
            d2 = d2 + epsilon * lap(m)
        else:
            # diffuse physical momentum (rho_hat + delta) u instead
            d2 = d2 + epsilon * lap(m + delta * m / r)
    return d1, d2


class _Violation(Exception):
    def __init__(self, cell, value):
        self.cell, self.value = cell, value


def _admissible(rho_hat, m_hat, floor, clamp):
    if not (np.all(np.isfinite(rho_hat)) and np.all(np.isfinite(m_hat))):
        raise NonFiniteState("non-finite value in state")
    bad = rho_hat <= floor
    if np.any(bad):
        cell = int(np.argmax(bad))
        if not clamp:
            raise _Violation(cell, float(rho_hat[cell]))
        u = np.where(bad, 0.0, m_hat / np.where(bad, 1.0, rho_hat))
        rho_hat = np.where(bad, floor * 2.0, rho_hat)
        m_hat = rho_hat * u
        return rho_hat, m_hat, int(bad.sum())
    return rho_hat, m_hat, 0


def step(eos: ShieldedEOS, state: GridState, scheme: SchemeSpec, epsilon, bc, dt):
    """One Heun step; returns ``(next_state, clamped_cells)``."""
    clamp = scheme.on_violation == "clamp"
    args = (state.dx, epsilon, scheme, bc, eos.delta)
    r0, m0 = state.rho_hat, state.m_hat
    k1, k2 = _rhs(eos, r0, m0, *args)
    r1, m1, c1 = _admissible(r0 + dt * k1, m0 + dt * k2, scheme.positivity_floor, clamp)
    l1, l2 = _rhs(eos, r1, m1, *args)
    r2 = 0.5 * r0 + 0.5 * (r1 + dt * l1)
    m2 = 0.5 * m0 + 0.5 * (m1 + dt * l2)
    r2, m2, c2 = _admissible(r2, m2, scheme.positivity_floor, clamp)
    return replace(state, rho_hat=r2, m_hat=m2, t=state.t + dt), c1 + c2


# ---------------------------------------------------------------------------
# driver


def initialize(eos: ShieldedEOS, scenario: ScenarioSpec) -> GridState:
    """Cell-midpoint sampling of the initial data, lifted off the effective vacuum.

    ``init_mode="floor"`` uses ``rho_hat = max(rho0, delta)``; ``"lift"`` uses
    ``rho_hat = rho0 + delta``.
    """
    x0, x1 = scenario.domain
    n = scenario.n
    dx = (x1 - x0) / n
    x = x0 + (np.arange(n) + 0.5) * dx
    rho0, u0 = sample_initial(scenario.initial, x, scenario.domain)
    if np.any(rho0 < 0):
        raise ConfigError("initial density is negative somewhere")
    d = eos.delta
    rho_hat = np.maximum(rho0, d) if scenario.init_mode == "floor" else rho0 + d
    if np.any(rho_hat <= scenario.scheme.positivity_floor):
        raise ConfigError("initial data touch vacuum; a positive shield is required")
    return GridState(x0, dx, n, rho_hat.astype(float), (rho_hat * u0).astype(float), 0.0, d)


MONITOR_FIELDS = ("t", "dt", "min_rho", "max_speed", "max_w", "min_z", "mass", "entropy_total")


def monitor_row(eos, state, dt):
    rh = state.rho_hat
    u = state.u
    h = generator_H(eos, rh + eos.delta, method="table")
    eta, _ = entropy_fields(eos, rh, state.m_hat)
    return (state.t, dt, float(np.min(rh + eos.delta)),
            float(np.max(np.abs(u) + np.sqrt(eos.c2_offset(rh)))),
            float(np.max(u + h)), float(np.min(u - h)),
            state.mass, float(np.sum(eta) * state.dx))


@dataclass
class Trajectory:
    eos: ShieldedEOS
    epsilon: float
    bc: str
    scenario: ScenarioSpec
    snapshots: list = field(default_factory=list)
    monitors: list = field(default_factory=list)
    events: list = field(default_factory=list)
    tainted: bool = False
    aborted: bool = False

    @property
    def final(self) -> GridState:
        return self.snapshots[-1]

    def monitor(self, name):
        return np.array([row[MONITOR_FIELDS.index(name)] for row in self.monitors])

    @property
    def min_rho(self):
        return float(self.monitor("min_rho").min())


def run(eos: ShieldedEOS, scenario: ScenarioSpec, raise_on_abort=False) -> Trajectory:
    """Advance ``scenario`` to ``t_final`` recording snapshots and per-step monitors.

    A positivity or non-finite event stops the run; the last good state is kept
    as the final snapshot and the event is recorded.  In clamp mode violations
    are repaired and the trajectory is marked ``tainted``.
    """
    eps = scenario.eps
    bc = scenario.bc
    scheme = scenario.scheme
    state = initialize(eos, scenario)
    traj = Trajectory(eos, eps, bc, scenario)
    traj.snapshots.append(state)
    traj.monitors.append(monitor_row(eos, state, 0.0))
    interval = scenario.output.snapshot_interval
    t_final = scenario.t_final
    next_out = interval if interval else t_final
    cap = interval or t_final or math.inf
    while state.t < t_final * (1 - 1e-14):
        speed = max_wave_speed(eos, state)
        dt = cfl_dt(scheme, state.dx, speed, eps, cap=cap)
        dt = min(dt, next_out - state.t, t_final - state.t)
        try:
            new, clamped = step(eos, state, scheme, eps, bc, dt)
        except _Violation as v:
            ev = PositivityViolation(f"rho_hat <= floor at cell {v.cell}", state.t, v.cell, v.value)
            return _abort(traj, state, ev, raise_on_abort)
        except NonFiniteState as ev:
            return _abort(traj, state, ev, raise_on_abort)
        if clamped:
            traj.tainted = True
            traj.events.append({"kind": "clamp", "t": new.t, "cells": clamped})
        state = new
        traj.monitors.append(monitor_row(eos, state, dt))
        if state.t >= next_out * (1 - 1e-14) or state.t >= t_final * (1 - 1e-14):
            traj.snapshots.append(state)
            next_out = min(next_out + (interval or t_final), t_final) if interval else t_final
    return traj


def _abort(traj, state, ev, raise_on_abort):
    log.warning("run aborted at t=%g: %s", state.t, ev)
    traj.aborted = True
    traj.events.append({"kind": ev.code, "t": state.t, "message": str(ev),
                        "cell": getattr(ev, "cell", None)})
    if traj.snapshots[-1] is not state:
        traj.snapshots.append(state)
    if raise_on_abort:
        raise ev
    return traj
