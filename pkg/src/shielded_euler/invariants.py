"""Riemann invariants of the shielded system.

The generator ``H(rho) = int_delta^rho c~(s)/(s - delta) ds`` has an integrable
``(s - delta)**-1/2`` endpoint singularity.  Every evaluation path integrates
in ``t = sqrt(rho - delta)`` instead, where the integrand ``2 c~(delta+t^2)/t``
is smooth and bounded.  For ``delta = 0`` the substitution ``rho = t**(1/theta)``
plays the same role.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._tables import CumulativeTable
from .eos import PressureLaw, ShieldedEOS
from .errors import ConfigError, DomainError

TABLE_RHO_MAX = 1.0e4


@dataclass(frozen=True)
class RiemannCoords:
    z: np.ndarray | float
    w: np.ndarray | float

    @property
    def sigma(self):
        return np.asarray(self.w) - np.asarray(self.z)

    @property
    def u(self):
        return 0.5 * (np.asarray(self.w) + np.asarray(self.z))


@dataclass(frozen=True)
class InvariantRegion:
    c_inf: float
    c_sup: float
    rho_max: float

    def __post_init__(self):
        if not self.c_inf <= self.c_sup:
            raise ConfigError(f"empty invariant region: c_inf={self.c_inf} > c_sup={self.c_sup}")
        if not self.rho_max > 0:
            raise ConfigError("rho_max must be positive")


def _to_rho(eos: ShieldedEOS, t):
    if eos.delta > 0:
        return eos.delta + t * t
    return t ** (1.0 / eos.law.theta)


def _to_t(eos: ShieldedEOS, rho):
    if eos.delta > 0:
        return np.sqrt(np.maximum(rho - eos.delta, 0.0))
    return np.asarray(rho, dtype=float) ** eos.law.theta


def _dH_dt(eos: ShieldedEOS):
    """Derivative of the generator in the regularising variable ``t``."""
    if eos.delta > 0:
        def f(t):
            t = np.asarray(t, dtype=float)
            safe = np.where(t > 0, t, 1e-300)
            return 2.0 * np.sqrt(np.maximum(eos.c2_offset(safe * safe), 0.0)) / safe
    else:
        theta = eos.law.theta
        floor = 1e-30 ** theta

        def f(t):
            t = np.asarray(t, dtype=float)
            safe = np.maximum(t, floor)
            return eos.sound_speed(safe ** (1.0 / theta)) / (theta * safe)
    return f


def _quad_t(f, a, b, points=None):
    return integrate.quad(lambda t: float(f(t)), a, b, epsabs=0.0, epsrel=1e-12,
                          limit=200, points=points)[0]


def generator_H(eos: ShieldedEOS, rho, method="quad"):
    """``H_delta(rho)``; ``method`` is ``"quad"`` (reference) or ``"table"``."""
    rho = eos._check(rho)
    if method == "table":
        return h_table(eos)(_to_t(eos, rho))
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    f = _dH_dt(eos)
    knee = math.sqrt(eos.delta) if eos.delta > 0 else None
    out = []
    for r in np.ravel(rho):
        top = float(_to_t(eos, r))
        pts = [knee] if knee is not None and 0 < knee < top else None
        out.append(_quad_t(f, 0.0, top, pts) if top > 0 else 0.0)
    out = np.reshape(out, np.shape(rho))
    return out if out.shape else float(out)


def generator_H_cumulative(eos: ShieldedEOS, rho_sorted):
    """``H`` on an increasing density grid by summing per-segment quadratures."""
    rho_sorted = eos._check(np.asarray(rho_sorted, dtype=float))
    if np.any(np.diff(rho_sorted) < 0):
        raise ValueError("density grid must be non-decreasing")
    f = _dH_dt(eos)
    ts = np.concatenate([[0.0], _to_t(eos, rho_sorted)])
    knee = math.sqrt(eos.delta) if eos.delta > 0 else None
    segs = np.empty(len(rho_sorted))
    for k in range(len(rho_sorted)):
        a, b = ts[k], ts[k + 1]
        pts = [knee] if knee is not None and a < knee < b else None
        segs[k] = _quad_t(f, a, b, pts) if b > a else 0.0
    return np.cumsum(segs)


def h0_polytropic(law: PressureLaw, rho):
    """Unshielded polytropic generator ``2 sqrt(kappa gamma)/(gamma - 1) rho**theta``."""
    if law.family != "polytropic":
        raise ValueError("closed form only for polytropic laws")
    return 2.0 * math.sqrt(law.kappa * law.gamma) / (law.gamma - 1.0) * np.asarray(rho) ** law.theta


@functools.lru_cache(maxsize=64)
def h_table(eos: ShieldedEOS, rho_max: float = TABLE_RHO_MAX) -> CumulativeTable:
    if eos.delta > 0:
        t_lo, t_hi = 1e-4 * math.sqrt(eos.delta), math.sqrt(rho_max)
    else:
        t_lo, t_hi = 1e-10 ** eos.law.theta, rho_max ** eos.law.theta
    return CumulativeTable(_dH_dt(eos), t_lo, t_hi)


def to_invariants(eos: ShieldedEOS, rho, u, method="quad") -> RiemannCoords:
    h = generator_H(eos, rho, method=method)
    u = np.asarray(u, dtype=float)
    return RiemannCoords(z=u - h, w=u + h)


def _invert_table(eos, target):
    """Vectorised inverse of the tabulated generator, returned in ``t``."""
    table = h_table(eos)
    target = np.asarray(target, dtype=float)
    idx = np.clip(np.searchsorted(table.values, target), 1, len(table.nodes) - 1)
    lo, hi = table.nodes[idx - 1], table.nodes[idx]
    t = np.where(target >= table.values[-1], table.t_hi, 0.5 * (lo + hi))
    f = _dH_dt(eos)
    for _ in range(40):
        step = (table(t) - target) / f(t)
        t_new = np.clip(t - step, lo, np.maximum(hi, t))
        if np.all(np.abs(t_new - t) <= 1e-15 * np.maximum(t, 1e-300)):
            t = t_new
            break
        t = t_new
    return t


def from_invariants(eos: ShieldedEOS, coords: RiemannCoords, method="quad", rtol=1e-12):
    """Recover ``(rho, u)`` from ``(z, w)``.

    The table gives a starting point; with ``method="quad"`` the density is then
    polished by safeguarded Newton iterations on the reference quadrature,
    keeping a monotone bracket so the iteration cannot leave ``[delta, inf)``.
    """
    z = np.asarray(coords.z, dtype=float)
    w = np.asarray(coords.w, dtype=float)
    half = 0.5 * (w - z)
    if np.any(half < 0):
        raise DomainError("invariant width w - z must be non-negative")
    u = 0.5 * (w + z)
    rho = _to_rho(eos, _invert_table(eos, half))
    if method == "table":
        return rho, u
    rho = np.array(rho, dtype=float, ndmin=1)
    flat_half = np.ravel(half) * np.ones(rho.shape)
    for i, (r, target) in enumerate(zip(rho, flat_half)):
        rho[i] = _polish(eos, float(r), float(target), rtol)
    rho = rho.reshape(np.shape(half)) if np.shape(half) else float(rho[0])
    return rho, u


def _polish(eos, rho, target, rtol):
    d = eos.delta
    if target == 0.0:
        return d
    lo, hi = d, max(rho, d + 1e-300)
    # geometric bracket expansion
    while generator_H(eos, hi) < target:
        lo, hi = hi, d + 2.0 * (hi - d) + 1e-12
    r = min(max(rho, lo), hi)
    for _ in range(100):
        val = generator_H(eos, r) - target
        if val > 0:
            hi = r
        else:
            lo = r
        slope = float(eos.sound_speed(r)) / (r - d) if r > d else math.inf
        nxt = r - val / slope if math.isfinite(slope) and slope > 0 else 0.5 * (lo + hi)
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - r) <= rtol * abs(r) or hi - lo <= rtol * abs(r):
            return nxt
        r = nxt
    return r


def jacobian_det(eos: ShieldedEOS, rho):
    """Determinant of ``d(z, w)/d(rho, u)``, equal to ``-2 c~/(rho - delta)``."""
    rho = eos._check(rho, strict=True)
    return -2.0 * eos.sound_speed(rho) / (rho - eos.delta)


def region_membership(region: InvariantRegion, eos: ShieldedEOS, rho, u, method="quad"):
    """Signed margins of a state against the invariant box; all ``>= 0`` means inside."""
    rho = np.asarray(rho, dtype=float)
    # states below the shield are outside; evaluate invariants at the clamp
    coords = to_invariants(eos, np.maximum(rho, eos.delta), u, method=method)
    margins = {
        "z_lower": np.asarray(coords.z) - region.c_inf,
        "w_upper": region.c_sup - np.asarray(coords.w),
        "rho_lower": rho - eos.delta,
        "rho_upper": region.rho_max - rho,
    }
    inside = np.logical_and.reduce([m >= 0 for m in margins.values()])
    return {"inside": inside, "margins": margins, "coords": coords}


@dataclass
class GapStudy:
    deltas: list
    sup_gaps: list
    order: float
    theta: float
    required: float

    @property
    def passed(self) -> bool:
        return self.order >= self.required


def h_gap_study(law: PressureLaw, deltas, rho_grid, slack=0.15) -> GapStudy:
    """Sup-norm distance of ``H_delta`` from ``H_0`` along a shield ladder.

    The fitted order is the least-squares slope of ``log gap`` against ``log delta``
    over the positive shields; a trailing ``delta = 0`` entry contributes gap 0.
    """
    deltas = [float(d) for d in deltas]
    if any(a <= b for a, b in zip(deltas, deltas[1:])) or any(d < 0 for d in deltas):
        raise ConfigError("delta ladder must be strictly decreasing and non-negative")
    if 0.0 in deltas[:-1]:
        raise ConfigError("delta = 0 may only appear as the last ladder entry")
    rho_grid = np.unique(np.asarray(rho_grid, dtype=float))
    if rho_grid[0] <= 0:
        raise ConfigError("density grid must lie in (0, M]")
    base = ShieldedEOS(law, 0.0)
    gaps = []
    for d in deltas:
        if d == 0:
            gaps.append(0.0)
            continue
        grid = np.concatenate([[d], rho_grid[rho_grid > d]])
        h_d = generator_H_cumulative(ShieldedEOS(law, d), grid)
        if law.family == "polytropic":
            h_0 = h0_polytropic(law, grid)
        else:
            h_0 = generator_H_cumulative(base, grid)
        gaps.append(float(np.max(np.abs(h_d - h_0))))
    pos = [(d, g) for d, g in zip(deltas, gaps) if d > 0 and g > 0]
    order = float(np.polyfit(np.log([p[0] for p in pos]), np.log([p[1] for p in pos]), 1)[0]) \
        if len(pos) >= 2 else math.nan
    req = min(law.theta, 1.0) - slack
    return GapStudy(deltas, gaps, order, law.theta, req)

