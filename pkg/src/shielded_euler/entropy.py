"""Shifted mechanical entropy pair in effective variables and discrete budgets."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._tables import CumulativeTable
from .eos import ShieldedEOS, internal_energy_hat
from .errors import ConfigError, DomainError
from .invariants import TABLE_RHO_MAX, generator_H


@dataclass(frozen=True)
class EntropyEval:
    eta: float
    q: float
    grad: np.ndarray
    hessian: np.ndarray


def _energy_rate(eos: ShieldedEOS):
    if eos.delta > 0:
        def f(t):
            t = np.asarray(t, dtype=float)
            safe = np.where(t > 1e-100, t, 1.0)
            # integrand vanishes linearly at t = 0
            return np.where(t > 1e-100, 2.0 * eos.pressure_offset(safe * safe) / safe**3, 0.0)
    else:
        theta = eos.law.theta
        floor = 1e-30 ** theta

        def f(t):
            t = np.maximum(np.asarray(t, dtype=float), floor)
            rho = t ** (1.0 / theta)
            return eos.law.evaluate(rho) / (rho * theta * t)
    return f


@functools.lru_cache(maxsize=64)
def energy_table(eos: ShieldedEOS, rho_hat_max: float = TABLE_RHO_MAX) -> CumulativeTable:
    """Tabulated internal energy in ``t`` (``rho_hat = t**2``, or ``t**(1/theta)`` unshielded)."""
    if eos.delta > 0:
        return CumulativeTable(_energy_rate(eos), 1e-4 * math.sqrt(eos.delta), math.sqrt(rho_hat_max),
                               ratio=1.01)
    th = eos.law.theta
    return CumulativeTable(_energy_rate(eos), 1e-10**th, rho_hat_max**th, ratio=1.01)


def energy_hat(eos: ShieldedEOS, rho_hat, method="table"):
    """Internal energy ``e^(rho_hat)``; ``"quad"`` delegates to the reference quadrature."""
    if method == "quad":
        return internal_energy_hat(eos, rho_hat)
    rho_hat = np.asarray(rho_hat, dtype=float)
    if np.any(rho_hat < 0):
        raise DomainError("effective density must be >= 0")
    t = np.sqrt(rho_hat) if eos.delta > 0 else rho_hat ** eos.law.theta
    return energy_table(eos)(t)


def _check_rho_hat(rho_hat):
    rho_hat = np.asarray(rho_hat, dtype=float)
    if np.any(~(rho_hat > 0)):
        raise DomainError("entropy pair requires rho_hat > 0")
    return rho_hat


def entropy_fields(eos: ShieldedEOS, rho_hat, m_hat, method="table"):
    """Vectorised ``(eta*, q*)`` for arrays of effective states."""
    rho_hat = _check_rho_hat(rho_hat)
    m_hat = np.asarray(m_hat, dtype=float)
    u = m_hat / rho_hat
    eta = 0.5 * m_hat * u + rho_hat * energy_hat(eos, rho_hat, method)
    q = u * (eta + eos.pressure_offset(rho_hat))
    return eta, q


def eta_star(eos: ShieldedEOS, rho_hat, m_hat, method="quad") -> EntropyEval:
    """Entropy, flux, gradient and Hessian at one effective state."""
    rho_hat = float(_check_rho_hat(rho_hat))
    m_hat = float(m_hat)
    u = m_hat / rho_hat
    e = float(energy_hat(eos, rho_hat, method))
    p = float(eos.pressure_offset(rho_hat))
    c2 = float(eos.c2_offset(rho_hat))
    eta = 0.5 * m_hat * u + rho_hat * e
    grad = np.array([-0.5 * u * u + e + p / rho_hat, u])
    off = -u / rho_hat
    hess = np.array([[u * u / rho_hat + c2 / rho_hat, off], [off, 1.0 / rho_hat]])
    return EntropyEval(eta=eta, q=u * (eta + p), grad=grad, hessian=hess)


def q_star(eos: ShieldedEOS, rho_hat, m_hat, method="quad"):
    return eta_star(eos, rho_hat, m_hat, method).q


def hessian_determinant(eos: ShieldedEOS, rho_hat):
    """Closed form ``Ptilde'(rho_hat + delta) / rho_hat**2``."""
    rho_hat = _check_rho_hat(rho_hat)
    return eos.c2_offset(rho_hat) / rho_hat**2


# ---------------------------------------------------------------------------
# smooth-solution identity


class SimpleWave:
    """Exact smooth 1-simple wave of the inviscid effective system.

    ``w`` is held at ``w0``; ``z`` is transported with ``lambda_1 = u - c~`` from
    the initial density profile, so the solution is exact up to the gradient
    catastrophe time ``breaking_time``.
    """

    def __init__(self, eos: ShieldedEOS, w0=1.0, base=1.0, amplitude=0.2, width=0.3):
        self.eos = eos
        self.w0 = w0
        self.base, self.amplitude, self.width = base, amplitude, width
        xi = np.linspace(-6 * width, 6 * width, 4001)
        slope = self._dlam(xi)
        self.breaking_time = float(-1.0 / slope.min()) if slope.min() < 0 else math.inf

    def _rho_hat0(self, xi):
        return self.base + self.amplitude * np.exp(-(xi / self.width) ** 2)

    def _drho_hat0(self, xi):
        return -2.0 * xi / self.width**2 * self.amplitude * np.exp(-(xi / self.width) ** 2)

    def _state0(self, xi):
        rh = self._rho_hat0(xi)
        u = self.w0 - generator_H(self.eos, rh + self.eos.delta, method="table")
        return rh, u

    def _lam(self, xi):
        rh, u = self._state0(xi)
        return u - np.sqrt(self.eos.c2_offset(rh))

    def _dlam(self, xi):
        eos = self.eos
        rh = self._rho_hat0(xi)
        c = np.sqrt(eos.c2_offset(rh))
        dc = eos.d2(rh + eos.delta) / (2.0 * c)
        return (-c / rh - dc) * self._drho_hat0(xi)

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float) * np.ones_like(x)
        xi = x - self._lam(x) * t
        for _ in range(60):
            res = xi + self._lam(xi) * t - x
            xi_new = xi - res / (1.0 + self._dlam(xi) * t)
            if np.max(np.abs(xi_new - xi)) < 1e-15:
                xi = xi_new
                break
            xi = xi_new
        rh, u = self._state0(xi)
        return rh, rh * u


class TrigManufactured:
    """Smooth non-solution fields with their exact forcing terms.

    ``rho_hat = a + b sin(x - t)``, ``u = c + d cos(x + t)``; ``forcing`` returns
    ``U_t + F(U)_x`` computed analytically.
    """

    def __init__(self, eos: ShieldedEOS, a=1.0, b=0.3, c=0.2, d=0.3):
        self.eos = eos
        self.a, self.b, self.c, self.d = a, b, c, d

    def fields(self, x, t):
        rh = self.a + self.b * np.sin(x - t)
        u = self.c + self.d * np.cos(x + t)
        return rh, u

    def __call__(self, x, t):
        rh, u = self.fields(x, t)
        return rh, rh * u

    def forcing(self, x, t):
        rh, u = self.fields(x, t)
        rh_t, rh_x = -self.b * np.cos(x - t), self.b * np.cos(x - t)
        u_t, u_x = -self.d * np.sin(x + t), -self.d * np.sin(x + t)
        m_t = rh_t * u + rh * u_t
        m_x = rh_x * u + rh * u_x
        s1 = rh_t + m_x
        # (m^2/rho)_x = (rho u^2)_x
        s2 = m_t + rh_x * u * u + 2.0 * rh * u * u_x + self.eos.c2_offset(rh) * rh_x
        return s1, s2


def entropy_pair_residual(eos: ShieldedEOS, solution, n, x_range=(-0.5, 0.5),
                          t_range=(0.0, 0.1), forcing=None, method="table"):
    """Space-time L1 norm of ``d_t eta* + d_x q*`` from centred differences.

    ``solution(x, t)`` returns ``(rho_hat, m_hat)``.  With ``forcing`` the
    residual is taken against ``grad(eta*) . S`` instead of zero.  The time
    step is tied to the space step so both differences are second order.
    """
    x0, x1 = x_range
    t0, t1 = t_range
    h = (x1 - x0) / n
    k = (t1 - t0) / n
    xs = x0 + (np.arange(n) + 0.5) * h
    ts = t0 + (np.arange(n) + 0.5) * k
    X, T = np.meshgrid(xs, ts)

    def eq(x, t):
        return entropy_fields(eos, *solution(x, t), method=method)

    eta_p, _ = eq(X, T + k)
    eta_m, _ = eq(X, T - k)
    _, q_p = eq(X + h, T)
    _, q_m = eq(X - h, T)
    res = (eta_p - eta_m) / (2 * k) + (q_p - q_m) / (2 * h)
    if forcing is not None:
        rh, mh = solution(X, T)
        u = mh / rh
        e = energy_hat(eos, rh, method)
        g1 = -0.5 * u * u + e + eos.pressure_offset(rh) / rh
        s1, s2 = forcing(X, T)
        res = res - (g1 * s1 + u * s2)
    return float(np.sum(np.abs(res)) * h * k)


# ---------------------------------------------------------------------------
# discrete budgets


@dataclass
class EntropyBudget:
    times: np.ndarray          # slab end times
    x: np.ndarray              # cell centres
    cell_production: np.ndarray  # (n_slabs, n_cells), space-time integrated
    total: float
    positive_excess: float
    domain_measure: float

    @property
    def cumulative(self):
        return np.cumsum(self.cell_production.sum(axis=1))

    def bound(self, constant, epsilon, dx):
        return constant * (epsilon + dx) * self.domain_measure


def _interface_flux(q, bc):
    # average of neighbouring cell fluxes; boundary faces take the edge cell value
    if bc == "periodic":
        right = 0.5 * (q + np.roll(q, -1))
        left = np.roll(right, 1)
    else:
        mid = 0.5 * (q[:-1] + q[1:])
        right = np.concatenate([mid, q[-1:]])
        left = np.concatenate([q[:1], mid])
    return left, right


def entropy_budget(trajectory, eos: ShieldedEOS, epsilon, bc=None) -> EntropyBudget:
    """Discrete space-time integral of ``d_t eta* + d_x q*`` per cell.

    ``trajectory`` is a solver :class:`Trajectory` (or any object with
    ``snapshots`` of :class:`GridState`).  Time integration of the flux
    divergence is trapezoidal between consecutive snapshots.
    """
    snaps = list(getattr(trajectory, "snapshots", trajectory))
    if len(snaps) < 2:
        raise ConfigError("entropy budget needs at least two snapshots")
    meta_eos = getattr(trajectory, "eos", eos)
    if meta_eos != eos:
        raise ConfigError("trajectory was produced with a different equation of state")
    meta_eps = getattr(trajectory, "epsilon", epsilon)
    if not math.isclose(meta_eps, epsilon, rel_tol=1e-12, abs_tol=0.0):
        raise ConfigError("trajectory was produced with a different viscosity")
    bc = bc or getattr(trajectory, "bc", "outflow")
    first = snaps[0]
    for s in snaps[1:]:
        if (s.n, s.x0, s.dx) != (first.n, first.x0, first.dx):
            raise ConfigError("snapshots are on mismatched grids")
    dx = first.dx
    eta_q = [entropy_fields(eos, s.rho_hat, s.m_hat) for s in snaps]
    div = []
    for _, q in eta_q:
        left, right = _interface_flux(q, bc)
        div.append(right - left)
    prods = []
    for k in range(len(snaps) - 1):
        dt = snaps[k + 1].t - snaps[k].t
        prods.append((eta_q[k + 1][0] - eta_q[k][0]) * dx + 0.5 * dt * (div[k] + div[k + 1]))
    prods = np.array(prods)
    per_cell = prods.sum(axis=0)
    measure = first.n * dx * (snaps[-1].t - snaps[0].t)
    return EntropyBudget(
        times=np.array([s.t for s in snaps[1:]]),
        x=first.x,
        cell_production=prods,
        total=float(prods.sum()),
        positive_excess=float(np.sum(np.maximum(per_cell, 0.0))),
        domain_measure=measure,
    )


# ---------------------------------------------------------------------------
# boundary scaling diagnostic


@dataclass
class ScalingFit:
    alpha_eta: float
    alpha_psi: float
    ci_eta: tuple
    ci_psi: tuple
    sigma: np.ndarray
    eta: np.ndarray
    psi: np.ndarray

    @property
    def gap(self):
        return self.alpha_psi - self.alpha_eta


def _loglog(x, y, level=0.95):
    fit = stats.linregress(np.log(x), np.log(y))
    half = stats.t.ppf(0.5 + level / 2, len(x) - 2) * fit.stderr
    return float(fit.slope), (float(fit.slope - half), float(fit.slope + half))


def wkb_scaling_fit(eos: ShieldedEOS, rho_hat, u) -> ScalingFit:
    """Log-log slopes of ``eta*`` and ``psi = q* - u eta*`` against ``sigma = w - z``.

    Samples lie on the line ``u = const`` approaching the shield.  The output
    is diagnostic: slopes and 95% confidence intervals, no verdict.
    """
    rho_hat = np.asarray(rho_hat, dtype=float)
    if rho_hat.size < 8:
        raise ConfigError("scaling fit needs at least 8 samples")
    if np.ptp(rho_hat) == 0:
        raise ConfigError("scaling fit rejected: all samples coincide")
    if u == 0:
        raise ConfigError("scaling fit rejected: psi vanishes identically on u = 0")
    rho_hat = np.sort(rho_hat)
    sigma = 2.0 * generator_H(eos, rho_hat + eos.delta)
    eta, q = entropy_fields(eos, rho_hat, rho_hat * u, method="quad")
    psi = q - u * eta
    a_eta, ci_eta = _loglog(sigma, eta)
    a_psi, ci_psi = _loglog(sigma, np.abs(psi))
    return ScalingFit(a_eta, a_psi, ci_eta, ci_psi, sigma, eta, psi)
