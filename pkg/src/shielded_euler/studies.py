"""Parameter-ladder experiments: viscosity and shield limits, weak-form defects, Lu comparison."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ScenarioSpec, preset, preset_names
from .eos import PressureLaw, ShieldedEOS, convexity_residual, lu_pressure_and_pollution
from .errors import ConfigError
from .solver import GridState, Trajectory, run


# ---------------------------------------------------------------------------
# grid transfer and distances


def restrict(values, factor: int):
    """Conservative block average onto a grid ``factor`` times coarser."""
    values = np.asarray(values, dtype=float)
    if factor < 1 or len(values) % factor:
        raise ConfigError(f"cannot restrict {len(values)} cells by a factor {factor}")
    return values.reshape(-1, factor).mean(axis=1)


def _physical(state: GridState):
    # shield-limit candidates: density rho_hat + delta and momentum rho_hat u
    return state.rho_hat + state.delta, state.m_hat


def l1_distance(a: GridState, b: GridState) -> float:
    """``||(rho, m)_a - (rho, m)_b||_L1`` on the coarser of the two grids."""
    if not (math.isclose(a.x0, b.x0) and math.isclose(a.x0 + a.n * a.dx, b.x0 + b.n * b.dx)):
        raise ConfigError("states live on different domains")
    n = min(a.n, b.n)
    out = 0.0
    for qa, qb in zip(_physical(a), _physical(b)):
        ra, rb = restrict(qa, a.n // n), restrict(qb, b.n // n)
        out += float(np.sum(np.abs(ra - rb)))
    return out * (a.n * a.dx) / n


# ---------------------------------------------------------------------------
# reports


@dataclass
class LevelResult:
    parameter: float
    delta: float
    epsilon: float
    n: int
    min_rho: float
    max_w_excess: float
    min_z_excess: float
    aborted: bool
    tainted: bool
    events: list


@dataclass
class StudyReport:
    kind: str
    scenario: str
    ladder: list
    levels: list
    distances: list
    order: float
    defects: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    complete: bool = True
    finals: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("finals")
        return out


def _level_summary(param, traj: Trajectory) -> LevelResult:
    mw = traj.monitor("max_w")
    mz = traj.monitor("min_z")
    sc = traj.scenario
    return LevelResult(param, sc.delta, traj.epsilon, sc.n, traj.min_rho,
                       float(mw.max() - mw[0]), float(mz[0] - mz.min()),
                       traj.aborted, traj.tainted, traj.events)


def _run_level(spec: ScenarioSpec) -> Trajectory:
    return run(spec.build_eos(), spec)


def _run_all(specs, workers):
    if workers and workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_level, specs))
    return [_run_level(s) for s in specs]


def _fit_order(params, dists):
    pairs = [(p, d) for p, d in zip(params, dists) if p > 0 and d > 0]
    if len(pairs) < 2:
        return math.nan
    x, y = np.log([p for p, _ in pairs]), np.log([d for _, d in pairs])
    return float(np.polyfit(x, y, 1)[0])


def _check_ladder(ladder):
    ladder = [float(v) for v in ladder]
    if not ladder:
        raise ConfigError("empty ladder")
    if any(a <= b for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("ladder must be strictly decreasing")
    return ladder


def _assemble(kind, scenario, ladder, trajs, workers=None):
    levels = [_level_summary(p, t) for p, t in zip(ladder, trajs)]
    complete = not any(lv.aborted for lv in levels)
    finals = [t.final for t in trajs]
    dists = [l1_distance(a, b) for a, b in zip(finals, finals[1:])] if complete else []
    order = _fit_order(ladder[1:], dists)
    verdicts = {
        "complete": complete,
        "untainted": not any(lv.tainted for lv in levels),
        "distances_decreasing": bool(all(b < a for a, b in zip(dists, dists[1:]))),
        "shield_held": bool(all(lv.min_rho >= lv.delta - 1e-12 for lv in levels)),
    }
    return StudyReport(kind, scenario.name, list(ladder), levels, dists, order,
                       verdicts=verdicts, complete=complete, finals=finals)


def eps_study(scenario: ScenarioSpec, eps_ladder, workers=None) -> StudyReport:
    """Viscosity ladder at fixed shield; successive distances should shrink."""
    ladder = _check_ladder(eps_ladder)
    if not scenario.delta > 0:
        raise ConfigError("viscosity study needs a fixed positive shield")
    specs = [scenario.with_updates(epsilon=e) for e in ladder]
    return _assemble("eps", scenario, ladder, _run_all(specs, workers))


def delta_study(scenario: ScenarioSpec, delta_ladder, coupling=None, workers=None,
                weak_form=True) -> StudyReport:
    """Shield ladder with ``epsilon = coupling * delta`` (scenario default when ``None``)."""
    ladder = _check_ladder(delta_ladder)
    c = scenario.eps_coupling if coupling is None else coupling
    if weak_form and scenario.output.snapshot_interval is None and scenario.t_final > 0:
        scenario = scenario.with_updates(**{"output.snapshot_interval": scenario.t_final / 40})
    specs = [scenario.with_updates(delta=d, epsilon=c * d) for d in ladder]
    trajs = _run_all(specs, workers)
    report = _assemble("delta", scenario, ladder, trajs)
    if weak_form and report.complete:
        law = scenario.law.build()
        report.defects = [weak_form_residual(t, law)["defect"] for t in trajs]
        report.verdicts["defects_decreasing"] = bool(
            all(b < a for a, b in zip(report.defects, report.defects[1:])))
    return report


# ---------------------------------------------------------------------------
# weak form of the unshielded system


def _bump(s):
    # C2 bump (1 - s^2)^3 on |s| < 1, its derivative and antiderivative
    s = np.clip(s, -1.0, 1.0)
    v = (1 - s * s) ** 3
    dv = -6 * s * (1 - s * s) ** 2
    iv = s - s**3 + 0.6 * s**5 - s**7 / 7
    return v, dv, iv


_GL5 = np.polynomial.legendre.leggauss(5)


def weak_form_residual(trajectory, law: PressureLaw, lattice=4, x_box=None, t_box=None):
    """Largest weak-form defect of the unshielded Euler equations over a bump lattice.

    The candidate pair is ``(rho, m) = (rho_hat + delta, rho_hat u)`` with fluxes
    ``(m, m**2/rho + P(rho))``.  Test functions are products of ``(1 - s**2)**3``
    bumps centred on a ``lattice x lattice`` grid filling ``x_box x t_box``.
    Cell data are integrated exactly against the test functions in space and
    interpolated linearly between snapshots in time, with 5-point
    Gauss-Legendre on every piece between snapshot times and support edges.
    """
    snaps = list(getattr(trajectory, "snapshots", trajectory))
    if len(snaps) < 3:
        raise ConfigError("weak-form test needs at least three snapshots")
    first = snaps[0]
    dom = (first.x0, first.x0 + first.n * first.dx)
    times = np.array([s.t for s in snaps])
    x_box = x_box or (dom[0] + 0.1 * (dom[1] - dom[0]), dom[1] - 0.1 * (dom[1] - dom[0]))
    t_box = t_box or (times[0], times[-1])
    if x_box[0] < dom[0] or x_box[1] > dom[1] or t_box[0] < times[0] or t_box[1] > times[-1]:
        raise ConfigError("test-function support exceeds the snapshot domain")
    hx = (x_box[1] - x_box[0]) / (lattice + 1)
    ht = (t_box[1] - t_box[0]) / (lattice + 1)
    xc = x_box[0] + hx * np.arange(1, lattice + 1)
    tc = t_box[0] + ht * np.arange(1, lattice + 1)
    edges = first.x0 + first.dx * np.arange(first.n + 1)
    rho = np.array([s.rho_hat + s.delta for s in snaps])
    m = np.array([s.m_hat for s in snaps])
    fields = (rho, m, m, m * m / rho + law.evaluate(rho))  # (q_mass, f_mass, q_mom, f_mom)

    # space: exact cell integrals of b and b' against piecewise-constant data
    space_b = np.empty((lattice, first.n))
    space_db = np.empty((lattice, first.n))
    for i, c in enumerate(xc):
        v, _, iv = _bump((edges - c) / hx)
        space_b[i] = hx * np.diff(iv)
        space_db[i] = np.diff(v)
    proj = [fld @ space_db.T if k % 2 else fld @ space_b.T for k, fld in enumerate(fields)]
    # proj[k][snapshot, i]: spatial integral for bump i; linear in time between snapshots

    defects = np.zeros((2, lattice, lattice))
    for j, c_t in enumerate(tc):
        lo, hi = c_t - ht, c_t + ht
        cuts = np.unique(np.concatenate([[lo, hi], times[(times > lo) & (times < hi)]]))
        acc = np.zeros((2, lattice))
        for a, b in zip(cuts[:-1], cuts[1:]):
            tau = 0.5 * (a + b) + 0.5 * (b - a) * _GL5[0]
            wts = 0.5 * (b - a) * _GL5[1]
            bt, dbt, _ = _bump((tau - c_t) / ht)
            dbt = dbt / ht
            vals = [np.array([np.interp(tau, times, p[:, i]) for i in range(lattice)])
                    for p in proj]
            acc[0] += (vals[0] * dbt + vals[1] * bt) @ wts
            acc[1] += (vals[2] * dbt + vals[3] * bt) @ wts
        defects[:, :, j] = acc
    return {"defect": float(np.abs(defects).max()),
            "mass": float(np.abs(defects[0]).max()),
            "momentum": float(np.abs(defects[1]).max())}


# ---------------------------------------------------------------------------
# comparison with the translated-flux regularisation


def lu_comparison(law: PressureLaw, delta, rho):
    """Tabulate our convexity residual against the comparison indicator ``G_Lu``.

    Returns per-point arrays and the detected interval where ``G_Lu < 0``
    (``None`` when the indicator is non-negative on the grid).
    """
    rho = np.asarray(rho, dtype=float)
    if delta > 0 and np.any(rho <= delta):
        raise ConfigError("density grid must lie above the shield")
    if delta == 0:
        ours = np.zeros_like(rho)
        g_lu = law.nonlinearity(rho)
        p_lu = law.evaluate(rho)
    else:
        ours = convexity_residual(ShieldedEOS(law, delta), rho)
        p_lu, g_lu = lu_pressure_and_pollution(law, delta, rho)
    neg = g_lu < 0
    interval = (float(rho[neg].min()), float(rho[neg].max())) if np.any(neg) else None
    return {"rho": rho, "our_residual": ours, "g_ours": law.nonlinearity(rho),
            "g_lu": g_lu, "p_lu": p_lu, "negative_interval": interval}


def scenario_library() -> dict:
    """All named presets keyed by name."""
    return {name: preset(name) for name in preset_names()}
