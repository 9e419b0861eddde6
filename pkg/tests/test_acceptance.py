"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (summary printed at the end of the session) or directly with
``python tests/test_acceptance.py``.
"""

import os
import time

import numpy as np
import pytest

from shielded_euler.config import preset, preset_names
from shielded_euler.entropy import SimpleWave, TrigManufactured, entropy_budget, \
    entropy_pair_residual, eta_star
from shielded_euler.eos import ShieldedEOS, convexity_residual, epd_lambda_eff, polytropic, \
    shipped_laws, stiffness, vacuum_derivative_ratio
from shielded_euler.invariants import h_gap_study
from shielded_euler.solver import dissipation_K, run
from shielded_euler.studies import delta_study, lu_comparison

DELTAS = (1e-3, 1e-1, 0.5)
WORKERS = min(4, os.cpu_count() or 1)


def _grid(delta, n=256):
    return delta * (1.0 + np.geomspace(1e-6, 1e4, n))


def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    for law in shipped_laws():
        for d in DELTAS:
            rho = _grid(d)
            res = convexity_residual(ShieldedEOS(law, d), rho)
            worst = max(worst, float(np.max(np.abs(res) / law.nonlinearity(rho))))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-12 and elapsed < 1.0, f"max rel residual {worst:.2e}, {elapsed:.3f}s"


def criterion_2():
    # rounding of g(rho) - g(delta) is relative to the larger of the two stiffnesses
    worst = 0.0
    for law in shipped_laws():
        for d in DELTAS:
            eos = ShieldedEOS(law, d)
            rho = _grid(d)
            g = stiffness(law, rho)
            shift = rho * rho * eos.c2(rho) - g
            worst = max(worst, float(np.max(np.abs(shift + eos.g_delta)
                                            / np.maximum(g, eos.g_delta))))
    return worst <= 1e-12, f"max rel deviation from -delta^2 P'(delta) {worst:.2e}"


def criterion_3():
    exact = True
    gap = 0.0
    for law in shipped_laws():
        for d in DELTAS:
            eos = ShieldedEOS(law, d)
            exact &= float(eos.c2(d)) == 0.0
            h = d * np.geomspace(1e-16, 1e-8, 64)
            gap = max(gap, float(np.max(2.0 * np.sqrt(eos.c2_offset(h)))))
    return exact and gap < 1e-3, f"c2(delta)==0: {exact}, max lambda2-lambda1 {gap:.2e}"


def criterion_4():
    worst = 0.0
    for law in shipped_laws():
        for d in DELTAS:
            worst = max(worst, abs(float(epd_lambda_eff(ShieldedEOS(law, d), d * (1 + 1e-6))) - 0.5))
    return worst < 1e-3, f"max |lambda - 1/2| {worst:.2e}"


def criterion_5():
    t0 = time.perf_counter()
    ok = True
    parts = []
    rho = np.geomspace(1e-6, 10.0, 400)
    for law in (polytropic(1.0, 1.4), polytropic(1.0, 2.0), polytropic(1 / 3, 3.0)):
        study = h_gap_study(law, [1e-2, 1e-3, 1e-4, 1e-5], rho)
        ok &= study.passed
        parts.append(f"gamma={law.gamma:g}: {study.order:.3f}>={study.required:.2f}")
    elapsed = time.perf_counter() - t0
    return ok and elapsed < 30, "; ".join(parts) + f", {elapsed:.1f}s"


def criterion_6():
    rng = np.random.default_rng(20240601)
    worst_h = worst_d = 0.0
    laws = shipped_laws()
    for k in range(100):
        eos = ShieldedEOS(laws[k % 4], (0.0, 1e-3, 0.1, 0.5)[(k // 4) % 4])
        rh = rng.uniform(0.05, 3.0)
        m = rh * rng.uniform(-2.0, 2.0)
        ev = eta_star(eos, rh, m)
        f = lambda a, b: eta_star(eos, a, b).eta  # noqa: E731
        h1, h2 = 1e-4 * rh, 1e-4 * max(abs(m), rh)
        fd = np.empty((2, 2))
        fd[0, 0] = (f(rh + h1, m) - 2 * f(rh, m) + f(rh - h1, m)) / h1**2
        fd[1, 1] = (f(rh, m + h2) - 2 * f(rh, m) + f(rh, m - h2)) / h2**2
        fd[0, 1] = fd[1, 0] = (f(rh + h1, m + h2) - f(rh + h1, m - h2) - f(rh - h1, m + h2)
                               + f(rh - h1, m - h2)) / (4 * h1 * h2)
        worst_h = max(worst_h, float(np.max(np.abs(fd - ev.hessian)) / np.max(np.abs(ev.hessian))))
        target = float(eos.c2_offset(rh)) / rh**2
        worst_d = max(worst_d, abs(np.linalg.det(ev.hessian) - target) / target)
    return worst_h < 1e-6 and worst_d < 1e-10, f"FD rel {worst_h:.2e}, det rel {worst_d:.2e}"


def criterion_7():
    eos = ShieldedEOS(polytropic(1.0, 2.0), 0.5)
    wave = SimpleWave(eos)
    man = TrigManufactured(eos)
    ns = (40, 80, 160)
    exact = [entropy_pair_residual(eos, wave, n, (-1, 1), (0, 0.5 * wave.breaking_time)) for n in ns]
    forced = [entropy_pair_residual(eos, man, n, (0, 2 * np.pi), (0, 1), forcing=man.forcing)
              for n in ns]
    orders = [float(np.log2(a / b)) for r in (exact, forced) for a, b in zip(r, r[1:])]
    return min(orders) >= 1.8, "orders " + ", ".join(f"{o:.3f}" for o in orders)


def criterion_8():
    ok = True
    parts = []
    for d in (0.04, 0.02, 0.01):
        sc = preset("vacuum_riemann").with_updates(delta=d, n=1024, t_final=0.2)
        t0 = time.perf_counter()
        traj = run(sc.build_eos(), sc)
        elapsed = time.perf_counter() - t0
        aborts = sum(e["kind"] == "E_POSITIVITY" for e in traj.events)
        ok &= traj.min_rho >= d - 1e-12 and aborts == 0 and not traj.aborted and elapsed < 60
        parts.append(f"delta={d:g}: min rho - delta {traj.min_rho - d:.2e}, aborts {aborts}, "
                     f"{elapsed:.1f}s")
    return ok, "; ".join(parts)


def criterion_9():
    ok = True
    parts = []
    for name in preset_names():
        sc = preset(name).with_updates(**{"output.snapshot_interval": preset(name).t_final / 20})
        eos = sc.build_eos()
        traj = run(eos, sc)
        slack = sc.w_slack * (sc.eps + sc.dx)
        w, z = traj.monitor("max_w"), traj.monitor("min_z")
        over = max(float(w.max() - w[0]), float(z[0] - z.min()))
        k_pos = all(np.all(dissipation_K(eos, s.rho[s.rho_hat > 0]) > 0) for s in traj.snapshots)
        ok &= over <= slack and k_pos and not traj.aborted
        parts.append(f"{name}: excursion {over:.1e} <= {slack:.1e}, K>0 {k_pos}")
    return ok, "; ".join(parts)


SHOCK_C = 1.0


def criterion_10():
    base = preset("shock_tube").with_updates(delta=0.01, **{"output.snapshot_interval": 0.2 / 400})
    excess = []
    ok = True
    parts = []
    for eps in (0.004, 0.002, 0.001):
        sc = base.with_updates(epsilon=eps)
        eos = sc.build_eos()
        b = entropy_budget(run(eos, sc), eos, eps)
        bound = b.bound(SHOCK_C, eps, sc.dx)
        ok &= b.total <= bound
        excess.append(b.positive_excess)
        parts.append(f"eps={eps:g}: total {b.total:.3e} <= {bound:.2e}, excess {b.positive_excess:.3e}")
    ok &= all(b < a for a, b in zip(excess, excess[1:]))
    return ok, f"C={SHOCK_C}; " + "; ".join(parts)


def criterion_11():
    t0 = time.perf_counter()
    rep = delta_study(preset("vacuum_riemann"), [0.04, 0.02, 0.01, 0.005], workers=WORKERS)
    elapsed = time.perf_counter() - t0
    d, w = rep.distances, rep.defects
    ok = (rep.complete and len(d) == 3 and all(b < a for a, b in zip(d, d[1:]))
          and all(b < a for a, b in zip(w, w[1:])) and rep.verdicts["shield_held"]
          and elapsed < 300)
    return ok, ("distances " + ", ".join(f"{v:.4f}" for v in d) + "; defects "
                + ", ".join(f"{v:.2e}" for v in w) + f"; {elapsed:.1f}s")


def criterion_12():
    law = polytropic(1.0, 2.0)
    ok = True
    parts = []
    for d in (0.01, 0.1):
        rho = np.linspace(2 * d, 4 * d, 401)
        tab = lu_comparison(law, d, rho)
        step = rho[1] - rho[0]
        interval = tab["negative_interval"]
        expected = 6 * rho - 20 * d < 0
        match = (interval is not None and abs(interval[0] - 2 * d) <= step
                 and abs(interval[1] - 10 * d / 3) <= step
                 and np.array_equal(tab["g_lu"] < 0, expected))
        ours = float(np.max(np.abs(tab["our_residual"])))
        ok &= match and ours <= 1e-12
        parts.append(f"delta={d:g}: G_Lu<0 on [{interval[0]:.4f}, {interval[1]:.4f}], "
                     f"ours {ours:.1e}")
    return ok, "; ".join(parts)


def criterion_13():
    ok = True
    parts = []
    rho = np.geomspace(1e-10, 1e-4, 40)
    for law in (polytropic(1.0, 1.4), polytropic(1.0, 2.0), polytropic(1 / 3, 3.0)):
        slope = float(np.polyfit(np.log(rho), np.log(vacuum_derivative_ratio(law, rho)), 1)[0])
        ok &= abs(slope - law.theta) <= 0.05
        parts.append(f"gamma={law.gamma:g}: {slope:.4f} vs {law.theta:.2f}")
    return ok, "; ".join(parts)


CRITERIA = {
    1: ("exact convexity inheritance", criterion_1),
    2: ("stiffness translation constant", criterion_2),
    3: ("boundary degeneracy", criterion_3),
    4: ("EPD index at the shield", criterion_4),
    5: ("generator convergence rate", criterion_5),
    6: ("entropy Hessian certificate", criterion_6),
    7: ("smooth entropy identity", criterion_7),
    8: ("shield preservation", criterion_8),
    9: ("Riemann-invariant maximum principle", criterion_9),
    10: ("entropy admissibility", criterion_10),
    11: ("shield-limit Cauchy convergence", criterion_11),
    12: ("comparison convexity defect", criterion_12),
    13: ("vacuum derivative-ratio exponent", criterion_13),
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    acceptance(number, title, ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for number in sorted(CRITERIA):
        title, fn = CRITERIA[number]
        ok, detail = fn()
        failures += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}", flush=True)
    raise SystemExit(1 if failures else 0)
