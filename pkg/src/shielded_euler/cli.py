"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 runtime abort (positivity or
non-finite state).  Output goes to ``--output-dir``, else ``$SHIELDED_EULER_OUTPUT``,
else ``./shielded_euler_output``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import output
from .config import load_spec, parse_config, preset
from .entropy import entropy_budget, wkb_scaling_fit
from .eos import (PressureLaw, ShieldedEOS, check_assumptions, convexity_residual,
                  epd_lambda_eff, validate_law)
from .errors import ConfigError, DomainError, NonFiniteState, PositivityViolation, ShieldedEulerError
from .invariants import generator_H, to_invariants
from .solver import run
from .studies import delta_study, eps_study, lu_comparison

log = logging.getLogger("shielded_euler")

OUTPUT_ENV = "SHIELDED_EULER_OUTPUT"

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 1, 2


def _output_dir(args, sub=None) -> Path:
    root = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or "shielded_euler_output")
    path = root / sub if sub else root
    path.mkdir(parents=True, exist_ok=True)
    return path


def _law_args(p, delta=0.5):
    p.add_argument("--law", choices=["polytropic", "nonpolytropic"], default="polytropic")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=delta)


def _law(args) -> PressureLaw:
    beta = args.beta if args.law == "nonpolytropic" else 0.0
    return validate_law(PressureLaw(args.law, args.kappa, args.gamma, beta))


def _scenario_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON file")
    src.add_argument("--preset", help="named preset")
    p.add_argument("--delta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--t-final", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--flux", choices=["rusanov", "lax_friedrichs"])
    p.add_argument("--snapshot-interval", type=float)


def _scenario(args):
    spec = parse_config(args.config) if args.config else preset(args.preset)
    overrides = {"delta": args.delta, "epsilon": args.epsilon, "n": args.n,
                 "t_final": args.t_final, "scheme.cfl": args.cfl, "scheme.flux": args.flux,
                 "output.snapshot_interval": args.snapshot_interval}
    data = spec.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            outer, inner = key.split(".")
            data[outer][inner] = value
        else:
            data[key] = value
    return load_spec(data)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_eos_check(args):
    law = _law(args)
    eos = ShieldedEOS(law, args.delta)
    report = check_assumptions(law)
    rho = args.delta + np.geomspace(1e-3, 1e2, args.points) * max(args.delta, 1.0)
    res = convexity_residual(eos, rho)
    g = law.nonlinearity(rho)
    lam = epd_lambda_eff(eos, rho) if args.delta > 0 else np.full_like(rho, np.nan)
    rows = list(zip(rho, eos.pressure(rho), eos.c2(rho), res, g, lam))
    header = ("rho", "p_shielded", "c2_shielded", "convexity_residual", "nonlinearity", "epd_index")
    print(" ".join(f"{h:>20s}" for h in header))
    for r in rows:
        print(" ".join(f"{v:20.12g}" for v in r))
    outdir = _output_dir(args, "eos_check")
    art = [output.write_csv(outdir / "eos_check.csv", header, rows)]
    output.write_manifest(outdir, "eos-check", {"law": law.to_dict(), "delta": args.delta}, art)
    ok = bool(np.all(np.abs(res) <= 1e-12 * g))
    print(f"assumptions: {report}")
    print(f"max relative residual: {float(np.max(np.abs(res) / g)):.3e} ({'ok' if ok else 'FAIL'})")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_invariants(args):
    law = _law(args)
    eos = ShieldedEOS(law, args.delta)
    rho = np.asarray(_floats(args.rho))
    u = np.full_like(rho, args.u)
    coords = to_invariants(eos, rho, u)
    h = generator_H(eos, rho)
    header = ("rho", "u", "H", "z", "w")
    rows = list(zip(rho, u, np.atleast_1d(h), np.atleast_1d(coords.z), np.atleast_1d(coords.w)))
    for r in rows:
        print(" ".join(output.fmt(v) for v in r))
    outdir = _output_dir(args, "invariants")
    art = [output.write_csv(outdir / "invariants.csv", header, rows)]
    output.write_manifest(outdir, "invariants",
                          {"law": law.to_dict(), "delta": args.delta, "rho": rho, "u": args.u}, art)
    return EXIT_OK


def cmd_simulate(args):
    spec = _scenario(args)
    eos = spec.build_eos()
    traj = run(eos, spec)
    outdir = _output_dir(args, spec.name)
    art = [output.write_snapshots(outdir / "snapshots.csv", traj),
           output.write_monitors(outdir / "monitors.csv", traj)]
    if len(traj.snapshots) >= 2 and not traj.aborted:
        budget = entropy_budget(traj, eos, spec.eps)
        art.append(output.write_budget(outdir / "entropy_budget.csv", budget))
        print(f"entropy production total {budget.total!r}, positive excess {budget.positive_excess!r}")
    art.append(output.write_json(outdir / "events.json",
                                 {"events": traj.events, "tainted": traj.tainted,
                                  "aborted": traj.aborted}))
    output.write_manifest(outdir, "simulate", spec.model_dump(), art)
    print(f"{spec.name}: t={traj.final.t!r} min rho={traj.min_rho!r} "
          f"snapshots={len(traj.snapshots)} -> {outdir}")
    if traj.aborted:
        print(f"run aborted: {traj.events[-1]['message']}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def _write_study(args, report, spec, command):
    outdir = _output_dir(args, f"{spec.name}_{report.kind}_study")
    art = [output.write_json(outdir / "report.json", report.to_dict())]
    lv_header = ("parameter", "delta", "epsilon", "n", "min_rho", "max_w_excess",
                 "min_z_excess", "distance_to_next", "weak_form_defect")
    dists = report.distances + [float("nan")] * (len(report.levels) - len(report.distances))
    defects = report.defects or [float("nan")] * len(report.levels)
    rows = [(lv.parameter, lv.delta, lv.epsilon, lv.n, lv.min_rho, lv.max_w_excess,
             lv.min_z_excess, d, w) for lv, d, w in zip(report.levels, dists, defects)]
    art.append(output.write_csv(outdir / "levels.csv", lv_header, rows))
    if report.finals:
        x = report.finals[0].x
        cols = [s.rho_hat + s.delta for s in report.finals]
        if all(len(c) == len(x) for c in cols):
            header = ("x",) + tuple(f"rho_level{k}" for k in range(len(cols)))
            art.append(output.write_csv(outdir / "overlay.csv", header, zip(x, *cols)))
    output.write_manifest(outdir, command, {"scenario": spec.model_dump(),
                                            "ladder": report.ladder}, art)
    for lv, d in zip(report.levels, dists):
        print(f"{report.kind}={lv.parameter!r} min_rho={lv.min_rho!r} distance={d!r}")
    print(f"order={report.order!r} verdicts={report.verdicts}")
    if not report.complete:
        return EXIT_ABORT
    return EXIT_OK if all(report.verdicts.values()) else EXIT_INVALID


def cmd_study_eps(args):
    spec = _scenario(args)
    report = eps_study(spec, _floats(args.ladder), workers=args.workers)
    return _write_study(args, report, spec, "study-eps")


def cmd_study_delta(args):
    spec = _scenario(args)
    report = delta_study(spec, _floats(args.ladder), coupling=args.coupling,
                         workers=args.workers)
    return _write_study(args, report, spec, "study-delta")


def cmd_lu_compare(args):
    law = _law(args)
    if args.delta <= 0:
        raise ConfigError("comparison needs a positive shield")
    rho = np.linspace(2 * args.delta, args.rho_max_factor * args.delta, args.points)
    table = lu_comparison(law, args.delta, rho)
    header = ("rho", "our_residual", "g_ours", "g_lu", "p_lu")
    rows = list(zip(*(table[h] for h in header)))
    outdir = _output_dir(args, "lu_compare")
    art = [output.write_csv(outdir / "lu_compare.csv", header, rows)]
    output.write_manifest(outdir, "lu-compare", {"law": law.to_dict(), "delta": args.delta,
                                                 "points": args.points}, art)
    worst = float(np.max(np.abs(table["our_residual"])))
    print(f"our max |residual| = {worst!r}")
    print(f"G_Lu < 0 on {table['negative_interval']}")
    return EXIT_OK


def cmd_scaling_fit(args):
    law = _law(args)
    eos = ShieldedEOS(law, args.delta)
    rho_hat = np.geomspace(args.rho_hat_min, args.rho_hat_max, args.samples)
    fit = wkb_scaling_fit(eos, rho_hat, args.u)
    result = {"alpha_eta": fit.alpha_eta, "alpha_psi": fit.alpha_psi, "ci_eta": fit.ci_eta,
              "ci_psi": fit.ci_psi, "gap": fit.gap}
    outdir = _output_dir(args, "scaling_fit")
    art = [output.write_json(outdir / "scaling_fit.json", result),
           output.write_csv(outdir / "scaling_samples.csv", ("sigma", "eta", "psi"),
                            zip(fit.sigma, fit.eta, fit.psi))]
    output.write_manifest(outdir, "scaling-fit", {"law": law.to_dict(), "delta": args.delta,
                                                  "u": args.u, "samples": args.samples}, art)
    for k, v in result.items():
        print(f"{k}: {v}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shielded-euler",
                                     description="Shielded isentropic Euler toolkit")
    parser.add_argument("--output-dir", help=f"output root (overrides ${OUTPUT_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eos-check", help="tabulate shielded pressure and convexity residual")
    _law_args(p)
    p.add_argument("--points", type=int, default=16)
    p.set_defaults(func=cmd_eos_check)

    p = sub.add_parser("invariants", help="Riemann invariants at given states")
    _law_args(p)
    p.add_argument("--rho", required=True, help="comma-separated densities")
    p.add_argument("--u", type=float, default=0.0)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("simulate", help="run one scenario")
    _scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("study-eps", help="viscosity ladder at fixed shield")
    _scenario_args(p)
    p.add_argument("--ladder", required=True, help="comma-separated decreasing viscosities")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_study_eps)

    p = sub.add_parser("study-delta", help="shield ladder with coupled viscosity")
    _scenario_args(p)
    p.add_argument("--ladder", required=True, help="comma-separated decreasing shields")
    p.add_argument("--coupling", type=float, help="epsilon = coupling * delta")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_study_delta)

    p = sub.add_parser("lu-compare", help="convexity of the translated-flux construction")
    _law_args(p, delta=0.1)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--rho-max-factor", type=float, default=4.0)
    p.set_defaults(func=cmd_lu_compare)

    p = sub.add_parser("scaling-fit", help="boundary exponents of the entropy pair")
    _law_args(p, delta=0.0)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--rho-hat-min", type=float, default=1e-8)
    p.add_argument("--rho-hat-max", type=float, default=1e-4)
    p.set_defaults(func=cmd_scaling_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PositivityViolation, NonFiniteState) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, DomainError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ShieldedEulerError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
