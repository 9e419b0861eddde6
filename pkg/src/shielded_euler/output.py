"""CSV/JSON writers and the run manifest.  Floats are written in shortest round-trip form."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .config import FORMAT_VERSION
from .invariants import generator_H
from .solver import MONITOR_FIELDS

SNAPSHOT_FIELDS = ("t", "x", "rho", "u", "rho_hat", "m_hat", "w", "z")
BUDGET_FIELDS = ("t", "x", "cell_production", "cumulative")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open() as fh:
        rd = csv.reader(fh)
        header = next(rd)
        cols = list(zip(*[[float(v) for v in row] for row in rd]))
    return {h: np.array(c) for h, c in zip(header, cols)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def snapshot_rows(trajectory):
    eos = trajectory.eos
    for s in trajectory.snapshots:
        rho = s.rho_hat + s.delta
        u = s.u
        h = generator_H(eos, rho, method="table")
        for row in zip(s.x, rho, u, s.rho_hat, s.m_hat, u + h, u - h):
            yield (s.t,) + row


def write_snapshots(path, trajectory) -> Path:
    return write_csv(path, SNAPSHOT_FIELDS, snapshot_rows(trajectory))


def write_monitors(path, trajectory) -> Path:
    return write_csv(path, MONITOR_FIELDS, trajectory.monitors)


def write_budget(path, budget) -> Path:
    cum = np.cumsum(budget.cell_production, axis=0)

    def rows():
        for k, t in enumerate(budget.times):
            for x, p, c in zip(budget.x, budget.cell_production[k], cum[k]):
                yield t, x, p, c

    return write_csv(path, BUDGET_FIELDS, rows())


def config_hash(config: dict) -> str:
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_manifest(outdir, command, config: dict, artifacts) -> Path:
    outdir = Path(outdir)
    entries = []
    for p in artifacts:
        p = Path(p)
        entries.append({"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()})
    manifest = {"format_version": FORMAT_VERSION, "command": command,
                "config_sha256": config_hash(config), "config": config, "artifacts": entries}
    return write_json(outdir / "manifest.json", manifest)
