"""File formats: curve JSON, trajectory directories, diagnostics CSV.

A trajectory directory contains manifest.json (controls, extinction
estimate, stop reason), frames.csv (one row per stored frame: t followed by
the flattened vertex coordinates) and diagnostics.csv (one row per frame of
named scalar diagnostics).  Floats are written with shortest round-trip
repr so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .curves import Curve
from .flow import Trajectory


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_curve_json(path, curve: Curve, meta: dict | None = None) -> None:
    payload = {
        "dim": curve.dim,
        "points": [[float(c) for c in row] for row in curve.points],
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_curve_json(path) -> Curve:
    with open(path) as fh:
        payload = json.load(fh)
    pts = np.asarray(payload["points"], dtype=float)
    if pts.shape[1] != payload["dim"]:
        raise ValueError(f"dim field {payload['dim']} does not match points")
    return Curve(pts)


def write_csv(path, columns: dict) -> None:
    names = list(columns)
    rows = len(next(iter(columns.values())))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(columns[name][i]) for name in names) + "\n")


def read_csv(path) -> dict:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, j] for j, name in enumerate(header)}


def write_trajectory_dir(out_dir, traj: Trajectory, spec=None,
                         diag_columns: dict | None = None,
                         verdicts: dict | None = None,
                         barrier_report: dict | None = None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    dim = traj.curves[0].dim
    n = traj.curves[0].n_vertices
    manifest = {
        "dim": dim,
        "n_points": n,
        "n_frames": len(traj.times),
        "T_estimate": traj.T_estimate,
        "stopped_reason": traj.stopped_reason,
        "initial_diameter": traj.initial_diameter,
    }
    if spec is not None:
        manifest["scenario"] = {
            "kind": spec.kind,
            "params": spec.params,
            "controls": spec.controls,
            "analyses": list(spec.analyses),
        }
    if verdicts is not None:
        manifest["verdicts"] = verdicts
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")

    coord_names = [f"c{j}" for j in range(n * dim)]
    frame_cols: dict = {"t": traj.times}
    flat = np.array([c.points.reshape(-1) for c in traj.curves])
    for j, name in enumerate(coord_names):
        frame_cols[name] = flat[:, j]
    write_csv(os.path.join(out_dir, "frames.csv"), frame_cols)

    if diag_columns is not None:
        write_csv(os.path.join(out_dir, "diagnostics.csv"), diag_columns)
    if barrier_report is not None:
        with open(os.path.join(out_dir, "barrier_report.json"), "w") as fh:
            json.dump(barrier_report, fh, indent=1, sort_keys=True)
            fh.write("\n")


def read_trajectory_dir(out_dir) -> Trajectory:
    with open(os.path.join(out_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    frames = read_csv(os.path.join(out_dir, "frames.csv"))
    times = frames["t"]
    dim = manifest["dim"]
    n = manifest["n_points"]
    curves = []
    flat = np.column_stack([frames[f"c{j}"] for j in range(n * dim)])
    for row in flat:
        curves.append(Curve(row.reshape(n, dim)))
    return Trajectory(
        times=times,
        curves=curves,
        frame_steps=np.arange(len(times)),
        dt_history=np.array([]),
        T_estimate=manifest.get("T_estimate"),
        stopped_reason=manifest.get("stopped_reason", "unknown"),
        initial_diameter=manifest.get("initial_diameter", curves[0].diameter()),
    )


def write_mode_series_csv(path, evo) -> None:
    write_csv(path, {
        "tau": evo.tau,
        "c_minus1": evo.c_minus1,
        "c_0": evo.c_0,
        "tail_norm": evo.tail_norm,
        "total_norm": evo.total_norm,
    })
