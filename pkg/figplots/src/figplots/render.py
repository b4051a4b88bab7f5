"""Render snapshot and diagnostic panels from a trajectory directory.

The input directory layout is the flow solver's batch output: manifest.json
with {dim, n_points, ...}, frames.csv with a ``t`` column followed by the
flattened vertex coordinates, and diagnostics.csv with named per-frame
columns.  Rendering never recomputes a diagnostic: every plotted number is
read from those files.  Output images are deterministic: fixed canvas,
fixed color cycle, no timestamps in the metadata.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PANEL_KINDS = ("snapshot3d", "projection_xy", "projection_xz", "timeseries")
COLOR_CYCLE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
PNG_METADATA = {"Software": "figplots"}


@dataclass(frozen=True)
class PlotSpec:
    """Which panels to draw from which trajectory directory."""

    input_dir: str
    panels: tuple
    out_path: str

    def __post_init__(self):
        if not self.panels:
            raise ValueError("at least one panel is required")
        for p in self.panels:
            if p.get("kind") not in PANEL_KINDS:
                raise ValueError(f"unknown panel kind {p.get('kind')!r}")


def load_spec(path) -> PlotSpec:
    with open(path) as fh:
        raw = json.load(fh)
    return PlotSpec(
        input_dir=raw["input_dir"],
        panels=tuple(raw["panels"]),
        out_path=raw["out_path"],
    )


def _read_csv(path) -> dict:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, j] for j, name in enumerate(header)}


@dataclass(frozen=True)
class TrajectoryData:
    dim: int
    times: np.ndarray
    frames: np.ndarray          # (n_frames, n_points, dim)
    diagnostics: dict = field(default_factory=dict)


def load_trajectory(input_dir) -> TrajectoryData:
    manifest_path = os.path.join(input_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise ValueError(f"missing manifest.json in {input_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    dim = int(manifest["dim"])
    n = int(manifest["n_points"])
    frames_tab = _read_csv(os.path.join(input_dir, "frames.csv"))
    times = frames_tab["t"]
    flat = np.column_stack([frames_tab[f"c{j}"] for j in range(n * dim)])
    frames = flat.reshape(len(times), n, dim)
    diag_path = os.path.join(input_dir, "diagnostics.csv")
    diagnostics = _read_csv(diag_path) if os.path.exists(diag_path) else {}
    return TrajectoryData(dim=dim, times=times, frames=frames,
                          diagnostics=diagnostics)


def _frame_indices(data: TrajectoryData, times) -> list:
    lo, hi = float(data.times[0]), float(data.times[-1])
    out = []
    for t in times:
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise ValueError(
                f"requested time {t} outside the trajectory range [{lo}, {hi}]"
            )
        out.append(int(np.argmin(np.abs(data.times - t))))
    return out


def _closed(points: np.ndarray) -> np.ndarray:
    return np.vstack([points, points[:1]])


def _draw_snapshot3d(ax, data: TrajectoryData, panel):
    if data.dim < 3:
        raise ValueError("snapshot3d needs ambient dimension >= 3")
    idx = _frame_indices(data, panel.get("times", [data.times[0]]))
    for color, i in zip(COLOR_CYCLE, idx):
        pts = _closed(data.frames[i])
        ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color=color, lw=1.0,
                label=f"t={data.times[i]:.3f}")
    span = np.abs(data.frames[idx[0]]).max() * 1.1
    ax.set_xlim(-span, span)
    ax.set_ylim(-span, span)
    ax.set_zlim(-span, span)
    ax.set_box_aspect((1, 1, 1))
    ax.set_title("curve")
    ax.legend(fontsize=6)


def _draw_projection(ax, data: TrajectoryData, panel, coords):
    j0, j1 = coords
    if data.dim <= max(j0, j1):
        raise ValueError(f"projection needs ambient dimension > {max(j0, j1)}")
    idx = _frame_indices(data, panel.get("times", [data.times[0]]))
    for color, i in zip(COLOR_CYCLE, idx):
        pts = _closed(data.frames[i])
        ax.plot(pts[:, j0], pts[:, j1], color=color, lw=1.0,
                label=f"t={data.times[i]:.3f}")
    ax.set_aspect("equal")
    names = {0: "x", 1: "y", 2: "z"}
    ax.set_xlabel(names.get(j0, f"c{j0}"))
    ax.set_ylabel(names.get(j1, f"c{j1}"))
    ax.set_title(f"{names.get(j0)}{names.get(j1)}-projection")
    ax.legend(fontsize=6)


def _draw_timeseries(ax, data: TrajectoryData, panel):
    columns = panel.get("columns")
    if not columns:
        raise ValueError("timeseries panel needs a 'columns' list")
    x_col = panel.get("against", "t")
    if x_col not in data.diagnostics:
        raise ValueError(f"missing diagnostics column {x_col!r}")
    xs = data.diagnostics[x_col]
    for color, name in zip(COLOR_CYCLE, columns):
        if name not in data.diagnostics:
            raise ValueError(f"missing diagnostics column {name!r}")
        ys = data.diagnostics[name]
        keep = np.isfinite(xs) & np.isfinite(ys)
        ax.plot(xs[keep], ys[keep], color=color, lw=1.0, label=name)
    for level in panel.get("hlines", []):
        ax.axhline(level, color="#666666", lw=0.8, ls="--")
    ax.set_xlabel(x_col)
    ax.legend(fontsize=6)
    ax.set_title(", ".join(columns))


def render(spec: PlotSpec) -> str:
    """Draw every panel of the spec into one image file; returns the path."""
    data = load_trajectory(spec.input_dir)
    n = len(spec.panels)
    fig = plt.figure(figsize=(4.0 * n, 4.0), dpi=150)
    for k, panel in enumerate(spec.panels, start=1):
        kind = panel["kind"]
        if kind == "snapshot3d":
            ax = fig.add_subplot(1, n, k, projection="3d")
            _draw_snapshot3d(ax, data, panel)
        elif kind == "projection_xy":
            _draw_projection(fig.add_subplot(1, n, k), data, panel, (0, 1))
        elif kind == "projection_xz":
            _draw_projection(fig.add_subplot(1, n, k), data, panel, (0, 2))
        else:
            _draw_timeseries(fig.add_subplot(1, n, k), data, panel)
    fig.tight_layout()
    out_dir = os.path.dirname(spec.out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.out_path, metadata=dict(PNG_METADATA))
    plt.close(fig)
    return spec.out_path
