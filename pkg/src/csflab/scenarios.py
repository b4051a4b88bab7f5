"""Scenario constructors and the end-to-end analysis pipeline.

Constructors sample the standard test curves (circles, ellipses, the
perturbed figure-eight family, two-extra-coordinate wave perturbations,
random Fourier loops).  ``run_scenario`` evolves a curve, runs every
requested diagnostic, persists the outputs and returns per-check verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import barrier as barrier_mod
from . import flow as flow_mod
from . import projection as projection_mod
from .curves import Curve, fit_circle

_KINDS = ("circle", "ellipse", "figure_eight_eps", "wave_perturb", "from_file")
_ANALYSES = ("convexity", "type_I", "circularity", "barrier", "areas", "monotonicity")


def sample_params(n: int) -> np.ndarray:
    """Parameter values u_i = 2*pi*i/N, the vertex-index convention."""
    return 2.0 * np.pi * np.arange(n) / n


def circle_curve(radius: float = 1.0, n: int = 256, dim: int = 2,
                 center=None, phase: float = 0.0) -> Curve:
    u = sample_params(n) + phase
    pts = np.zeros((n, dim))
    pts[:, 0] = radius * np.cos(u)
    pts[:, 1] = radius * np.sin(u)
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return Curve(pts)


def ellipse_curve(a: float, b: float, n: int = 256) -> Curve:
    u = sample_params(n)
    return Curve(np.column_stack([a * np.cos(u), b * np.sin(u)]))


def figure_eight(epsilon: float, n: int = 512) -> Curve:
    """Perturbed planar figure-eight (cos u, eps*sin u, sin 2u) in R^3.

    For eps > 0 the xy-projection is the ellipse (cos u, eps*sin u); for
    eps = 0 it degenerates to a segment traversed twice.
    """
    if n < 64:
        raise ValueError("figure_eight needs n >= 64")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    u = sample_params(n)
    return Curve(np.column_stack([np.cos(u), epsilon * np.sin(u), np.sin(2.0 * u)]))


def wave_perturbation(base: Curve, epsilon: float) -> Curve:
    """Prepend a small circle in two fresh coordinates: (eps cos u, eps sin u, base).

    The xy-projection of the result is exactly the circle of radius eps, so
    the output has a one-to-one convex projection whatever the base curve.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    u = sample_params(base.n_vertices)
    cols = [epsilon * np.cos(u), epsilon * np.sin(u)]
    return Curve(np.column_stack(cols + [base.points]))


def random_fourier_curve(rng: np.random.Generator, n: int = 256,
                         degree: int = 5, dim: int = 3) -> Curve:
    """Random closed immersed curve with Fourier modes up to ``degree``.

    Coefficients decay like 1/m^2; draws are rejected until the discrete
    speed is bounded away from zero, so the sample is immersed.
    """
    u = sample_params(n)
    for _ in range(100):
        pts = np.zeros((n, dim))
        for m in range(1, degree + 1):
            amp = 1.0 / m**2
            a = rng.normal(scale=amp, size=dim)
            b = rng.normal(scale=amp, size=dim)
            pts += np.outer(np.cos(m * u), a) + np.outer(np.sin(m * u), b)
        scale = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
        pts *= 2.0 / scale
        edges = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if edges.min() > 0.2 * edges.mean():
            return Curve(pts)
    raise RuntimeError("failed to draw an immersed Fourier curve")


@dataclass(frozen=True)
class ScenarioSpec:
    """What to build, how to evolve it, and which diagnostics to run."""

    kind: str
    params: dict = field(default_factory=dict)
    controls: dict = field(default_factory=dict)
    analyses: tuple = _ANALYSES

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind in ("figure_eight_eps", "wave_perturb"):
            if float(self.params.get("epsilon", 0.0)) <= 0:
                raise ValueError("epsilon must be positive for this scenario kind")
        n = int(self.params.get("n", 256))
        if n < 64:
            raise ValueError("scenario curves need n >= 64")
        unknown = set(self.analyses) - set(_ANALYSES)
        if unknown:
            raise ValueError(f"unknown analyses: {sorted(unknown)}")


def build_curve(spec: ScenarioSpec) -> Curve:
    p = spec.params
    n = int(p.get("n", 256))
    if spec.kind == "circle":
        return circle_curve(radius=float(p.get("radius", 1.0)), n=n,
                            dim=int(p.get("ambient_dim", 2)))
    if spec.kind == "ellipse":
        return ellipse_curve(float(p.get("a", 2.0)), float(p.get("b", 1.0)), n=n)
    if spec.kind == "figure_eight_eps":
        return figure_eight(float(p["epsilon"]), n=n)
    if spec.kind == "wave_perturb":
        if "input_path" in p:
            base = load_curve_json(p["input_path"])
        else:
            base = figure_eight_base(n)
        return wave_perturbation(base, float(p["epsilon"]))
    if spec.kind == "from_file":
        return load_curve_json(p["input_path"])
    raise ValueError(spec.kind)


def figure_eight_base(n: int = 512) -> Curve:
    """The planar figure-eight (cos u, 0, sin 2u), a standard wave-perturbation base."""
    u = sample_params(n)
    return Curve(np.column_stack([np.cos(u), np.zeros(n), np.sin(2.0 * u)]))


def load_curve_json(path) -> Curve:
    from .storage import read_curve_json

    return read_curve_json(path)


# ---------------------------------------------------------------------------
# trajectory-level analysis


def analyze_trajectory(traj: flow_mod.Trajectory,
                       certify_diameter_frac: float = 1e-2) -> dict:
    """Per-frame diagnostics plus flow-property verdicts for one trajectory.

    Returns a dict with a ``columns`` table (aligned with stored frames), a
    ``verdicts`` map check-name -> {status, detail}, and scalar summaries.
    Frames with diameter below ``certify_diameter_frac`` of the initial one
    are excluded from the rescaled-analysis window (discretization noise
    dominates there).
    """
    times = traj.times
    n_frames = len(times)
    cols: dict[str, np.ndarray] = {
        "t": times.copy(),
        "length": np.array([c.length() for c in traj.curves]),
        "diameter": np.array([c.diameter() for c in traj.curves]),
    }
    cols["max_curvature"] = np.array([flow_mod.max_curvature(c) for c in traj.curves])

    verdicts: dict[str, dict] = {}
    T = traj.T_estimate
    nan = np.full(n_frames, np.nan)
    for name in ("tau", "type_i_ratio", "is_convex", "is_injective", "winding",
                 "slope_M", "h_floor_delta", "fit_residual", "fit_multiplicity",
                 "axis_ratio", "shrinker_energy", "A1", "A2",
                 "p_x", "p_y", "q_x", "q_y"):
        cols[name] = nan.copy()

    # projection diagnostics on every frame
    reports = [projection_mod.projection_report(c) for c in traj.curves]
    cols["is_convex"] = np.array([float(r.is_convex) for r in reports])
    cols["is_injective"] = np.array([float(r.is_injective) for r in reports])
    cols["winding"] = np.array([float(r.winding) for r in reports])
    cols["slope_M"] = np.array([r.slope_constant_M for r in reports])
    cols["h_floor_delta"] = np.array([r.horizontal_floor_delta for r in reports])

    convex_all = all(r.is_convex and r.is_injective for r in reports)
    if reports[0].is_convex and reports[0].is_injective:
        status = "pass" if convex_all else "fail"
        first_bad = next((i for i, r in enumerate(reports)
                          if not (r.is_convex and r.is_injective)), None)
        verdicts["convexity_preserved"] = {
            "status": status,
            "detail": "all frames convex+injective" if convex_all
            else f"frame {first_bad} lost the convex projection",
        }
    else:
        verdicts["convexity_preserved"] = {
            "status": "not_applicable",
            "detail": "initial projection is not one-to-one convex",
        }

    if T is None:
        verdicts["type_I"] = {"status": "fail", "detail": "no extinction estimate"}
        return {"columns": cols, "verdicts": verdicts, "certify_end_index": n_frames - 1}

    cols["tau"] = np.where(times < T, -0.5 * np.log(np.maximum(T - times, 1e-300)), np.nan)

    report = flow_mod.type_I_report(traj)
    idx = {t: i for i, t in enumerate(times)}
    for t_r, ratio in zip(report.times, report.ratios):
        cols["type_i_ratio"][idx[t_r]] = ratio
    verdicts["type_I"] = {
        "status": "pass" if report.verdict == "type_I_bounded" else "fail",
        "detail": f"verdict={report.verdict}, sup_ratio={report.sup_ratio:.4f}, "
                  f"terminal={report.ratios[-1]:.4f}",
    }

    # rescaled-analysis window
    d0 = cols["diameter"][0]
    certifiable = np.nonzero(cols["diameter"] >= certify_diameter_frac * d0)[0]
    end = int(certifiable[-1]) if len(certifiable) else 0
    window = [i for i in range(end + 1) if times[i] < T]
    states = [flow_mod.rescale(traj, times[i]) for i in window]

    for i, st in zip(window, states):
        try:
            cf = fit_circle(st.curve)
        except ValueError:
            continue
        cols["fit_residual"][i] = cf.rms_residual
        cols["fit_multiplicity"][i] = cf.multiplicity
        radii = np.linalg.norm(st.curve.points[:, :2] - cf.center[:2], axis=1)
        cols["axis_ratio"][i] = float(radii.max() / radii.min())
        cols["shrinker_energy"][i] = flow_mod.shrinker_energy(st)

    if window:
        last = window[-1]
        res = cols["fit_residual"][last]
        mult = cols["fit_multiplicity"][last]
        ok = np.isfinite(res) and res <= 0.05 and mult == 1
        verdicts["circularity"] = {
            "status": "pass" if ok else ("fail" if convex_all else "not_applicable"),
            "detail": f"residual={res:.4g}, multiplicity={int(mult) if np.isfinite(mult) else -1} "
                      f"at tau={cols['tau'][last]:.3f}",
        }
        energies = cols["shrinker_energy"][window]
        finite = energies[np.isfinite(energies)]
        mono = bool(np.all(np.diff(finite) <= 1e-6 * np.abs(finite[:-1]) + 1e-12))
        verdicts["monotone_energy"] = {
            "status": "pass" if mono else "fail",
            "detail": f"W[0]={finite[0]:.4g} -> W[-1]={finite[-1]:.4g}",
        }
    else:
        verdicts["circularity"] = {"status": "fail", "detail": "no certifiable frames"}
        verdicts["monotone_energy"] = {"status": "fail", "detail": "no certifiable frames"}

    if convex_all and window:
        track = projection_mod.min_point_track(states)
        for i, k in enumerate(window):
            cols["A1"][k] = track.A1[i]
            cols["A2"][k] = track.A2[i]
            cols["p_x"][k], cols["p_y"][k] = track.p[i]
            cols["q_x"][k], cols["q_y"][k] = track.q[i]
        span = states[-1].tau - states[0].tau
        verdicts["area_floor"] = {
            "status": "pass" if track.delta0 > 0 else "fail",
            "detail": f"delta0={track.delta0:.4g} over tau-span {span:.2f}",
        }
    else:
        verdicts["area_floor"] = {
            "status": "not_applicable",
            "detail": "requires a convex projection on every frame",
        }

    return {"columns": cols, "verdicts": verdicts, "certify_end_index": end}


def barrier_analysis(traj: flow_mod.Trajectory, grid_n: int = 101,
                     certify_diameter_frac: float = 1e-2) -> dict:
    """Build the subsolution from the trajectory and certify the gap bound."""
    track = barrier_mod.extrema_track(traj)
    T = traj.T_estimate
    field_unit = barrier_mod.build_barrier(track, T, epsilon=1.0)
    first = traj.curves[0]
    bs = projection_mod.branch_split(first, grid_n)
    eps = barrier_mod.choose_amplitude(bs.x_grid, bs.Y, field_unit)
    fld = barrier_mod.build_barrier(track, T, epsilon=eps)
    cert = barrier_mod.comparison_certificate(
        traj, fld, grid_n=grid_n, certify_diameter_frac=certify_diameter_frac
    )
    return {"field": fld, "epsilon": eps, "certificate": cert}


def run_scenario(spec: ScenarioSpec, out_dir) -> dict:
    """Evolve, analyze, persist.  Returns {verdicts, summary, out_dir}."""
    from . import storage

    curve = build_curve(spec)
    controls = dict(spec.controls)
    traj = flow_mod.evolve(curve, **controls)
    analysis = analyze_trajectory(traj)
    verdicts = {k: v for k, v in analysis["verdicts"].items()
                if _verdict_requested(k, spec.analyses)}

    barrier_report = None
    if "barrier" in spec.analyses:
        if analysis["verdicts"]["convexity_preserved"]["status"] == "pass" \
                and traj.T_estimate is not None:
            bres = barrier_analysis(traj)
            cert = bres["certificate"]
            barrier_report = {
                "epsilon": bres["epsilon"],
                "min_slack": cert.min_slack,
                "holds": bool(cert.holds),
                "per_frame": [
                    {"t": float(t), "min_slack": float(s)}
                    for t, s in zip(cert.times, cert.frame_min_slack)
                ],
            }
            res = barrier_mod.subsolution_residual(
                bres["field"],
                x_half_width=0.05 * traj.initial_diameter,
                t_range=(traj.times[0], 0.5 * (traj.times[0] + traj.T_estimate)),
                h=1e-3 * traj.initial_diameter,
                k=1e-3 * traj.initial_diameter,
            )
            barrier_report["max_residual_offcenter"] = res.max_residual_offcenter
            barrier_report["onesided_ok_at_zero"] = bool(res.onesided_ok_at_zero)
            verdicts["barrier"] = {
                "status": "pass" if cert.holds and res.onesided_ok_at_zero else "fail",
                "detail": f"min_slack={cert.min_slack:.4g}, epsilon={bres['epsilon']:.4g}",
            }
        else:
            verdicts["barrier"] = {
                "status": "not_applicable",
                "detail": "barrier needs a convex-projection trajectory",
            }

    storage.write_trajectory_dir(out_dir, traj, spec, analysis["columns"], verdicts,
                                 barrier_report=barrier_report)
    summary_lines = [
        f"{name}: {v['status']} ({v['detail']})" for name, v in sorted(verdicts.items())
    ]
    return {"verdicts": verdicts, "summary": "\n".join(summary_lines),
            "out_dir": str(out_dir), "T_estimate": traj.T_estimate,
            "stopped_reason": traj.stopped_reason}


def _verdict_requested(name: str, analyses) -> bool:
    mapping = {
        "convexity_preserved": "convexity",
        "type_I": "type_I",
        "circularity": "circularity",
        "monotone_energy": "monotonicity",
        "area_floor": "areas",
        "barrier": "barrier",
    }
    return mapping.get(name, name) in analyses
