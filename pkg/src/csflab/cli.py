"""Command-line front end: evolve, rescale, analyze, barrier, spectral, scenario.

Every subcommand exits 0 iff all verdicts it produced pass (not-applicable
checks do not fail a run).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import flow as flow_mod
from . import scenarios, spectral, storage


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-points", type=int, default=256)
    p.add_argument("--dt-cfl", type=float, default=0.2)
    p.add_argument("--resample-every", type=int, default=10)
    p.add_argument("--stop-diameter-frac", type=float, default=1e-3)
    p.add_argument("--step-limit", type=int, default=500_000)
    p.add_argument("--out", default="out")
    p.add_argument("--input", default=None, help="curve JSON file")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _controls(args) -> dict:
    return {
        "dt_cfl": args.dt_cfl,
        "resample_every": args.resample_every,
        "stop_diameter_frac": args.stop_diameter_frac,
        "step_limit": args.step_limit,
    }


def _spec_from_args(args) -> scenarios.ScenarioSpec:
    params: dict = {"n": args.n_points, "epsilon": args.epsilon}
    if args.input:
        params["input_path"] = args.input
    kind = getattr(args, "kind", "from_file" if args.input else "circle")
    if kind == "circle":
        params["radius"] = getattr(args, "radius", 1.0)
    if kind == "ellipse":
        params["a"], params["b"] = getattr(args, "a", 2.0), getattr(args, "b", 1.0)
    analyses = getattr(args, "analyses", None)
    spec_kwargs = {"kind": kind, "params": params, "controls": _controls(args)}
    if analyses:
        spec_kwargs["analyses"] = tuple(analyses.split(","))
    return scenarios.ScenarioSpec(**spec_kwargs)


def _exit_code(verdicts: dict) -> int:
    return 0 if all(v["status"] != "fail" for v in verdicts.values()) else 1


def cmd_evolve(args) -> int:
    if not args.input:
        print("evolve requires --input FILE.json", file=sys.stderr)
        return 2
    curve = storage.read_curve_json(args.input)
    traj = flow_mod.evolve(curve, **_controls(args))
    analysis = scenarios.analyze_trajectory(traj)
    storage.write_trajectory_dir(args.out, traj, None, analysis["columns"],
                                 analysis["verdicts"])
    print(f"stopped: {traj.stopped_reason}, T_estimate: {traj.T_estimate}")
    return _exit_code(analysis["verdicts"])


def cmd_rescale(args) -> int:
    traj = storage.read_trajectory_dir(args.traj)
    if args.tau is not None:
        state = flow_mod.rescale_at_tau(traj, args.tau)
    else:
        state = flow_mod.rescale(traj, args.t)
    out = args.out if args.out != "out" else "rescaled.json"
    storage.write_curve_json(out, state.curve,
                             meta={"tau": repr(state.tau), "t": repr(state.source_t)})
    print(f"tau={state.tau}: wrote {out}")
    return 0


def cmd_analyze(args) -> int:
    traj = storage.read_trajectory_dir(args.traj)
    analysis = scenarios.analyze_trajectory(traj)
    if args.format == "json":
        path = os.path.join(args.traj, "diagnostics.json")
        with open(path, "w") as fh:
            json.dump({k: list(map(float, v)) for k, v in analysis["columns"].items()},
                      fh, indent=1, sort_keys=True)
            fh.write("\n")
    else:
        storage.write_csv(os.path.join(args.traj, "diagnostics.csv"),
                          analysis["columns"])
    for name, v in sorted(analysis["verdicts"].items()):
        print(f"{name}: {v['status']} ({v['detail']})")
    return _exit_code(analysis["verdicts"])


def cmd_barrier(args) -> int:
    traj = storage.read_trajectory_dir(args.traj)
    result = scenarios.barrier_analysis(traj)
    cert = result["certificate"]
    report = {
        "epsilon": result["epsilon"],
        "min_slack": cert.min_slack,
        "holds": bool(cert.holds),
        "per_frame": [{"t": float(t), "min_slack": float(s)}
                      for t, s in zip(cert.times, cert.frame_min_slack)],
    }
    path = os.path.join(args.traj, "barrier_report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"barrier: holds={cert.holds}, min_slack={cert.min_slack:.4g}")
    return 0 if cert.holds else 1


def cmd_spectral(args) -> int:
    rule = spectral.trapezoid_rule()
    checks = {}
    modes = [spectral.hermite_mode(m) for m in range(3)]
    gram = np.array([[spectral.inner_product(a, b, rule) for b in modes]
                     for a in modes])
    checks["orthonormal"] = bool(np.abs(gram - np.eye(3)).max() < 1e-10)
    h = rule.spacing
    eig_err = []
    for m, lam in ((0, -1.0), (1, 0.0), (2, 1.0)):
        vals = modes[m](rule.nodes)
        resid = spectral.shifted_ou_apply(vals, h) + lam * vals
        eig_err.append(float(np.abs(resid[20:-20]).max()))
    checks["eigen_relations"] = bool(max(eig_err) < 5 * h * h + 1e-8)
    tail_ok = all(
        spectral.norm(
            spectral.cutoff_profile(rule.nodes, rule.nodes, rho) - rule.nodes, rule
        ) <= 10.0 * np.exp(-rho * rho / 4.0)
        for rho in (3.0, 4.0, 5.0)
    )
    checks["cutoff_tail"] = bool(tail_ok)

    taus = np.linspace(0.0, 1.0, 41)
    profiles = [np.exp(t) * np.ones_like(rule.nodes) for t in taus]
    evo = spectral.mode_evolution(taus, profiles, rule, rho=args.rho)
    checks["growing_mode_rate"] = bool(
        np.nanmax(np.abs(evo.rate_c_minus1[1:-1] - 1.0)) < 1e-3
    )
    os.makedirs(args.out, exist_ok=True)
    storage.write_mode_series_csv(os.path.join(args.out, "modes.csv"), evo)
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'fail'}")
    return 0 if all(checks.values()) else 1


def cmd_scenario(args) -> int:
    spec = _spec_from_args(args)
    result = scenarios.run_scenario(spec, args.out)
    print(result["summary"])
    print(f"T_estimate: {result['T_estimate']}, stopped: {result['stopped_reason']}")
    return _exit_code(result["verdicts"])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="csflab",
        description="Numerical laboratory for curve shortening flow in R^n",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run the flow on a curve JSON file")
    _add_common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("rescale", help="extract a rescaled state from a trajectory")
    p.add_argument("--traj", required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("analyze", help="recompute diagnostics for a trajectory dir")
    p.add_argument("--traj", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("barrier", help="build and certify the gap barrier")
    p.add_argument("--traj", required=True)
    p.set_defaults(func=cmd_barrier)

    p = sub.add_parser("spectral", help="run the Hermite-mode checks")
    p.add_argument("--out", default="out")
    p.add_argument("--rho", type=float, default=4.0)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("scenario", help="build, evolve and analyze a named scenario")
    p.add_argument("--kind", choices=("circle", "ellipse", "figure_eight_eps",
                                      "wave_perturb", "from_file"), default="circle")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--analyses", default=None,
                   help="comma-separated subset of convexity,type_I,circularity,"
                        "barrier,areas,monotonicity")
    _add_common(p)
    p.set_defaults(func=cmd_scenario)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
