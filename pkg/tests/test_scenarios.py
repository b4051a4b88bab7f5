import json
import os

import numpy as np
import pytest

from csflab import cli
from csflab import curves as cv
from csflab import flow as fl
from csflab import projection as pj
from csflab import scenarios as sc
from csflab import storage


class TestConstructors:
    def test_wave_projection_is_circle(self):
        base = sc.figure_eight_base(128)
        w = sc.wave_perturbation(base, 0.3)
        assert w.dim == base.dim + 2
        assert np.allclose(np.linalg.norm(w.points[:, :2], axis=1), 0.3, atol=1e-14)
        assert np.allclose(w.points[:, 2:], base.points)

    def test_wave_of_planar_figure_eight_in_r5(self):
        w = sc.wave_perturbation(sc.figure_eight_base(256), 1.0)
        assert w.dim == 5
        rep = pj.projection_report(w)
        assert rep.is_convex and rep.is_injective

    def test_wave_of_circle_in_r4(self):
        w = sc.wave_perturbation(sc.circle_curve(1.0, 128), 0.3)
        assert w.dim == 4
        assert pj.projection_report(w).is_convex

    def test_wave_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            sc.wave_perturbation(sc.circle_curve(1.0, 64), 0.0)

    @pytest.mark.parametrize("eps,convex", [(0.5, True), (1.0, True), (0.0, False)])
    def test_figure_eight_projection(self, eps, convex):
        c = sc.figure_eight(eps, 256)
        rep = pj.projection_report(c)
        assert rep.is_convex is convex
        assert rep.is_injective is convex
        if eps == 1.0:
            assert np.allclose(np.linalg.norm(c.points[:, :2], axis=1), 1.0,
                               atol=1e-14)

    def test_figure_eight_needs_64_vertices(self):
        with pytest.raises(ValueError):
            sc.figure_eight(0.5, 32)

    def test_random_fourier_curves_are_immersed(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            c = sc.random_fourier_curve(rng, n=128)
            e = c.edge_lengths()
            assert e.min() > 0.2 * e.mean()

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            sc.ScenarioSpec(kind="nope")
        with pytest.raises(ValueError):
            sc.ScenarioSpec(kind="figure_eight_eps", params={"epsilon": 0.0})
        with pytest.raises(ValueError):
            sc.ScenarioSpec(kind="circle", params={"n": 32})


class TestRunScenario:
    def test_circle_all_verdicts_pass(self, tmp_path):
        spec = sc.ScenarioSpec(kind="circle", params={"radius": 1.0, "n": 128})
        res = sc.run_scenario(spec, tmp_path / "run")
        assert all(v["status"] == "pass" for v in res["verdicts"].values())
        assert abs(res["T_estimate"] - 0.5) < 1e-3
        for name in ("manifest.json", "frames.csv", "diagnostics.csv",
                     "barrier_report.json"):
            assert (tmp_path / "run" / name).exists()

    def test_star_curve_graceful_degradation(self, tmp_path):
        u = sc.sample_params(128)
        r = 1 + 0.45 * np.cos(5 * u)
        star = cv.Curve(np.column_stack([r * np.cos(u), r * np.sin(u)]))
        path = tmp_path / "star.json"
        storage.write_curve_json(path, star)
        spec = sc.ScenarioSpec(kind="from_file", params={"input_path": str(path)},
                               controls={"step_limit": 3000})
        res = sc.run_scenario(spec, tmp_path / "run")
        assert res["verdicts"]["convexity_preserved"]["status"] == "not_applicable"
        assert (tmp_path / "run" / "frames.csv").exists()

    def test_determinism_byte_identical(self, tmp_path):
        spec = sc.ScenarioSpec(kind="figure_eight_eps",
                               params={"epsilon": 0.5, "n": 64},
                               controls={"step_limit": 4000})
        sc.run_scenario(spec, tmp_path / "a")
        sc.run_scenario(spec, tmp_path / "b")
        for name in ("frames.csv", "diagnostics.csv", "manifest.json"):
            wa = (tmp_path / "a" / name).read_bytes()
            wb = (tmp_path / "b" / name).read_bytes()
            assert wa == wb


class TestStorage:
    def test_curve_json_roundtrip(self, tmp_path):
        c = sc.figure_eight(0.5, 64)
        path = tmp_path / "c.json"
        storage.write_curve_json(path, c, meta={"note": "fixture"})
        back = storage.read_curve_json(path)
        assert np.array_equal(back.points, c.points)

    def test_trajectory_roundtrip(self, tmp_path):
        traj = fl.evolve(sc.circle_curve(1.0, 64), step_limit=2000)
        storage.write_trajectory_dir(tmp_path / "t", traj)
        back = storage.read_trajectory_dir(tmp_path / "t")
        assert np.array_equal(back.times, traj.times)
        assert np.array_equal(back.curves[-1].points, traj.curves[-1].points)
        assert back.T_estimate == traj.T_estimate


class TestCLI:
    def test_scenario_exit_zero(self, tmp_path, capsys):
        rc = cli.main(["scenario", "--kind", "circle", "--n-points", "128",
                       "--out", str(tmp_path / "run")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "type_I: pass" in out

    def test_spectral_passes(self, tmp_path, capsys):
        rc = cli.main(["spectral", "--out", str(tmp_path / "spec")])
        assert rc == 0
        assert (tmp_path / "spec" / "modes.csv").exists()

    def test_evolve_and_analyze(self, tmp_path):
        path = tmp_path / "curve.json"
        storage.write_curve_json(path, sc.circle_curve(1.0, 128))
        rc = cli.main(["evolve", "--input", str(path),
                       "--out", str(tmp_path / "run")])
        assert rc == 0
        rc = cli.main(["analyze", "--traj", str(tmp_path / "run")])
        assert rc == 0

    def test_rescale_subcommand(self, tmp_path):
        path = tmp_path / "curve.json"
        storage.write_curve_json(path, sc.circle_curve(1.0, 128))
        cli.main(["evolve", "--input", str(path), "--out", str(tmp_path / "run")])
        out = tmp_path / "state.json"
        rc = cli.main(["rescale", "--traj", str(tmp_path / "run"),
                       "--tau", "2.0", "--out", str(out)])
        assert rc == 0
        state = storage.read_curve_json(out)
        assert abs(np.linalg.norm(state.points, axis=1).mean() - 1.0) < 1e-3

    def test_barrier_subcommand(self, tmp_path):
        path = tmp_path / "curve.json"
        storage.write_curve_json(path, sc.circle_curve(1.0, 128))
        cli.main(["evolve", "--input", str(path), "--out", str(tmp_path / "run")])
        rc = cli.main(["barrier", "--traj", str(tmp_path / "run")])
        assert rc == 0
        report = json.loads((tmp_path / "run" / "barrier_report.json").read_text())
        assert report["holds"] is True
        assert report["min_slack"] >= 0
