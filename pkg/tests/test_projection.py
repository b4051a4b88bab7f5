import numpy as np
import pytest

from csflab import curves as cv
from csflab import flow as fl
from csflab import projection as pj
from csflab import scenarios as sc


def states_from(traj, t_values):
    return [fl.rescale(traj, t) for t in t_values]


class TestProjectionReport:
    def test_planar_unit_circle(self):
        rep = pj.projection_report(sc.circle_curve(1.0, 256))
        assert rep.is_convex and rep.is_injective
        assert abs(rep.slope_constant_M - 1.0) < 1e-9
        assert abs(rep.horizontal_floor_delta - 1.0) < 1e-6
        assert rep.winding == 1

    def test_planar_figure_eight_not_injective(self):
        u = sc.sample_params(256)
        c = cv.Curve(np.column_stack([np.cos(u), np.sin(2 * u), np.zeros(256)]))
        rep = pj.projection_report(c)
        assert not rep.is_injective
        assert not rep.is_convex

    def test_wave_perturbed_figure_eight(self):
        w = sc.wave_perturbation(sc.figure_eight_base(256), 1.0)
        rep = pj.projection_report(w)
        assert rep.is_convex and rep.is_injective
        # brute-force oracle for the slope constant over all vertex pairs
        pts = w.points
        best = 1.0
        for i in range(0, 256, 4):
            d_full = np.linalg.norm(pts - pts[i], axis=1)
            d_proj = np.linalg.norm(pts[:, :2] - pts[i, :2], axis=1)
            ok = d_proj > 1e-12
            best = max(best, (d_full[ok] / d_proj[ok]).max())
        assert rep.slope_constant_M >= best - 1e-9
        assert rep.slope_constant_M >= 1.0

    def test_degenerate_projection_flagged(self):
        u = sc.sample_params(64)
        c = cv.Curve(np.column_stack([np.full(64, 1e-13), np.full(64, -1e-13),
                                      np.cos(u), np.sin(u)]))
        rep = pj.projection_report(c)
        assert rep.degenerate
        assert not rep.is_injective
        assert np.isnan(rep.slope_constant_M)

    def test_figure_eight_eps_zero_segment(self):
        rep = pj.projection_report(sc.figure_eight(0.0, 256))
        assert not rep.is_injective
        assert not rep.is_convex

    def test_convex_implies_injective_on_samples(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            base = sc.random_fourier_curve(rng, n=128)
            rep = pj.projection_report(sc.wave_perturbation(base, 0.3))
            assert rep.is_convex
            assert rep.is_injective

    def test_scaling_leaves_M_unchanged(self):
        w = sc.wave_perturbation(sc.figure_eight_base(128), 0.5)
        m1 = pj.projection_report(w).slope_constant_M
        m2 = pj.projection_report(w.scaled(7.5)).slope_constant_M
        assert abs(m1 - m2) < 1e-12 * m1


class TestBranchSplit:
    def test_circle_gap_at_zero(self):
        bs = pj.branch_split(sc.circle_curve(1.0, 256), 101)
        i0 = np.argmin(np.abs(bs.x_grid))
        assert abs(bs.Y[i0] - 2.0) < 1e-3

    def test_circle_chord_profile(self):
        r = 1.7
        bs = pj.branch_split(sc.circle_curve(r, 512), 101)
        inner = slice(1, -1)
        analytic = 2 * np.sqrt(np.maximum(r * r - bs.x_grid[inner] ** 2, 0.0))
        assert np.abs(bs.Y[inner] - analytic).max() < 2e-3 * r

    def test_upper_concave_lower_convex(self):
        bs = pj.branch_split(sc.ellipse_curve(2, 1, 512), 101)
        assert np.all(np.diff(bs.upper[:, 0], 2) <= 1e-8 * 2)
        assert np.all(np.diff(bs.lower[:, 0], 2) >= -1e-8 * 2)

    def test_endpoints_vanish(self):
        bs = pj.branch_split(sc.circle_curve(1.0, 256), 101)
        assert abs(bs.Y[0]) < 1e-9
        assert abs(bs.Y[-1]) < 1e-9
        assert np.all(bs.Y[1:-1] > 0)

    def test_gap_matches_raw_crossing_search(self):
        w = sc.figure_eight(0.5, 512)
        bs = pj.branch_split(w, 101)
        i0 = np.argmin(np.abs(bs.x_grid))
        # brute force: find the polyline edges crossing x = 0 and their y values
        pts = w.points[:, :2]
        nxt = np.roll(pts, -1, axis=0)
        crossing = (pts[:, 0] * nxt[:, 0]) <= 0
        ys = []
        for i in np.nonzero(crossing)[0]:
            x0, y0 = pts[i]
            x1, y1 = nxt[i]
            if x1 != x0:
                w_ = -x0 / (x1 - x0)
                ys.append(y0 + w_ * (y1 - y0))
        gap_oracle = max(ys) - min(ys)
        cell = bs.x_grid[1] - bs.x_grid[0]
        assert abs(bs.Y[i0] - gap_oracle) <= 2 * cell

    def test_nonconvex_rejected(self):
        u = sc.sample_params(128)
        flower = cv.Curve(np.column_stack([
            (1 + 0.5 * np.cos(5 * u)) * np.cos(u),
            (1 + 0.5 * np.cos(5 * u)) * np.sin(u),
        ]))
        with pytest.raises(ValueError, match="convex"):
            pj.branch_split(flower, 101)


class TestLinearScale:
    def test_values(self):
        assert pj.linear_scale(1.0, 0.05) == 1.0
        assert pj.linear_scale(0.2, 0.01) == 1.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            pj.linear_scale(0.0, 1.0)
        with pytest.raises(ValueError):
            pj.linear_scale(1.0, -1.0)

    def test_window_inside_interval_on_run(self, fig8_runs):
        traj = fig8_runs[0.5].traj
        st = fl.rescale_at_tau(traj, 2.0)
        rep = pj.projection_report(st.curve)
        grad = np.abs(pj.branch_split(st.curve, 201).upper[:, 0]).max()
        rho = pj.linear_scale(rep.horizontal_floor_delta, max(grad, 1e-3))
        x = st.curve.points[:, 0]
        assert rho > 0
        # measured window sits inside the projected x-span
        assert x.min() <= -rho and rho <= x.max()


class TestMinPointTrack:
    def test_unit_circle_half_disks(self):
        sts = [fl.RescaledState(tau=0.05 * j, curve=sc.circle_curve(1.0, 256),
                                source_t=0.0) for j in range(4)]
        with pytest.warns(UserWarning, match="tie-broken"):
            track = pj.min_point_track(sts)
        assert track.degenerate_any
        assert np.abs(track.A1 - np.pi / 2).max() < 1e-3
        assert np.abs(track.A2 - np.pi / 2).max() < 1e-3
        assert np.allclose(track.p[0], [0.0, 1.0], atol=1e-8)
        assert np.allclose(track.q[0], [0.0, -1.0], atol=1e-8)

    def test_off_center_circle(self):
        c = sc.circle_curve(1.0, 256, center=(0.1, 0.0))
        track = pj.min_point_track([fl.RescaledState(tau=0.0, curve=c, source_t=0.0)])
        # both branch minimizers sit at the point nearest the origin
        assert np.allclose(track.p[0], [-0.9, 0.0], atol=1e-2)
        assert abs(track.A1[0] + track.A2[0] - np.pi) < 2e-3

    def test_area_sum_matches_shoelace_exactly(self, fig8_runs):
        traj = fig8_runs[0.5].traj
        sts = states_from(traj, traj.times[[10, 40, 80]])
        track = pj.min_point_track(sts)
        for st, a1, a2 in zip(sts, track.A1, track.A2):
            xy = st.curve.points[:, :2]
            x, y = xy[:, 0], xy[:, 1]
            total = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
            assert abs(a1 + a2 - total) <= 1e-6 * total

    def test_figure_eight_floor_positive(self, fig8_runs):
        traj = fig8_runs[0.5].traj
        taus = np.arange(1.0, 4.01, 0.05)
        sts = [fl.rescale_at_tau(traj, tau) for tau in taus]
        track = pj.min_point_track(sts)
        assert track.delta0 > 0
        assert track.continuity_ok
        assert np.all(np.minimum(track.A1, track.A2) >= track.delta0)


class TestFlowPreservation:
    def test_wave_projection_preserved_along_flow(self):
        rng = np.random.default_rng(8)
        base = sc.random_fourier_curve(rng, n=128)
        traj = fl.evolve(sc.wave_perturbation(base, 0.3), step_limit=20000)
        reports = [pj.projection_report(c) for c in traj.curves]
        assert all(r.is_convex and r.is_injective for r in reports)

    def test_slope_and_floor_persistence(self, fig8_runs):
        traj = fig8_runs[0.5].traj
        reports = [pj.projection_report(c) for c in traj.curves]
        t0 = 0.05 * traj.T_estimate
        i0 = next(i for i, t in enumerate(traj.times) if t >= t0)
        ms = np.array([r.slope_constant_M for r in reports])
        ds = np.array([r.horizontal_floor_delta for r in reports])
        assert np.all(ms[i0:] <= 1.05 * ms[i0])
        assert np.all(ds[i0:] >= 0.95 * ds[i0])

    def test_rescaling_does_not_change_M_or_delta(self, fig8_runs):
        traj = fig8_runs[0.5].traj
        t = float(traj.times[50])
        rep_plain = pj.projection_report(traj.curves[50])
        rep_scaled = pj.projection_report(fl.rescale(traj, t).curve)
        assert abs(rep_plain.slope_constant_M - rep_scaled.slope_constant_M) \
            < 1e-9 * rep_plain.slope_constant_M
        assert abs(rep_plain.horizontal_floor_delta - rep_scaled.horizontal_floor_delta) \
            < 1e-9
