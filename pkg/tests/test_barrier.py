import numpy as np
import pytest

from csflab import barrier as br
from csflab import flow as fl
from csflab import projection as pj
from csflab import scenarios as sc


def circle_track(T=0.5, t_end=0.45, k=1e-4):
    ts = np.arange(0.0, t_end + 0.5 * k, k)
    return br.synthetic_track(ts, lambda t: np.sqrt(2 * (T - t)),
                              lambda t: -np.sqrt(2 * (T - t)))


class TestExtremaTrack:
    def test_circle_run_tracks_radius(self, circle_run):
        traj = circle_run.traj
        track = br.extrema_track(traj)
        keep = track.t <= 0.45
        exact = np.sqrt(1 - 2 * track.t[keep])
        assert np.abs(track.x_max[keep] - exact).max() < 1e-4
        assert np.abs(track.x_min[keep] + exact).max() < 1e-4

    def test_ellipse_initial_extremum(self):
        traj = fl.evolve(sc.ellipse_curve(2, 1, 256), step_limit=100)
        track = br.extrema_track(traj)
        assert abs(track.x_max[0] - 2.0) < 1e-4

    def test_wave_figure_eight_unit_extrema(self):
        traj = fl.evolve(sc.wave_perturbation(sc.figure_eight_base(512), 1.0),
                         step_limit=50)
        track = br.extrema_track(traj)
        assert abs(track.x_max[0] - 1.0) < 1e-6
        assert abs(track.x_min[0] + 1.0) < 1e-6

    def test_monotone_extrema_along_flow(self, circle_run):
        track = br.extrema_track(circle_run.traj)
        assert np.all(np.diff(track.x_max) <= 1e-8)
        assert np.all(np.diff(track.x_min) >= -1e-8)


class TestDecayExponent:
    def test_circle_closed_form(self):
        T = 0.5
        track = circle_track(T)
        f = br.decay_exponent(track, T)
        closed = (np.pi**2 / 8 - 0.5) * np.log(T / (T - track.t))
        rel = np.abs(f[1:] - closed[1:]) / closed[1:]
        assert rel.max() < 1e-4

    def test_constant_track_closed_form(self):
        T = 0.8
        ts = np.arange(0.0, 0.4 + 5e-5, 1e-4)
        track = br.synthetic_track(ts, lambda t: np.sqrt(2 * T),
                                   lambda t: -np.sqrt(2 * T))
        f = br.decay_exponent(track, T)
        closed = (np.pi**2 / (8 * T)) * ts - 0.5 * np.log(T / (T - ts))
        assert np.abs(f - closed).max() < 1e-6

    def test_starts_at_zero(self):
        track = circle_track()
        assert br.decay_exponent(track, 0.5)[0] == 0.0

    def test_track_reaching_T_rejected(self):
        track = circle_track()
        with pytest.raises(ValueError):
            br.decay_exponent(track, 0.3)

    def test_continuity_bound(self):
        T = 0.5
        track = circle_track(T)
        f = br.decay_exponent(track, T)
        g = (np.pi**2 / 4) * np.maximum(track.x_max**-2, track.x_min**-2) \
            - 1 / (2 * (T - track.t))
        steps = np.diff(track.t)
        gmax = np.maximum(g[1:], g[:-1])
        assert np.all(np.abs(np.diff(f)) <= steps * gmax + 1e-15)


class TestBarrierValue:
    def test_center_value(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        assert abs(fld.center_value(0.0) - 0.1 * np.sqrt(0.5)) < 1e-10

    def test_vanishes_at_endpoints(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        for t in (0.0, 0.2, 0.4):
            xmin, xmax = fld.x_bounds(t)
            assert abs(fld.value(np.array(xmax), t)) < 1e-12
            assert abs(fld.value(np.array(xmin), t)) < 1e-12

    def test_positive_inside(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        xmin, xmax = fld.x_bounds(0.3)
        xs = np.linspace(0.9 * xmin, 0.9 * xmax, 33)
        assert np.all(fld.value(xs, 0.3) > 0)

    def test_outside_interval_rejected(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        with pytest.raises(ValueError, match="interval"):
            fld.value(np.array(2.0), 0.0)


class TestSubsolution:
    def test_circle_fixture_offcenter_residual(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        rep = br.subsolution_residual(fld, x_half_width=0.1,
                                      t_range=(0.0, 0.2), h=1e-3, k=1e-3)
        assert rep.max_residual_offcenter <= 1e-2
        assert rep.onesided_ok_at_zero

    def test_residual_violation_halves_under_refinement(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        coarse = br.subsolution_residual(fld, x_half_width=0.1,
                                         t_range=(0.0, 0.2), h=1e-3, k=1e-3)
        fine = br.subsolution_residual(fld, x_half_width=0.1,
                                       t_range=(0.0, 0.2), h=5e-4, k=2.5e-4)
        # the positive part (inequality violation) must at least halve
        assert fine.max_residual_offcenter \
            <= max(coarse.max_residual_offcenter, 0.0) / 2 + 1e-12

    def test_onesided_second_derivative_closed_form(self):
        eps, T, h = 0.1, 0.5, 1e-3
        fld = br.build_barrier(circle_track(T), T, eps)
        rep = br.subsolution_residual(fld, x_half_width=0.05,
                                      t_range=(0.0, 0.01), h=h, k=1e-3)
        expected = -(np.pi**2 / 4) * eps * np.sqrt(T)  # x_max(0) = 1
        assert abs(rep.onesided_right[0] - expected) < 5 * h
        assert abs(rep.expected_right[0] - expected) < 1e-3

    def test_symmetric_track_agrees_on_both_sides(self):
        fld = br.build_barrier(circle_track(), 0.5, 0.1)
        rep = br.subsolution_residual(fld, x_half_width=0.05,
                                      t_range=(0.0, 0.1), h=1e-3, k=1e-3)
        assert np.abs(rep.onesided_right - rep.onesided_left).max() < 1e-8
        assert np.all(rep.viscosity_gap <= 10 * (1e-3 + 1e-3))


class TestChooseAmplitude:
    def test_circle_ladder_value(self, circle_run):
        traj = circle_run.traj
        track = br.extrema_track(traj)
        unit = br.build_barrier(track, traj.T_estimate, 1.0)
        bs = pj.branch_split(traj.curves[0], 101)
        eps = br.choose_amplitude(bs.x_grid, bs.Y, unit)
        # base ratio 2/sqrt(0.5) halved once by the margin check
        assert abs(eps - np.sqrt(2.0)) < 5e-3
        base = 2.0 / unit.center_value(0.0)
        assert any(abs(eps - base * 2.0**-k) < 1e-12 for k in range(20))

    def test_homogeneity(self, circle_run):
        traj = circle_run.traj
        track = br.extrema_track(traj)
        unit = br.build_barrier(track, traj.T_estimate, 1.0)
        bs = pj.branch_split(traj.curves[0], 101)
        e1 = br.choose_amplitude(bs.x_grid, bs.Y, unit)
        e2 = br.choose_amplitude(bs.x_grid, 2.0 * bs.Y, unit)
        assert abs(e2 - 2.0 * e1) < 1e-12 * e1

    def test_rejects_nonpositive_gap(self, circle_run):
        traj = circle_run.traj
        track = br.extrema_track(traj)
        unit = br.build_barrier(track, traj.T_estimate, 1.0)
        bs = pj.branch_split(traj.curves[0], 101)
        with pytest.raises(ValueError, match="positive"):
            br.choose_amplitude(bs.x_grid, bs.Y - 5.0, unit)


class TestComparison:
    def test_circle_certificate_holds(self, circle_run):
        traj = circle_run.traj
        res = sc.barrier_analysis(traj)
        cert = res["certificate"]
        assert cert.holds
        assert cert.min_slack >= 0

    def test_circle_closed_forms_bound(self):
        # Y(x,t) = 2 sqrt(2(T-t) - x^2) against the barrier formula
        T, eps = 0.5, np.sqrt(2.0)
        track = circle_track(T)
        fld = br.build_barrier(track, T, eps)
        for t in (0.0, 0.2, 0.4):
            r2 = 2 * (T - t)
            xs = np.linspace(-0.99 * np.sqrt(r2), 0.99 * np.sqrt(r2), 101)
            Y = 2 * np.sqrt(r2 - xs**2)
            assert np.all(Y - fld.value(xs, t) > 0)

    def test_endpoint_slack_is_zero(self, circle_run):
        traj = circle_run.traj
        res = sc.barrier_analysis(traj)
        fld = res["field"]
        bs = pj.branch_split(traj.curves[0], 101)
        xmin, xmax = fld.x_bounds(0.0)
        assert bs.Y[0] == 0.0 or abs(bs.Y[0]) < 1e-9
        assert abs(fld.value(np.array(xmax), 0.0)) < 1e-12

    def test_figure_eight_certificate(self, fig8_runs):
        res = sc.barrier_analysis(fig8_runs[0.5].traj)
        assert res["certificate"].holds
        assert res["certificate"].min_slack >= 0

    def test_scale_equivariance(self):
        lam = 3.0
        t1 = fl.evolve(sc.circle_curve(1.0, 128))
        t2 = fl.evolve(sc.circle_curve(lam, 128))
        r1 = sc.barrier_analysis(t1)
        r2 = sc.barrier_analysis(t2)
        assert r1["certificate"].holds == r2["certificate"].holds is True
