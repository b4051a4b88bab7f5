"""Explicit heat-equation subsolution bounding the branch gap from below.

From the per-frame extrema of the projected x-coordinate we build the
comparison function phi(x, t) = eps * exp(-f(t)) * sqrt(T - t) * cos(theta)
with a piecewise-linear phase theta that vanishes at the moving endpoints.
phi is smooth away from x = 0, one-sided C^2 at the kink, and satisfies
phi_t - phi_xx <= 0 there in the one-sided sense; the certificate checks
the gap Y stays above phi frame by frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .projection import branch_split


@dataclass(frozen=True)
class ExtremaTrack:
    """Sub-vertex accurate max/min of x on the projected curve per frame."""

    t: np.ndarray
    x_max: np.ndarray
    x_min: np.ndarray
    dx_max: np.ndarray
    dx_min: np.ndarray


def _refined_extremum(x: np.ndarray, e: np.ndarray, i: int, kind: str) -> float:
    """Quadratic correction of a discrete extremum using the chord offsets."""
    n = len(x)
    hb = e[(i - 1) % n]
    hf = e[i]
    x0, xm, xp = x[i], x[(i - 1) % n], x[(i + 1) % n]
    # parabola through (-hb, xm), (0, x0), (hf, xp)
    denom = hb * hf * (hb + hf)
    if denom == 0:
        return float(x0)
    b = (xp * hb * hb - xm * hf * hf + x0 * (hf * hf - hb * hb)) / denom
    c = (xp * hb + xm * hf - x0 * (hb + hf)) / denom
    if (kind == "max" and c >= 0) or (kind == "min" and c <= 0):
        return float(x0)
    xi = -b / (2.0 * c)
    if abs(xi) > max(hb, hf):
        return float(x0)
    return float(x0 + b * xi + c * xi * xi)


def extrema_track(traj) -> ExtremaTrack:
    """Track x_max(t) and x_min(t) of the projection along a trajectory."""
    ts = traj.times
    xmaxs, xmins = [], []
    warned = False
    for c in traj.curves:
        x = c.points[:, 0]
        e = c.edge_lengths()
        i_max = int(np.argmax(x))
        i_min = int(np.argmin(x))
        scale = float(x[i_max] - x[i_min])
        order = np.argsort(x)
        near_tie = (
            x[order[-1]] - x[order[-2]] < 1e-12 * scale
            and abs(order[-1] - order[-2]) not in (1, len(x) - 1)
        )
        if near_tie and not warned:
            warnings.warn("non-unique discrete x-extremum; track may jump", stacklevel=2)
            warned = True
        xmaxs.append(_refined_extremum(x, e, i_max, "max"))
        xmins.append(_refined_extremum(x, e, i_min, "min"))
    xmaxs = np.array(xmaxs)
    xmins = np.array(xmins)
    if np.any(xmins >= 0) or np.any(xmaxs <= 0):
        raise ValueError("extrema track requires x_min < 0 < x_max on every frame")
    return ExtremaTrack(
        t=ts.copy(), x_max=xmaxs, x_min=xmins,
        dx_max=np.gradient(xmaxs, ts), dx_min=np.gradient(xmins, ts),
    )


def synthetic_track(ts: np.ndarray, x_max_fn, x_min_fn) -> ExtremaTrack:
    """Analytic fixture track (used by closed-form tests)."""
    ts = np.asarray(ts, dtype=float)
    xmax = np.array([x_max_fn(t) for t in ts])
    xmin = np.array([x_min_fn(t) for t in ts])
    return ExtremaTrack(
        t=ts, x_max=xmax, x_min=xmin,
        dx_max=np.gradient(xmax, ts), dx_min=np.gradient(xmin, ts),
    )


def decay_exponent(track: ExtremaTrack, T: float) -> np.ndarray:
    """Cumulative integral f(t) of (pi^2/4) max(1/x_max^2, 1/x_min^2) - 1/(2(T-t)).

    f(0) = 0 exactly; the barrier amplitude decays like exp(-f(t)).
    """
    if track.t[-1] >= T:
        raise ValueError("track reaches t >= T")
    g = (np.pi**2 / 4.0) * np.maximum(track.x_max**-2, track.x_min**-2) \
        - 1.0 / (2.0 * (T - track.t))
    return cumulative_trapezoid(g, track.t, initial=0.0)


@dataclass(frozen=True)
class BarrierField:
    """phi(x, t) = epsilon * exp(-f(t)) * sqrt(T - t) * cos(theta(x, t))."""

    track: ExtremaTrack
    T: float
    epsilon: float
    f_values: np.ndarray

    def x_bounds(self, t: float):
        xmax = float(np.interp(t, self.track.t, self.track.x_max))
        xmin = float(np.interp(t, self.track.t, self.track.x_min))
        return xmin, xmax

    def theta(self, x, t: float):
        xmin, xmax = self.x_bounds(t)
        x = np.asarray(x, dtype=float)
        if np.any(x < xmin - 1e-12) or np.any(x > xmax + 1e-12):
            raise ValueError("x outside the moving interval")
        return np.where(x >= 0.0, 0.5 * np.pi * x / xmax, 0.5 * np.pi * x / (-xmin))

    def value(self, x, t: float):
        if t >= self.T:
            raise ValueError("t must be below T")
        if t < self.track.t[0] or t > self.track.t[-1]:
            raise ValueError("t outside the tracked range")
        f_t = float(np.interp(t, self.track.t, self.f_values))
        amp = self.epsilon * np.exp(-f_t) * np.sqrt(self.T - t)
        return amp * np.cos(self.theta(x, t))

    def center_value(self, t: float) -> float:
        return float(self.value(np.array(0.0), t))


def build_barrier(track: ExtremaTrack, T: float, epsilon: float) -> BarrierField:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return BarrierField(track=track, T=T, epsilon=epsilon,
                        f_values=decay_exponent(track, T))


def choose_amplitude(x_grid: np.ndarray, Y0: np.ndarray, unit_field: BarrierField,
                     margin: float = 0.1) -> float:
    """Largest power-of-two fraction of Y0(0)/phi_unit(0) kept below Y0 with margin.

    ``unit_field`` must be the barrier with epsilon = 1; the returned
    epsilon satisfies (1 + margin) * eps * phi_unit <= Y0 on the grid.
    """
    if np.min(Y0[1:-1]) <= 0:
        raise ValueError("initial gap must be positive in the interior")
    t0 = float(unit_field.track.t[0])
    phi_unit = unit_field.value(x_grid, t0)
    y_center = float(np.interp(0.0, x_grid, Y0))
    base = y_center / unit_field.center_value(t0)
    for k in range(80):
        eps = base * 2.0**-k
        if np.all(Y0 >= (1.0 + margin) * eps * phi_unit - 1e-15):
            return float(eps)
    raise ValueError("no admissible amplitude found")


@dataclass(frozen=True)
class ComparisonCertificate:
    holds: bool
    min_slack: float
    times: np.ndarray
    frame_min_slack: np.ndarray


def comparison_certificate(traj, field: BarrierField, grid_n: int = 101,
                           certify_diameter_frac: float = 1e-2,
                           tol_scale: float | None = None) -> ComparisonCertificate:
    """Check the gap bound Y(x, t) >= phi(x, t) on interior grid points.

    Certification stops once the curve diameter falls below
    ``certify_diameter_frac`` of its initial value; discrete extrema are too
    noisy past that.
    """
    scale = tol_scale if tol_scale is not None else traj.initial_diameter
    tol = 1e-8 * scale
    times, mins = [], []
    d0 = traj.curves[0].diameter()
    for t, c in zip(traj.times, traj.curves):
        if c.diameter() < certify_diameter_frac * d0:
            break
        if not (field.track.t[0] <= t <= field.track.t[-1]) or t >= field.T:
            continue
        bs = branch_split(c, grid_n)
        x_in = bs.x_grid[1:-1]
        xmin_f, xmax_f = field.x_bounds(t)
        valid = (x_in >= xmin_f) & (x_in <= xmax_f)
        phi = field.value(x_in[valid], t)
        slack = bs.Y[1:-1][valid] - phi
        times.append(t)
        mins.append(float(slack.min()))
    mins = np.array(mins)
    min_slack = float(mins.min()) if len(mins) else float("nan")
    return ComparisonCertificate(
        holds=bool(len(mins) and min_slack >= -tol),
        min_slack=min_slack,
        times=np.array(times),
        frame_min_slack=mins,
    )


@dataclass(frozen=True)
class SubsolutionReport:
    max_residual_offcenter: float    # signed max of phi_t - phi_xx, |x| > 2h
    onesided_ok_at_zero: bool
    times: np.ndarray
    onesided_right: np.ndarray       # numeric (phi(0)-2phi(h)+phi(2h))/h^2 family
    onesided_left: np.ndarray
    expected_right: np.ndarray       # -(pi^2/4)/x_max^2 * amplitude
    expected_left: np.ndarray
    viscosity_gap: np.ndarray        # phi_t(0,t) - max(one-sided phi_xx)


def subsolution_residual(field: BarrierField, x_half_width: float,
                         t_range, h: float, k: float) -> SubsolutionReport:
    """Grid check that the barrier is a subsolution of the 1D heat equation.

    Off x = 0 the centered residual phi_t - phi_xx is reported (its signed
    maximum should sit below the truncation level 10(h^2 + k)); at x = 0 the
    two one-sided second differences are compared against the closed forms
    -(pi^2/4)/x_max^2 and -(pi^2/4)/x_min^2 times the amplitude, and the
    one-sided viscosity combination phi_t - max(phi_xx^onesided) <= 0 is
    verified up to truncation.
    """
    t_lo, t_hi = t_range
    ts = np.arange(t_lo + k, t_hi - k, k)
    xs = np.arange(-x_half_width, x_half_width + 0.5 * h, h)
    off = np.abs(xs) > 2.0 * h

    max_res = -np.inf
    ones_r, ones_l, exp_r, exp_l, visc = [], [], [], [], []
    for t in ts:
        # the moving interval only shrinks, so the bound at t + k is tightest
        xmin_t, xmax_t = field.x_bounds(min(t + k, field.track.t[-1]))
        usable = off & (xs > xmin_t + h) & (xs < xmax_t - h)
        if usable.any():
            phi0 = field.value(xs[usable], t)
            phi_p = field.value(xs[usable], t + k)
            phi_m = field.value(xs[usable], t - k)
            phixx = (field.value(xs[usable] + h, t) - 2.0 * phi0
                     + field.value(xs[usable] - h, t)) / (h * h)
            res = (phi_p - phi_m) / (2.0 * k) - phixx
            max_res = max(max_res, float(res.max()))

        p0 = field.center_value(t)
        pr = (field.value(np.array(2.0 * h), t) - 2.0 * field.value(np.array(h), t)
              + p0) / (h * h)
        pl = (field.value(np.array(-2.0 * h), t) - 2.0 * field.value(np.array(-h), t)
              + p0) / (h * h)
        xmin_t, xmax_t = field.x_bounds(t)
        amp = p0  # epsilon * exp(-f) * sqrt(T - t)
        er = -(np.pi**2 / 4.0) / xmax_t**2 * amp
        el = -(np.pi**2 / 4.0) / xmin_t**2 * amp
        phit0 = (field.center_value(t + k) - field.center_value(t - k)) / (2.0 * k)
        ones_r.append(float(pr))
        ones_l.append(float(pl))
        exp_r.append(float(er))
        exp_l.append(float(el))
        visc.append(float(phit0 - max(pr, pl)))

    ones_r = np.array(ones_r)
    ones_l = np.array(ones_l)
    exp_r = np.array(exp_r)
    exp_l = np.array(exp_l)
    visc = np.array(visc)
    tol_match = 5.0 * h
    tol_visc = 10.0 * (h + k)
    ok = (np.all(np.abs(ones_r - exp_r) <= tol_match)
          and np.all(np.abs(ones_l - exp_l) <= tol_match)
          and np.all(visc <= tol_visc))
    return SubsolutionReport(
        max_residual_offcenter=float(max_res),
        onesided_ok_at_zero=bool(ok),
        times=ts,
        onesided_right=ones_r, onesided_left=ones_l,
        expected_right=exp_r, expected_left=exp_l,
        viscosity_gap=visc,
    )
