"""Planar-projection diagnostics for space curves.

Everything here looks at the image of a curve under the projection onto
the first two coordinates: the convexity/injectivity predicate with the
secant-slope constant and horizontal-speed floor, the upper/lower branch
decomposition with the vertical gap Y, the analysis window width, and the
per-frame tracking of the two origin-nearest points with their enclosed
areas.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .curves import Curve, unit_tangents


@dataclass(frozen=True)
class ProjectionReport:
    is_injective: bool
    is_convex: bool
    slope_constant_M: float        # max |p1-p2| / |Pxy p1 - Pxy p2|; nan if undefined
    horizontal_floor_delta: float  # min over vertices of x_s^2 + y_s^2
    winding: int                   # turning number of the projected polyline
    degenerate: bool = False


def _shoelace(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _turning_number(xy: np.ndarray) -> int:
    v = np.roll(xy, -1, axis=0) - xy
    vn = np.roll(v, -1, axis=0)
    cross = v[:, 0] * vn[:, 1] - v[:, 1] * vn[:, 0]
    dot = (v * vn).sum(axis=1)
    return int(np.rint(np.arctan2(cross, dot).sum() / (2.0 * np.pi)))


def _segments_intersect(xy: np.ndarray, scale: float) -> bool:
    """Brute-force self-intersection test of a closed polyline.

    Detects proper crossings, touching/collinear overlaps, and coincident
    non-adjacent vertices (a crossing that lands exactly on a sample point).
    """
    n = len(xy)
    # coincident non-adjacent vertices
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
    band = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    adjacent = (band <= 1) | (band >= n - 1)
    if float(d2[~adjacent].min()) < (1e-9 * scale) ** 2:
        return True

    a = xy
    b = np.roll(xy, -1, axis=0)
    eps = 1e-12 * scale * scale
    tol = 1e-9 * scale
    for i in range(n - 1):
        # skip the two neighbors that share an endpoint with segment i
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if len(js) == 0:
            continue
        p, q = a[i], b[i]
        r = q - p
        c, d = a[js], b[js]
        s = d - c

        def cr(u, w):
            return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]

        d1 = cr(r, c - p)
        d2_ = cr(r, d - p)
        d3 = cr(s, p - c)
        d4 = cr(s, q - c)
        if ((d1 * d2_ < -eps) & (d3 * d4 < -eps)).any():
            return True
        # touching or collinear-overlap candidates, confirmed by box overlap
        touch = ((np.minimum(np.abs(d1), np.abs(d2_)) <= eps)
                 | (np.minimum(np.abs(d3), np.abs(d4)) <= eps))
        touch &= (d1 * d2_ <= eps) & (d3 * d4 <= eps)
        if touch.any():
            lo = np.minimum(c[touch], d[touch])
            hi = np.maximum(c[touch], d[touch])
            plo, phi = np.minimum(p, q), np.maximum(p, q)
            overlap = np.all(lo <= phi + tol, axis=1) & np.all(plo - tol <= hi, axis=1)
            if overlap.any():
                return True
    return False


def projection_report(curve: Curve) -> ProjectionReport:
    """Convexity/injectivity verdict of the xy-projection plus the two constants.

    Convexity uses sign-constancy of consecutive edge cross products (with a
    zero band for discretization noise) together with turning number +-1 and
    a nondegenerate enclosed area; a convex simple projection is injective
    outright, anything else falls back to a brute-force segment test.
    """
    xy = curve.points[:, :2]
    span = xy.max(axis=0) - xy.min(axis=0)
    scale = float(np.linalg.norm(span))
    if scale < 1e-10:
        return ProjectionReport(
            is_injective=False, is_convex=False, slope_constant_M=float("nan"),
            horizontal_floor_delta=0.0, winding=0, degenerate=True,
        )

    v = np.roll(xy, -1, axis=0) - xy
    vn = np.roll(v, -1, axis=0)
    cross = v[:, 0] * vn[:, 1] - v[:, 1] * vn[:, 0]
    band = 1e-10 * scale * scale
    signs = cross[np.abs(cross) >= band]
    locally_convex = len(signs) > 0 and (np.all(signs > 0) or np.all(signs < 0))
    winding = _turning_number(xy)
    area = abs(_shoelace(xy))
    is_convex = bool(locally_convex and abs(winding) == 1 and area > band)

    if is_convex:
        is_injective = True
    else:
        is_injective = not _segments_intersect(xy, scale)

    full = pdist(curve.points)
    proj = pdist(xy)
    ok = proj > 1e-14 * scale
    m_val = float((full[ok] / proj[ok]).max()) if ok.any() else float("nan")
    if not ok.all() and float(full[~ok].max()) > 1e-9 * scale:
        m_val = float("inf")

    horiz = unit_tangents(curve)[:, :2]
    delta = float((horiz**2).sum(axis=1).min())
    return ProjectionReport(
        is_injective=is_injective, is_convex=is_convex, slope_constant_M=m_val,
        horizontal_floor_delta=delta, winding=winding,
    )


@dataclass(frozen=True)
class BranchSplit:
    """Upper/lower graphs of the curve over the x-axis of the projection."""

    i_max: int
    i_min: int
    x_grid: np.ndarray
    upper: np.ndarray   # (grid_n, dim-1): y and z components of the upper branch
    lower: np.ndarray
    Y: np.ndarray       # vertical gap y_upper - y_lower on the grid


def _chain_indices(i_from: int, i_to: int, n: int) -> np.ndarray:
    if i_to >= i_from:
        return np.arange(i_from, i_to + 1)
    return np.concatenate([np.arange(i_from, n), np.arange(0, i_to + 1)])


def branch_split(curve: Curve, grid_n: int) -> BranchSplit:
    """Split at the x-extrema and interpolate both branches onto a common grid.

    Requires a convex injective projection; each branch must be graphical in
    x (monotone along the chain up to a small tolerance).
    """
    rep = projection_report(curve)
    if not (rep.is_convex and rep.is_injective):
        raise ValueError("branch split needs a one-to-one convex projection")
    if grid_n < 3:
        raise ValueError("grid_n must be >= 3")
    pts = curve.points
    x = pts[:, 0]
    n = len(x)
    i_max = int(np.argmax(x))
    i_min = int(np.argmin(x))
    scale = float(x[i_max] - x[i_min])
    tol = 1e-9 * scale

    chains = []
    for i_from, i_to in ((i_min, i_max), (i_max, i_min)):
        idx = _chain_indices(i_from, i_to, n)
        cx = x[idx]
        if cx[0] > cx[-1]:
            idx = idx[::-1]
            cx = cx[::-1]
        if np.any(np.diff(cx) < -tol):
            raise ValueError("branch not graphical: x is not monotone along a branch")
        cx = np.maximum.accumulate(cx)
        # break exact ties so np.interp sees strictly increasing abscissae
        cx = cx + np.arange(len(cx)) * (tol * 1e-6)
        chains.append((cx, pts[idx, 1:]))

    x_grid = np.linspace(x[i_min], x[i_max], grid_n)
    interped = []
    for cx, rest in chains:
        cols = [np.interp(x_grid, cx, rest[:, j]) for j in range(rest.shape[1])]
        interped.append(np.column_stack(cols))
    mid = grid_n // 2
    if interped[0][mid, 0] >= interped[1][mid, 0]:
        upper, lower = interped
    else:
        lower, upper = interped
    return BranchSplit(
        i_max=i_max, i_min=i_min, x_grid=x_grid,
        upper=upper, lower=lower, Y=upper[:, 0] - lower[:, 0],
    )


def linear_scale(delta: float, H: float) -> float:
    """Analysis window half-width delta / (20 H)."""
    if delta <= 0 or H <= 0:
        raise ValueError("delta and H must be positive")
    return delta / (20.0 * H)


@dataclass(frozen=True)
class MinPointTrack:
    """Per-frame origin-nearest points of the two projected branches.

    A1/A2 are the areas of the two regions bounded by the segments from the
    origin to each tracked point and the projected curve arcs; delta0 is the
    running floor of min(A1, A2).
    """

    tau: np.ndarray
    p: np.ndarray        # (m, 2) tracked point on the upper branch
    q: np.ndarray        # (m, 2) tracked point on the lower branch
    A1: np.ndarray
    A2: np.ndarray
    delta0: float
    degenerate_any: bool
    continuity_ok: bool


def _branch_chains(xy: np.ndarray):
    x = xy[:, 0]
    n = len(x)
    i_max = int(np.argmax(x))
    i_min = int(np.argmin(x))
    up = _chain_indices(i_min, i_max, n)
    lo = _chain_indices(i_max, i_min, n)
    if xy[up, 1].mean() < xy[lo, 1].mean():
        up, lo = lo, up
    return up, lo


def _split_areas(xy: np.ndarray, ip: int, iq: int):
    n = len(xy)

    def arc(i_from, i_to, full_if_equal):
        if i_from == i_to:
            if not full_if_equal:
                return np.array([i_from])
            return np.concatenate([np.arange(i_from, n), np.arange(0, i_to + 1)])
        return _chain_indices(i_from, i_to, n)

    # the two arcs must cover every edge of the loop exactly once
    arc1 = arc(ip, iq, full_if_equal=False)
    arc2 = arc(iq, ip, full_if_equal=True)

    # polygons [O, arc...] whose origin terms vanish identically in the shoelace
    def poly_area(idx):
        pts = xy[idx]
        x, y = pts[:, 0], pts[:, 1]
        s = float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))
        return 0.5 * s

    return abs(poly_area(arc1)), abs(poly_area(arc2))


def min_point_track(states, degeneracy_tol: float = 1e-3) -> MinPointTrack:
    """Track the |projection|^2 minimizers of each branch along rescaled frames.

    On near-circular frames every vertex ties; the tie-break keeps the
    previous tracked vertex, initialized at the branch points nearest the
    y-axis (the lower one sitting on the negative y-axis).
    """
    taus, ps, qs, a1s, a2s = [], [], [], [], []
    prev = None
    degenerate_any = False
    continuity_ok = True
    prev_tau = None
    for st in states:
        xy = st.curve.points[:, :2]
        up, lo = _branch_chains(xy)
        r2 = (xy**2).sum(axis=1)
        spread = float(r2.max() - r2.min())
        degenerate = spread < degeneracy_tol * float(r2.max())
        picks = []
        for chain, prev_pt, side in ((up, None if prev is None else prev[0], +1),
                                     (lo, None if prev is None else prev[1], -1)):
            if degenerate:
                if prev_pt is not None:
                    d = np.linalg.norm(xy[chain] - prev_pt, axis=1)
                    picks.append(int(chain[np.argmin(d)]))
                else:
                    # nearest to the y-axis on this branch (sign of y matches side)
                    cost = np.abs(xy[chain, 0]) + np.where(
                        np.sign(xy[chain, 1]) == side, 0.0, 1e6
                    )
                    picks.append(int(chain[np.argmin(cost)]))
            else:
                picks.append(int(chain[np.argmin(r2[chain])]))
        if degenerate and not degenerate_any:
            degenerate_any = True
            warnings.warn(
                "near-degenerate |projection|^2: min points tie-broken by continuity",
                stacklevel=2,
            )
        ip, iq = picks
        p_pt, q_pt = xy[ip], xy[iq]
        if prev is not None:
            e = np.linalg.norm(np.roll(xy, -1, axis=0) - xy, axis=1)
            spacing = float(e.mean())
            dtau = st.tau - prev_tau
            speed = 2.0 * (1.0 + float(np.sqrt(r2.max())))
            allowed = 10.0 * (spacing + dtau * speed)
            if (np.linalg.norm(p_pt - prev[0]) > allowed
                    or np.linalg.norm(q_pt - prev[1]) > allowed):
                continuity_ok = False
        a1, a2 = _split_areas(xy, ip, iq)
        taus.append(st.tau)
        ps.append(p_pt)
        qs.append(q_pt)
        a1s.append(a1)
        a2s.append(a2)
        prev = (p_pt, q_pt)
        prev_tau = st.tau
    a1s = np.array(a1s)
    a2s = np.array(a2s)
    return MinPointTrack(
        tau=np.array(taus), p=np.array(ps), q=np.array(qs),
        A1=a1s, A2=a2s,
        delta0=float(np.minimum(a1s, a2s).min()) if len(a1s) else float("nan"),
        degenerate_any=degenerate_any, continuity_ok=continuity_ok,
    )
