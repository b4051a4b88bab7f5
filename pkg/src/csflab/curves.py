"""Closed polyline curves in R^n and their geometric primitives.

A curve is an ordered list of vertices with an implicit closing edge; all
index arithmetic is periodic.  Geometric measurements that must beat the
chordal O(h^2) floor (total arc length, equal-arc-length resampling) go
through a periodic cubic spline refined to a dense polyline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

MIN_VERTICES = 16
DEGENERATE_LENGTH = 1e-10


@dataclass(frozen=True)
class Curve:
    """Closed polyline in R^n (n >= 2); vertex 0 marks the parameter origin."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be an (N, n) array")
        object.__setattr__(self, "points", pts)
        if pts.shape[0] < MIN_VERTICES:
            raise ValueError(f"need at least {MIN_VERTICES} vertices, got {pts.shape[0]}")
        if pts.shape[1] < 2:
            raise ValueError("ambient dimension must be >= 2")
        if not np.all(np.isfinite(pts)):
            raise ValueError("vertex coordinates must be finite")
        edges = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        total = float(edges.sum())
        if total < DEGENERATE_LENGTH:
            raise ValueError("degenerate curve: total length below 1e-10")
        if float(edges.min()) <= 1e-12 * total:
            raise ValueError("consecutive vertices coincide (zero-length edge)")

    @property
    def n_vertices(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def edge_lengths(self) -> np.ndarray:
        """Chord length of edge i -> i+1 (index mod N)."""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    def length(self) -> float:
        """Chordal (polyline) length including the closing edge."""
        return float(self.edge_lengths().sum())

    def diameter(self) -> float:
        """Bounding-box diagonal; cheap O(N) size proxy used by stop rules."""
        p = self.points
        return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0)))

    def translated(self, offset) -> "Curve":
        return Curve(self.points + np.asarray(offset, dtype=float))

    def scaled(self, factor: float) -> "Curve":
        return Curve(self.points * float(factor))

    def transformed(self, matrix) -> "Curve":
        return Curve(self.points @ np.asarray(matrix, dtype=float).T)


def _closed_spline(points: np.ndarray):
    """Periodic cubic spline through the vertices, parameterized by chord length."""
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    return CubicSpline(s, closed, axis=0, bc_type="periodic"), s[-1]


def _dense_arclength(points: np.ndarray, factor: int):
    """Spline through the vertices plus a dense arc-length table along it."""
    spline, total = _closed_spline(points)
    m = factor * len(points)
    sd = np.linspace(0.0, total, m + 1)
    dense = spline(sd)
    arc = np.concatenate(
        [[0.0], np.cumsum(np.linalg.norm(np.diff(dense, axis=0), axis=1))]
    )
    return spline, sd, arc


def smooth_length(curve: Curve, dense_factor: int = 32) -> float:
    """Arc length of the periodic spline through the vertices.

    Fourth-order accurate for smoothly sampled curves, unlike the chordal
    sum which underestimates by O(h^2).
    """
    _, _, arc = _dense_arclength(curve.points, dense_factor)
    return float(arc[-1])


def arc_positions(curve: Curve, dense_factor: int = 32) -> np.ndarray:
    """Cumulative spline arc length at each vertex (N+1 values, last = total)."""
    _, sd, arc = _dense_arclength(curve.points, dense_factor)
    vertex_s = np.concatenate([[0.0], np.cumsum(curve.edge_lengths())])
    return np.interp(vertex_s, sd, arc)


def resample_equal_arclength(curve: Curve, n_out: int, dense_factor: int = 32) -> Curve:
    """Redistribute n_out vertices at equal arc spacing along the curve.

    Vertex 0 of the output sits at the input's parameter origin, so vertex
    indexing stays aligned across repeated resampling.  Tangential
    redistribution only: the image (up to interpolation error) and the total
    arc length are preserved.
    """
    if n_out < MIN_VERTICES:
        raise ValueError(f"n_out must be >= {MIN_VERTICES}")
    if curve.length() < DEGENERATE_LENGTH:
        raise ValueError("degenerate curve: total length below 1e-10")
    e = curve.edge_lengths()
    if n_out == curve.n_vertices and float(e.max() - e.min()) <= 1e-12 * float(e.mean()):
        return curve
    spline, sd, arc = _dense_arclength(curve.points, dense_factor)
    targets = arc[-1] * np.arange(n_out) / n_out
    u = np.interp(targets, arc, sd)
    return Curve(spline(u))


def curvature_vector(curve: Curve, max_spacing_ratio: float = 1.1) -> np.ndarray:
    """Second arc-length derivative of the position by centered differences.

    Requires near-uniform spacing (max/min chord ratio <= 1.1) so the
    3-point stencil stays second order; resample first otherwise.
    """
    e = curve.edge_lengths()
    ratio = float(e.max() / e.min())
    if ratio > max_spacing_ratio:
        raise ValueError(
            f"spacing ratio {ratio:.4f} exceeds {max_spacing_ratio}; "
            "apply resample_equal_arclength first"
        )
    p = curve.points
    fwd = np.roll(p, -1, axis=0) - p
    bwd = p - np.roll(p, 1, axis=0)
    hf = e[:, None]
    hb = np.roll(e, 1)[:, None]
    return 2.0 * (fwd / hf - bwd / hb) / (hf + hb)


def unit_tangents(curve: Curve) -> np.ndarray:
    """Unit tangent at each vertex from the centered chord."""
    p = curve.points
    chord = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    return chord / np.linalg.norm(chord, axis=1)[:, None]


def project_xy(curve: Curve) -> Curve:
    """Orthogonal projection onto the first two coordinates."""
    return Curve(curve.points[:, :2].copy())


def horizontal_speed(curve: Curve) -> np.ndarray:
    """Per-vertex squared speed of the projected unit tangent, x_s^2 + y_s^2."""
    t = unit_tangents(curve)
    return t[:, 0] ** 2 + t[:, 1] ** 2


def turning_angle(curve: Curve, floor: float = 1e-8) -> np.ndarray:
    """Continuous angle lift of the projected tangent against the +x axis.

    Rejects curves whose projected tangent drops below the horizontal-speed
    floor, naming the offending vertex.
    """
    t = unit_tangents(curve)
    horiz = np.hypot(t[:, 0], t[:, 1])
    if float(horiz.min()) <= floor:
        bad = int(np.argmin(horiz))
        raise ValueError(
            f"projected tangent below floor {floor:g} at vertex {bad}"
        )
    return np.unwrap(np.arctan2(t[:, 1], t[:, 0]))


def total_turning(curve: Curve, floor: float = 1e-8) -> float:
    """Total change of the angle lift over one loop (2*pi times the winding)."""
    lift = turning_angle(curve, floor=floor)
    raw = np.concatenate([lift, lift[:1]])
    d = np.diff(raw)
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    return float(d.sum())


def _winding_about(xy: np.ndarray, center) -> int:
    """Winding number of a closed 2D polyline about a point, by angle summation."""
    q = xy - np.asarray(center, dtype=float)
    ang = np.arctan2(q[:, 1], q[:, 0])
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    return int(np.rint(d.sum() / (2.0 * np.pi)))


@dataclass(frozen=True)
class CircleFit:
    """Least-squares circle in the principal 2-plane of the vertex cloud."""

    center: np.ndarray
    radius: float
    plane_basis: np.ndarray  # (2, dim), orthonormal rows
    rms_residual: float  # vertex distance to the fitted circle, relative to radius
    multiplicity: int  # winding of the projected curve about the fitted center


def fit_circle(curve: Curve) -> CircleFit:
    """Fit a circle to the vertex cloud of a (possibly non-planar) curve.

    The 2-plane comes from the top two principal directions; center and
    radius solve the algebraic least-squares problem in that plane.  The
    residual mixes in-plane radial deviation with out-of-plane offset.
    """
    p = curve.points
    centroid = p.mean(axis=0)
    q = p - centroid
    _, sing, vt = np.linalg.svd(q, full_matrices=False)
    if sing[1] <= 1e-12 * sing[0]:
        raise ValueError("no 2-plane: vertex cloud is collinear")
    basis = vt[:2]
    xy = q @ basis.T
    a = np.column_stack([2.0 * xy, np.ones(len(xy))])
    b = (xy**2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    cxy = sol[:2]
    radius = float(np.sqrt(max(sol[2] + cxy @ cxy, 0.0)))
    center = centroid + basis.T @ cxy
    inplane = xy - cxy
    rho = np.linalg.norm(inplane, axis=1)
    out_of_plane = q - xy @ basis
    dist = np.hypot(rho - radius, np.linalg.norm(out_of_plane, axis=1))
    rms = float(np.sqrt(np.mean(dist**2)) / radius)
    mult = abs(_winding_about(inplane, (0.0, 0.0)))
    return CircleFit(
        center=center,
        radius=radius,
        plane_basis=basis,
        rms_residual=rms,
        multiplicity=mult,
    )
