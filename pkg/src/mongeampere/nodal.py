"""Nodal convex functions and their Monge-Ampere masses.

A nodal convex function is the lower convex hull of lifted boundary samples
and lifted interior nodes over a convex polygonal domain. Its Monge-Ampere
measure is atomic: each node carries the area of its subgradient cell, the
set of slopes of supporting planes touching the graph at that node. The
cell is cut out by one half-plane per other lifted point w,

    p . (x_w - x_i) <= z_w - z_i,

so inactive lifted points (strictly above the hull) contribute constraints
that are automatically slack.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import InitVar, dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _clip
from .errors import OutsideDomainError, UnboundedCellError
from .geometry import (
    BOX_HALF_SIDE,
    EPS_GEOM,
    ConvexPolygon,
    Region,
    _as_point,
    _intersect_arrays,
)


def _split_samples(samples) -> tuple[np.ndarray, np.ndarray]:
    """Accept [(point, value), ...] or (m, 3) rows and split into arrays."""
    pts: list[list[float]] = []
    vals: list[float] = []
    for item in samples:
        item = list(item)
        if len(item) == 2:
            p = _as_point(item[0])
            pts.append([p[0], p[1]])
            vals.append(float(item[1]))
        elif len(item) == 3:
            pts.append([float(item[0]), float(item[1])])
            vals.append(float(item[2]))
        else:
            raise ValueError("boundary samples must be (point, value) pairs")
    return (
        np.asarray(pts, dtype=float).reshape(-1, 2),
        np.asarray(vals, dtype=float).reshape(-1),
    )


def _validate_boundary(domain: ConvexPolygon, points: np.ndarray, values: np.ndarray):
    if len(points) != len(values):
        raise ValueError("boundary points and values differ in length")
    if len(points) == 0:
        raise ValueError("need boundary samples")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
        raise ValueError("boundary samples must be finite")
    scale = max(1.0, float(np.abs(domain.vertices).max()))
    tol = EPS_GEOM * scale
    for p in points:
        if abs(domain.boundary_distance(p)) > tol:
            raise ValueError(f"boundary sample {p} does not lie on the domain boundary")
    for v in domain.vertices:
        gap = np.hypot(points[:, 0] - v[0], points[:, 1] - v[1]).min()
        if gap > tol:
            raise ValueError(f"boundary samples must cover domain vertex {v}")


def _validate_nodes(domain: ConvexPolygon, nodes: np.ndarray):
    if not np.all(np.isfinite(nodes)):
        raise ValueError("nodes must be finite")
    scale = max(1.0, float(np.abs(domain.vertices).max()))
    tol = EPS_GEOM * scale
    for x in nodes:
        if domain.boundary_distance(x) <= tol:
            raise ValueError(f"node {x} is not strictly inside the domain")


@dataclass(frozen=True)
class NodalConvexFunction:
    """Lower convex hull of lifted boundary samples and interior nodes."""

    domain: ConvexPolygon
    boundary_points: np.ndarray
    boundary_values: np.ndarray
    nodes: np.ndarray
    heights: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        bp = np.ascontiguousarray(self.boundary_points, dtype=float).reshape(-1, 2)
        bv = np.ascontiguousarray(self.boundary_values, dtype=float).reshape(-1)
        nd = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, 2)
        hh = np.ascontiguousarray(self.heights, dtype=float).reshape(-1)
        if len(nd) != len(hh):
            raise ValueError("one height per node required")
        if not np.all(np.isfinite(hh)):
            raise ValueError("heights must be finite")
        if validate:
            _validate_boundary(self.domain, bp, bv)
            _validate_nodes(self.domain, nd)
        for arr in (bp, bv, nd, hh):
            arr.setflags(write=False)
        object.__setattr__(self, "boundary_points", bp)
        object.__setattr__(self, "boundary_values", bv)
        object.__setattr__(self, "nodes", nd)
        object.__setattr__(self, "heights", hh)

    @classmethod
    def from_samples(cls, domain, boundary_samples, nodes, heights) -> "NodalConvexFunction":
        bp, bv = _split_samples(boundary_samples)
        return cls(domain, bp, bv, np.asarray(nodes, dtype=float), np.asarray(heights, dtype=float))

    def lifted_points(self) -> np.ndarray:
        """(n_nodes + n_samples, 3) lifted points, nodes first."""
        top = np.column_stack([self.nodes, self.heights])
        bot = np.column_stack([self.boundary_points, self.boundary_values])
        return np.vstack([top, bot])

    def with_height(self, i: int, z: float) -> "NodalConvexFunction":
        h = self.heights.copy()
        h[i] = z
        return NodalConvexFunction(
            self.domain, self.boundary_points, self.boundary_values, self.nodes, h,
            validate=False,
        )

    def _lower_planes(self) -> np.ndarray:
        cached = getattr(self, "_planes", None)
        if cached is None:
            cached = lower_hull_planes(self.lifted_points())
            object.__setattr__(self, "_planes", cached)
        return cached

    def __call__(self, x) -> float:
        return evaluate(self, x)


@dataclass(frozen=True)
class MAMeasure:
    """Atomic Monge-Ampere measure: one nonnegative mass per node."""

    masses: np.ndarray
    total: float = field(init=False, default=0.0)

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if np.any(~np.isfinite(m)) or np.any(m < 0.0):
            raise ValueError("masses must be finite and nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "total", float(m.sum()))


def lower_hull_planes(points: np.ndarray) -> np.ndarray:
    """Affine pieces (a, b, c) of the lower hull: hull(x) = max(a x1 + b x2 + c).

    Affinely degenerate inputs (all lifted points on one plane) collapse to a
    single row.
    """
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[-1] <= 1e-12 * max(1.0, float(svals[0])):
        design = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
        coef, *_ = np.linalg.lstsq(design, pts[:, 2], rcond=None)
        return coef.reshape(1, 3)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options="QJ")
    eq = hull.equations
    lower = eq[:, 2] < -1e-10
    eq = eq[lower]
    return np.column_stack([-eq[:, 0] / eq[:, 2], -eq[:, 1] / eq[:, 2], -eq[:, 3] / eq[:, 2]])


def evaluate(f: NodalConvexFunction, x) -> float:
    """Value of the lower convex hull at a point of the domain."""
    x = _as_point(x)
    if not f.domain.contains(x):
        raise OutsideDomainError(f"point {x} lies outside the domain")
    pl = f._lower_planes()
    return float(np.max(pl[:, 0] * x[0] + pl[:, 1] * x[1] + pl[:, 2]))


def _cell_constraints(lifted: np.ndarray, i: int):
    """Half-plane arrays for the cell of node i, or (None, None) if a
    coincident lifted point sits strictly below the node."""
    xi = lifted[i, :2]
    zi = lifted[i, 2]
    rest = np.delete(lifted, i, axis=0)
    normals = rest[:, :2] - xi
    offsets = rest[:, 2] - zi
    norms = np.hypot(normals[:, 0], normals[:, 1])
    scale = max(1.0, float(np.abs(rest[:, :2]).max()))
    tiny = norms <= EPS_GEOM * scale
    if np.any(tiny):
        if np.any(offsets[tiny] < 0.0):
            return None, None
        normals = normals[~tiny]
        offsets = offsets[~tiny]
        if len(normals) == 0:
            raise UnboundedCellError("no usable constraints around the node")
    return np.ascontiguousarray(normals), np.ascontiguousarray(offsets)


def subgradient_cell(f: NodalConvexFunction, i: int) -> Region:
    """Subgradient cell of node i as an exact region in gradient space.

    Inactive nodes (strictly above the hull) yield the empty region; an
    unbounded cell raises UnboundedCellError, which signals that the
    boundary samples do not pin the hull around the node.
    """
    n = len(f.nodes)
    if not 0 <= i < n:
        raise IndexError(f"node index {i} out of range for {n} nodes")
    normals, offsets = _cell_constraints(f.lifted_points(), i)
    if normals is None:
        return Region.empty()
    region = _intersect_arrays(normals, offsets)
    if region.is_unbounded:
        raise UnboundedCellError(
            f"subgradient cell of node {i} is unbounded; boundary sampling does not pin the hull"
        )
    return region


def ma_masses(f: NodalConvexFunction, parallel: bool = False) -> MAMeasure:
    """Monge-Ampere masses of all nodes: masses[i] = area(subgradient_cell(f, i))."""
    lifted = f.lifted_points()
    n = len(f.nodes)

    def one(i: int) -> float:
        normals, offsets = _cell_constraints(lifted, i)
        if normals is None:
            return 0.0
        area = _clip.clip_refined_area(normals, offsets, 0.0, 0.0, BOX_HALF_SIDE)
        if area < 0.0:
            # box touched: classify rigorously (raises when truly unbounded)
            return subgradient_cell(f, i).area
        return area

    if parallel and n > 1:
        with ThreadPoolExecutor() as pool:
            masses = np.fromiter(pool.map(one, range(n)), dtype=float, count=n)
    else:
        masses = np.fromiter((one(i) for i in range(n)), dtype=float, count=n)
    return MAMeasure(masses)


def convex_envelope(domain: ConvexPolygon, boundary_samples, nodes) -> NodalConvexFunction:
    """Envelope of the boundary data alone, recorded as node heights.

    Every node lands on a face or crease of the boundary hull, so the
    interior Monge-Ampere measure of the result vanishes.
    """
    bp, bv = _split_samples(boundary_samples)
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    planes = lower_hull_planes(np.column_stack([bp, bv]))
    if len(nodes):
        vals = planes[None, :, 0] * nodes[:, 0, None] + planes[None, :, 1] * nodes[:, 1, None] + planes[None, :, 2]
        heights = vals.max(axis=1)
    else:
        heights = np.zeros(0)
    return NodalConvexFunction(domain, bp, bv, nodes, heights)
