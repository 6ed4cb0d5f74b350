"""Planar convex geometry: half-planes, polygons, and exact intersections.

Everything is double precision and governed by the single tolerance
EPS_GEOM, used for vertex deduplication and turn tests. Intersections are
computed by incremental clipping of a large square (side 1e9); emptiness
and unboundedness are settled exactly with a feasibility LP and a recession
cone test on the constraint normals.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from . import _clip
from .errors import InvalidConstraintError, InvalidPolygonError, OutsideDomainError

EPS_GEOM = 1e-12
BOX_HALF_SIDE = 5e8


def _as_point(x) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(2)
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class HalfPlane:
    """Closed half-plane {p : normal . p <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = _as_point(self.normal)
        off = float(self.offset)
        if not np.isfinite(off):
            raise InvalidConstraintError("half-plane offset must be finite")
        if float(np.hypot(n[0], n[1])) <= 0.0:
            raise InvalidConstraintError("half-plane normal must be nonzero")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", off)

    def contains(self, p, tol: float = 0.0) -> bool:
        return float(self.normal @ _as_point(p)) <= self.offset + tol


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices.

    Vertices must be pairwise distinct at tolerance EPS_GEOM and every turn
    must be non-reflex. A fully collinear vertex list survives construction
    (all cross products vanish) but is rejected by polygon_metrics.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidPolygonError("need at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidPolygonError("vertices must be finite")
        v = np.ascontiguousarray(v)
        scale = max(1.0, float(np.abs(v).max()))
        gaps = v - np.roll(v, 1, axis=0)
        if np.any(np.hypot(gaps[:, 0], gaps[:, 1]) <= EPS_GEOM * scale):
            raise InvalidPolygonError("repeated vertices")
        e_in = v - np.roll(v, 1, axis=0)
        e_out = np.roll(v, -1, axis=0) - v
        cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        if np.any(cross <= -EPS_GEOM * scale * scale):
            raise InvalidPolygonError("vertices must turn counter-clockwise")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - y * np.roll(x, -1)))

    @property
    def diameter(self) -> float:
        """Largest pairwise vertex distance."""
        v = self.vertices
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))

    def edge_halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward edge normals N and offsets b with the polygon = {p : N p <= b}."""
        cached = getattr(self, "_edges", None)
        if cached is None:
            v = self.vertices
            e = np.roll(v, -1, axis=0) - v
            normals = np.ascontiguousarray(np.stack([e[:, 1], -e[:, 0]], axis=1))
            offsets = np.ascontiguousarray(np.sum(normals * v, axis=1))
            cached = (normals, offsets)
            object.__setattr__(self, "_edges", cached)
        return cached

    def boundary_distance(self, x) -> float:
        """Distance from x to the boundary, signed positive inside."""
        x = _as_point(x)
        normals, offsets = self.edge_halfplanes()
        norms = np.hypot(normals[:, 0], normals[:, 1])
        return float(np.min((offsets - normals @ x) / norms))

    def contains(self, x, tol: float | None = None) -> bool:
        if tol is None:
            tol = EPS_GEOM * max(1.0, float(np.abs(self.vertices).max()))
        return self.boundary_distance(x) >= -tol


class RegionKind(Enum):
    EMPTY = "empty"
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Region:
    """Intersection of half-planes: empty, a polygon, or unbounded.

    Feasible sets with empty interior (a point or a segment) are reported
    as empty: no valid polygon represents them and they carry no area.
    """

    kind: RegionKind
    polygon: ConvexPolygon | None = None

    def __post_init__(self):
        if (self.kind is RegionKind.BOUNDED) != (self.polygon is not None):
            raise ValueError("exactly the bounded region carries a polygon")

    @classmethod
    def empty(cls) -> "Region":
        return cls(RegionKind.EMPTY)

    @classmethod
    def unbounded(cls) -> "Region":
        return cls(RegionKind.UNBOUNDED)

    @classmethod
    def bounded(cls, polygon: ConvexPolygon) -> "Region":
        return cls(RegionKind.BOUNDED, polygon)

    @property
    def is_empty(self) -> bool:
        return self.kind is RegionKind.EMPTY

    @property
    def is_bounded(self) -> bool:
        return self.kind is RegionKind.BOUNDED

    @property
    def is_unbounded(self) -> bool:
        return self.kind is RegionKind.UNBOUNDED

    @property
    def area(self) -> float:
        """0 when empty, the polygon area when bounded, inf when unbounded."""
        if self.kind is RegionKind.EMPTY:
            return 0.0
        if self.kind is RegionKind.UNBOUNDED:
            return float("inf")
        return self.polygon.area


def _cleanup_vertices(verts: np.ndarray) -> np.ndarray:
    """Merge EPS_GEOM-close vertices, then drop collinear ones (circularly)."""
    if len(verts) == 0:
        return verts.reshape(0, 2)
    scale = max(1.0, float(np.abs(verts).max()))
    tol = EPS_GEOM * scale
    kept: list[np.ndarray] = []
    for p in verts:
        if not kept or float(np.hypot(*(p - kept[-1]))) > tol:
            kept.append(p)
    while len(kept) > 1 and float(np.hypot(*(kept[0] - kept[-1]))) <= tol:
        kept.pop()
    changed = True
    while changed and len(kept) >= 3:
        changed = False
        out: list[np.ndarray] = []
        m = len(kept)
        for j in range(m):
            a, b, c = kept[j - 1], kept[j], kept[(j + 1) % m]
            e1 = b - a
            e2 = c - b
            cross = e1[0] * e2[1] - e1[1] * e2[0]
            if abs(cross) <= EPS_GEOM * max(1.0, float(np.hypot(*e1) * np.hypot(*e2))):
                changed = True
                continue
            out.append(b)
        kept = out
    return np.array(kept, dtype=float).reshape(-1, 2)


def _recession_nontrivial(normals: np.ndarray) -> bool:
    # the recession cone {d : n . d <= 0 for all n} is nontrivial exactly when
    # all normals fit inside some closed half-plane, i.e. the largest angular
    # gap between consecutive normals is at least pi
    ang = np.sort(np.arctan2(normals[:, 1], normals[:, 0]))
    gaps = np.diff(ang, append=ang[0] + 2.0 * np.pi)
    return bool(gaps.max() >= np.pi - 1e-12)


def _lp_feasible(normals: np.ndarray, offsets: np.ndarray):
    res = linprog(
        c=np.zeros(2),
        A_ub=normals,
        b_ub=offsets,
        bounds=[(None, None), (None, None)],
        method="highs",
    )
    if res.status == 0:
        return True, np.asarray(res.x, dtype=float)
    if res.status == 2:
        return False, None
    if res.status == 3:
        x = None if res.x is None else np.asarray(res.x, dtype=float)
        return True, x
    raise InvalidConstraintError(f"feasibility LP failed with status {res.status}")


def _bounded_from_buffer(buf: np.ndarray, count: int) -> Region:
    if count >= 3:
        verts = _cleanup_vertices(buf[:count].copy())
        if len(verts) >= 3:
            return Region.bounded(ConvexPolygon(verts))
    return Region.empty()


def _reclip_bounded(normals, offsets, center=None) -> Region:
    if center is None:
        feasible, center = _lp_feasible(normals, offsets)
        if not feasible or center is None:
            return Region.empty()
    buf, count, touched = _clip.clip_refined(
        normals, offsets, float(center[0]), float(center[1]), BOX_HALF_SIDE
    )
    if touched:
        raise InvalidConstraintError(
            "bounded feasible set exceeds the supported coordinate range"
        )
    return _bounded_from_buffer(buf, count)


def _intersect_arrays(normals: np.ndarray, offsets: np.ndarray) -> Region:
    normals = np.ascontiguousarray(normals, dtype=float)
    offsets = np.ascontiguousarray(offsets, dtype=float)
    if normals.ndim != 2 or normals.shape[1] != 2 or normals.shape[0] == 0:
        raise InvalidConstraintError("need a non-empty list of half-planes")
    if not (np.all(np.isfinite(normals)) and np.all(np.isfinite(offsets))):
        raise InvalidConstraintError("constraints must be finite")
    if np.any(np.hypot(normals[:, 0], normals[:, 1]) <= 0.0):
        raise InvalidConstraintError("half-plane normal must be nonzero")

    buf, count, touched = _clip.clip_refined(normals, offsets, 0.0, 0.0, BOX_HALF_SIDE)
    if count == 0:
        # nothing survived near the origin box: either infeasible or far away
        feasible, point = _lp_feasible(normals, offsets)
        if not feasible:
            return Region.empty()
        if _recession_nontrivial(normals):
            return Region.unbounded()
        return _reclip_bounded(normals, offsets, center=point)
    if touched:
        if _recession_nontrivial(normals):
            return Region.unbounded()
        return _reclip_bounded(normals, offsets)
    return _bounded_from_buffer(buf, count)


def halfplane_intersection(constraints: Iterable) -> Region:
    """Intersect closed half-planes into a Region.

    Accepts HalfPlane instances or (normal, offset) pairs. Returns the empty
    region when the constraints are infeasible (or feasible with empty
    interior), the unbounded region when the recession cone is nontrivial,
    and otherwise the exact polygon with redundant constraints removed.
    """
    items = list(constraints)
    if not items:
        raise InvalidConstraintError("need at least one half-plane")
    rows = []
    for item in items:
        if isinstance(item, HalfPlane):
            rows.append((item.normal[0], item.normal[1], item.offset))
        else:
            normal, offset = item
            hp = HalfPlane(np.asarray(normal, dtype=float), float(offset))
            rows.append((hp.normal[0], hp.normal[1], hp.offset))
    arr = np.asarray(rows, dtype=float)
    return _intersect_arrays(arr[:, :2], arr[:, 2])


def polygon_metrics(poly: ConvexPolygon, x) -> tuple[float, float, float]:
    """Area, diameter, and distance from x to the boundary.

    Raises InvalidPolygonError for degenerate (collinear) vertex lists and
    OutsideDomainError when x lies strictly outside the polygon.
    """
    area = poly.area
    diam = poly.diameter
    if area <= EPS_GEOM * max(1.0, diam * diam):
        raise InvalidPolygonError("degenerate polygon: zero area at tolerance")
    bd = poly.boundary_distance(x)
    tol = EPS_GEOM * max(1.0, float(np.abs(poly.vertices).max()))
    if bd < -tol:
        raise OutsideDomainError("point lies outside the polygon")
    return area, diam, max(bd, 0.0)


def polygon_to_halfplanes(poly: ConvexPolygon) -> list[HalfPlane]:
    """The polygon's edges as half-planes whose intersection recovers it."""
    normals, offsets = poly.edge_halfplanes()
    return [HalfPlane(n, b) for n, b in zip(normals, offsets)]
