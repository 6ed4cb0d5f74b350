"""Dirichlet solver for atomic Monge-Ampere data by monotone vertex lowering.

Heights start at the convex envelope of the boundary data and are lowered in
sweeps over the nodes in ascending index order; each node's height is set by
bisection so that the area of its subgradient cell matches the node's target
mass. Lowering one node never decreases its own cell and never increases any
other, so the height vector is non-increasing across sweeps, and it is
bounded below through the maximum principle, which also supplies the lower
end of every bisection bracket.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _clip
from .errors import InfeasibleMassError, UnboundedCellError
from .geometry import BOX_HALF_SIDE, EPS_GEOM, ConvexPolygon
from .nodal import (
    NodalConvexFunction,
    _split_samples,
    _validate_boundary,
    _validate_nodes,
    convex_envelope,
    lower_hull_planes,
)

_MODES = ("gauss-seidel", "jacobi")


@dataclass(frozen=True)
class DiracProblem:
    """Target Dirac masses at interior nodes with boundary data on a polygon."""

    domain: ConvexPolygon
    boundary_points: np.ndarray
    boundary_values: np.ndarray
    nodes: np.ndarray
    target_masses: np.ndarray

    def __post_init__(self):
        bp = np.ascontiguousarray(self.boundary_points, dtype=float).reshape(-1, 2)
        bv = np.ascontiguousarray(self.boundary_values, dtype=float).reshape(-1)
        nd = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, 2)
        tm = np.ascontiguousarray(self.target_masses, dtype=float).reshape(-1)
        _validate_boundary(self.domain, bp, bv)
        _validate_nodes(self.domain, nd)
        if len(nd) == 0:
            raise ValueError("need at least one interior node")
        if len(tm) != len(nd):
            raise ValueError("one target mass per node required")
        if np.any(~np.isfinite(tm)) or np.any(tm < 0.0):
            raise ValueError("target masses must be finite and nonnegative")
        scale = max(1.0, float(np.abs(self.domain.vertices).max()))
        if len(nd) > 1:
            d2 = np.sum((nd[:, None, :] - nd[None, :, :]) ** 2, axis=-1)
            d2[np.diag_indices_from(d2)] = np.inf
            if float(d2.min()) <= (EPS_GEOM * scale) ** 2:
                raise ValueError("nodes must be pairwise distinct")
        for arr in (bp, bv, nd, tm):
            arr.setflags(write=False)
        object.__setattr__(self, "boundary_points", bp)
        object.__setattr__(self, "boundary_values", bv)
        object.__setattr__(self, "nodes", nd)
        object.__setattr__(self, "target_masses", tm)

    @classmethod
    def from_samples(cls, domain, boundary_samples, nodes, target_masses) -> "DiracProblem":
        bp, bv = _split_samples(boundary_samples)
        return cls(domain, bp, bv, np.asarray(nodes, dtype=float), np.asarray(target_masses, dtype=float))

    @property
    def total_mass(self) -> float:
        return float(self.target_masses.sum())

    def envelope(self) -> NodalConvexFunction:
        return convex_envelope(
            self.domain,
            np.column_stack([self.boundary_points, self.boundary_values]),
            self.nodes,
        )

    def nodal(self, heights) -> NodalConvexFunction:
        return NodalConvexFunction(
            self.domain, self.boundary_points, self.boundary_values, self.nodes,
            np.asarray(heights, dtype=float), validate=False,
        )


@dataclass(frozen=True)
class SolverConfig:
    mass_tolerance: float = 1e-8
    max_sweeps: int = 500
    bisection_tolerance: float = 1e-10
    mode: str = "gauss-seidel"
    parallel: bool = False

    def __post_init__(self):
        if self.mass_tolerance <= 0 or self.bisection_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")


@dataclass(frozen=True)
class SolveReport:
    solution: NodalConvexFunction
    sweeps_used: int
    final_mass_residual: float
    converged: bool


class _CellCache:
    """Pruned constraint set for one node, valid while the certificate holds.

    Heights only move down during a solve, so a constraint pruned with slack
    s stays redundant until the cumulative descent of its source point
    exceeds s; `budget` stores that slack (margin already subtracted).
    """

    __slots__ = (
        "kept_abs", "kept_normals", "pruned_abs", "budget", "z_snap_pruned",
        "z_lo", "z_hi", "area", "z_at", "kept_at", "budget_min", "moved_at",
        "cx", "cy", "half",
    )


class _Workspace:
    """Precomputed per-node constraint geometry for repeated area queries.

    z_all is the concatenation (heights, boundary values); constraint offsets
    for node i at trial height z are z_all[others_idx[i]] - z.
    """

    def __init__(self, domain, boundary_points, boundary_values, nodes):
        self.domain = domain
        self.nodes = nodes
        self.boundary_values = boundary_values
        self.n = len(nodes)
        total = self.n + len(boundary_points)
        all_xy = np.vstack([nodes, boundary_points])
        self.normals = []
        self.others_idx = []
        for i in range(self.n):
            idx = np.concatenate([np.arange(0, i), np.arange(i + 1, total)])
            self.others_idx.append(idx)
            self.normals.append(np.ascontiguousarray(all_xy[idx] - nodes[i]))
        self.diam = domain.diameter
        self.dists = np.array([domain.boundary_distance(x) for x in nodes])
        self.min_bval = float(boundary_values.min())
        self.all_xy = all_xy
        self.cache: list[_CellCache | None] = [None] * self.n
        # total height descent across all nodes since construction; a cheap
        # upper bound on any single constraint's movement since a snapshot
        self.moved_total = 0.0

    def _store_cache(self, i, keep, z_others, maxdot, margin, z_lo, z_hi, verts):
        idx = self.others_idx[i]
        pruned = ~keep
        c = _CellCache()
        c.kept_abs = idx[keep]
        c.kept_normals = np.ascontiguousarray(self.normals[i][keep])
        c.pruned_abs = idx[pruned]
        c.budget = (z_others[pruned] - z_hi) - maxdot[pruned] - margin
        c.z_snap_pruned = z_others[pruned].copy()
        c.budget_min = float(c.budget.min()) if c.budget.size else math.inf
        c.moved_at = self.moved_total
        c.z_lo = z_lo
        c.z_hi = z_hi
        # every cell the certificate can see lies inside the cell at z_lo, so
        # its bounding box (plus cushion) is a sound clipping window
        lo = verts.min(axis=0)
        hi = verts.max(axis=0)
        c.cx = 0.5 * float(lo[0] + hi[0])
        c.cy = 0.5 * float(lo[1] + hi[1])
        ext = float(max(hi[0] - lo[0], hi[1] - lo[1]))
        c.half = 0.75 * ext + 1e-6 * (1.0 + abs(c.cx) + abs(c.cy))
        c.area = None
        c.z_at = math.nan
        c.kept_at = None
        self.cache[i] = c

    def cached_area(self, i: int, z_all: np.ndarray, zi: float):
        """Cell area from the cached pruned constraints, or None when the
        certificate no longer covers the current configuration."""
        c = self.cache[i]
        if c is None or zi < c.z_lo or zi > c.z_hi:
            return None
        if c.pruned_abs.size and self.moved_total - c.moved_at > c.budget_min:
            z_pruned_now = z_all[c.pruned_abs]
            drop = c.z_snap_pruned - z_pruned_now
            bad = drop > c.budget
            if bad.any():
                # overdrawn constraints might cut the cell now; moving just
                # them into the kept set restores the certificate without a
                # single clip (the rest keep their unspent budgets)
                nbad = int(bad.sum())
                if c.kept_abs.size + nbad > 64:
                    return None
                bad_abs = c.pruned_abs[bad]
                pos = np.where(bad_abs < i, bad_abs, bad_abs - 1)
                c.kept_abs = np.concatenate([c.kept_abs, bad_abs])
                c.kept_normals = np.ascontiguousarray(
                    np.vstack([c.kept_normals, self.normals[i][pos]])
                )
                good = ~bad
                c.pruned_abs = c.pruned_abs[good]
                c.budget = (c.budget - drop)[good]
                c.z_snap_pruned = z_pruned_now[good]
                c.kept_at = None
            else:
                c.budget = c.budget - drop
                c.z_snap_pruned = z_pruned_now.copy()
            # re-anchor so the cheap movement test starts from now
            c.budget_min = float(c.budget.min()) if c.budget.size else math.inf
            c.moved_at = self.moved_total
        kept_now = z_all[c.kept_abs]
        if c.area is not None and zi == c.z_at and np.array_equal(kept_now, c.kept_at):
            return c.area
        area = _clip.clip_refined_area(c.kept_normals, kept_now - zi, c.cx, c.cy, c.half)
        if area < 0.0:
            return None
        c.area = area
        c.z_at = zi
        c.kept_at = kept_now
        return area

    @classmethod
    def from_function(cls, f: NodalConvexFunction) -> "_Workspace":
        return cls(f.domain, f.boundary_points, f.boundary_values, f.nodes)

    def cell_area(self, i: int, z_all: np.ndarray, zi: float) -> float:
        offsets = z_all[self.others_idx[i]] - zi
        area = _clip.clip_refined_area(self.normals[i], offsets, 0.0, 0.0, BOX_HALF_SIDE)
        if area < 0.0:
            raise UnboundedCellError(
                f"subgradient cell of node {i} is unbounded; boundary sampling does not pin the hull"
            )
        return area

    def _mass_of(self, i: int, z_all: np.ndarray, cold: bool) -> float:
        if not cold:
            area = self.cached_area(i, z_all, z_all[i])
            if area is not None:
                return area
        return self.cell_area(i, z_all, z_all[i])

    def all_masses(self, z_all: np.ndarray, parallel: bool = False, cold: bool = True) -> np.ndarray:
        if parallel and self.n > 1:
            with ThreadPoolExecutor() as pool:
                out = list(pool.map(lambda i: self._mass_of(i, z_all, cold), range(self.n)))
            return np.asarray(out, dtype=float)
        return np.fromiter(
            (self._mass_of(i, z_all, cold) for i in range(self.n)),
            dtype=float,
            count=self.n,
        )

    def envelope_of_others(self, i: int, z_all: np.ndarray) -> float:
        idx = self.others_idx[i]
        pts = np.column_stack([self.all_xy[idx], z_all[idx]])
        planes = lower_hull_planes(pts)
        x = self.nodes[i]
        return float(np.max(planes[:, 0] * x[0] + planes[:, 1] * x[1] + planes[:, 2]))

    def _cell_vertices(self, i, normals, offsets):
        buf, k, touched = _clip.clip_refined(normals, offsets, 0.0, 0.0, BOX_HALF_SIDE)
        if touched:
            raise UnboundedCellError(
                f"subgradient cell of node {i} is unbounded; boundary sampling does not pin the hull"
            )
        area = 0.0
        if k >= 3:
            x, y = buf[:k, 0], buf[:k, 1]
            s = np.dot(x[:-1], y[1:]) - np.dot(y[:-1], x[1:])
            area = 0.5 * float(s + x[-1] * y[0] - y[-1] * x[0])
        return buf[:k], max(area, 0.0)

    def rooted_height(
        self, i, z_all, z_cur, target, total_for_bound, cfg, warm_step=math.inf, slack=0.0
    ) -> float:
        """Height at which cell i has the target area, all others fixed.

        warm_step hints how far below z_cur the root probably is (the last
        sweep's movement); the bracket starts there and is expanded
        geometrically, never past the floor the maximum principle allows.
        slack loosens the area match one-sidedly: an undershoot up to slack
        is left for later sweeps, an overshoot never exceeds the tight
        tolerance (a monotone scheme cannot raise a point again).
        """
        tight = 0.01 * cfg.mass_tolerance * max(1.0, target)
        slack = max(tight, slack)
        cached = self.cached_area(i, z_all, z_cur)
        area_cur = cached if cached is not None else self.cell_area(i, z_all, z_cur)
        if target > 0.0 and -slack <= area_cur - target <= tight:
            return z_cur
        if target <= 0.0:
            # the largest height with a massless cell: the hull of the others
            return self.envelope_of_others(i, z_all)

        if cached is not None and area_cur < target:
            # root inside the certified range on the pruned set alone; the
            # certificate keeps absorbing movement until its budget runs out
            c = self.cache[i]
            if c.z_lo < z_cur:
                step = max(4.0 * warm_step, 64.0 * cfg.bisection_tolerance)
                z, status = _clip.rooted_bisect(
                    c.kept_normals, z_all[c.kept_abs], z_cur, step, c.z_lo,
                    target, tight, slack, cfg.bisection_tolerance,
                    c.cx, c.cy, c.half,
                )
                if status == 0.0:
                    return z

        depth = math.sqrt(max(total_for_bound, 0.0) * max(self.dists[i], 0.0) * self.diam)
        z_floor = self.min_bval - depth * (1.0 + 1e-9) - 1e-9

        idx = self.others_idx[i]
        normals = self.normals[i]
        z_others = z_all[idx]
        margin = 1e-9 * (1.0 + float(np.abs(z_others).max()))

        if area_cur > target:
            # the node sits too low already; the root is above, somewhere
            # below the hull of the other lifted points (zero mass). This
            # only happens through direct height edits, never inside a
            # descent sweep, so a plain bisection is fine and no pruned set
            # is worth keeping.
            z_lo, z_hi = z_cur, self.envelope_of_others(i, z_all)
            verts, _ = self._cell_vertices(i, normals, z_others - z_lo)
            bis_normals, bis_z = normals, z_others
            if len(verts) >= 3:
                maxdot = (verts @ normals.T).max(axis=0)
                keep = maxdot >= (z_others - z_hi) - margin
                bis_normals = np.ascontiguousarray(normals[keep])
                bis_z = np.ascontiguousarray(z_others[keep])
            lo, hi = z_lo, z_hi
            while hi - lo > cfg.bisection_tolerance:
                mid = 0.5 * (lo + hi)
                area = _clip.clip_refined_area(bis_normals, bis_z - mid, 0.0, 0.0, BOX_HALF_SIDE)
                d = area - target
                if -tight <= d <= tight or -slack <= d < 0.0:
                    return mid
                if d > 0.0:
                    lo = mid
                else:
                    hi = mid
            return hi

        # descend: one full clip below the expected root pins down every
        # constraint that can matter on the way there, and the same probe
        # then certifies a pruned set for the following sweeps
        z_hi = z_cur
        if z_floor > z_hi:
            z_floor = z_hi - 1e-9
        step = max(8.0 * warm_step, 64.0 * cfg.bisection_tolerance)
        z_probe = max(z_cur - step, z_floor)
        while True:
            verts, area_probe = self._cell_vertices(i, normals, z_others - z_probe)
            if area_probe >= target:
                break
            if z_probe <= z_floor:
                if area_probe < target - tight:
                    raise InfeasibleMassError(
                        f"target mass {target} for node {i} exceeds the bracket maximum {area_probe}"
                    )
                # feasible only by a hair; the floor itself is the root
                return z_probe
            step *= 4.0
            z_probe = max(z_cur - step, z_floor)

        maxdot = (verts @ normals.T).max(axis=0)
        cut = (z_others - z_hi) - margin
        slack_all = cut - maxdot
        pmin = verts.min(axis=0)
        pmax = verts.max(axis=0)
        cx = 0.5 * float(pmin[0] + pmax[0])
        cy = 0.5 * float(pmin[1] + pmax[1])
        half = 0.75 * float(max(pmax[0] - pmin[0], pmax[1] - pmin[1]))
        half += 1e-6 * (1.0 + abs(cx) + abs(cy))

        # constraints slack against the widest cell at the tightest offset
        # stay slack for every height in [z_probe, z_hi]: cells are nested
        keep_r = slack_all <= 0.0
        kern_normals = np.ascontiguousarray(normals[keep_r])
        kern_z = np.ascontiguousarray(z_others[keep_r])
        root, status = _clip.rooted_bisect(
            kern_normals, kern_z, z_cur, z_cur - z_probe, z_probe,
            target, tight, slack, cfg.bisection_tolerance, cx, cy, half,
        )
        if status != 0.0:
            # should not happen (the bracket is verified); fall back to a
            # plain bisection on the same pruned set
            lo, hi = z_probe, z_cur
            root = hi
            while hi - lo > cfg.bisection_tolerance:
                mid = 0.5 * (lo + hi)
                area = _clip.clip_refined_area(kern_normals, kern_z - mid, 0.0, 0.0, BOX_HALF_SIDE)
                d = area - target
                if -tight <= d <= tight or -slack <= d < 0.0:
                    root = mid
                    break
                if d > 0.0:
                    lo = mid
                else:
                    hi = mid
            else:
                root = hi

        # certificate: reach about eight movements below the root so it
        # survives several sweeps, pruning everything slack by more than the
        # full reach (so budgets match the range). A deep reach can pull in
        # far too many constraints right after cold starts; shrink it until
        # the kept set is small, trading an earlier rebuild for cheap clips.
        floor_look = 1e3 * cfg.bisection_tolerance
        moved = z_cur - root
        depth = 8.0 * moved + floor_look
        # never certify shallower than a couple of sweeps of movement, else
        # the node itself outruns the certificate and rebuilds every sweep
        floor_depth = 2.0 * moved + floor_look
        cap = 32
        reuse = z_cur - z_probe <= 2.0 * depth
        while True:
            if reuse:
                z_cert, verts_c, maxdot_c = z_probe, verts, maxdot
                reuse = False
            else:
                z_cert = root - depth
                verts_c, _ = self._cell_vertices(i, normals, z_others - z_cert)
                if len(verts_c) < 3:
                    return root
                maxdot_c = (verts_c @ normals.T).max(axis=0)
            look = z_cur - z_cert
            keep_c = (cut - maxdot_c) <= look
            if int(keep_c.sum()) <= cap or depth <= floor_depth:
                break
            depth = max(0.25 * depth, floor_depth)
        self._store_cache(i, keep_c, z_others, maxdot_c, margin, z_cert, z_hi, verts_c)
        return root


def solve_dirac(problem: DiracProblem, config: SolverConfig | None = None) -> SolveReport:
    """Solve for heights whose cell areas match the target masses.

    Returns a report with the solution, the sweep count, the final relative
    mass residual max_i |achieved_i - target_i| / max(1, max target), and a
    convergence flag (no exception on non-convergence; inspect the flag).
    """
    cfg = config or SolverConfig()
    heights = problem.envelope().heights.copy()
    ws = _Workspace(problem.domain, problem.boundary_points, problem.boundary_values, problem.nodes)
    alpha = problem.target_masses
    scale = max(1.0, float(alpha.max()))
    total = float(alpha.sum())
    n = ws.n
    z_all = np.concatenate([heights, problem.boundary_values])
    active = np.flatnonzero(alpha > 0.0)

    residual = math.inf
    sweeps_used = 0
    converged = False
    warm = np.full(n, math.inf)
    for sweep in range(1, cfg.max_sweeps + 1):
        # match areas only as tightly as the current residual warrants; the
        # bound tightens with the residual, so the fixed point is unchanged
        loose = 0.05 * residual * scale if math.isfinite(residual) else math.inf
        max_move = 0.0
        if cfg.mode == "jacobi":
            snapshot = z_all.copy()
            for i in active:
                z = ws.rooted_height(
                    i, snapshot, snapshot[i], alpha[i], total, cfg, warm[i],
                    slack=min(loose, 0.2 * alpha[i]),
                )
                if z < heights[i]:
                    move = heights[i] - z
                    warm[i] = move
                    ws.moved_total += move
                    if move > max_move:
                        max_move = move
                    heights[i] = z
            z_all[:n] = heights
        else:
            for i in active:
                z = ws.rooted_height(
                    i, z_all, z_all[i], alpha[i], total, cfg, warm[i],
                    slack=min(loose, 0.2 * alpha[i]),
                )
                if z < heights[i]:
                    move = heights[i] - z
                    warm[i] = move
                    ws.moved_total += move
                    if move > max_move:
                        max_move = move
                    heights[i] = z
                    z_all[i] = z
        sweeps_used = sweep
        # measuring every mass each sweep costs as much as the sweep itself,
        # so only look when the sweep barely moved or on a fixed cadence
        if max_move <= cfg.mass_tolerance or sweep % 16 == 0 or sweep == cfg.max_sweeps:
            masses = ws.all_masses(z_all, parallel=cfg.parallel, cold=False)
            residual = float(np.max(np.abs(masses - alpha)) / scale)
            if residual <= cfg.mass_tolerance:
                # the sweep residual leans on pruned constraint sets; confirm
                # against the full sets before declaring victory
                masses = ws.all_masses(z_all, parallel=cfg.parallel)
                residual = float(np.max(np.abs(masses - alpha)) / scale)
                if residual <= cfg.mass_tolerance:
                    converged = True
                    break

    if not converged:
        residual = float(np.max(np.abs(ws.all_masses(z_all) - alpha)) / scale)

    if len(active) < n:
        # zero-target nodes settle onto the hull of the rest; they are above
        # it already, so these assignments change no cell
        planes = lower_hull_planes(np.column_stack([ws.all_xy, z_all]))
        for i in range(n):
            if alpha[i] <= 0.0:
                x = problem.nodes[i]
                heights[i] = float(np.max(planes[:, 0] * x[0] + planes[:, 1] * x[1] + planes[:, 2]))

    return SolveReport(problem.nodal(heights), sweeps_used, residual, converged)


def update_height(
    f: NodalConvexFunction,
    i: int,
    target: float,
    config: SolverConfig | None = None,
    total_mass: float | None = None,
) -> float:
    """Height for node i at which its cell area equals target, others fixed.

    The bisection bracket runs from the envelope of the other lifted points
    (zero mass) down to the depth allowed by the maximum principle,
    |z - min boundary value|^2 <= total_mass * dist(x_i, boundary) * diam.
    When total_mass is omitted it is taken as target plus the current masses
    of the other nodes, which bounds the total measure after the update.
    """
    cfg = config or SolverConfig()
    n = len(f.nodes)
    if not 0 <= i < n:
        raise IndexError(f"node index {i} out of range for {n} nodes")
    target = float(target)
    if not math.isfinite(target) or target < 0.0:
        raise ValueError("target mass must be finite and nonnegative")
    ws = _Workspace.from_function(f)
    z_all = np.concatenate([f.heights, f.boundary_values])
    if total_mass is None:
        others = sum(ws.cell_area(j, z_all, z_all[j]) for j in range(n) if j != i)
        total_mass = target + others
    return float(ws.rooted_height(i, z_all, z_all[i], target, float(total_mass), cfg))


def discretize_density(domain: ConvexPolygon, density, nodes, subdivisions: int = 4) -> np.ndarray:
    """Per-node masses alpha_i = integral of density over (Voronoi cell_i) & domain.

    Midpoint quadrature on a square subgrid anchored at the bounding-box
    corner of the domain; the subgrid step is the median nearest-neighbor
    node spacing divided by `subdivisions`. The sum over nodes equals the
    same quadrature of the integral over the whole domain by construction.
    `density` may be a constant or a callable taking an (m, 2) array.
    """
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    if len(nodes) == 0:
        raise ValueError("need at least one node")
    if subdivisions < 1:
        raise ValueError("subdivisions must be at least 1")
    if len(nodes) >= 2:
        tree = cKDTree(nodes)
        nn = tree.query(nodes, k=2)[0][:, 1]
        spacing = float(np.median(nn))
    else:
        spacing = domain.diameter / 4.0
    step = spacing / subdivisions
    vmin = domain.vertices.min(axis=0)
    vmax = domain.vertices.max(axis=0)
    counts = np.maximum(np.ceil((vmax - vmin) / step).astype(int), 1)
    if int(counts[0]) * int(counts[1]) > 2 * 10**7:
        raise ValueError("quadrature grid too fine; coarsen the nodes or subdivisions")
    # per-axis steps snapped so the grid tiles the bounding box exactly
    sx, sy = (vmax - vmin) / counts
    xs = vmin[0] + (np.arange(counts[0]) + 0.5) * sx
    ys = vmin[1] + (np.arange(counts[1]) + 0.5) * sy
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    normals, offsets = domain.edge_halfplanes()
    inside = np.all(pts @ normals.T <= offsets[None, :], axis=1)
    pts = pts[inside]
    if callable(density):
        vals = np.asarray(density(pts), dtype=float).reshape(-1)
        if len(vals) != len(pts):
            raise ValueError("density callable must map (m, 2) points to m values")
    else:
        vals = np.full(len(pts), float(density))
    if np.any(~np.isfinite(vals)) or np.any(vals < 0.0):
        raise ValueError("density must be finite and nonnegative")
    owner = cKDTree(nodes).query(pts)[1]
    return np.bincount(owner, weights=vals * sx * sy, minlength=len(nodes))
