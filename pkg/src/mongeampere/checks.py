"""Structural checks: comparison ordering, depth bounds, affine pushforward,
log-determinant expansion, and Gauss curvature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IncompatibleInputsError,
    NotPositiveDefiniteError,
    SingularTransformError,
    UnsupportedInputError,
)
from .geometry import EPS_GEOM, ConvexPolygon
from .nodal import MAMeasure, NodalConvexFunction, evaluate, ma_masses
from .solver import DiracProblem

COMPARISON_SLACK = 1e-10


@dataclass(frozen=True)
class BoundRecord:
    """One scalar bound check: lhs <= rhs up to slack."""

    label: str
    lhs: float
    rhs: float
    slack: float = COMPARISON_SLACK

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.slack

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class BoundReport:
    records: tuple
    overall: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "overall", all(r.holds for r in self.records))

    @classmethod
    def from_records(cls, records) -> "BoundReport":
        return cls(tuple(records))

    @property
    def worst(self) -> BoundRecord | None:
        if not self.records:
            return None
        return min(self.records, key=lambda r: r.margin)


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of the ordering check between two nodal functions.

    hypothesis: the measure of u dominates the measure of v node-wise.
    records/conclusion: u <= v at every node, up to slack; only evaluated
    when the hypothesis holds (conclusion is None otherwise, and overall is
    vacuously true).
    """

    hypothesis: bool
    conclusion: bool | None
    records: tuple
    overall: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "overall", all(r.holds for r in self.records))


def _same_array(a, b, tol) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))


def check_comparison(
    u: NodalConvexFunction,
    v: NodalConvexFunction,
    mu: MAMeasure | None = None,
    mv: MAMeasure | None = None,
    slack: float = COMPARISON_SLACK,
) -> ComparisonReport:
    """Larger measure forces the smaller function: Mu >= Mv should give u <= v.

    Verifies the hypothesis node-wise first (measures computed here unless
    passed in), then checks the height ordering at every node. Both functions
    must share the domain, boundary samples, and node set; anything else is a
    usage error rather than a failed check.
    """
    scale = max(1.0, float(np.abs(u.domain.vertices).max()))
    tol = EPS_GEOM * scale
    if not _same_array(u.domain.vertices, v.domain.vertices, tol):
        raise IncompatibleInputsError("comparison requires identical domains")
    if not (
        _same_array(u.boundary_points, v.boundary_points, tol)
        and _same_array(u.boundary_values, v.boundary_values, tol)
    ):
        raise IncompatibleInputsError("comparison requires identical boundary samples")
    if not _same_array(u.nodes, v.nodes, tol):
        raise IncompatibleInputsError("comparison requires identical node sets")

    if mu is None:
        mu = ma_masses(u)
    if mv is None:
        mv = ma_masses(v)
    hypothesis = bool(np.all(mu.masses >= mv.masses - slack))
    if not hypothesis:
        return ComparisonReport(False, None, ())
    records = tuple(
        BoundRecord(f"node {i}", float(u.heights[i]), float(v.heights[i]), slack)
        for i in range(len(u.nodes))
    )
    return ComparisonReport(True, all(r.holds for r in records), records)


def alexandrov_bound(
    f: NodalConvexFunction,
    measure: MAMeasure | None = None,
    points=None,
) -> BoundReport:
    """Check |f(x)|^2 <= total mass * dist(x, boundary) * diam(domain).

    Valid for zero boundary data, where f <= 0 inside. The planar constant
    here is 1: the cone with apex (x, f(x)) over the domain has subgradients
    covering a triangle with one side of length 2|f(x)|/diam (slopes toward
    the two ends of a diameter through x) and apex at distance |f(x)|/dist
    (slope toward the nearest boundary point), so its mass is at least
    f(x)^2/(dist*diam), and the cone's mass is at most the total.
    """
    if float(np.abs(f.boundary_values).max()) > EPS_GEOM:
        raise UnsupportedInputError("the depth bound is stated for zero boundary values")
    if measure is None:
        measure = ma_masses(f)
    total = measure.total
    diam = f.domain.diameter
    if points is None:
        points = f.nodes
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    records = []
    for j, x in enumerate(points):
        val = evaluate(f, x)
        dist = f.domain.boundary_distance(x)
        records.append(
            BoundRecord(f"point {j} ({x[0]:.6g}, {x[1]:.6g})", val * val, total * dist * diam)
        )
    return BoundReport.from_records(records)


def affine_transform_problem(problem: DiracProblem, matrix, translation=(0.0, 0.0)) -> DiracProblem:
    """Pull a Dirac-data problem back through x -> A^{-1}(x - t).

    The transformed solution is u~(x) = u(A x + t) / |det A| on the mapped
    domain: subgradients map by A^T / |det A|, so cell areas (and therefore
    the target masses) scale by 1/|det A|, and boundary heights scale the
    same way in the plane. For |det A| = 1 both are unchanged and solving the
    transformed problem reproduces the original heights at the mapped nodes.
    """
    A = np.asarray(matrix, dtype=float).reshape(2, 2)
    t = np.asarray(translation, dtype=float).reshape(2)
    det = float(np.linalg.det(A))
    if abs(det) <= EPS_GEOM:
        raise SingularTransformError("transform matrix is singular")
    inv = np.linalg.inv(A)
    s = 1.0 / abs(det)

    verts = (np.asarray(problem.domain.vertices, dtype=float) - t) @ inv.T
    if det < 0.0:
        # the inverse map reverses orientation; restore counter-clockwise order
        verts = verts[::-1]
    return DiracProblem(
        ConvexPolygon(verts),
        (problem.boundary_points - t) @ inv.T,
        problem.boundary_values * s,
        (problem.nodes - t) @ inv.T,
        problem.target_masses * s,
    )


class SymMatrix:
    """Symmetric matrix wrapper; symmetrizes on construction."""

    def __init__(self, entries):
        m = np.asarray(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("entries must form a square matrix")
        self.array = 0.5 * (m + m.T)

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    def cholesky(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.array)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def logdet_expansion_residual(m, n, eps: float) -> float:
    """|log det(M + eps N) - second-order expansion| for positive definite M.

    The expansion is log det M + eps tr(M^{-1} N) - (eps^2 / 2) tr((M^{-1} N)^2);
    the residual decays like eps^3 as eps -> 0.
    """
    M = m if isinstance(m, SymMatrix) else SymMatrix(m)
    N = n if isinstance(n, SymMatrix) else SymMatrix(n)
    if M.dim != N.dim:
        raise ValueError("matrices must have the same dimension")
    L0 = M.cholesky()
    perturbed = SymMatrix(M.array + float(eps) * N.array)
    L1 = perturbed.cholesky()
    logdet = 2.0 * float(np.sum(np.log(np.diag(L1))))
    Minv_N = np.linalg.solve(M.array, N.array)
    expansion = (
        2.0 * float(np.sum(np.log(np.diag(L0))))
        + float(eps) * float(np.trace(Minv_N))
        - 0.5 * float(eps) ** 2 * float(np.trace(Minv_N @ Minv_N))
    )
    return abs(logdet - expansion)


def gauss_curvature(gradient, hessian) -> float:
    """Curvature of the graph of u at a point, det D^2 u / (1 + |Du|^2)^((n+2)/2)."""
    g = np.asarray(gradient, dtype=float).reshape(-1)
    H = hessian.array if isinstance(hessian, SymMatrix) else SymMatrix(hessian).array
    n = len(g)
    if H.shape != (n, n):
        raise ValueError("gradient and hessian dimensions disagree")
    return float(np.linalg.det(H) / (1.0 + g @ g) ** ((n + 2) / 2.0))
