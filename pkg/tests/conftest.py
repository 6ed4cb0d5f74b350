"""Shared builders for the test suite.

Everything that produces geometry or problems is seeded, so a failing case
can be reproduced from the seed alone. Helpers return plain arrays and
objects rather than opaque fixtures where that keeps call sites readable.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import mongeampere as ma

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


SQUARE = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])


def unit_square() -> ma.ConvexPolygon:
    return ma.ConvexPolygon(SQUARE)


def square_zero_boundary():
    """The standard zero-data square: domain, boundary points, boundary values."""
    dom = unit_square()
    return dom, SQUARE.copy(), np.zeros(4)


def random_convex_domain(rng, k: int = 8) -> ma.ConvexPolygon:
    """Convex hull of k random points, retried until it is genuinely 2D."""
    from scipy.spatial import ConvexHull

    while True:
        pts = rng.uniform(-1.0, 1.0, size=(k, 2))
        hull = ConvexHull(pts)
        verts = pts[hull.vertices]
        if len(verts) >= 3 and hull.volume > 0.3:
            return ma.ConvexPolygon(verts)


def interior_nodes(rng, domain: ma.ConvexPolygon, n: int, clearance: float = 0.08):
    """Rejection-sample n nodes well inside the domain, pairwise separated."""
    nodes = []
    lo = domain.vertices.min(axis=0)
    hi = domain.vertices.max(axis=0)
    attempts = 0
    while len(nodes) < n:
        attempts += 1
        if attempts > 20000:
            raise RuntimeError("node sampling did not terminate; loosen the spacing")
        x = rng.uniform(lo, hi)
        if domain.boundary_distance(x) < clearance:
            continue
        if nodes and np.min(np.hypot(*(np.asarray(nodes) - x).T)) < clearance:
            continue
        nodes.append(x)
    return np.asarray(nodes)


def random_zero_boundary_problem(rng, n_nodes: int, mass_scale: float = 0.2):
    """A Dirac problem on the square with zero boundary data."""
    dom, bp, bv = square_zero_boundary()
    nodes = interior_nodes(rng, dom, n_nodes)
    alpha = rng.uniform(0.2, 1.0, size=n_nodes) * mass_scale / n_nodes * 4.0
    return ma.DiracProblem(dom, bp, bv, nodes, alpha)


def quadratic_boundary_samples(domain: ma.ConvexPolygon, per_edge: int = 8):
    """Boundary points on every edge with values of the quadratic |y|^2 / 2."""
    verts = domain.vertices
    pts = []
    k = len(verts)
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        for j in range(per_edge):
            pts.append(a + (b - a) * (j / per_edge))
    pts = np.asarray(pts)
    return pts, 0.5 * np.sum(pts**2, axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
