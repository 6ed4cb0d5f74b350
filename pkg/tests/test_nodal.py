"""Nodal convex functions: evaluation, subgradient cells, and their measure."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mongeampere as ma
from conftest import (
    SQUARE,
    interior_nodes,
    quadratic_boundary_samples,
    square_zero_boundary,
    unit_square,
)


def cone(height=-1.0):
    """Single node at the origin of the zero-boundary square."""
    dom, bp, bv = square_zero_boundary()
    return ma.NodalConvexFunction(dom, bp, bv, np.array([[0.0, 0.0]]), np.array([height]))


class TestEvaluate:
    def test_cone_values(self):
        f = cone()
        assert ma.evaluate(f, [0.0, 0.0]) == pytest.approx(-1.0, abs=1e-15)
        assert ma.evaluate(f, [1.0, 1.0]) == pytest.approx(0.0, abs=1e-15)
        assert ma.evaluate(f, [0.5, 0.5]) == pytest.approx(-0.5, abs=1e-14)

    def test_outside_domain_rejected(self):
        with pytest.raises(ma.OutsideDomainError):
            ma.evaluate(cone(), [2.0, 0.0])

    def test_node_above_envelope_is_inactive(self):
        """A height above the boundary envelope neither shows in values nor mass."""
        dom, bp, bv = square_zero_boundary()
        f = ma.NodalConvexFunction(dom, bp, bv, np.array([[0.0, 0.0]]), np.array([0.5]))
        assert ma.evaluate(f, [0.0, 0.0]) == 0.0
        assert ma.ma_masses(f).masses[0] == 0.0

    @given(st.integers(0, 300))
    def test_midpoint_convexity(self, seed):
        rng = np.random.default_rng(seed)
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 5)
        f = ma.NodalConvexFunction(dom, bp, bv, nodes, rng.uniform(-0.8, -0.1, 5))
        a = rng.uniform(-0.9, 0.9, 2)
        b = rng.uniform(-0.9, 0.9, 2)
        mid = 0.5 * (a + b)
        lhs = ma.evaluate(f, mid)
        rhs = 0.5 * (ma.evaluate(f, a) + ma.evaluate(f, b))
        assert lhs <= rhs + 1e-12


class TestSubgradientCells:
    def test_cone_cell_is_polar_square(self):
        # apex at -z over the zero square: slopes reach +-z in each axis
        # direction, giving the diamond |p1| + |p2| <= z of area 2 z^2
        for z in (0.5, 1.0, 1.7):
            f = cone(-z)
            cell = ma.subgradient_cell(f, 0)
            assert cell.is_bounded
            assert cell.area == pytest.approx(2.0 * z * z, rel=1e-12)

    def test_triangle_gradient_cell(self):
        """The max(0, x1, x2) graph puts the triangle conv{0, e1, e2} at the origin."""
        dom = unit_square()
        bp = np.vstack([SQUARE, [[0.0, -1.0], [-1.0, 0.0]]])
        bv = np.maximum(0.0, np.maximum(bp[:, 0], bp[:, 1]))
        f = ma.NodalConvexFunction(dom, bp, bv, np.array([[0.0, 0.0]]), np.array([0.0]))
        cell = ma.subgradient_cell(f, 0)
        assert cell.area == pytest.approx(0.5, abs=1e-12)

    def test_cells_disjoint(self, rng):
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 8)
        f = ma.NodalConvexFunction(dom, bp, bv, nodes, rng.uniform(-0.6, -0.2, 8))
        regions = [ma.subgradient_cell(f, i) for i in range(8)]
        for i in range(8):
            for j in range(i + 1, 8):
                if not (regions[i].is_bounded and regions[j].is_bounded):
                    continue
                hp = ma.polygon_to_halfplanes(regions[i].polygon)
                hp += ma.polygon_to_halfplanes(regions[j].polygon)
                overlap = ma.halfplane_intersection(hp)
                assert overlap.is_empty or overlap.area <= 1e-10

    def test_unpinned_hull_raises(self):
        dom = unit_square()
        bp = np.array([[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]])
        f = ma.NodalConvexFunction(
            dom, bp, np.zeros(3), np.array([[0.0, 0.0]]), np.array([-0.5]), validate=False
        )
        with pytest.raises(ma.UnboundedCellError):
            ma.subgradient_cell(f, 0)

    def test_uncovered_boundary_rejected_at_construction(self):
        dom = unit_square()
        bp = np.array([[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ValueError):
            ma.NodalConvexFunction(dom, bp, np.zeros(3), np.array([[0.0, 0.0]]), np.array([-0.5]))


class TestMasses:
    def test_cone_mass(self):
        assert ma.ma_masses(cone()).masses[0] == pytest.approx(2.0, rel=1e-12)

    def test_total_matches_sum(self, rng):
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 10)
        f = ma.NodalConvexFunction(dom, bp, bv, nodes, rng.uniform(-0.5, -0.1, 10))
        mm = ma.ma_masses(f)
        assert mm.total == pytest.approx(float(np.sum(mm.masses)), rel=1e-14)
        assert np.all(mm.masses >= 0.0)

    def test_parallel_matches_serial(self, rng):
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 12)
        f = ma.NodalConvexFunction(dom, bp, bv, nodes, rng.uniform(-0.5, -0.1, 12))
        serial = ma.ma_masses(f).masses
        parallel = ma.ma_masses(f, parallel=True).masses
        assert np.array_equal(serial, parallel)

    def test_order_independence(self, rng):
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 9)
        heights = rng.uniform(-0.5, -0.1, 9)
        base = ma.ma_masses(ma.NodalConvexFunction(dom, bp, bv, nodes, heights)).masses
        perm = rng.permutation(9)
        shuffled = ma.ma_masses(
            ma.NodalConvexFunction(dom, bp, bv, nodes[perm], heights[perm])
        ).masses
        assert np.max(np.abs(shuffled - base[perm])) <= 1e-12

    def test_translation_equivariance(self, rng):
        """Shifting the whole configuration leaves every mass unchanged."""
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 7)
        heights = rng.uniform(-0.5, -0.1, 7)
        base = ma.ma_masses(ma.NodalConvexFunction(dom, bp, bv, nodes, heights)).masses
        t = np.array([2.5, -1.25])
        dom2 = ma.ConvexPolygon(SQUARE + t)
        moved = ma.ma_masses(
            ma.NodalConvexFunction(dom2, bp + t, bv, nodes + t, heights)
        ).masses
        assert np.max(np.abs(moved - base)) <= 1e-10

    @given(st.integers(0, 200))
    def test_lowering_a_node_grows_its_mass(self, seed):
        rng = np.random.default_rng(seed)
        dom, bp, bv = square_zero_boundary()
        nodes = interior_nodes(rng, dom, 6)
        heights = rng.uniform(-0.5, -0.1, 6)
        i = int(rng.integers(0, 6))
        f = ma.NodalConvexFunction(dom, bp, bv, nodes, heights)
        lowered = heights.copy()
        lowered[i] -= rng.uniform(0.05, 0.3)
        g = ma.NodalConvexFunction(dom, bp, bv, nodes, lowered)
        assert ma.ma_masses(g).masses[i] >= ma.ma_masses(f).masses[i] - 1e-12


class TestEnvelope:
    def test_envelope_heights_on_boundary_hull(self):
        """With convex boundary data the nodes land on the data's lower hull."""
        dom = unit_square()
        bp, bv = quadratic_boundary_samples(dom)
        nodes = np.array([[0.0, 0.0], [0.3, -0.2]])
        env = ma.convex_envelope(dom, np.column_stack([bp, bv]), nodes)
        for i, x in enumerate(nodes):
            # chords of a convex graph sit above it
            assert env.heights[i] >= 0.5 * float(x @ x) - 1e-12
        # and the nodes land exactly on the hull of the sample planes
        planes = ma.lower_hull_planes(np.column_stack([bp, bv]))
        for i, x in enumerate(nodes):
            hull_val = float(np.max(planes[:, 0] * x[0] + planes[:, 1] * x[1] + planes[:, 2]))
            assert env.heights[i] == pytest.approx(hull_val, abs=1e-10)

    def test_envelope_interior_mass_vanishes(self, rng):
        dom = unit_square()
        bp, bv = quadratic_boundary_samples(dom)
        nodes = interior_nodes(rng, dom, 6)
        env = ma.convex_envelope(dom, np.column_stack([bp, bv]), nodes)
        assert float(ma.ma_masses(env).masses.max()) <= 1e-10


class TestLowerHullPlanes:
    def test_planes_support_from_below(self):
        pts = np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0], [0.5, 0.5, 2.0]]
        )
        planes = ma.lower_hull_planes(pts)
        vals = planes[:, :2] @ pts[:, :2].T + planes[:, 2:3]
        assert np.all(vals <= pts[:, 2] + 1e-12)
        # the top point sits strictly above the hull, the rest are touched
        hull = vals.max(axis=0)
        assert hull[4] < 2.0 - 1e-9
        assert np.max(np.abs(hull[:4] - pts[:4, 2])) <= 1e-12
