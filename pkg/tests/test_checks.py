"""Maximum-principle bounds, comparison checks, affine covariance, curvature."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mongeampere as ma
from conftest import random_zero_boundary_problem, square_zero_boundary


def cone(height=-1.0):
    dom, bp, bv = square_zero_boundary()
    return ma.NodalConvexFunction(dom, bp, bv, np.array([[0.0, 0.0]]), np.array([height]))


class TestAlexandrovBound:
    def test_cone_record(self):
        # depth^2 against diameter * boundary distance * total mass
        rep = ma.alexandrov_bound(cone())
        assert rep.overall
        (rec,) = rep.records
        assert rec.lhs == pytest.approx(1.0, abs=1e-12)
        assert rec.rhs == pytest.approx(2.0 * np.sqrt(2.0) * 1.0 * 2.0, rel=1e-12)
        assert rep.worst is rec
        assert rec.margin == pytest.approx(rec.rhs - rec.lhs)

    def test_custom_points(self):
        rep = ma.alexandrov_bound(cone(), points=np.array([[0.5, 0.0]]))
        (rec,) = rep.records
        assert rec.lhs == pytest.approx(0.25, abs=1e-12)
        assert rec.rhs == pytest.approx(2.0 * np.sqrt(2.0) * 0.5 * 2.0, rel=1e-12)

    def test_understated_measure_flags_violation(self):
        # feed a measure too small to support the observed depth
        rep = ma.alexandrov_bound(cone(), measure=ma.MAMeasure(np.array([0.001])))
        assert not rep.overall
        assert rep.worst.margin < 0.0

    def test_holds_on_random_solutions(self, rng):
        for _ in range(3):
            problem = random_zero_boundary_problem(rng, 10)
            report = ma.solve_dirac(problem)
            assert ma.alexandrov_bound(report.solution).overall


class TestComparison:
    def test_dominated_pair_orders_heights(self, rng):
        problem = random_zero_boundary_problem(rng, 8)
        heavier = ma.DiracProblem(
            problem.domain,
            problem.boundary_points,
            problem.boundary_values,
            problem.nodes,
            problem.target_masses * 1.5,
        )
        u = ma.solve_dirac(heavier).solution
        v = ma.solve_dirac(problem).solution
        rep = ma.check_comparison(u, v)
        assert rep.hypothesis and rep.conclusion and rep.overall
        assert all(r.lhs <= r.rhs + r.slack for r in rep.records)

    def test_undominated_pair_is_vacuous(self):
        rep = ma.check_comparison(cone(-0.5), cone(-1.0))
        assert not rep.hypothesis
        assert rep.conclusion is None
        assert rep.overall

    def test_forced_false_hypothesis_detects_order_violation(self):
        # lie about the measures: claim the shallow function dominates
        rep = ma.check_comparison(
            cone(-0.5),
            cone(-1.0),
            mu=ma.MAMeasure(np.array([5.0])),
            mv=ma.MAMeasure(np.array([0.1])),
        )
        assert rep.hypothesis
        assert rep.conclusion is False
        assert not rep.overall

    def test_mismatched_inputs_rejected(self):
        dom2 = ma.ConvexPolygon(2.0 * np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]))
        _, bp, bv = square_zero_boundary()
        other = ma.NodalConvexFunction(
            dom2, 2.0 * bp, bv, np.array([[0.0, 0.0]]), np.array([-1.0])
        )
        with pytest.raises(ma.IncompatibleInputsError):
            ma.check_comparison(cone(), other)


class TestAffineTransform:
    A = np.array([[1.0, 1.0], [0.0, 1.0]])

    def test_shear_preserves_heights(self, rng):
        problem = random_zero_boundary_problem(rng, 8)
        sheared = ma.affine_transform_problem(problem, self.A)
        u = ma.solve_dirac(problem).solution.heights
        v = ma.solve_dirac(sheared).solution.heights
        assert np.max(np.abs(u - v)) <= 1e-6

    def test_mass_scales_with_inverse_determinant(self):
        dom, bp, bv = square_zero_boundary()
        problem = ma.DiracProblem(dom, bp, bv, np.array([[0.2, 0.1]]), np.array([2.0]))
        scaled = ma.affine_transform_problem(problem, np.diag([2.0, 1.0]))
        assert scaled.target_masses[0] == pytest.approx(1.0, rel=1e-14)
        # and the solved heights carry the same 1/|det| factor
        u = ma.solve_dirac(problem).solution.heights[0]
        v = ma.solve_dirac(scaled).solution.heights[0]
        assert v == pytest.approx(0.5 * u, rel=1e-7)

    def test_round_trip_restores_problem(self, rng):
        problem = random_zero_boundary_problem(rng, 6)
        t = np.array([0.4, -0.7])
        fwd = ma.affine_transform_problem(problem, self.A, translation=t)
        inv = np.linalg.inv(self.A)
        back = ma.affine_transform_problem(fwd, inv, translation=-inv @ t)
        assert np.max(np.abs(back.nodes - problem.nodes)) <= 1e-12
        assert np.max(np.abs(back.target_masses - problem.target_masses)) <= 1e-12
        assert np.max(np.abs(np.asarray(back.domain.vertices) - np.asarray(problem.domain.vertices))) <= 1e-12

    def test_singular_matrix_rejected(self):
        dom, bp, bv = square_zero_boundary()
        problem = ma.DiracProblem(dom, bp, bv, np.array([[0.0, 0.0]]), np.array([1.0]))
        with pytest.raises(ma.SingularTransformError):
            ma.affine_transform_problem(problem, np.ones((2, 2)))


class TestGaussCurvature:
    def test_hemisphere_is_round(self):
        # graph of -sqrt(1-|x|^2) has curvature one everywhere
        for x in (np.array([0.0, 0.0]), np.array([0.3, 0.2]), np.array([-0.6, 0.5])):
            w = np.sqrt(1.0 - x @ x)
            grad = x / w
            hess = (np.eye(2) + np.outer(x, x) / w**2) / w
            assert ma.gauss_curvature(grad, hess) == pytest.approx(1.0, abs=1e-8)

    def test_paraboloid_formula(self):
        x = np.array([0.7, -0.4])
        k = ma.gauss_curvature(x, np.eye(2))
        assert k == pytest.approx(1.0 / (1.0 + x @ x) ** 2, rel=1e-12)

    def test_saddle_curvature_is_negative(self):
        assert ma.gauss_curvature(np.zeros(2), np.diag([1.0, -1.0])) == pytest.approx(-1.0)


class TestLogDetExpansion:
    def test_identity_value(self):
        got = ma.logdet_expansion_residual(ma.SymMatrix(np.eye(2)), ma.SymMatrix(np.eye(2)), 0.1)
        assert got == pytest.approx(2.0 * (np.log(1.1) - 0.1 + 0.005), rel=1e-10)

    def test_zero_perturbation(self):
        m = ma.SymMatrix(np.array([[3.0, 1.0], [1.0, 2.0]]))
        assert ma.logdet_expansion_residual(m, ma.SymMatrix(np.zeros((2, 2))), 0.25) == 0.0

    @given(st.integers(0, 100))
    def test_cubic_scaling(self, seed):
        # keep N positive definite and moderate next to M, otherwise the
        # eps^4 term contaminates the slope read at the coarsest eps
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(2, 2))
        m = a @ a.T + 0.5 * np.eye(2)
        b = rng.normal(size=(2, 2))
        n = b @ b.T + 0.1 * np.eye(2)
        n *= 0.5 / np.abs(np.linalg.eigvals(np.linalg.solve(m, n))).max()
        eps = np.array([0.1, 0.05, 0.025, 0.0125])
        res = np.array(
            [ma.logdet_expansion_residual(ma.SymMatrix(m), ma.SymMatrix(n), e) for e in eps]
        )
        slope = np.polyfit(np.log(eps), np.log(res), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.1)

    def test_not_positive_definite_rejected(self):
        with pytest.raises(ma.NotPositiveDefiniteError):
            ma.logdet_expansion_residual(
                ma.SymMatrix(np.diag([1.0, -1.0])), ma.SymMatrix(np.eye(2)), 0.1
            )


class TestSymMatrix:
    def test_cholesky_reconstructs(self):
        m = np.array([[2.0, 1.0], [1.0, 2.0]])
        low = ma.SymMatrix(m).cholesky()
        assert np.allclose(low @ low.T, m, atol=1e-14)
        assert low[0, 1] == 0.0

    def test_symmetrizes_on_construction(self):
        m = ma.SymMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
        assert np.array_equal(m.array, np.ones((2, 2)))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            ma.SymMatrix(np.zeros((2, 3)))
