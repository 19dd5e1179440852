"""Exact trust-region subproblem solutions against independent verifiers."""

import numpy as np
import pytest

from sdfo import (
    QuadraticModel,
    brute_force_min,
    kkt_residuals,
    model_value,
    solve_exact,
)
from sdfo.linalg import clip_eigenvalues, jacobi_eigendecomposition


def random_model(rng, n, radius=None, eig_range=(-10.0, 10.0)):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = rng.uniform(*eig_range, n)
    b = (q * w) @ q.T
    b = 0.5 * (b + b.T)
    g = rng.standard_normal(n)
    g /= np.linalg.norm(g)
    if radius is None:
        radius = float(rng.uniform(0.1, 3.0))
    return QuadraticModel(g=g, B=b, radius=radius)


def hard_case_model(rng, n, radius_factor=2.0):
    """Gradient orthogonal to a strictly negative lowest eigenspace."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.sort(rng.uniform(0.5, 8.0, n))
    w[0] = -float(rng.uniform(1.0, 6.0))
    b = (q * w) @ q.T
    b = 0.5 * (b + b.T)
    coeffs = rng.standard_normal(n - 1)
    g = q[:, 1:] @ coeffs
    g /= np.linalg.norm(g)
    # Radius beyond the shifted-system solution norm forces the eigenvector bump.
    shifted = np.abs(q[:, 1:].T @ g) / (w[1:] - w[0])
    radius = radius_factor * float(np.linalg.norm(shifted))
    return QuadraticModel(g=g, B=b, radius=radius)


def assert_certificate(model, sol, decrease_tol=1e-12):
    res = kkt_residuals(model, sol)
    norm_s = float(np.linalg.norm(sol.s))
    assert norm_s <= model.radius * (1.0 + 1e-10)
    assert sol.multiplier >= 0.0
    assert res["psd_margin"] >= -1e-8
    assert res["complementarity"] <= 1e-8
    assert res["stationarity"] <= 1e-6 * (1.0 + abs(sol.multiplier))
    if sol.on_boundary:
        assert abs(norm_s - model.radius) <= 1e-8 * model.radius
    assert sol.model_decrease <= decrease_tol


class TestJacobi:
    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
    def test_matches_lapack(self, n):
        rng = np.random.default_rng(n)
        a = rng.standard_normal((n, n))
        a = a + a.T
        w, v = jacobi_eigendecomposition(a)
        w_ref = np.linalg.eigvalsh(a)
        assert np.allclose(w, w_ref, atol=1e-12 * max(1.0, np.abs(w_ref).max()))
        assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-12 * max(1.0, np.abs(a).max()))
        assert np.allclose(v.T @ v, np.eye(n), atol=1e-13)

    def test_zero_matrix(self):
        w, v = jacobi_eigendecomposition(np.zeros((3, 3)))
        assert np.array_equal(w, np.zeros(3))
        assert np.array_equal(v, np.eye(3))

    def test_clip_eigenvalues(self):
        a = np.diag([5.0, -7.0, 0.5])
        clipped = clip_eigenvalues(a, -2.0, 2.0)
        w, _ = jacobi_eigendecomposition(clipped)
        assert np.allclose(sorted(w), [-2.0, 0.5, 2.0], atol=1e-12)


class TestSolveExactExamples:
    def test_boundary_spherical_symmetry(self):
        model = QuadraticModel(g=np.array([1.0, 0.0]), B=np.eye(2), radius=0.5)
        sol = solve_exact(model)
        assert np.allclose(sol.s, [-0.5, 0.0], atol=1e-12)
        assert sol.on_boundary
        assert sol.model_decrease == pytest.approx(-0.375, abs=1e-12)

    def test_interior_newton_point(self):
        model = QuadraticModel(g=np.array([1.0, 0.0]), B=np.eye(2), radius=2.0)
        sol = solve_exact(model)
        assert np.allclose(sol.s, [-1.0, 0.0], atol=1e-12)
        assert not sol.on_boundary
        assert sol.multiplier == 0.0
        assert sol.model_decrease == pytest.approx(-0.5, abs=1e-12)

    def test_hard_case_indefinite(self):
        model = QuadraticModel(g=np.array([0.0, 1.0]), B=np.diag([-1.0, 1.0]), radius=1.0)
        sol = solve_exact(model)
        # Shifted solution (0, -1/2) plus a sqrt(3)/2 lowest-eigenvector bump.
        assert sol.model_decrease == pytest.approx(-0.75, abs=1e-10)
        assert_certificate(model, sol)
        _, brute_value = brute_force_min(model, 10**6, seed=2)
        assert sol.model_decrease <= brute_value + 1e-6

    def test_psd_singular_interior(self):
        model = QuadraticModel(g=np.array([0.0, 1.0]), B=np.diag([0.0, 1.0]), radius=2.0)
        sol = solve_exact(model)
        assert sol.multiplier == 0.0
        assert sol.model_decrease == pytest.approx(-0.5, abs=1e-12)
        assert_certificate(model, sol)

    def test_zero_matrix_step_is_exact(self):
        g = np.array([0.6, 0.8])
        model = QuadraticModel(g=g, B=np.zeros((2, 2)), radius=1.25)
        sol = solve_exact(model)
        assert np.array_equal(sol.s, -1.25 * g)
        assert sol.on_boundary

    def test_input_validation(self):
        with pytest.raises(ValueError):
            QuadraticModel(g=np.array([1.0, 0.0]), B=np.array([[0.0, 1.0], [0.0, 0.0]]), radius=1.0)
        with pytest.raises(ValueError):
            QuadraticModel(g=np.array([1.0, 1.0]), B=np.eye(2), radius=1.0)
        with pytest.raises(ValueError):
            QuadraticModel(g=np.array([1.0, 0.0]), B=np.full((2, 2), np.nan), radius=1.0)
        with pytest.raises(ValueError):
            QuadraticModel(g=np.array([1.0, 0.0]), B=np.eye(2), radius=-1.0)


class TestBruteForce:
    def test_linear_model_on_ball(self):
        model = QuadraticModel(g=np.array([1.0, 0.0]), B=np.zeros((2, 2)), radius=1.0)
        point, value = brute_force_min(model, 100, seed=0)
        assert value == -1.0
        assert np.array_equal(point, np.array([-1.0, 0.0]))

    def test_origin_always_candidate(self):
        model = QuadraticModel(g=np.array([1.0, 0.0]), B=np.eye(2), radius=1.0)
        _, value = brute_force_min(model, 1, seed=0, include_candidates=False)
        assert value <= 0.0

    def test_never_beats_exact_solution(self):
        rng = np.random.default_rng(8)
        for trial in range(60):
            model = random_model(rng, int(rng.integers(1, 5)))
            sol = solve_exact(model)
            _, brute_value = brute_force_min(model, 10**4, seed=trial)
            assert brute_value >= sol.model_decrease - 1e-9


class TestRandomBattery:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_certificates_and_dominance(self, n):
        rng = np.random.default_rng(100 + n)
        for trial in range(40):
            model = random_model(rng, n)
            sol = solve_exact(model)
            assert_certificate(model, sol)
            _, brute_value = brute_force_min(model, 2 * 10**4, seed=trial)
            assert sol.model_decrease <= brute_value + 1e-6

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_hard_cases(self, n):
        rng = np.random.default_rng(200 + n)
        for trial in range(8):
            model = hard_case_model(rng, n)
            sol = solve_exact(model)
            assert sol.on_boundary
            assert sol.multiplier > 0.0
            assert_certificate(model, sol)
            _, brute_value = brute_force_min(model, 2 * 10**4, seed=trial)
            assert sol.model_decrease <= brute_value + 1e-6

    def test_scaling_covariance_with_zero_matrix(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = rng.standard_normal(3)
            g /= np.linalg.norm(g)
            radius = float(rng.uniform(0.01, 10.0))
            sol = solve_exact(QuadraticModel(g=g, B=np.zeros((3, 3)), radius=radius))
            assert np.array_equal(sol.s, -radius * g)

    def test_model_decrease_never_positive(self):
        rng = np.random.default_rng(77)
        for trial in range(50):
            model = random_model(rng, int(rng.integers(1, 6)))
            assert solve_exact(model).model_decrease <= 1e-12

    def test_value_helper_matches_definition(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 3)
        s = rng.standard_normal(3) * 0.1
        expected = float(model.g @ s + 0.5 * s @ model.B @ s)
        assert model_value(model, s) == pytest.approx(expected, rel=1e-15)
