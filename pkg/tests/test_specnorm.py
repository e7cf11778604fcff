import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpboot import rng as crng
from gpboot.exceptions import NotSymmetric, TooFewSamples
from gpboot.specnorm import (
    SpectralNormBootstrap,
    bootstrap_specnorm,
    duplication_matrix,
    omega_hat_vech,
    operator_norm,
    specnorm_coverage,
    specnorm_draws,
    specnorm_statistic,
    unvech,
    vec,
    vech,
)


def sym(rs, d):
    A = rs.standard_normal((d, d))
    return A + A.T


def test_vech_examples():
    np.testing.assert_array_equal(vech(np.array([[1.0, 2.0], [2.0, 3.0]])), [1, 2, 3])
    assert np.all(vech(np.zeros((3, 3))) == 0)
    A = sym(np.random.default_rng(0), 4)
    np.testing.assert_array_equal(unvech(vech(A)), A)
    # column-major lower triangle: (0,0),(1,0),(2,0),(1,1),(2,1),(2,2)
    B = np.arange(9.0).reshape(3, 3)
    B = B + B.T
    np.testing.assert_array_equal(vech(B), [B[0, 0], B[1, 0], B[2, 0], B[1, 1], B[2, 1], B[2, 2]])
    with pytest.raises(NotSymmetric):
        vech(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_duplication_matrix_examples():
    np.testing.assert_array_equal(duplication_matrix(1), [[1.0]])
    np.testing.assert_array_equal(duplication_matrix(2), [[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]])


def test_duplication_identity_randomized():
    rs = np.random.default_rng(1)
    for _ in range(200):
        d = int(rs.integers(1, 7))
        A = sym(rs, d)
        np.testing.assert_array_equal(duplication_matrix(d) @ vech(A), vec(A))


def test_operator_norm_examples():
    assert operator_norm(np.diag([-3.0, 2.0])) == 3
    assert operator_norm(np.zeros((4, 4))) == 0
    assert operator_norm(np.diag([-3.0, 2.0]), method="power") == pytest.approx(3, rel=1e-9)
    with pytest.raises(NotSymmetric):
        operator_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("seed", range(5))
def test_power_iteration_matches_eigen(seed):
    A = sym(np.random.default_rng(seed), 20)
    ref = np.max(np.abs(np.linalg.eigvalsh(A)))
    assert abs(operator_norm(A, method="power") - ref) <= 1e-7 * ref


def test_power_iteration_handles_opposite_eigenvalues():
    assert operator_norm(np.diag([2.0, -2.0, 1.0]), method="power") == pytest.approx(2.0)
    big = np.diag(np.linspace(-1, 1, 70))
    assert operator_norm(big) == pytest.approx(1.0)


def test_statistic_examples():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    assert specnorm_statistic(X, 0.5 * np.eye(2)) == pytest.approx(0.0, abs=1e-15)
    x = crng.normals(2, 0, 0, 50, 1)
    assert specnorm_statistic(x, np.array([[2.0]])) == pytest.approx(
        np.sqrt(50) * abs(np.mean(x**2) - 2.0))
    rs = np.random.default_rng(3)
    for _ in range(10):
        d = int(rs.integers(1, 9))
        X = rs.standard_normal((30, d))
        S = rs.standard_normal((d, d))
        S = S @ S.T
        ref = np.sqrt(30) * np.max(np.abs(np.linalg.eigvalsh(X.T @ X / 30 - S)))
        assert specnorm_statistic(X, S) == pytest.approx(ref, rel=1e-12)


def test_omega_hat_examples():
    assert np.all(omega_hat_vech(np.tile([1.0, 2.0], (6, 1))) == 0)
    x = crng.normals(4, 0, 0, 40, 1)
    assert omega_hat_vech(x)[0, 0] == pytest.approx(np.var(x[:, 0] ** 2))
    with pytest.raises(TooFewSamples):
        omega_hat_vech(np.ones((1, 2)))


def test_omega_hat_against_gaussian_fourth_moments():
    sigma = np.array([[1.0, 0.3, 0.0], [0.3, 0.5, 0.1], [0.0, 0.1, 0.25]])
    L = np.linalg.cholesky(sigma)
    X = crng.normals(6, 0, 0, 10_000, 3) @ L.T
    cols, rows = np.triu_indices(3)
    # Cov(X_i X_j, X_k X_l) = S_ik S_jl + S_il S_jk for Gaussian data
    pop = (sigma[np.ix_(rows, rows)] * sigma[np.ix_(cols, cols)]
           + sigma[np.ix_(rows, cols)] * sigma[np.ix_(cols, rows)])
    est = omega_hat_vech(X)
    assert np.max(np.abs(est - pop)) <= 0.1 * np.max(np.abs(pop))


def test_bootstrap_examples():
    assert np.all(bootstrap_specnorm(np.tile([1.0, 2.0], (5, 1)), 200, 0).draws == 0)
    x = crng.normals(8, 0, 0, 300, 1)
    s = bootstrap_specnorm(x, 100_000, 1)
    v = np.var(x[:, 0] ** 2)
    assert s.draws.mean() == pytest.approx(np.sqrt(2 * v / np.pi), rel=0.01)


def test_proxy_symmetry_and_scale_equivariance():
    X = crng.normals(9, 0, 0, 100, 4)
    samples, asym = specnorm_draws(omega_hat_vech(X), 4, 2000, 3)
    assert asym <= 1e-12
    scaled = bootstrap_specnorm(3 * X, 2000, 3)
    np.testing.assert_allclose(scaled.draws, 9 * samples.draws, rtol=1e-9)
    sigma = np.eye(4)
    assert specnorm_statistic(3 * X, 9 * sigma) == pytest.approx(9 * specnorm_statistic(X, sigma))


def test_determinism_and_threads():
    X = crng.normals(10, 0, 0, 80, 3)
    a = bootstrap_specnorm(X, 3000, 5)
    b = bootstrap_specnorm(X, 3000, 5, n_jobs=3)
    np.testing.assert_array_equal(a.draws, b.draws)


def test_small_coverage_run():
    cov = specnorm_coverage(np.diag([1.0, 0.25, 0.0625]), 500, 200, 1000, 0.1, 3)
    assert 0.8 <= cov <= 0.98


def test_estimator_api():
    X = crng.normals(11, 0, 0, 120, 3)
    est = SpectralNormBootstrap(n_draws=500, seed=2).fit(X)
    assert est.omega_.shape == (6, 6) and est.max_asymmetry_ <= 1e-12
    assert est.quantile(0.9) > 0
    assert est.statistic(X, np.eye(3)) >= 0
    centered = SpectralNormBootstrap(n_draws=500, centered=True).fit(X + 5)
    np.testing.assert_allclose(centered.omega_, SpectralNormBootstrap(centered=True).fit(X).omega_,
                               atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_vech_roundtrip_property(d, seed):
    A = sym(np.random.default_rng(seed), d)
    np.testing.assert_array_equal(unvech(vech(A), d), A)
    np.testing.assert_array_equal(duplication_matrix(d) @ vech(A), vec(A))
