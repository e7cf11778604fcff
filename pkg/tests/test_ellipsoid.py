import numpy as np
import pytest
from scipy import stats
from sklearn.base import clone

from gpboot import rng as crng
from gpboot.ellipsoid import (
    BootstrapConfidenceEllipsoid,
    decaying_cov,
    coverage_simulation,
    effective_rank,
    ellipsoid,
    ellipsoid_quantile,
    influence_cov,
    l2_norm_draws,
)
from gpboot.exceptions import AlphaOutOfRange, TooFewSamples, ZeroMatrix
from gpboot.gp_core import eigendecompose_psd


def test_influence_cov_examples():
    assert np.all(influence_cov(np.tile([1.0, 2.0], (5, 1))) == 0)
    np.testing.assert_allclose(influence_cov(np.array([[1.0, 0.0], [-1.0, 0.0]])), np.diag([1.0, 0.0]))
    psi = crng.normals(1, 0, 0, 10_000, 2) * np.sqrt([2.0, 1.0])
    np.testing.assert_allclose(np.diag(influence_cov(psi)), [2.0, 1.0], rtol=0.05)
    with pytest.raises(TooFewSamples):
        influence_cov(np.ones((1, 2)))


def test_scalar_quantile_oracle():
    B = 200_000
    q = ellipsoid_quantile(np.eye(1), 0.95, B, 3)
    # MC error of a quantile: sqrt(p(1-p)/B) / density at the quantile
    se = np.sqrt(0.95 * 0.05 / B) / (2 * stats.norm.pdf(1.959964))
    assert abs(q - 1.959964) <= 3 * se


def test_zero_and_scaling():
    assert ellipsoid_quantile(np.zeros((3, 3)), 0.9, 500, 0) == 0.0
    base = decaying_cov(6)
    q0 = ellipsoid_quantile(base, 0.9, 5000, 7)
    assert ellipsoid_quantile(9 * base, 0.9, 5000, 7) == pytest.approx(3 * q0, rel=1e-12)


def test_rotation_equivariance():
    base = decaying_cov(5)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))
    rot = Q @ base @ Q.T
    rot = 0.5 * (rot + rot.T)
    assert ellipsoid_quantile(rot, 0.9, 5000, 4) == pytest.approx(
        ellipsoid_quantile(base, 0.9, 5000, 4), rel=1e-10)


def test_norm_identity_matches_sampled_vector():
    omega = decaying_cov(4) + 0.1
    basis = eigendecompose_psd(omega)
    draws = l2_norm_draws(omega, 1000, 5)
    xi = crng.normals(5, 0, 0, 1000, basis.rank)
    Z = xi @ (basis.eigenvectors * np.sqrt(basis.eigenvalues)).T
    np.testing.assert_allclose(draws.draws, np.sort(np.linalg.norm(Z, axis=1)), atol=1e-10)


def test_ellipsoid_result():
    res = ellipsoid([0.3], np.eye(1), 0.05, 100, 100_000, 1)
    assert res.radius == pytest.approx(1.959964 / 10, rel=0.01)
    assert res.contains([0.3])
    assert res.contains([0.3 + 0.99 * res.radius]) and not res.contains([0.3 + 1.01 * res.radius])
    with pytest.raises(AlphaOutOfRange):
        ellipsoid([0.0], np.eye(1), 1.5, 10, 100, 0)


def test_radius_nonincreasing_in_alpha():
    radii = [ellipsoid(np.zeros(3), np.eye(3), a, 50, 4000, 2).radius for a in (0.01, 0.05, 0.1, 0.5)]
    assert all(b <= a for a, b in zip(radii, radii[1:]))


def test_effective_rank_examples():
    assert effective_rank(np.eye(5)) == pytest.approx(5)
    a = np.array([1.0, -2.0, 0.5])
    assert effective_rank(np.outer(a, a)) == pytest.approx(1)
    C = 0.5 * np.eye(4) + 0.5 * np.ones((4, 4))
    assert effective_rank(C) == pytest.approx(1.6)
    assert effective_rank(decaying_cov(50)) == pytest.approx(2, abs=1e-12)
    with pytest.raises(ZeroMatrix):
        effective_rank(np.zeros((2, 2)))


def test_coverage_degrades_with_remainder():
    omega = decaying_cov(5)
    covs = [coverage_simulation(omega, 5, 100, 0.1, 300, 1000, 11, remainder_scale=s)
            for s in (0.0, 1.5, 4.0)]
    assert covs[0] >= covs[1] >= covs[2]
    assert covs[2] < 0.5
    with pytest.raises(ValueError):
        coverage_simulation(omega, 5, 100, 0.1, 10, 1000, 0)


@pytest.mark.slow
def test_large_n_small_d_coverage():
    cov = coverage_simulation(np.diag([1.0, 0.5]), 2, 10_000, 0.1, 8000, 2000, 21)
    assert abs(cov - 0.9) <= 0.01


def test_estimator_api():
    psi = crng.normals(3, 0, 0, 200, 3)
    est = BootstrapConfidenceEllipsoid(alpha=0.1, n_draws=1000, seed=1).fit(psi, np.ones(3))
    assert est.radius_ > 0 and est.contains(np.ones(3))
    assert clone(est).get_params() == est.get_params()
