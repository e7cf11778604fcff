"""Bootstrap confidence ellipsoids for high-dimensional parameters.

The supremum of ``u -> Z'u`` over the unit sphere is ``||Z||_2``, which
for a KL draw is ``sqrt(sum_k lambda_k xi_k^2)``; no sphere net is needed.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import rng as crng
from .bootstrap import SupSamples, monte_carlo, quantile
from .covariance import sample_cov_function
from .exceptions import AlphaOutOfRange, DimensionMismatch, TooFewSamples, ZeroMatrix
from .gp_core import check_cov_matrix, eigendecompose_psd


@dataclass(frozen=True)
class EllipsoidResult:
    center: np.ndarray
    radius: float
    alpha: float
    quantile_draws: SupSamples

    def contains(self, theta):
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        dist = np.linalg.norm(theta - self.center, axis=1)
        inside = dist <= self.radius
        return inside if inside.size > 1 else bool(inside[0])


def influence_cov(psi):
    """Centered sample covariance of influence-function rows."""
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2 or psi.shape[0] < 2:
        raise TooFewSamples("need an n x d matrix with n >= 2")
    return sample_cov_function(psi)


def effective_rank(sigma):
    """``tr(sigma) / ||sigma||_op``."""
    sigma = check_cov_matrix(sigma)
    top = float(np.linalg.eigvalsh(sigma)[-1])
    if top <= 0:
        raise ZeroMatrix("effective rank of the zero matrix is undefined")
    return float(np.trace(sigma) / top)


def l2_norm_draws(omega_hat, B, seed, stream=0, n_jobs=None):
    """``B`` draws of ``||Z||_2`` with ``Z ~ N(0, omega_hat)``."""
    basis = eigendecompose_psd(omega_hat)
    if basis.rank == 0:
        return SupSamples(np.zeros(B), seed, 0, B, degenerate=True)
    lam = basis.eigenvalues

    def stat(xi):
        return np.sqrt((xi * xi) @ lam)

    draws = monte_carlo(stat, basis.rank, B, seed, stream, n_jobs=n_jobs, chunk=16384)
    return SupSamples(draws, seed, basis.rank, B)


def ellipsoid_quantile(omega_hat, alpha, B, seed, stream=0, n_jobs=None):
    """Monte Carlo ``alpha``-quantile of ``||Z||_2``, ``Z ~ N(0, omega_hat)``."""
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} not in (0, 1)")
    return quantile(l2_norm_draws(omega_hat, B, seed, stream, n_jobs), alpha)


def ellipsoid(theta_hat, omega_hat, alpha, n, B, seed, stream=0, n_jobs=None):
    """Ellipsoid ``{theta : sqrt(n) ||theta_hat - theta||_2 <= c(1 - alpha)}``."""
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} not in (0, 1)")
    theta_hat = np.asarray(theta_hat, dtype=float).ravel()
    omega_hat = check_cov_matrix(omega_hat)
    if omega_hat.shape[0] != theta_hat.shape[0]:
        raise DimensionMismatch("theta_hat and omega_hat dimensions differ")
    draws = l2_norm_draws(omega_hat, B, seed, stream, n_jobs)
    c = quantile(draws, 1.0 - alpha)
    return EllipsoidResult(theta_hat, c / np.sqrt(n), alpha, draws)


def decaying_cov(d, ratio=0.5):
    """Diagonal covariance with eigenvalues ``ratio**k``; effective rank ``~ 1/(1 - ratio)``."""
    return np.diag(ratio ** np.arange(d))


def coverage_simulation(omega, d, n, alpha, reps, B, seed, remainder_scale=0.0, n_jobs=None):
    """Fraction of replications whose ellipsoid covers the true parameter.

    Each replication draws ``psi_i ~ N(0, omega)``, sets
    ``theta_hat = theta_0 + mean(psi) + R_n`` with the deterministic
    remainder ``R_n = remainder_scale / sqrt(n) * v_1`` (``v_1`` the top
    eigenvector of ``omega``), and builds the bootstrap ellipsoid.
    """
    if reps < 100:
        raise ValueError(f"reps must be at least 100, got {reps}")
    omega = check_cov_matrix(omega)
    if omega.shape[0] != d:
        raise DimensionMismatch(f"omega is {omega.shape[0]}-dimensional, d={d}")
    basis = eigendecompose_psd(omega)
    loadings = basis.eigenvectors * np.sqrt(basis.eigenvalues)
    direction = basis.eigenvectors[:, 0]
    theta0 = np.zeros(d)
    hits = 0
    for rep in range(reps):
        xi = crng.normals(seed, crng.derive_stream(rep, 0), 0, n, basis.rank)
        psi = xi @ loadings.T
        theta_hat = theta0 + psi.mean(axis=0) + remainder_scale / np.sqrt(n) * direction
        res = ellipsoid(theta_hat, influence_cov(psi), alpha, n, B, seed,
                        stream=crng.derive_stream(rep, 1), n_jobs=n_jobs)
        hits += bool(res.contains(theta0))
    return hits / reps


class BootstrapConfidenceEllipsoid(BaseEstimator):
    """Confidence ellipsoid from influence-function evaluations.

    ``fit(psi, theta_hat)`` estimates the influence covariance and the
    bootstrap radius; ``contains(theta)`` tests membership.
    """

    def __init__(self, alpha=0.05, n_draws=5000, seed=0, n_jobs=None):
        self.alpha = alpha
        self.n_draws = n_draws
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, psi, theta_hat=None):
        psi = check_array(psi, ensure_min_samples=2)
        if theta_hat is None:
            theta_hat = np.zeros(psi.shape[1])
        self.omega_ = influence_cov(psi)
        self.result_ = ellipsoid(theta_hat, self.omega_, self.alpha, psi.shape[0],
                                 self.n_draws, self.seed, n_jobs=self.n_jobs)
        self.center_ = self.result_.center
        self.radius_ = self.result_.radius
        self.n_features_in_ = psi.shape[1]
        return self

    def contains(self, theta):
        check_is_fitted(self, "result_")
        return self.result_.contains(theta)
