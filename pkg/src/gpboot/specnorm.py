"""Bootstrap for the spectral norm of a sample covariance matrix.

``vech`` stacks the lower triangle column by column (columns outer,
rows inner); the duplication matrix ``H_d`` is built for that ordering
so that ``H_d @ vech(A) == vec(A)`` with column-major ``vec``.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import rng as crng
from .bootstrap import SupSamples, monte_carlo, quantile
from .covariance import psd_repair
from .exceptions import DimensionMismatch, NoConvergence, NotSymmetric, TooFewSamples
from .gp_core import check_cov_matrix, eigendecompose_psd

EIGEN_DIM_LIMIT = 64
FULL_KL_LIMIT = EIGEN_DIM_LIMIT * (EIGEN_DIM_LIMIT + 1) // 2


def _vech_index(d):
    cols, rows = np.triu_indices(d)
    return rows, cols


def _check_symmetric(A, tol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.size and np.max(np.abs(A - A.T)) > tol:
        raise NotSymmetric("matrix is not symmetric within 1e-10")
    return A


def vech(A):
    """Half-vectorization of a symmetric matrix, length ``d(d+1)/2``."""
    A = _check_symmetric(A)
    rows, cols = _vech_index(A.shape[0])
    return A[rows, cols]


def vech_dim(p):
    d = int(round((np.sqrt(8 * p + 1) - 1) / 2))
    if d * (d + 1) // 2 != p:
        raise DimensionMismatch(f"{p} is not a triangular number")
    return d


def unvech(v, d=None):
    v = np.asarray(v, dtype=float)
    d = vech_dim(v.shape[-1]) if d is None else d
    rows, cols = _vech_index(d)
    A = np.zeros(v.shape[:-1] + (d, d))
    A[..., rows, cols] = v
    A[..., cols, rows] = v
    return A


def vec(A):
    return np.asarray(A).reshape(-1, order="F")


def duplication_matrix(d):
    """0/1 matrix ``H_d`` of shape ``(d^2, d(d+1)/2)`` with ``H_d vech(A) = vec(A)``."""
    rows, cols = _vech_index(d)
    H = np.zeros((d * d, len(rows)))
    p = np.arange(len(rows))
    H[cols * d + rows, p] = 1.0
    H[rows * d + cols, p] = 1.0
    return H


def _power_norm(A, tol=1e-9, max_iter=10_000):
    # iterate on A^2 so that +/- lambda of equal modulus cannot stall convergence
    d = A.shape[0]
    x = np.ones(d) + np.arange(d) / (d + 1.0)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = A @ (A @ x)
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(new - est) <= tol * max(abs(new), 1e-300):
            return float(np.sqrt(max(new, 0.0)))
        est = new
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def operator_norm(A, method="auto"):
    """Largest absolute eigenvalue of a symmetric matrix.

    ``method="auto"`` uses a full symmetric eigensolver up to dimension
    64 and power iteration above; ``"eigen"``/``"power"`` force one.
    """
    A = _check_symmetric(A)
    if A.size == 0:
        return 0.0
    if method == "auto":
        method = "eigen" if A.shape[0] <= EIGEN_DIM_LIMIT else "power"
    if method == "eigen":
        return float(np.max(np.abs(np.linalg.eigvalsh(A))))
    if method == "power":
        return _power_norm(A)
    raise ValueError(f"unknown method {method!r}")


def _batch_operator_norm(S):
    d = S.shape[-1]
    if d <= EIGEN_DIM_LIMIT:
        return np.max(np.abs(np.linalg.eigvalsh(S)), axis=-1)
    return np.array([_power_norm(s) for s in S])


def sample_second_moment(data, centered=False):
    X = np.asarray(data, dtype=float)
    if centered:
        X = X - X.mean(axis=0)
    return X.T @ X / X.shape[0]


def specnorm_statistic(data, sigma, centered=False):
    """``sqrt(n) * ||Sigma_hat - Sigma||_op`` with ``Sigma_hat = n^{-1} sum X_i X_i'``.

    ``centered=True`` subtracts the sample mean first (off the mean-zero
    model, for practical data).
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (X.shape[1], X.shape[1]):
        raise DimensionMismatch(f"sigma shape {sigma.shape} vs data dimension {X.shape[1]}")
    diff = sample_second_moment(X, centered) - sigma
    return float(np.sqrt(X.shape[0]) * operator_norm(0.5 * (diff + diff.T)))


def omega_hat_vech(data, centered=False):
    """``n^{-1} sum_i vech(X_i X_i' - Sigma_hat) vech(X_i X_i' - Sigma_hat)'``."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewSamples("need an n x d data matrix with n >= 2")
    if centered:
        X = X - X.mean(axis=0)
    d = X.shape[1]
    rows, cols = _vech_index(d)
    W = X[:, rows] * X[:, cols]
    W = W - W.mean(axis=0)
    return psd_repair(W.T @ W / X.shape[0])


def specnorm_draws(omega_hat, d, B, seed, stream=0, m=None, n_jobs=None):
    """``B`` draws of ``||S||_op`` with ``S = vec^{-1}(H_d Z)``, ``Z ~ N(0, omega_hat)``.

    Returns ``(SupSamples, max_asymmetry)`` where the second value is the
    largest ``|S - S'|`` entry over all draws.
    """
    omega_hat = check_cov_matrix(omega_hat)
    p = omega_hat.shape[0]
    if p != d * (d + 1) // 2:
        raise DimensionMismatch(f"omega_hat has size {p}, expected {d * (d + 1) // 2}")
    if m is None and p > FULL_KL_LIMIT:
        raise ValueError("truncation level m is required when d > 64")
    basis = eigendecompose_psd(omega_hat)
    if basis.rank == 0:
        return SupSamples(np.zeros(B), seed, 0, B, degenerate=True), 0.0
    m = basis.rank if m is None else min(int(m), basis.rank)
    loadings = basis.eigenvectors[:, :m] * np.sqrt(basis.eigenvalues[:m])
    Ht = duplication_matrix(d).T
    asym = [0.0]

    def stat(xi):
        z = xi @ loadings.T
        S = (z @ Ht).reshape(-1, d, d).transpose(0, 2, 1)
        asym.append(float(np.max(np.abs(S - S.transpose(0, 2, 1)))))
        return _batch_operator_norm(S)

    chunk = max(1, min(8192, (1 << 20) // (d * d)))
    draws = monte_carlo(stat, m, B, seed, stream, n_jobs=n_jobs, chunk=chunk)
    return SupSamples(draws, seed, m, B), max(asym)


def bootstrap_specnorm(data, B, seed, stream=0, m=None, centered=False, n_jobs=None):
    """Gaussian-proxy law of ``sqrt(n) ||Sigma_hat - Sigma||_op``."""
    if B < 100:
        raise ValueError(f"B must be at least 100, got {B}")
    X = np.asarray(data, dtype=float)
    samples, _ = specnorm_draws(omega_hat_vech(X, centered), X.shape[1], B, seed,
                                stream, m, n_jobs)
    return samples


def specnorm_coverage(sigma, n, reps, B, alpha, seed, n_jobs=None):
    """Fraction of Gaussian replications with ``T_n <= c(1 - alpha)``."""
    sigma = check_cov_matrix(sigma)
    basis = eigendecompose_psd(sigma)
    loadings = basis.eigenvectors * np.sqrt(basis.eigenvalues)
    hits = 0
    for rep in range(reps):
        xi = crng.normals(seed, crng.derive_stream(rep, 0), 0, n, basis.rank)
        X = xi @ loadings.T
        t = specnorm_statistic(X, sigma)
        c = quantile(bootstrap_specnorm(X, B, seed, crng.derive_stream(rep, 1),
                                        n_jobs=n_jobs), 1.0 - alpha)
        hits += t <= c
    return hits / reps


class SpectralNormBootstrap(BaseEstimator):
    """Estimator wrapper: ``fit(X)`` builds the vech covariance and proxy draws."""

    def __init__(self, n_draws=2000, seed=0, m=None, centered=False, n_jobs=None):
        self.n_draws = n_draws
        self.seed = seed
        self.m = m
        self.centered = centered
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        self.sigma_hat_ = sample_second_moment(X, self.centered)
        self.omega_ = omega_hat_vech(X, self.centered)
        self.samples_, self.max_asymmetry_ = specnorm_draws(
            self.omega_, X.shape[1], self.n_draws, self.seed, m=self.m, n_jobs=self.n_jobs)
        self.n_samples_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        return self

    def quantile(self, alpha):
        check_is_fitted(self, "samples_")
        return quantile(self.samples_, alpha)

    def statistic(self, X, sigma):
        return specnorm_statistic(X, sigma, self.centered)
