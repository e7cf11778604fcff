"""Gaussian process bootstrap for suprema over a finite index net.

The three steps are: estimate a PSD covariance on the net, decompose it
and truncate at level ``m``, then draw Monte Carlo samples of the
supremum of the truncated Karhunen-Loeve process.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import rng as crng
from .covariance import EvaluatedSample, sample_cov_function
from .exceptions import (
    AlphaOutOfRange,
    DegenerateCovariance,
    EmptyNet,
    NonpositiveVariance,
    TooFewPoints,
)
from .gp_core import DEFAULT_RANK_TOL, eigendecompose_psd

NET_KINDS = ("sphere", "sphere_pair", "grid", "explicit")

# max floats held per Monte Carlo chunk (draws x net points)
_CHUNK_FLOATS = 1 << 22


@dataclass(frozen=True)
class IndexNet:
    kind: str
    points: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in NET_KINDS:
            raise ValueError(f"unknown net kind {self.kind!r}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] == 0:
            raise EmptyNet("index net has no points")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("index net points must be pairwise distinct")
        if self.kind == "sphere":
            norms = np.linalg.norm(pts, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-12:
                raise ValueError("sphere net points must have unit norm")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class SupSamples:
    """Sorted Monte Carlo draws of a supremum statistic."""

    draws: np.ndarray
    seed: int
    m: int
    B: int
    degenerate: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = np.sort(np.asarray(self.draws, dtype=float).ravel())
        if d.size and (not np.all(np.isfinite(d)) or d[0] < 0):
            raise ValueError("draws must be finite and nonnegative")
        object.__setattr__(self, "draws", d)


def build_sphere_net(d, count, rng, n_probes=1000):
    """Signed basis vectors plus ``count - 2d`` uniform points on ``S^{d-1}``.

    ``delta`` is the covering radius measured against ``n_probes``
    uniform probe directions.
    """
    if count < 2 * d:
        raise TooFewPoints(f"count={count} < 2d={2 * d}")
    if isinstance(rng, (int, np.integer)):
        rng = crng.CounterStream(rng, stream=crng.derive_stream(0x5E7, d, count))
    eye = np.eye(d)
    extra = count - 2 * d
    pts = [eye, -eye]
    if extra:
        g = rng.standard_normal((extra, d))
        pts.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    points = np.vstack(pts)
    probes = rng.standard_normal((n_probes, d))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    delta = covering_radius(points, probes)
    return IndexNet("sphere", points, delta)


def covering_radius(points, probes):
    """``max_probe min_point ||probe - point||``, computed via inner products."""
    best = np.full(len(probes), -np.inf)
    step = max(1, _CHUNK_FLOATS // max(len(probes), 1))
    for i in range(0, len(points), step):
        best = np.maximum(best, (probes @ points[i:i + step].T).max(axis=1))
    sq = np.clip(np.sum(probes**2, axis=1) - 2 * best + 1.0, 0.0, None)
    return float(np.sqrt(sq.max()))


def grid_net(points):
    return IndexNet("grid", np.asarray(points, dtype=float))


def evaluate_linear_net(X, net):
    """Evaluate the linear functionals ``x -> x'u`` of a sphere net on data rows."""
    return EvaluatedSample(np.asarray(X, dtype=float) @ net.points.T)


def monte_carlo(statistic, width, B, seed, stream=0, n_jobs=None, chunk=None):
    """Evaluate ``statistic(xi)`` on all ``B`` draws, chunk by chunk.

    ``xi`` has shape ``(chunk, width)`` and is addressed per draw, so the
    output does not depend on ``chunk`` or ``n_jobs``.
    """
    if chunk is None:
        chunk = 4096
    starts = list(range(0, B, chunk))

    def run(start):
        n = min(chunk, B - start)
        xi = crng.normals(seed, stream, start, n, width)
        return np.asarray(statistic(xi), dtype=float)

    if n_jobs and n_jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return np.concatenate(parts) if parts else np.zeros(0)


def sup_draws(basis, m, B, seed, stream=0, n_jobs=None):
    """``B`` draws of ``max_f |Z^m(f)|`` for the truncated KL process."""
    if basis.rank == 0:
        return np.zeros(B)
    loadings = basis.eigenvectors[:, :m] * np.sqrt(basis.eigenvalues[:m])
    chunk = max(1, min(8192, _CHUNK_FLOATS // max(basis.dim, 1)))

    def stat(xi):
        return np.max(np.abs(xi @ loadings.T), axis=1)

    return monte_carlo(stat, m, B, seed, stream, n_jobs=n_jobs, chunk=chunk)


def resolve_m(basis, m):
    if isinstance(m, str):
        if m != "full":
            raise ValueError(f"m must be a positive integer or 'full', got {m!r}")
        return basis.rank
    return int(m)


def gaussian_process_bootstrap(s, m="full", B=1000, seed=0, stream=0,
                               rank_tol=DEFAULT_RANK_TOL, n_jobs=None, cov=None):
    """Monte Carlo law of the supremum of the Gaussian proxy process.

    ``cov`` overrides the sample covariance when a structured PSD estimate
    is available.  An identically zero estimate produces all-zero draws
    and a :class:`DegenerateCovariance` warning.
    """
    if B < 100:
        raise ValueError(f"B must be at least 100, got {B}")
    C = sample_cov_function(s) if cov is None else cov
    basis = eigendecompose_psd(C, rank_tol)
    if basis.rank == 0:
        warnings.warn("covariance estimate is identically zero", DegenerateCovariance)
        return SupSamples(np.zeros(B), seed, 0, B, degenerate=True)
    m_used = resolve_m(basis, m)
    draws = sup_draws(basis, m_used, B, seed, stream, n_jobs=n_jobs)
    return SupSamples(draws, seed, m_used, B,
                      meta={"rank": basis.rank, "stream": stream})


def _draws(samples):
    return samples.draws if isinstance(samples, SupSamples) else np.sort(np.asarray(samples, float))


def quantile(samples, alpha):
    """Smallest draw whose empirical CDF is at least ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} not in (0, 1)")
    d = _draws(samples)
    if d.size == 0:
        raise ValueError("no draws")
    k = math.ceil(alpha * d.size - 1e-9 * d.size)
    return float(d[min(max(k, 1), d.size) - 1])


def ecdf(samples, s):
    d = _draws(samples)
    return np.searchsorted(d, s, side="right") / d.size


def kolmogorov_distance(a, b):
    """Sup-distance between the right-continuous empirical CDFs of two samples."""
    da, db = _draws(a), _draws(b)
    support = np.union1d(da, db)
    return float(np.max(np.abs(ecdf(da, support) - ecdf(db, support))))


def ks_mc_error(size_a, size_b):
    """Standard-error scale of a two-sample empirical CDF difference (worst case p = 1/2)."""
    return 0.5 * math.sqrt(1.0 / size_a + 1.0 / size_b)


def quantile_shift(delta, var_hat, K=1.0):
    """Level adjustment ``K * delta^{1/3} * var_hat^{-1/3}``."""
    if var_hat <= 0:
        raise NonpositiveVariance(f"var_hat={var_hat} must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return float(K * np.cbrt(delta) / np.cbrt(var_hat))


class GaussianProcessBootstrap(BaseEstimator):
    """Estimator wrapper around :func:`gaussian_process_bootstrap`.

    ``fit`` takes the evaluated sample ``X[i, f] = f(X_i)`` (n x |net|)
    and stores the covariance estimate, its KL basis and the sup draws.

    Parameters
    ----------
    m : int or "full"
        Truncation level of the Karhunen-Loeve expansion.
    n_draws : int
        Monte Carlo size ``B``.
    seed : int
        64-bit seed of the counter-based stream.
    rank_tol : float
        Relative eigenvalue cutoff.
    n_jobs : int or None
        Threads for Monte Carlo chunks; results do not depend on it.
    """

    def __init__(self, m="full", n_draws=1000, seed=0, rank_tol=DEFAULT_RANK_TOL, n_jobs=None):
        self.m = m
        self.n_draws = n_draws
        self.seed = seed
        self.rank_tol = rank_tol
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        sample = EvaluatedSample(X)
        self.covariance_ = sample_cov_function(sample)
        self.basis_ = eigendecompose_psd(self.covariance_, self.rank_tol)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            self.samples_ = gaussian_process_bootstrap(
                sample, self.m, self.n_draws, self.seed, rank_tol=self.rank_tol,
                n_jobs=self.n_jobs, cov=self.covariance_)
        for w in caught:
            warnings.warn(w.message, w.category)
        self.m_ = self.samples_.m
        self.n_features_in_ = X.shape[1]
        return self

    def quantile(self, alpha):
        check_is_fitted(self, "samples_")
        return quantile(self.samples_, alpha)

    def cdf(self, s):
        check_is_fitted(self, "samples_")
        return ecdf(self.samples_, s)
