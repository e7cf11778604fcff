"""Monte Carlo checks of anti-concentration, variance and approximation bounds.

Only the anti-concentration bounds carry explicit constants; every other
bound is reported as a shape with its unnamed constants set to 1 (and
the additive constant ``c`` to 0), so those checks are informational.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import rng as crng
from .bootstrap import SupSamples, kolmogorov_distance, ks_mc_error, sup_draws
from .exceptions import DimensionMismatch, NonpositiveVariance, UnknownGenerator
from .gp_core import check_cov_matrix, eigendecompose_psd

SQRT12 = np.sqrt(12.0)
GENERATORS = ("rank_one", "equicorrelated")


class AntiConcentrationBounds(NamedTuple):
    lower: float
    upper: float

    @property
    def upper_capped(self):
        return min(1.0, self.upper)


@dataclass(frozen=True)
class BoundReport:
    name: str
    lower: float
    observed: float
    upper: float
    mc_error: float
    informational: bool = False

    @property
    def passed(self):
        slack = 3.0 * self.mc_error
        return bool(self.lower - slack <= self.observed <= self.upper + slack)

    def to_dict(self):
        return {
            "name": self.name,
            "lower": self.lower,
            "observed": self.observed,
            "upper": self.upper,
            "mc_error": self.mc_error,
            "informational": self.informational,
            "pass": self.passed,
        }


def anticoncentration_bounds(var_z, eps):
    """Closed-form sandwich for ``sup_t P{t <= Z <= t + eps}``.

    The upper value is returned raw; use ``.upper_capped`` for the
    probability-scale bound.
    """
    if var_z <= 0:
        raise NonpositiveVariance(f"var_z={var_z} must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    denom = np.sqrt(var_z + eps**2 / 12.0)
    return AntiConcentrationBounds(float(eps / SQRT12 / denom), float(eps * SQRT12 / denom))


def levy_concentration(samples, eps):
    """Largest fraction of draws inside a window ``[t, t + eps]``, ``t`` a draw."""
    d = samples.draws if isinstance(samples, SupSamples) else np.sort(np.asarray(samples, float))
    if d.size == 0:
        return 0.0
    lo = np.searchsorted(d, d, side="left")
    hi = np.searchsorted(d, d + eps, side="right")
    return float(np.max(hi - lo) / d.size)


def variance_bound_shapes(sigma_lo, sigma_hi, rho, ez_over_sigma, ez_over_sigma_hi=None):
    """Lower/upper variance-bound shapes for the supremum of a Gaussian process.

    ``ez_over_sigma`` is ``E[Z]/sigma_lo``; the upper shape uses
    ``ez_over_sigma_hi`` (``E[Z]/sigma_hi``), defaulting to the same value.
    Constants are normalized (``C = 1``, ``c = 0``) and ``1/0 = inf``.
    """
    if sigma_lo > sigma_hi:
        raise ValueError("sigma_lo must not exceed sigma_hi")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    ez_hi = ez_over_sigma if ez_over_sigma_hi is None else ez_over_sigma_hi
    lower = (sigma_lo / (1.0 + ez_over_sigma)) ** 2
    tail = np.inf if ez_hi <= 0 else (sigma_hi / ez_hi) ** 2
    upper = min(sigma_hi**2, sigma_hi**2 * rho + tail)
    return float(lower), float(upper)


def _sym_sqrt(C):
    basis = eigendecompose_psd(C, rank_tol=0.0)
    V = basis.eigenvectors
    return (V * np.sqrt(basis.eigenvalues)) @ V.T


def coupled_max_norms(sigma, omega, B, seed, stream=0):
    """``||Y||_inf`` and ``||Z||_inf`` from shared multipliers ``Y = Sigma^{1/2} xi``,
    ``Z = Omega^{1/2} xi``."""
    Rs, Ro = _sym_sqrt(sigma), _sym_sqrt(omega)
    d = Rs.shape[0]
    y = np.empty(B)
    z = np.empty(B)
    chunk = 8192
    for start in range(0, B, chunk):
        n = min(chunk, B - start)
        xi = crng.normals(seed, stream, start, n, d)
        y[start:start + n] = np.max(np.abs(xi @ Rs), axis=1)
        z[start:start + n] = np.max(np.abs(xi @ Ro), axis=1)
    return y, z


def gaussian_comparison_check(sigma, omega, B, seed):
    """Observed Kolmogorov distance between ``||Y||_inf`` and ``||Z||_inf``
    against the cube-root comparison shape (constant 1).

    The two laws are sampled from common multipliers, so identical
    covariances give distance exactly 0.
    """
    sigma = check_cov_matrix(sigma)
    omega = check_cov_matrix(omega)
    if sigma.shape != omega.shape:
        raise DimensionMismatch(f"shapes {sigma.shape} and {omega.shape} differ")
    if not (np.any(sigma) or np.any(omega)):
        raise ValueError("at least one covariance must be nonzero")
    y, z = coupled_max_norms(sigma, omega, B, seed)
    observed = kolmogorov_distance(y, z)
    var = max(np.var(y, ddof=1), np.var(z, ddof=1))
    gap = float(np.max(np.abs(omega - sigma)))
    upper = float(np.cbrt(gap / var)) if var > 0 else float("inf")
    return BoundReport("gaussian_comparison", 0.0, observed, upper,
                       ks_mc_error(B, B), informational=True)


def equicorrelated_cov(d, rho):
    return (1.0 - rho) * np.eye(d) + rho * np.ones((d, d))


def _rademacher_sums(seed, stream, n, B, width):
    """``sum_{i<=n} eps_i / sqrt(n)`` for ``(B, width)`` independent Rademacher sums,
    sampled exactly through the binomial law of the number of +1's."""
    u = crng.uniforms(seed, stream, 0, B, width)
    k = stats.binom.ppf(u, n, 0.5)
    return (2.0 * k - n) / np.sqrt(n)


def generator_cov(generator, d, rho=0.5, a=None):
    if generator == "rank_one":
        a = np.linspace(1.0, 2.0, d) if a is None else np.asarray(a, dtype=float)
        return np.outer(a, a)
    if generator == "equicorrelated":
        return equicorrelated_cov(d, rho)
    raise UnknownGenerator(f"unknown generator {generator!r}; expected one of {GENERATORS}")


def simulate_max_norm(generator, d, n, B, seed, stream, rho=0.5, a=None):
    """``B`` replications of ``||S_n||_inf`` for the toy data models.

    rank_one: ``X = a * xi`` with Rademacher ``xi``.
    equicorrelated: ``X = sqrt(rho) eta 1 + sqrt(1 - rho) eps`` with
    independent Rademacher ``eta`` and ``eps_j``, bounded entries and
    covariance ``(1 - rho) I + rho 11'``.
    """
    if generator == "rank_one":
        a = np.linspace(1.0, 2.0, d) if a is None else np.asarray(a, dtype=float)
        s = _rademacher_sums(seed, stream, n, B, 1)[:, 0]
        return np.max(np.abs(a)) * np.abs(s)
    if generator == "equicorrelated":
        sums = _rademacher_sums(seed, stream, n, B, d + 1)
        S = np.sqrt(rho) * sums[:, :1] + np.sqrt(1.0 - rho) * sums[:, 1:]
        return np.max(np.abs(S), axis=1)
    raise UnknownGenerator(f"unknown generator {generator!r}; expected one of {GENERATORS}")


def berry_esseen_decay(generator, d, n_list, B, seed, rho=0.5, a=None):
    """Kolmogorov distance between ``||S_n||_inf`` and ``||Z||_inf``, ``Z ~ N(0, Sigma)``,
    for each ``n`` in ``n_list``.  Returns ``[(n, distance), ...]``."""
    if generator not in GENERATORS:
        raise UnknownGenerator(f"unknown generator {generator!r}; expected one of {GENERATORS}")
    n_list = list(n_list)
    if any(b <= a_ for a_, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    basis = eigendecompose_psd(generator_cov(generator, d, rho, a))
    out = []
    for idx, n in enumerate(n_list):
        s = simulate_max_norm(generator, d, n, B, seed, crng.derive_stream(1, idx, n), rho, a)
        z = sup_draws(basis, basis.rank, B, seed, crng.derive_stream(2, idx, n))
        out.append((int(n), kolmogorov_distance(s, z)))
    return out


def exact_rank_one_distance(n):
    """Exact Kolmogorov distance between ``|n^{-1/2} sum eps_i|`` (Rademacher)
    and ``|N(0, 1)|``, enumerating the binomial law."""
    k = np.arange(n + 1)
    t = np.abs(2 * k - n) / np.sqrt(n)
    pmf = stats.binom.pmf(k, n, 0.5)
    vals, inv = np.unique(t, return_inverse=True)
    mass = np.bincount(inv, weights=pmf)
    F = np.cumsum(mass)
    F_left = np.concatenate([[0.0], F[:-1]])
    G = 2.0 * stats.norm.cdf(vals) - 1.0
    return float(max(np.max(np.abs(F - G)), np.max(np.abs(F_left - G))))


def anticoncentration_case(sigma, eps_list, B, seed, stream=0):
    """Sandwich reports for ``||Z||_inf``, ``Z ~ N(0, sigma)``, one per ``eps``."""
    basis = eigendecompose_psd(sigma)
    draws = np.sort(sup_draws(basis, basis.rank, B, seed, stream))
    var = float(np.var(draws, ddof=1))
    reports = []
    for eps in eps_list:
        p = levy_concentration(draws, eps)
        lo, up = anticoncentration_bounds(var, eps)
        reports.append(BoundReport(f"anticoncentration_eps={eps}", lo, p, min(1.0, up),
                                   float(np.sqrt(max(p * (1 - p), 1.0 / B) / B))))
    return var, reports


def random_psd(d, stream_rng):
    """Random PSD matrix ``A A' / k`` with random rank ``k <= d``."""
    k = 1 + int(stream_rng.uniform() * d)
    A = stream_rng.standard_normal((d, k))
    return A @ A.T / k
