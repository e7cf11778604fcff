"""Covariance-function estimates on a finite net and discrepancy measures."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DimensionMismatch, TooFewSamples
from .gp_core import PSD_TOL, symmetry_violation


@dataclass(frozen=True)
class EvaluatedSample:
    """``values[i, f] = f(X_i)`` for a sample ``X_1..X_n`` and net ``f``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError("values must be an n x |net| matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("evaluated sample contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def net_size(self):
        return self.values.shape[1]


def _values(s):
    return s.values if isinstance(s, EvaluatedSample) else EvaluatedSample(s).values


def psd_repair(C):
    """Symmetrize and clamp negative eigenvalues to zero."""
    C = 0.5 * (C + C.T)
    w, V = linalg.eigh(C)
    if w[0] >= 0.0:
        return C
    R = (V * np.clip(w, 0.0, None)) @ V.T
    return 0.5 * (R + R.T)


def centered_second_moment(s, center):
    """``(1/n) sum_i (row_i - center)(row_i - center)^T``."""
    X = _values(s)
    center = np.asarray(center, dtype=float).ravel()
    if center.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"center has length {center.shape[0]}, net has {X.shape[1]}")
    R = X - center
    C = R.T @ R / X.shape[0]
    return 0.5 * (C + C.T)


def sample_cov_function(s):
    """Nonparametric sample covariance ``P_n fg - (P_n f)(P_n g)`` on the net."""
    X = _values(s)
    if X.shape[0] < 2:
        raise TooFewSamples(f"need n >= 2 samples, got {X.shape[0]}")
    return centered_second_moment(X, X.mean(axis=0))


def admissibility_check(C):
    """Diagnostic report on symmetry, PSD-ness and trace finiteness.

    Continuity is vacuous on a finite net and reported as ``None``.
    """
    C = np.asarray(C, dtype=float)
    finite = bool(np.all(np.isfinite(C)))
    asym = symmetry_violation(C) if finite else float("inf")
    if finite:
        ev = linalg.eigvalsh(0.5 * (C + C.T))
        min_ev, max_ev = float(ev[0]), float(ev[-1])
    else:
        min_ev = max_ev = float("nan")
    psd_ok = finite and min_ev >= -PSD_TOL * (1.0 + max(max_ev, 0.0))
    trace = float(np.trace(C)) if finite else float("inf")
    return {
        "symmetric": bool(asym <= 1e-12),
        "psd_within_tol": bool(psd_ok),
        "finite_trace": bool(np.isfinite(trace)),
        "continuous": None,
        "symmetry_violation": asym,
        "min_eigenvalue": min_ev,
        "trace": trace,
    }


def sup_cov_error(A, B):
    """``max_{f,g} |A[f,g] - B[f,g]|``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    return float(np.max(np.abs(A - B))) if A.size else 0.0
