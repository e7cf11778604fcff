"""Gaussian process bootstrap for suprema of empirical processes."""

__version__ = "0.1.0"

from .bootstrap import (
    GaussianProcessBootstrap,
    IndexNet,
    SupSamples,
    build_sphere_net,
    gaussian_process_bootstrap,
    kolmogorov_distance,
    quantile,
    quantile_shift,
)
from .covariance import EvaluatedSample, admissibility_check, sample_cov_function, sup_cov_error
from .ellipsoid import BootstrapConfidenceEllipsoid, ellipsoid_quantile
from .gp_core import KLBasis, eigendecompose_psd, kl_sample, sup_abs, truncated_cov, truncation_error
from .rkhs import BiasCorrectedKernelRidge, KernelSpec, confidence_band, krr_fit
from .specnorm import SpectralNormBootstrap, bootstrap_specnorm, duplication_matrix, vech

__all__ = [
    "BiasCorrectedKernelRidge",
    "BootstrapConfidenceEllipsoid",
    "EvaluatedSample",
    "GaussianProcessBootstrap",
    "IndexNet",
    "KLBasis",
    "KernelSpec",
    "SpectralNormBootstrap",
    "SupSamples",
    "admissibility_check",
    "bootstrap_specnorm",
    "build_sphere_net",
    "confidence_band",
    "duplication_matrix",
    "eigendecompose_psd",
    "ellipsoid_quantile",
    "gaussian_process_bootstrap",
    "kl_sample",
    "kolmogorov_distance",
    "krr_fit",
    "quantile",
    "quantile_shift",
    "sample_cov_function",
    "sup_abs",
    "sup_cov_error",
    "truncated_cov",
    "truncation_error",
    "vech",
]
