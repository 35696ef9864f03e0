"""Derivative estimates for the killed heat semigroup on model domains.

Spectral Dirichlet heat kernels and killed Brownian motion on three model
domains, with a verification harness on top.
"""

from .domain import Disk, Interval, Rectangle, domain_from_dict
from .heat import (
    SpectralField,
    Truncation,
    TruncationError,
    heat_kernel,
    images_kernel_1d,
    images_survival_1d,
    project,
    semigroup_deriv,
    semigroup_eval,
    survival,
)
from .spectral import EigenPair, enumerate_eigenpairs

__all__ = [
    "Disk",
    "EigenPair",
    "Interval",
    "Rectangle",
    "SpectralField",
    "Truncation",
    "TruncationError",
    "domain_from_dict",
    "enumerate_eigenpairs",
    "heat_kernel",
    "images_kernel_1d",
    "images_survival_1d",
    "project",
    "semigroup_deriv",
    "semigroup_eval",
    "survival",
]

__version__ = "0.1.0"
