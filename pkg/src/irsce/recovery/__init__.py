"""Sparse channel recovery: Distributed OMP, the LS baseline and NMSE."""
from .domp import (
    BACKEND,
    DompNotConverged,
    SparseEstimate,
    available_backends,
    domp,
)
from .metrics import IllConditioned, UndefinedMetric, ls_baseline, nmse, nmse_linear

__all__ = [
    "BACKEND",
    "DompNotConverged",
    "IllConditioned",
    "SparseEstimate",
    "UndefinedMetric",
    "available_backends",
    "domp",
    "ls_baseline",
    "nmse",
    "nmse_linear",
]
