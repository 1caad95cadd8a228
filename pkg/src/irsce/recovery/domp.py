"""Distributed OMP over a common support shared by all subcarriers.

The compiled kernel (``_domp_ext``) is used when it was built; otherwise the
NumPy kernel. Set ``IRSCE_PURE_PYTHON=1`` to force the NumPy kernel.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _domp_py

_BACKENDS = {"python": _domp_py.domp_core}
try:
    from . import _domp_ext
except ImportError:  # extension not built
    _domp_ext = None
else:
    _BACKENDS["compiled"] = _domp_ext.domp_core

if os.environ.get("IRSCE_PURE_PYTHON", "") not in ("", "0") or _domp_ext is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

DEP_TOL = 1e-10


class DompNotConverged(RuntimeError):
    pass


def available_backends() -> list:
    return sorted(_BACKENDS)


@dataclass
class SparseEstimate:
    support: np.ndarray          # selection order, indices into the G_M + G_N columns
    coeffs: np.ndarray           # (K, G) dense angular coefficients
    residual_history: np.ndarray
    converged: bool
    h_d_hat: np.ndarray | None = None
    h_r_hat: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return len(self.support)

    @property
    def final_residual(self) -> float:
        return float(self.residual_history[-1])


def _operator_parts(B, K):
    """Normalise the sensing operator to ``(base, weights)`` kernel input."""
    if hasattr(B, "base") and hasattr(B, "weights"):
        base = np.ascontiguousarray(B.base, dtype=complex)[None]
        weights = np.ascontiguousarray(B.weights, dtype=complex)
    else:
        B = np.asarray(B, dtype=complex)
        if B.ndim == 2:
            B = B[None]
        if B.ndim != 3 or B.shape[0] not in (1, K):
            raise ValueError(f"sensing matrices of shape {B.shape} do not match K={K}")
        base = np.ascontiguousarray(B)
        weights = np.ones((K, B.shape[2]), dtype=complex)
    if weights.shape != (K, base.shape[2]):
        raise ValueError("sensing weights do not match the sensing base")
    return base, weights


def selection_weights(base, weights, normalize: bool) -> np.ndarray:
    """Per-subcarrier multipliers applied to ``|base_k^H r_k|`` when scoring atoms."""
    if not normalize:
        return np.ascontiguousarray(np.abs(weights))
    norms = np.linalg.norm(base, axis=1)          # (Kb, G)
    live = (norms > 0) & (np.abs(weights) > 0)    # (K, G) by broadcasting
    out = np.where(live, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    return np.ascontiguousarray(np.broadcast_to(out, weights.shape), dtype=float)


def domp(y, B, epsilon: float, *, max_iter: int | None = None, strict: bool = False,
         normalize: bool = True, dictionaries=None,
         backend: str | None = None) -> SparseEstimate:
    """Recover angular coefficients with a support common to all subcarriers.

    Parameters
    ----------
    y : (K, N_P) array
        Observations, one row per subcarrier.
    B : (K, N_P, G) or (N_P, G) array, or an object with ``base`` (N_P, G)
        and ``weights`` (K, G), meaning ``B_k = base * weights[k]``.
    epsilon : float
        Stop once the mean residual power per measurement is ``<= epsilon``.
    max_iter : int, optional
        Support size cap, at most ``min(N_P, G)`` (the default).
    normalize : bool
        Score atoms by correlation divided by the column norm of ``B_k``.
        With equal column norms this picks the same atom as the plain
        correlation rule (``normalize=False``), which is biased towards
        large columns when the BS and IRS blocks differ in scale.
    strict : bool
        Raise :class:`DompNotConverged` instead of returning a flagged estimate
        when the cap is hit before the residual test passes.
    dictionaries : (EffectiveDictionary, Dictionary, Dictionary), optional
        When given, the spatial channels ``h_d_hat`` and ``h_r_hat`` are filled.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    y = np.ascontiguousarray(np.atleast_2d(y), dtype=complex)
    K, n_p = y.shape
    base, weights = _operator_parts(B, K)
    if base.shape[1] != n_p:
        raise ValueError(f"sensing rows {base.shape[1]} != observation length {n_p}")
    G = base.shape[2]
    cap = min(n_p, G)
    max_iter = cap if max_iter is None else min(int(max_iter), cap)
    core = _BACKENDS[backend or BACKEND]
    sel = selection_weights(base, weights, normalize)
    support, x, history, converged = core(base, weights, sel, y, float(epsilon), max_iter, DEP_TOL)
    if strict and not converged:
        raise DompNotConverged(
            f"residual {history[-1]:.3e} above epsilon {epsilon:.3e} after {len(support)} atoms")
    coeffs = np.zeros((K, G), dtype=complex)
    if len(support):
        coeffs[:, support] = x
    est = SparseEstimate(support, coeffs, history, converged)
    if dictionaries is not None:
        psi, A_d, A_r = dictionaries
        c_d, c_r = psi.split(coeffs)
        est.h_d_hat = c_d @ A_d.matrix.conj().T
        est.h_r_hat = c_r @ A_r.matrix.conj().T
    return est
