"""LS baseline and NMSE."""
from __future__ import annotations

import numpy as np

NMSE_FLOOR_DB = -200.0


class IllConditioned(np.linalg.LinAlgError):
    def __init__(self, cond):
        super().__init__(f"measurement matrix condition number {cond:.3e} exceeds threshold")
        self.cond = cond


class UndefinedMetric(ValueError):
    pass


def ls_baseline(y, Phi, cond_max: float = 1e12):
    """Least-squares estimate ``Phi^+ y`` for a square or tall system.

    ``y`` may be one vector or a ``(K, N_P)`` stack with ``Phi`` of shape
    ``(K, N_P, n)``. The condition number is checked after equilibrating the
    columns, since the BS and IRS blocks differ in scale by the path loss.
    """
    y = np.asarray(y, dtype=complex)
    if hasattr(Phi, "base") and hasattr(Phi, "weights"):
        return _ls_factored(y, Phi, cond_max)
    Phi = np.asarray(Phi, dtype=complex)
    single = y.ndim == 1
    if single:
        y, Phi = y[None], Phi[None]
    if Phi.shape[1] < Phi.shape[2]:
        raise ValueError(f"LS needs N_P >= unknowns, got {Phi.shape[1:]}")
    out = np.empty((y.shape[0], Phi.shape[2]), dtype=complex)
    for k in range(y.shape[0]):
        scale = np.linalg.norm(Phi[k], axis=0)
        scale[scale == 0] = 1.0
        A = Phi[k] / scale
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > cond_max:
            raise IllConditioned(cond)
        out[k] = np.linalg.lstsq(A, y[k], rcond=None)[0] / scale
    return out[0] if single else out


def _ls_factored(y, op, cond_max):
    # Phi_k = base diag(w_k): one solve of the shared base serves every k
    base = np.asarray(op.base, dtype=complex)
    if base.shape[0] < base.shape[1]:
        raise ValueError(f"LS needs N_P >= unknowns, got {base.shape}")
    scale = np.linalg.norm(base, axis=0)
    scale[scale == 0] = 1.0
    A = base / scale
    # one SVD gives both the condition number and the pseudo-inverse
    u, sv, vh = np.linalg.svd(A, full_matrices=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > cond_max:
        raise IllConditioned(cond)
    Y = np.atleast_2d(y)
    U = ((vh.conj().T / sv) @ (u.conj().T @ Y.T)).T / scale
    out = U / op.weights
    return out[0] if y.ndim == 1 else out


def nmse_linear(est, truth) -> float:
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch {est.shape} vs {truth.shape}")
    den = float(np.sum(np.abs(truth) ** 2))
    if den == 0:
        raise UndefinedMetric("NMSE undefined for an all-zero reference")
    return float(np.sum(np.abs(est - truth) ** 2)) / den


def nmse(est, truth, floor_db: float = NMSE_FLOOR_DB) -> float:
    """NMSE in dB, clipped below at ``floor_db``."""
    v = nmse_linear(est, truth)
    if v <= 0:
        return floor_db
    return max(10 * np.log10(v), floor_db)
