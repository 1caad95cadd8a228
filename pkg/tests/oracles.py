"""Independent reference computations used by several test modules."""
import itertools
import math

import numpy as np


def steering(nx, ny, angle):
    a = np.empty(nx * ny, dtype=complex)
    for mx in range(nx):
        for my in range(ny):
            a[mx * ny + my] = np.exp(1j * np.pi * (mx * math.sin(angle.theta)
                                                    + my * math.cos(angle.theta) * math.sin(angle.phi)))
    return a / math.sqrt(nx * ny)


def raised_cosine_ref(t, Ts, beta):
    x = t / Ts
    if beta > 0 and abs(abs(2 * beta * x) - 1) < 1e-12:
        return math.pi / 4 * np.sinc(1 / (2 * beta))
    return np.sinc(x) * math.cos(math.pi * beta * x) / (1 - (2 * beta * x) ** 2)


def delay_then_dft(link, cfg, tx_dims, rx_dims):
    """Frequency channels by sampling the delay-domain channel and taking the DFT.

    Returns ``(K, n_rx, n_tx)`` for a matrix link and ``(K, n_tx)`` rows for
    a vector link (``rx_dims`` None).
    """
    n_tx = tx_dims[0] * tx_dims[1]
    n_rx = 1 if rx_dims is None else rx_dims[0] * rx_dims[1]
    taps = np.zeros((cfg.N_CP, n_rx, n_tx), dtype=complex)
    for p in link.paths:
        at = steering(*tx_dims, p.aod)
        ar = np.ones(1) if rx_dims is None else steering(*rx_dims, p.aoa)
        outer = np.outer(ar, at.conj())
        for d in range(cfg.N_CP):
            taps[d] += p.gain / p.large_scale * raised_cosine_ref(d * cfg.Ts - p.delay_s, cfg.Ts, cfg.rolloff) * outer
    out = np.zeros((cfg.K, n_rx, n_tx), dtype=complex)
    for k in range(1, cfg.K + 1):
        for d in range(cfg.N_CP):
            out[k - 1] += taps[d] * np.exp(1j * 2 * np.pi * (k - 1) * d / cfg.K)
    return out[:, 0, :] if rx_dims is None else out


def best_subset(B, y, s, rtol=1e-9):
    """Exhaustive least-squares search over all ``s``-subsets of columns.

    ``B`` is ``(K, N_P, G)``; the score of a subset is the total residual over
    all K. Returns ``(best, optimal)``: ``optimal`` lists every subset whose
    residual is within ``rtol * ||y||^2`` of the minimum (small arrays make
    ties common), ``best`` is the lowest of them in lexicographic order.
    """
    K, _, G = B.shape
    scores = {}
    for cols in itertools.combinations(range(G), s):
        res = 0.0
        for k in range(K):
            A = B[k][:, cols]
            x = np.linalg.lstsq(A, y[k], rcond=None)[0]
            res += float(np.sum(np.abs(y[k] - A @ x) ** 2))
        scores[cols] = res
    floor = min(scores.values()) + rtol * float(np.sum(np.abs(y) ** 2))
    optimal = sorted(c for c, r in scores.items() if r <= floor)
    return optimal[0], optimal


def naive_domp(y, B, eps, max_iter):
    """Greedy loop written directly with pinv, plain correlation rule."""
    K, n_p, G = B.shape
    r = y.copy()
    support = []
    while np.sum(np.abs(r) ** 2) / (K * n_p) > eps and len(support) < max_iter:
        score = sum(np.abs(B[k].conj().T @ r[k]) for k in range(K))
        score[support] = -np.inf
        support.append(int(np.argmax(score)))
        x = np.stack([np.linalg.pinv(B[k][:, support]) @ y[k] for k in range(K)])
        r = np.stack([y[k] - B[k][:, support] @ x[k] for k in range(K)])
    return support, (x if support else np.zeros((K, 0)))
