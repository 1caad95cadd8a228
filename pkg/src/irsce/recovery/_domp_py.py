"""Pure NumPy DOMP core, used when the compiled kernel is unavailable.

Both kernels share one contract:

    domp_core(base, weights, sel, y, eps, max_iter, dep_tol)
        -> (support, coeffs, history, converged)

``base`` is ``(Kb, N_P, G)`` with ``Kb`` equal to 1 or ``K``; subcarrier k
uses ``B_k = base[k if Kb > 1 else 0] * weights[k]``. The atom picked at
each step maximises ``sum_k sel[k, g] * |[base_k^H r_k]_g|``; ``sel`` is
``|weights|`` for the plain correlation rule. ``coeffs`` is
``(K, len(support))``, ``history`` holds the mean residual power before the
first and after every iteration.

Least squares on the growing support is kept as an incremental QR
factorisation per subcarrier (classical Gram-Schmidt, two passes). A column
whose orthogonal remainder is below ``dep_tol`` times its norm is treated as
dependent: it joins the support but receives a zero coefficient.
"""
import numpy as np


def domp_core(base, weights, sel, y, eps, max_iter, dep_tol=1e-10):
    K, n_p = y.shape
    shared = base.shape[0] == 1
    r = y.copy()
    Q = np.zeros((K, max_iter, n_p), dtype=complex)
    R = np.zeros((K, max_iter, max_iter), dtype=complex)
    support = []
    taken = np.zeros(base.shape[2], dtype=bool)
    power = float(np.sum(np.abs(r) ** 2)) / (K * n_p)
    history = [power]
    converged = True
    while power > eps:
        t = len(support)
        if t >= max_iter:
            converged = False
            break
        if shared:
            corr = np.abs(r.conj() @ base[0])
        else:
            corr = np.abs(np.einsum("kn,kng->kg", r.conj(), base))
        score = np.sum(corr * sel, axis=0)
        score[taken] = -np.inf
        g = int(np.argmax(score))
        taken[g] = True
        support.append(g)

        col = (base[0][:, g][None, :] if shared else base[:, :, g]) * weights[:, g][:, None]
        v = col.copy()
        Qt = Q[:, :t]
        for _ in range(2):
            c = np.einsum("ktn,kn->kt", Qt.conj(), v)
            v -= np.einsum("ktn,kt->kn", Qt, c)
            R[:, :t, t] += c
        nv = np.linalg.norm(v, axis=1)
        n0 = np.linalg.norm(col, axis=1)
        indep = nv > dep_tol * n0
        safe = np.where(indep, nv, 1.0)
        q = np.where(indep[:, None], v / safe[:, None], 0.0)
        R[:, t, t] = np.where(indep, nv, 0.0)
        Q[:, t] = q
        r -= q * np.sum(q.conj() * r, axis=1)[:, None]
        power = float(np.sum(np.abs(r) ** 2)) / (K * n_p)
        history.append(power)

    t = len(support)
    z = np.einsum("ktn,kn->kt", Q[:, :t].conj(), y)
    x = np.zeros((K, t), dtype=complex)
    for j in range(t - 1, -1, -1):
        acc = z[:, j] - np.sum(R[:, j, j + 1:t] * x[:, j + 1:t], axis=1)
        d = R[:, j, j]
        ok = d != 0
        x[:, j] = np.where(ok, acc / np.where(ok, d, 1.0), 0.0)
    return np.array(support, dtype=np.intp), x, np.array(history), converged
