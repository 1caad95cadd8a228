import importlib

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irsce.pilots import SensingOperator
from irsce.recovery import (DompNotConverged, IllConditioned, UndefinedMetric, available_backends,
                            domp, ls_baseline, nmse, nmse_linear)
from irsce.recovery import _domp_py
from irsce.recovery.domp import selection_weights

from oracles import best_subset, naive_domp

BACKENDS = available_backends()


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sparse_problem(rng, K=4, n_p=16, G=40, s=3, noise=0.0):
    B = cgauss(rng, K, n_p, G)
    support = rng.choice(G, s, replace=False)
    x = np.zeros((K, G), dtype=complex)
    x[:, support] = cgauss(rng, K, s)
    y = np.einsum("kng,kg->kn", B, x) + np.sqrt(noise) * cgauss(rng, K, n_p)
    return B, x, y, support


def residual(B, y, est):
    return y - np.einsum("kng,kg->kn", B, est.coeffs)


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_observation_gives_empty_support(backend):
    est = domp(np.zeros((3, 8)), np.ones((3, 8, 5)), 1e-6, backend=backend)
    assert est.iterations == 0 and not est.coeffs.any() and est.converged


def test_epsilon_must_be_positive():
    with pytest.raises(ValueError):
        domp(np.ones((1, 4)), np.ones((1, 4, 4)), 0.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_single_path_matches_exhaustive_search(backend):
    rng = np.random.default_rng(0)
    for _ in range(10):
        B, x, y, supp = sparse_problem(rng, K=4, n_p=16, G=24, s=1)
        est = domp(y, B, 1e-20, backend=backend)
        best, optimal = best_subset(B, y, 1)
        assert optimal == [best]
        assert list(est.support) == list(best) == [supp[0]]
        assert np.linalg.norm(est.coeffs - x) < 1e-9 * np.linalg.norm(x)


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_sparse_matches_best_subset(backend):
    rng = np.random.default_rng(1)
    agree = 0
    for _ in range(10):
        B, x, y, _ = sparse_problem(rng, K=4, n_p=8, G=16, s=2)
        est = domp(y, B, 1e-20, backend=backend)
        best, optimal = best_subset(B, y, 2)
        agree += tuple(sorted(est.support)) == best and len(optimal) == 1
    assert agree >= 9


@pytest.mark.parametrize("backend", BACKENDS)
def test_plain_rule_matches_naive_loop(backend):
    rng = np.random.default_rng(2)
    B, _, y, _ = sparse_problem(rng, K=3, n_p=12, G=30, s=4, noise=0.01)
    est = domp(y, B, 0.01, normalize=False, backend=backend)
    supp, xs = naive_domp(y, B, 0.01, 12)
    assert list(est.support) == supp
    np.testing.assert_allclose(est.coeffs[:, supp], xs, atol=1e-10)


@pytest.mark.parametrize("backend", BACKENDS)
def test_residual_history_matches_coefficients(backend):
    rng = np.random.default_rng(3)
    B, _, y, _ = sparse_problem(rng, noise=0.05)
    est = domp(y, B, 0.05, backend=backend)
    r = residual(B, y, est)
    assert est.final_residual == pytest.approx(np.sum(np.abs(r) ** 2) / r.size, rel=1e-9)
    assert est.converged == (est.final_residual <= 0.05)


@given(st.integers(0, 10_000), st.integers(1, 5), st.sampled_from(BACKENDS))
def test_residual_monotone_and_support_common(seed, K, backend):
    rng = np.random.default_rng(seed)
    B, _, y, _ = sparse_problem(rng, K=K, n_p=10, G=25, s=3, noise=0.1)
    est = domp(y, B, 1e-12, backend=backend)
    h = est.residual_history
    assert np.all(np.diff(h) <= 1e-12 * h[0])
    nz = np.abs(est.coeffs) > 0
    outside = np.setdiff1d(np.arange(25), est.support)
    assert not nz[:, outside].any()
    assert len(set(est.support)) == est.iterations


@pytest.mark.parametrize("backend", BACKENDS)
def test_orthogonality_after_every_iteration(backend):
    rng = np.random.default_rng(4)
    B, _, y, _ = sparse_problem(rng, K=5, n_p=14, G=30, s=5, noise=0.01)
    for t in range(1, 10):
        est = domp(y, B, 1e-12, max_iter=t, backend=backend)
        r = residual(B, y, est)
        for k in range(5):
            corr = B[k][:, est.support].conj().T @ r[k]
            assert np.max(np.abs(corr)) < 1e-9 * np.linalg.norm(y[k]) * np.abs(B).max()


def test_cap_flags_or_raises():
    rng = np.random.default_rng(5)
    # fewer columns than measurements: noise can never be fitted away
    B, _, y, _ = sparse_problem(rng, K=2, n_p=10, G=4, s=2, noise=1.0)
    est = domp(y, B, 1e-6)
    assert not est.converged and est.iterations == 4
    with pytest.raises(DompNotConverged):
        domp(y, B, 1e-6, strict=True)
    est = domp(y, B, 1e-6, max_iter=2)
    assert est.iterations == 2 and not est.converged


def test_ties_go_to_lowest_index():
    B = np.zeros((1, 3, 4), dtype=complex)
    B[0, :, 1] = B[0, :, 3] = [1, 0, 0]
    B[0, :, 0] = B[0, :, 2] = [0, 1, 0]
    y = np.array([[2.0, 1.0, 0.0]])
    est = domp(y, B, 1e-20)
    assert list(est.support) == [1, 0]


def test_dependent_column_gets_zero_coefficient():
    rng = np.random.default_rng(6)
    base = cgauss(rng, 1, 5, 3)
    base[0, :, 1] = 2 * base[0, :, 0]
    w = np.ones((2, 3), dtype=complex)
    y = cgauss(rng, 2, 5)
    sel = np.array([[1.0, 1e30, 1e-30]] * 2)   # force the duplicate second
    for core in {_domp_py.domp_core, *_cores()}:
        support, x, hist, _ = core(base, w, sel, y, 1e-30, 3, 1e-10)
        assert list(support[:2]) in ([0, 1], [1, 0])
        assert np.all(np.isfinite(x)) and np.count_nonzero(np.abs(x[:, 1]) == 0) == 2
        assert hist[2] == pytest.approx(hist[1])


def _cores():
    mod = importlib.import_module("irsce.recovery.domp")
    return [mod._BACKENDS[b] for b in mod.available_backends()]


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
@pytest.mark.parametrize("shared", [True, False])
def test_backends_agree(shared):
    rng = np.random.default_rng(7)
    K, n_p, G = 6, 20, 50
    if shared:
        B = SensingOperator(cgauss(rng, n_p, G), cgauss(rng, K, G))
        dense = B.dense()
    else:
        B = dense = cgauss(rng, K, n_p, G)
    x = np.zeros((K, G), dtype=complex)
    x[:, [3, 17, 40]] = cgauss(rng, K, 3)
    y = np.einsum("kng,kg->kn", dense, x) + 0.01 * cgauss(rng, K, n_p)
    a = domp(y, B, 1e-4, backend="python")
    b = domp(y, B, 1e-4, backend="compiled")
    np.testing.assert_array_equal(a.support, b.support)
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-10)
    np.testing.assert_allclose(a.residual_history, b.residual_history, rtol=1e-10)
    assert a.converged == b.converged


def test_structured_operator_equals_dense():
    rng = np.random.default_rng(8)
    op = SensingOperator(cgauss(rng, 12, 30), cgauss(rng, 4, 30))
    x = np.zeros((4, 30), dtype=complex)
    x[:, [2, 9]] = 1.0
    y = np.einsum("kng,kg->kn", op.dense(), x)
    a = domp(y, op, 1e-20)
    b = domp(y, op.dense(), 1e-20)
    np.testing.assert_array_equal(a.support, b.support)
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-10)


def test_normalized_selection_finds_small_scale_block():
    # second block scaled down by 1e-4: raw correlation would never pick it
    rng = np.random.default_rng(9)
    base = cgauss(rng, 16, 40)
    w = np.ones((3, 40), dtype=complex)
    w[:, 20:] = 1e-4
    op = SensingOperator(base, w)
    x = np.zeros((3, 40), dtype=complex)
    x[:, 5] = 1e-3
    x[:, 30] = 1e3
    y = np.einsum("kng,kg->kn", op.dense(), x)
    est = domp(y, op, 1e-24)
    assert sorted(est.support) == [5, 30]
    sel = selection_weights(op.base[None], op.weights, True)
    np.testing.assert_allclose(sel[0], 1 / np.linalg.norm(base, axis=0))


def test_epsilon_contract():
    # stopping at epsilon = sigma^2 leaves residual power close to sigma^2
    rng = np.random.default_rng(10)
    sigma2 = 0.01
    stopped = []
    for _ in range(200):
        B, _, y, _ = sparse_problem(rng, K=4, n_p=24, G=48, s=3, noise=sigma2)
        stopped.append(domp(y, B, sigma2).final_residual)
    assert 0.5 * sigma2 <= np.mean(stopped) <= 2 * sigma2


def test_spatial_reconstruction():
    from irsce.dictionary import effective_dictionary, redundant_dictionary
    A_d = redundant_dictionary((2, 2), (4, 4))
    A_r = redundant_dictionary((2, 2), (4, 4))
    psi = effective_dictionary(A_d, A_r)
    rng = np.random.default_rng(11)
    Phi = cgauss(rng, 2, 8, 8)
    B = Phi @ psi.psi
    x = np.zeros((2, 32), dtype=complex)
    x[:, [1, 20]] = [[1, 2], [3, 4]]
    y = np.einsum("kng,kg->kn", B, x)
    est = domp(y, B, 1e-24, dictionaries=(psi, A_d, A_r))
    np.testing.assert_allclose(est.h_d_hat, x[:, :16] @ A_d.matrix.conj().T, atol=1e-9)
    np.testing.assert_allclose(est.h_r_hat, x[:, 16:] @ A_r.matrix.conj().T, atol=1e-9)


# LS and NMSE ---------------------------------------------------------------------

def test_ls_identity():
    y = np.array([1 + 2j, 3, -1j])
    np.testing.assert_allclose(ls_baseline(y, np.eye(3)), y)


def test_ls_exact_on_consistent_system(rng):
    Phi = cgauss(rng, 3, 10, 10)
    h = cgauss(rng, 3, 10)
    y = np.einsum("kij,kj->ki", Phi, h)
    assert np.linalg.norm(ls_baseline(y, Phi) - h) < 1e-9 * np.linalg.norm(h)


def test_ls_factored_matches_dense(rng):
    op = SensingOperator(cgauss(rng, 10, 10), cgauss(rng, 4, 10))
    h = cgauss(rng, 4, 10)
    y = np.einsum("kij,kj->ki", op.dense(), h)
    np.testing.assert_allclose(ls_baseline(y, op), ls_baseline(y, op.dense()), atol=1e-10)
    np.testing.assert_allclose(ls_baseline(y, op), h, atol=1e-10)


def test_ls_column_scale_does_not_trip_condition_check(rng):
    Phi = cgauss(rng, 6, 6)
    Phi[:, 3:] *= 1e-5
    h = cgauss(rng, 6)
    np.testing.assert_allclose(ls_baseline(Phi @ h, Phi, cond_max=1e4), h, rtol=1e-8)


def test_ls_ill_conditioned_raises(rng):
    Phi = cgauss(rng, 5, 5)
    Phi[:, 4] = Phi[:, 3] * (1 + 1e-14)
    with pytest.raises(IllConditioned) as err:
        ls_baseline(np.ones(5), Phi, cond_max=1e8)
    assert err.value.cond > 1e8
    op = SensingOperator(Phi, np.ones((2, 5)))
    with pytest.raises(IllConditioned):
        ls_baseline(np.ones((2, 5)), op, cond_max=1e8)


def test_ls_rejects_wide_system():
    with pytest.raises(ValueError):
        ls_baseline(np.ones(3), np.ones((3, 4)))


def test_nmse_examples(rng):
    t = cgauss(rng, 4, 8)
    assert nmse(t, t) == -200.0
    assert nmse(np.zeros_like(t), t) == pytest.approx(0.0)
    d = cgauss(rng, 4, 8)
    d *= np.sqrt(0.01 * np.sum(np.abs(t) ** 2) / np.sum(np.abs(d) ** 2))
    assert nmse(t + d, t) == pytest.approx(-20.0)
    with pytest.raises(UndefinedMetric):
        nmse(t, np.zeros_like(t))
    with pytest.raises(ValueError):
        nmse(t, t[:2])


@given(st.floats(1e-6, 1e6), st.integers(0, 1000))
def test_nmse_scale_invariant(scale, seed):
    rng = np.random.default_rng(seed)
    t, e = cgauss(rng, 3, 5), cgauss(rng, 3, 5)
    assert nmse_linear(scale * e, scale * t) == pytest.approx(nmse_linear(e, t), rel=1e-9)
