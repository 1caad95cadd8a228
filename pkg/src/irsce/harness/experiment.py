"""One Monte Carlo trial: sample channels, sound them, estimate, score."""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..channel import LinkKind, assemble_freq_channels, sample_link
from ..config import SystemConfig
from ..dictionary import effective_dictionary, redundant_dictionary
from ..pilots import SensingOperator, build_pilot_book, factored_sensing, simulate_rx
from ..recovery import domp, ls_baseline, nmse

METHODS = ("domp", "ls")


def noise_power(cfg: SystemConfig) -> float:
    """Per-subcarrier noise power in watts."""
    dbm = cfg.nsd_dbm_hz + 10 * np.log10(cfg.bandwidth_hz / cfg.K)
    return float(10 ** ((dbm - 30) / 10))


def dbm_to_watt(p_dbm: float) -> float:
    return float(10 ** ((p_dbm - 30) / 10))


@dataclass(frozen=True)
class TrialResult:
    nmse_hd_db: float
    nmse_hr_db: float
    domp_iterations: int
    seed: int
    wall_time: float
    trial_index: int = 0
    converged: bool = True

    def nmse_db(self, user_kind: str) -> float:
        """The metric reported for a user kind: h_r when blocked, h_d when not."""
        return self.nmse_hr_db if user_kind == "blocked" else self.nmse_hd_db


def trial_streams(master_seed: int, trial_index: int):
    """Independent generators for channels, pilots, noise and the LS pilots.

    Keyed only by ``(master_seed, trial_index)``, so every sweep point of a
    trial sees the same channel draw.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return [np.random.default_rng(c) for c in ss.spawn(4)]


@lru_cache(maxsize=16)
def _dictionaries(m_dims, n_dims, grid_m, grid_n):
    A_d = redundant_dictionary(m_dims, grid_m)
    A_r = redundant_dictionary(n_dims, grid_n)
    return effective_dictionary(A_d, A_r), A_d, A_r


def dictionaries_for(cfg: SystemConfig):
    return _dictionaries(cfg.M_dims, cfg.N_dims, cfg.grid_m, cfg.grid_n)


def sample_channels(cfg: SystemConfig, blocked: bool, rng):
    links = [sample_link(cfg, LinkKind.BS_TO_IRS, blocked, rng),
             sample_link(cfg, LinkKind.BS_TO_USER, blocked, rng),
             sample_link(cfg, LinkKind.IRS_TO_USER, blocked, rng)]
    return links, [assemble_freq_channels(l, cfg) for l in links]


def angular_operator(op: SensingOperator, psi) -> SensingOperator:
    """``Phi_{L,k} Psi`` in factored form.

    The subcarrier weights are constant over the BS block and over the IRS
    block, so they commute with the block-diagonal ``Psi``.
    """
    m, g_m = psi.m, psi.g_m
    w = op.weights
    if not (np.allclose(w[:, :m], w[:, :1]) and np.allclose(w[:, m:], w[:, m:m + 1])):
        raise ValueError("sensing weights are not block-constant")
    g = psi.psi.shape[1]
    wa = np.empty((w.shape[0], g), dtype=complex)
    wa[:, :g_m] = w[:, :1]
    wa[:, g_m:] = w[:, m:m + 1]
    return SensingOperator(op.base @ psi.psi, wa)


def run_trial(cfg: SystemConfig, trial_index: int, *, p_tx_dbm: float | None = None,
              method: str = "domp", user_kind: str | None = None,
              variant: str | None = None) -> TrialResult:
    """Simulate and score one trial.

    ``method="domp"`` runs the compressive estimator with ``cfg.n_pilots``
    pilots; ``method="ls"`` runs the square LS benchmark with ``M + N``
    pilots and no thermal noise (NLoS interference stays on).
    """
    t0 = time.perf_counter()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    user_kind = user_kind or cfg.user_kinds[0]
    blocked = user_kind == "blocked"
    p_tx = cfg.p_tx_dbm[-1] if p_tx_dbm is None else p_tx_dbm
    rng_ch, rng_pilot, rng_noise, rng_ls = trial_streams(cfg.master_seed, trial_index)

    links, (G, h_d, h_r) = sample_channels(cfg, blocked, rng_ch)
    los_aod = links[0].los_path.aod
    sigma2 = noise_power(cfg)
    hd_true = h_d.rows()
    hr_true = h_r.rows()
    if not cfg.los_gain_known:
        hr_true = hr_true * G.los_gain[:, None]

    if method == "domp":
        pb = build_pilot_book(cfg, los_aod, rng_pilot, p_tx_w=dbm_to_watt(p_tx), variant=variant)
        op = factored_sensing(pb, G, cfg.los_gain_known)
        y = simulate_rx(pb, G, h_d, h_r, sigma2 if cfg.noise else 0.0, rng_noise)
        psi, A_d, A_r = dictionaries_for(cfg)
        eps_floor = cfg.epsilon_floor_rel * float(np.mean(np.abs(y) ** 2))
        eps = max(cfg.epsilon_scale * sigma2 if cfg.noise else 0.0, eps_floor)
        est = domp(y, angular_operator(op, psi), eps, dictionaries=(psi, A_d, A_r))
        hd_hat, hr_hat = est.h_d_hat, est.h_r_hat
        iters, converged = est.iterations, est.converged
    else:
        n_ls = cfg.M + cfg.N
        pb = build_pilot_book(cfg, los_aod, rng_ls, n_pilots=n_ls,
                              p_tx_w=dbm_to_watt(p_tx), variant=variant)
        op = factored_sensing(pb, G, cfg.los_gain_known)
        y = simulate_rx(pb, G, h_d, h_r, 0.0, rng_noise)
        h = ls_baseline(y, op, cond_max=cfg.ls_cond_max)
        hd_hat, hr_hat = h[:, :cfg.M], h[:, cfg.M:]
        iters, converged = 0, True

    seed = int(np.random.SeedSequence(entropy=cfg.master_seed,
                                      spawn_key=(trial_index,)).generate_state(1, np.uint64)[0])
    return TrialResult(nmse(hd_hat, hd_true), nmse(hr_hat, hr_true), iters, seed,
                       time.perf_counter() - t0, trial_index, converged)
