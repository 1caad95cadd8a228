"""Downlink sounding: BS hybrid precoders, IRS phase books, and observations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import FreqChannelSet
from .config import ConfigError, SystemConfig
from .geometry import AnglePair, steering_vector


@dataclass(frozen=True)
class PilotBook:
    """Sounding sequence of ``N_P`` slots.

    ``F_RF`` has shape ``(N_P, M, N_RF)`` with the user-dedicated columns
    first and the IRS-dedicated columns last; ``theta`` is ``(N_P, N)``.
    """

    F_RF: np.ndarray
    f_BB: np.ndarray
    theta: np.ndarray

    @property
    def n_pilots(self) -> int:
        return self.F_RF.shape[0]

    @property
    def s(self) -> np.ndarray:
        """``(N_P, M)`` transmitted pilot per slot (identical on every subcarrier)."""
        return self.F_RF @ self.f_BB


def _random_phase(rng, shape):
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=shape))


def build_pilot_book(cfg: SystemConfig, los_aod: AnglePair, rng,
                     n_pilots: int | None = None, p_tx_w: float = 1.0,
                     variant: str | None = None) -> PilotBook:
    """Designed (beam on the IRS) or fully random pilot book.

    ``p_tx_w`` is the total transmit power in watts. Random draws happen in
    the same order for both variants, so the user-dedicated columns and the
    IRS phases coincide between them for a given generator state.
    """
    if cfg.N_RF_I + cfg.N_RF_U != cfg.N_RF:
        raise ConfigError("N_RF_I + N_RF_U must equal N_RF")
    variant = variant or cfg.pilot_variant
    n_p = cfg.n_pilots if n_pilots is None else int(n_pilots)
    M, N = cfg.M, cfg.N

    F = _random_phase(rng, (n_p, M, cfg.N_RF)) / math.sqrt(M)
    theta = _random_phase(rng, (n_p, N))
    if variant == "designed" and cfg.N_RF_I:
        F[:, :, cfg.N_RF_U:] = steering_vector(cfg.bs_dims, los_aod)[None, :, None]
    elif variant not in ("designed", "fully_random"):
        raise ConfigError(f"unknown pilot variant {variant!r}")
    f_bb = np.full(cfg.N_RF, math.sqrt(p_tx_w / cfg.N_RF), dtype=complex)
    return PilotBook(F, f_bb, theta)


def assemble_sensing(pb: PilotBook, G_L) -> np.ndarray:
    """Dense ``(K, N_P, M+N)`` measurement matrices from ``(K, N, M)`` LoS matrices.

    Row ``i`` is ``[s_i^T, (Theta_i G_L s_i)^T]``.
    """
    G_L = np.asarray(G_L)
    s = pb.s
    if G_L.ndim != 3 or G_L.shape[2] != s.shape[1] or G_L.shape[1] != pb.theta.shape[1]:
        raise ValueError(f"G_L shape {G_L.shape} incompatible with pilot book "
                         f"(M={s.shape[1]}, N={pb.theta.shape[1]})")
    K = G_L.shape[0]
    right = pb.theta[None, :, :] * np.einsum("knm,im->kin", G_L, s)
    left = np.broadcast_to(s, (K,) + s.shape)
    return np.concatenate([left, right], axis=2)


@dataclass(frozen=True)
class SensingOperator:
    """Measurement matrices sharing one base: ``Phi_k = base * weights[k]``.

    The LoS BS-IRS matrix is ``g_k a_N a_M^H``, so every ``Phi_{L,k}``
    equals a slot-dependent base with its IRS columns scaled by ``g_k``.
    """

    base: np.ndarray      # (N_P, M+N)
    weights: np.ndarray   # (K, M+N)

    def dense(self) -> np.ndarray:
        return self.base[None, :, :] * self.weights[:, None, :]


def factored_sensing(pb: PilotBook, G: FreqChannelSet, los_gain_known: bool = True) -> SensingOperator:
    """Structured ``Phi_{L,k}`` built from the LoS factor of the BS-IRS link.

    With ``los_gain_known=False`` the IRS block carries unit gain and the
    per-subcarrier LoS gain is left inside the unknown channel.
    """
    if not G.has_los:
        raise ValueError("BS-IRS link has no LoS component")
    s = pb.s
    a_n = G.rx[:, 0]
    a_m = G.tx[:, 0]
    right = pb.theta * a_n[None, :] * (s @ a_m.conj())[:, None]
    base = np.concatenate([s, right], axis=1)
    M = s.shape[1]
    K = G.K
    w = np.ones((K, base.shape[1]), dtype=complex)
    if los_gain_known:
        w[:, M:] = G.los_gain[:, None]
    return SensingOperator(base, w)


def simulate_rx(pb: PilotBook, G: FreqChannelSet, h_d: FreqChannelSet, h_r: FreqChannelSet,
                sigma_n2: float, rng, include_bs_irs_nlos: bool = True) -> np.ndarray:
    """Received pilots ``y[k, i]`` over the full channel plus AWGN.

    Computed path by path so the ``N x M`` matrices are never formed.
    """
    s = pb.s                                   # (N_P, M)
    direct = h_d.rows() @ s.T                  # (K, N_P)
    G_use = G if include_bs_irs_nlos else G.without_nlos()
    tx_proj = s @ G_use.tx.conj()              # (N_P, P): a_M(p)^H s_i
    hr = h_r.rows()                            # (K, N)
    # h_r^T Theta_i a_N(p) for every k, i, p
    n_p, N = pb.theta.shape
    P = G_use.rx.shape[1]
    steer = (pb.theta[:, :, None] * G_use.rx[None, :, :]).transpose(1, 0, 2).reshape(N, n_p * P)
    refl = (hr @ steer).reshape(-1, n_p, P)
    cascaded = np.einsum("kp,kip,ip->ki", G_use.gains, refl, tx_proj)
    y = direct + cascaded
    if sigma_n2 > 0:
        noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + noise * math.sqrt(sigma_n2 / 2)
    return y
