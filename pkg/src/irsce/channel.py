"""Geometric multipath channels and their OFDM frequency response.

Three links are modelled: BS to IRS (an ``N x M`` matrix), BS to user and IRS
to user (rows of length ``M`` and ``N``). A link is a list of paths; path 0
is the LoS path when one exists.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SPEED_OF_LIGHT, ConfigError, SystemConfig
from .dictionary import on_grid_angles
from .geometry import AnglePair, steering_matrix


class LinkKind(enum.Enum):
    BS_TO_IRS = "bs_to_irs"
    BS_TO_USER = "bs_to_user"
    IRS_TO_USER = "irs_to_user"


def raised_cosine(t, Ts, rolloff):
    """Raised-cosine impulse response with ``p(0) = 1``.

    At ``t = +-Ts / (2 rolloff)`` the analytic limit
    ``(pi/4) sinc(1 / (2 rolloff))`` is returned.
    """
    if Ts <= 0:
        raise ValueError("Ts must be positive")
    x = np.asarray(t, dtype=float) / Ts
    base = np.sinc(x)
    if rolloff == 0:
        return base if base.ndim else float(base)
    denom = 1.0 - (2.0 * rolloff * x) ** 2
    singular = np.abs(denom) < 1e-10
    safe = np.where(singular, 1.0, denom)
    out = np.where(singular,
                   (np.pi / 4) * np.sinc(1.0 / (2.0 * rolloff)),
                   base * np.cos(np.pi * rolloff * x) / safe)
    return out if out.ndim else float(out)


def umi_pathloss_db(distance_m: float, carrier_hz: float, los: bool, h_ut: float = 1.5) -> float:
    """UMi street-canyon path loss (3GPP TR 38.901), in dB."""
    f_ghz = carrier_hz / 1e9
    pl_los = 32.4 + 21.0 * math.log10(distance_m) + 20.0 * math.log10(f_ghz)
    if los:
        return pl_los
    pl_nlos = 22.4 + 35.3 * math.log10(distance_m) + 21.3 * math.log10(f_ghz) - 0.3 * (h_ut - 1.5)
    return max(pl_los, pl_nlos)


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    large_scale: float
    delay_s: float
    aod: AnglePair
    aoa: AnglePair | None = None

    def __post_init__(self):
        if not self.large_scale > 0:
            raise ValueError("large_scale must be positive")
        if self.delay_s < 0:
            raise ValueError("delay must be nonnegative")


@dataclass(frozen=True)
class LinkChannel:
    kind: LinkKind
    los_path: PathComponent | None
    nlos_paths: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind is LinkKind.BS_TO_IRS and self.los_path is None:
            raise ValueError("the BS-IRS link always carries a LoS path")

    @property
    def paths(self) -> list:
        return ([self.los_path] if self.los_path is not None else []) + list(self.nlos_paths)


def link_dims(cfg: SystemConfig, kind: LinkKind):
    """``(tx_dims, rx_dims)``; ``rx_dims`` is None for single-antenna users."""
    if kind is LinkKind.BS_TO_IRS:
        return cfg.bs_dims, cfg.irs_dims
    if kind is LinkKind.BS_TO_USER:
        return cfg.bs_dims, None
    return cfg.irs_dims, None


def link_has_los(kind: LinkKind, blocked: bool) -> bool:
    if kind is LinkKind.BS_TO_IRS:
        return True
    if kind is LinkKind.BS_TO_USER:
        return not blocked
    return blocked


def link_distance(cfg: SystemConfig, kind: LinkKind) -> float:
    return {LinkKind.BS_TO_IRS: cfg.d_bs_irs,
            LinkKind.BS_TO_USER: cfg.d_bs_user,
            LinkKind.IRS_TO_USER: cfg.d_irs_user}[kind]


def large_scale_amplitude(cfg: SystemConfig, kind: LinkKind, los: bool,
                          blocked: bool = False) -> float:
    """Amplitude loss of every path on a link.

    The steering vectors are unit norm, so the per-element aperture of both
    arrays is folded back in here: the returned value is the path-loss
    amplitude divided by ``sqrt(n_tx * n_rx)``.
    """
    pl = umi_pathloss_db(link_distance(cfg, kind), cfg.carrier_hz, los, cfg.h_ut)
    if blocked and kind is LinkKind.BS_TO_USER:
        pl += cfg.blockage_db
    tx, rx = link_dims(cfg, kind)
    n_ant = tx.n * (rx.n if rx is not None else 1)
    return 10 ** (pl / 20) / math.sqrt(n_ant)


def _uniform_angles(rng, count, limit):
    th = rng.uniform(-limit, limit, size=count)
    ph = rng.uniform(-limit, limit, size=count)
    return [AnglePair(float(a), float(b)) for a, b in zip(th, ph)]


def _grid_angles(rng, count, dims, oversampling, limit):
    pool = on_grid_angles(dims, oversampling, limit)
    idx = rng.choice(len(pool), size=count, replace=count > len(pool))
    return [pool[i] for i in idx]


def _draw_angles(rng, count, dims, cfg, on_grid):
    if on_grid:
        return _grid_angles(rng, count, dims, cfg.oversampling, cfg.angle_limit)
    return _uniform_angles(rng, count, cfg.angle_limit)


def sample_link(cfg: SystemConfig, kind: LinkKind, blocked: bool, rng,
                n_nlos: int | None = None) -> LinkChannel:
    """Draw one random realization of a link.

    NLoS gains are circular Gaussian, scaled so that the link's total
    small-scale power is one in expectation; the LoS magnitude is then set to
    exactly ``K_f`` times the realized NLoS power.
    """
    kind = LinkKind(kind)
    tx_dims, rx_dims = link_dims(cfg, kind)
    los = link_has_los(kind, blocked)
    if n_nlos is None:
        n_nlos = cfg.L_nlos
        if kind is LinkKind.BS_TO_IRS and not cfg.bs_irs_nlos:
            n_nlos = 0
    if n_nlos == 0 and not los:
        raise ConfigError(f"{kind.value} link has neither LoS nor NLoS paths")

    on_grid = cfg.on_grid
    rho = large_scale_amplitude(cfg, kind, los, blocked)
    max_delay = (cfg.N_CP - 1) * cfg.Ts

    aods = _draw_angles(rng, n_nlos, tx_dims, cfg, on_grid)
    aoas = (_draw_angles(rng, n_nlos, rx_dims, cfg, on_grid)
            if rx_dims is not None else [None] * n_nlos)
    delays = rng.uniform(0.0, max_delay, size=n_nlos)
    alpha = (rng.standard_normal(n_nlos) + 1j * rng.standard_normal(n_nlos)) / math.sqrt(2)
    scale = n_nlos * (1 + cfg.rician_linear) if los else n_nlos
    if n_nlos:
        alpha = alpha / math.sqrt(scale)
    nlos = [PathComponent(complex(a), rho, float(d), aod, aoa)
            for a, d, aod, aoa in zip(alpha, delays, aods, aoas)]

    los_path = None
    if los:
        nlos_power = float(np.sum(np.abs(alpha) ** 2)) if n_nlos else 1.0 / cfg.rician_linear
        mag = math.sqrt(cfg.rician_linear * nlos_power)
        phase = rng.uniform(0.0, 2 * math.pi)
        aod = _draw_angles(rng, 1, tx_dims, cfg, on_grid)[0]
        aoa = _draw_angles(rng, 1, rx_dims, cfg, on_grid)[0] if rx_dims is not None else None
        delay = min(link_distance(cfg, kind) / SPEED_OF_LIGHT, max_delay)
        los_path = PathComponent(mag * complex(math.cos(phase), math.sin(phase)), rho, delay, aod, aoa)
    return LinkChannel(kind, los_path, nlos)


def tap_weights(delays, cfg: SystemConfig) -> np.ndarray:
    """``(P, K)`` array of ``sum_d p(d Ts - tau) exp(j 2 pi k d / K)``."""
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    d = np.arange(cfg.N_CP)
    taps = raised_cosine(d[None, :] * cfg.Ts - delays[:, None], cfg.Ts, cfg.rolloff)
    phase = np.exp(2j * np.pi * np.outer(d, np.arange(cfg.K)) / cfg.K)
    return taps @ phase


def freq_gain(path: PathComponent, k: int, cfg: SystemConfig) -> complex:
    """Frequency-domain gain of one path at subcarrier ``k`` (1-based)."""
    if not 1 <= k <= cfg.K:
        raise ValueError(f"subcarrier {k} outside 1..{cfg.K}")
    return complex(path.gain / path.large_scale * tap_weights([path.delay_s], cfg)[0, k - 1])


def freq_gains(paths, cfg: SystemConfig) -> np.ndarray:
    """``(K, P)`` frequency gains of a list of paths."""
    if not paths:
        return np.zeros((cfg.K, 0), dtype=complex)
    coef = np.array([p.gain / p.large_scale for p in paths])
    return (tap_weights([p.delay_s for p in paths], cfg) * coef[:, None]).T


def _steer(dims, angles):
    return steering_matrix(dims, [a.theta for a in angles], [a.phi for a in angles])


@dataclass(frozen=True)
class FreqChannelSet:
    """Per-subcarrier channel of one link, kept in factored per-path form.

    ``gains[k, p]`` multiplies ``rx[:, p] tx[:, p]^H`` (matrix link) or
    ``tx[:, p]^H`` (vector link). Column 0 is the LoS path if ``has_los``.
    """

    kind: LinkKind
    gains: np.ndarray
    tx: np.ndarray
    rx: np.ndarray | None
    has_los: bool

    @property
    def K(self) -> int:
        return self.gains.shape[0]

    def _select(self, part):
        if part == "all":
            return slice(None)
        if part == "los":
            return slice(0, 1 if self.has_los else 0)
        if part == "nlos":
            return slice(1 if self.has_los else 0, None)
        raise ValueError(f"unknown part {part!r}")

    def rows(self, part: str = "all") -> np.ndarray:
        """``(K, n_tx)`` rows ``h_k^T`` of a vector link."""
        if self.rx is not None:
            raise TypeError("rows() applies to vector links only")
        s = self._select(part)
        return self.gains[:, s] @ self.tx[:, s].conj().T

    def matrices(self, part: str = "all") -> np.ndarray:
        """``(K, n_rx, n_tx)`` matrices of the BS-IRS link."""
        if self.rx is None:
            raise TypeError("matrices() applies to the matrix link only")
        s = self._select(part)
        return np.einsum("kp,np,mp->knm", self.gains[:, s], self.rx[:, s], self.tx[:, s].conj())

    @property
    def los_gain(self) -> np.ndarray:
        if not self.has_los:
            return np.zeros(self.K, dtype=complex)
        return self.gains[:, 0]

    def without_nlos(self) -> "FreqChannelSet":
        s = self._select("los")
        return FreqChannelSet(self.kind, self.gains[:, s], self.tx[:, s],
                              None if self.rx is None else self.rx[:, s], self.has_los)


def assemble_freq_channels(link: LinkChannel, cfg: SystemConfig) -> FreqChannelSet:
    tx_dims, rx_dims = link_dims(cfg, link.kind)
    paths = link.paths
    tx = _steer(tx_dims, [p.aod for p in paths]) if paths else np.zeros((tx_dims.n, 0), complex)
    rx = None
    if rx_dims is not None:
        rx = _steer(rx_dims, [p.aoa for p in paths]) if paths else np.zeros((rx_dims.n, 0), complex)
    return FreqChannelSet(link.kind, freq_gains(paths, cfg), tx, rx, link.los_path is not None)
