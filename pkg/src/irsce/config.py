"""System configuration, presets and the TOML config-file schema."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .geometry import ArrayDims

SPEED_OF_LIGHT = 299_792_458.0
USER_KINDS = ("blocked", "unblocked")
PILOT_VARIANTS = ("designed", "fully_random")


class ConfigError(ValueError):
    pass


def _default_ptx():
    return [float(p) for p in range(20, 47, 2)]


@dataclass(frozen=True)
class SystemConfig:
    """All knobs of one experiment.

    Array sizes are stored as ``(nx, ny)`` tuples. ``r_p`` and ``r_dic`` set
    the pilot count and dictionary size; see :attr:`n_pilots` and
    :attr:`grid_m`.
    """

    carrier_hz: float = 30e9
    bandwidth_hz: float = 100e6
    M_dims: tuple = (16, 16)
    N_dims: tuple = (16, 16)
    K: int = 64
    N_CP: int = 64
    L_nlos: int = 6
    rician_db: float = 20.0
    rolloff: float = 0.8
    N_RF: int = 2
    N_RF_I: int = 1
    N_RF_U: int = 1
    nsd_dbm_hz: float = -174.0
    # DOMP threshold = epsilon_scale * sigma_n^2
    epsilon_scale: float = 1.0
    # threshold floor relative to the mean measurement power; keeps noiseless runs finite
    epsilon_floor_rel: float = 1e-13
    r_p: float = 0.25
    r_dic: int = 4
    p_tx_dbm: list = field(default_factory=_default_ptx)
    r_p_sweep: list = field(default_factory=lambda: [0.125, 0.25, 0.375, 0.5])
    r_dic_sweep: list = field(default_factory=lambda: [1, 4, 9, 16])
    user_kinds: list = field(default_factory=lambda: list(USER_KINDS))
    pilot_variant: str = "designed"
    d_bs_irs: float = 100.0
    d_bs_user: float = 80.0
    d_irs_user: float = 20.0
    h_ut: float = 1.5
    # extra loss on the BS-user link of a blocked user
    blockage_db: float = 40.0
    angle_limit: float = math.pi / 3
    noise: bool = True
    bs_irs_nlos: bool = True
    on_grid: bool = False
    los_gain_known: bool = True
    ls_cond_max: float = 1e12
    trials: int = 200
    master_seed: int = 20200801

    def __post_init__(self):
        object.__setattr__(self, "M_dims", tuple(int(v) for v in self.M_dims))
        object.__setattr__(self, "N_dims", tuple(int(v) for v in self.N_dims))
        object.__setattr__(self, "p_tx_dbm", [float(v) for v in self.p_tx_dbm])
        object.__setattr__(self, "r_p_sweep", [float(v) for v in self.r_p_sweep])
        object.__setattr__(self, "r_dic_sweep",
                           [int(v) if float(v).is_integer() else v for v in self.r_dic_sweep])
        object.__setattr__(self, "user_kinds", [str(v) for v in self.user_kinds])
        self.validate()

    # derived quantities -------------------------------------------------

    @property
    def M(self) -> int:
        return self.M_dims[0] * self.M_dims[1]

    @property
    def N(self) -> int:
        return self.N_dims[0] * self.N_dims[1]

    @property
    def bs_dims(self) -> ArrayDims:
        return ArrayDims(*self.M_dims)

    @property
    def irs_dims(self) -> ArrayDims:
        return ArrayDims(*self.N_dims)

    @property
    def Ts(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def n_pilots(self) -> int:
        return max(1, int(round(self.r_p * (self.M + self.N))))

    @property
    def oversampling(self) -> tuple:
        return oversampling_factors(self.r_dic)

    @property
    def grid_m(self) -> tuple:
        ox, oy = self.oversampling
        return (self.M_dims[0] * ox, self.M_dims[1] * oy)

    @property
    def grid_n(self) -> tuple:
        ox, oy = self.oversampling
        return (self.N_dims[0] * ox, self.N_dims[1] * oy)

    @property
    def rician_linear(self) -> float:
        return 10 ** (self.rician_db / 10)

    def validate(self):
        if self.N_RF_I + self.N_RF_U != self.N_RF:
            raise ConfigError(
                f"N_RF_I + N_RF_U = {self.N_RF_I + self.N_RF_U} != N_RF = {self.N_RF}")
        if min(self.N_RF_I, self.N_RF_U) < 0 or self.N_RF < 1:
            raise ConfigError("RF chain counts must be nonnegative with N_RF >= 1")
        if min(self.M_dims + self.N_dims) < 1:
            raise ConfigError("array dimensions must be positive")
        if self.K < 1 or self.N_CP < 1:
            raise ConfigError("K and N_CP must be positive")
        if self.bandwidth_hz <= 0 or self.carrier_hz <= 0:
            raise ConfigError("bandwidth and carrier must be positive")
        if not 0 <= self.rolloff <= 1:
            raise ConfigError(f"rolloff {self.rolloff} outside [0, 1]")
        if self.L_nlos < 0:
            raise ConfigError("L_nlos must be nonnegative")
        if self.r_p <= 0:
            raise ConfigError("r_p must be positive")
        if self.r_dic < 1:
            raise ConfigError("r_dic must be >= 1")
        for r in [self.r_dic, *self.r_dic_sweep]:
            oversampling_factors(r)
        if not self.p_tx_dbm:
            raise ConfigError("p_tx_dbm sweep list is empty")
        for u in self.user_kinds:
            if u not in USER_KINDS:
                raise ConfigError(f"unknown user kind {u!r}")
        if self.pilot_variant not in PILOT_VARIANTS:
            raise ConfigError(f"unknown pilot variant {self.pilot_variant!r}")
        if not 0 < self.angle_limit <= math.pi / 2:
            raise ConfigError("angle_limit must lie in (0, pi/2]")
        if self.epsilon_scale <= 0 or self.epsilon_floor_rel <= 0:
            raise ConfigError("DOMP threshold parameters must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["M_dims"] = list(self.M_dims)
        d["N_dims"] = list(self.N_dims)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def oversampling_factors(r_dic: int) -> tuple:
    """Split a dictionary redundancy ratio into per-axis oversampling."""
    r = int(r_dic)
    if r != r_dic or r < 1:
        raise ConfigError(f"r_dic must be a positive integer, got {r_dic!r}")
    root = math.isqrt(r)
    if root * root == r:
        return (root, root)
    return (r, 1)


PRESETS = {
    "paper": {},
    "small": {
        "M_dims": (8, 8),
        "N_dims": (8, 8),
        "K": 16,
        "N_CP": 16,
        "trials": 50,
        "r_dic_sweep": [1, 4],
        # shorter links make up for the smaller arrays and wider subcarriers
        "d_bs_irs": 10.0,
        "d_bs_user": 12.0,
        "d_irs_user": 5.0,
        "blockage_db": 45.0,
    },
}

FIELD_NAMES = {f.name for f in dataclasses.fields(SystemConfig)}


def make_config(preset: str = "paper", **overrides) -> SystemConfig:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    values = dict(PRESETS[preset])
    values.update(overrides)
    unknown = set(values) - FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return SystemConfig(**values)


def load_config(path, preset: str | None = None) -> SystemConfig:
    """Read a TOML config file.

    Keys map one-to-one onto :class:`SystemConfig` fields. An optional
    top-level ``preset = "small"`` selects the base preset; the ``preset``
    argument overrides it.
    """
    with open(Path(path), "rb") as fh:
        data = tomllib.load(fh)
    base = data.pop("preset", "paper")
    if preset is not None:
        base = preset
    unknown = set(data) - FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return make_config(base, **data)
