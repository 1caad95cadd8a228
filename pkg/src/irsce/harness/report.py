"""Sweep orchestration and CSV report emission."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import SystemConfig
from .experiment import run_trial

REPORT_HEADER = ("sweep_param", "sweep_value", "method", "user_kind",
                 "nmse_db_mean", "nmse_db_stderr", "trials", "seed", "config_hash")
RAW_HEADER = ("trial_index", "seed", "method", "user_kind", "nmse_db",
              "nmse_hd_db", "nmse_hr_db", "domp_iterations", "converged")

# report method name -> (run_trial method, pilot variant)
METHODS = {
    "domp_designed": ("domp", "designed"),
    "domp_random": ("domp", "fully_random"),
    "ls_noiseless": ("ls", "designed"),
}
SWEEPS = ("ptx", "rp", "rdic")


def sweep_points(cfg: SystemConfig, sweep: str):
    """``[(value, cfg_at_value, p_tx_dbm)]`` for one sweep axis.

    The r_p and r_dic sweeps run at the top of the power sweep.
    """
    top = cfg.p_tx_dbm[-1]
    if sweep == "ptx":
        return [(p, cfg, p) for p in cfg.p_tx_dbm]
    if sweep == "rp":
        return [(r, cfg.replace(r_p=r), top) for r in cfg.r_p_sweep]
    if sweep == "rdic":
        return [(r, cfg.replace(r_dic=r), top) for r in cfg.r_dic_sweep]
    raise ValueError(f"unknown sweep {sweep!r}; choose from {SWEEPS}")


def summarize(values_db) -> tuple:
    """Mean NMSE taken in the linear domain, in dB, and its standard error in dB.

    The standard error is propagated through ``10 log10`` to first order.
    """
    lin = 10 ** (np.asarray(values_db, dtype=float) / 10)
    m = float(np.mean(lin))
    if len(lin) < 2 or m <= 0:
        return 10 * math.log10(m) if m > 0 else -math.inf, 0.0
    se = float(np.std(lin, ddof=1)) / math.sqrt(len(lin))
    return 10 * math.log10(m), 10 / math.log(10) * se / m


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


@dataclass
class Report:
    sweep: str
    config: SystemConfig
    rows: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)     # sweep value -> list of raw rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow([_fmt(r[h]) for h in REPORT_HEADER])
        return buf.getvalue()

    def raw_csv(self, value) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for r in self.raw[value]:
            w.writerow([_fmt(r[h]) for h in RAW_HEADER])
        return buf.getvalue()

    def lookup(self, value, method, user_kind) -> dict:
        for r in self.rows:
            if r["sweep_value"] == value and r["method"] == method and r["user_kind"] == user_kind:
                return r
        raise KeyError((value, method, user_kind))

    def write(self, out_dir) -> list:
        """Write ``report_<sweep>.csv`` and one ``raw/<sweep>_<value>.csv`` per point."""
        out = Path(out_dir)
        (out / "raw").mkdir(parents=True, exist_ok=True)
        paths = [out / f"report_{self.sweep}.csv"]
        paths[0].write_text(self.to_csv())
        for value in self.raw:
            p = out / "raw" / f"{self.sweep}_{_fmt(value)}.csv"
            p.write_text(self.raw_csv(value))
            paths.append(p)
        return paths


def run_sweep(cfg: SystemConfig, sweep: str = "ptx", *, methods=None, threads: int = 1,
              progress=None) -> Report:
    """Average every method over ``cfg.trials`` trials at each sweep point."""
    methods = list(METHODS) if methods is None else list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    points = sweep_points(cfg, sweep)
    report = Report(sweep, cfg)
    chash = cfg.config_hash()
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for value, pcfg, p_tx in points:
            raw = []
            for method in methods:
                kind, variant = METHODS[method]
                for user in cfg.user_kinds:
                    def one(i, pcfg=pcfg, p_tx=p_tx, kind=kind, user=user, variant=variant):
                        return run_trial(pcfg, i, p_tx_dbm=p_tx, method=kind,
                                         user_kind=user, variant=variant)
                    idx = range(cfg.trials)
                    results = list(pool.map(one, idx)) if pool else [one(i) for i in idx]
                    vals = [r.nmse_db(user) for r in results]
                    mean, se = summarize(vals)
                    report.rows.append({
                        "sweep_param": sweep, "sweep_value": float(value), "method": method,
                        "user_kind": user, "nmse_db_mean": mean, "nmse_db_stderr": se,
                        "trials": cfg.trials, "seed": cfg.master_seed, "config_hash": chash})
                    raw.extend({"trial_index": r.trial_index, "seed": r.seed, "method": method,
                                "user_kind": user, "nmse_db": r.nmse_db(user),
                                "nmse_hd_db": r.nmse_hd_db, "nmse_hr_db": r.nmse_hr_db,
                                "domp_iterations": r.domp_iterations,
                                "converged": int(r.converged)} for r in results)
                    if progress:
                        progress(f"{sweep}={_fmt(float(value))} {method} {user}: "
                                 f"{mean:.2f} dB (+-{se:.2f})")
            report.raw[float(value)] = raw
    finally:
        if pool:
            pool.shutdown()
    return report
