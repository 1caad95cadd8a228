"""Time the compiled DOMP kernel against the NumPy kernel.

    python benchmarks/bench_domp.py --preset paper --repeat 5

Problems are taken from real trials (blocked user, designed pilots), so the
sensing operator has the shared-base structure used in experiments. A second
case passes per-subcarrier dense matrices to exercise the unshared path.
"""
import argparse
import time

import numpy as np

from irsce.config import make_config
from irsce.harness.experiment import (angular_operator, dbm_to_watt, dictionaries_for,
                                      noise_power, sample_channels, trial_streams)
from irsce.pilots import build_pilot_book, factored_sensing, simulate_rx
from irsce.recovery import available_backends, domp


def problem(cfg, trial, p_tx_dbm):
    rng_ch, rng_p, rng_n, _ = trial_streams(cfg.master_seed, trial)
    links, (G, h_d, h_r) = sample_channels(cfg, True, rng_ch)
    pb = build_pilot_book(cfg, links[0].los_path.aod, rng_p, p_tx_w=dbm_to_watt(p_tx_dbm))
    y = simulate_rx(pb, G, h_d, h_r, noise_power(cfg), rng_n)
    psi, _, _ = dictionaries_for(cfg)
    return y, angular_operator(factored_sensing(pb, G), psi), noise_power(cfg)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="paper", choices=["paper", "small"])
    ap.add_argument("--p-tx", type=float, default=46.0, help="transmit power in dBm")
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = [b for b in ("python", "compiled") if b in available_backends()]
    if "compiled" not in backends:
        print("compiled kernel not built; only the NumPy kernel is available")
    cfg = make_config(args.preset)
    print(f"preset={args.preset} K={cfg.K} N_P={cfg.n_pilots} "
          f"G={cfg.grid_m[0] * cfg.grid_m[1] + cfg.grid_n[0] * cfg.grid_n[1]} P_Tx={args.p_tx} dBm")
    print(f"{'case':<8}{'trial':>6}{'iters':>7}" + "".join(f"{b + ' [ms]':>16}" for b in backends)
          + ("{:>10}".format("speedup") if len(backends) > 1 else ""))
    totals = {b: 0.0 for b in backends}
    for case in ("shared", "dense"):
        for t in range(args.trials):
            y, op, s2 = problem(cfg, t, args.p_tx)
            B = op if case == "shared" else op.dense()
            row, iters = [], 0
            ref = None
            for b in backends:
                dt, est = best_time(lambda: domp(y, B, s2, backend=b), args.repeat)
                row.append(dt)
                totals[b] += dt
                iters = est.iterations
                if ref is None:
                    ref = est
                else:
                    assert np.array_equal(ref.support, est.support), "backends disagree"
            line = f"{case:<8}{t:>6}{iters:>7}" + "".join(f"{1e3 * v:>16.1f}" for v in row)
            if len(row) > 1:
                line += f"{row[0] / row[1]:>9.1f}x"
            print(line)
    if len(backends) > 1:
        print(f"overall speedup (python / compiled): {totals['python'] / totals['compiled']:.1f}x")


if __name__ == "__main__":
    main()
