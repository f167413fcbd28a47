"""RMSE and resolution probability versus SNR for the M=6 scenario.

    python scripts/sweep_fig2.py --out runs/fig2 [--trials 100] [--workers 4]
"""
import argparse

from ncdoa.harness import ALGORITHMS, SweepConfig, emit_results, fig2_scenario, run_sweep, utc_now


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/fig2")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = SweepConfig(fig2_scenario(), num_trials=args.trials, master_seed=args.seed)
    started = utc_now()
    res = run_sweep(cfg, workers=args.workers)
    emit_results(res, args.out, started)

    print(f"{'snr':>5} " + " ".join(f"{a + ' rmse':>14} {'p_res':>6}" for a in ALGORITHMS))
    for snr in cfg.snr_grid:
        cells = [res.row(snr, a) for a in ALGORITHMS]
        print(f"{snr:5g} " + " ".join(f"{r.rmse_deg:14.4f} {r.resolution_prob:6.2f}" for r in cells))


if __name__ == "__main__":
    main()
