"""HRNC-MUSIC RMSE at 5 dB as the snapshot count grows."""
import argparse

from ncdoa.harness import SweepConfig, fig2_scenario, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snapshots", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--snr", type=float, default=5.0)
    args = ap.parse_args()

    prev = None
    for n in args.snapshots:
        cfg = SweepConfig(fig2_scenario(num_snapshots=n), snr_grid=[args.snr],
                          num_trials=args.trials, algorithms=["hrnc"], master_seed=77)
        r = run_sweep(cfg).rows[0].rmse_deg
        ratio = "" if prev is None else f"  x{prev / r:.2f}"
        print(f"N={n:5d}  rmse {r:.4f} deg{ratio}")
        prev = r


if __name__ == "__main__":
    main()
