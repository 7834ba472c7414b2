#!/usr/bin/env python3
"""Full six-pair reproduction run against a local copy of the five-set EEG
corpus (directories A-E or Z/O/N/F/S, 100 files x 4097 lines each).

Long-running at full sequence length; use --jobs to parallelize folds.
"""

import argparse
from pathlib import Path

from eeglstm.harness import (
    RESULTS_HEADER,
    average_row,
    results_row,
    run_reproduction,
    write_curves_csv,
    write_experiment_json,
    write_results_csv,
)
from eeglstm.optim import TrainConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("data", help="corpus root holding the five set directories")
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--seq-len", type=int, default=4097)
    ap.add_argument("--standardize", action="store_true",
                    help="per-sequence standardization (raw microvolt scales saturate the gates)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs/reproduction")
    args = ap.parse_args()

    tcfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    results = run_reproduction(
        args.data, args.folds, args.seed, tcfg,
        seq_len=args.seq_len, standardize=args.standardize, jobs=args.jobs,
        progress=print,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(out / "results.csv", results, include_average=True)
    for result in results:
        write_curves_csv(out / f"curves_{result.pair[0]}_{result.pair[1]}.csv", result.curves)
    write_experiment_json(out / "results.json", results)

    print(",".join(RESULTS_HEADER))
    for result in results:
        print(",".join(results_row(result)))
    print(",".join(average_row(results)))
    print(f"artifacts under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
