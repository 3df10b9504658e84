"""Small KAN hyperparameter grid search on a short corpus.

Usage: python3 scripts/gridsearch_demo.py [OUT_DIR] [--jobs N] [--budget N]

Searches hidden width, grid size and lam, writes the parallel-coordinate CSV
and the best configuration, and prints the ranking.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from kantherm import training
from kantherm.dataset import build_corpus, default_roster
from kantherm.thermal_model import BatteryParams

SPACE = {"hidden_width": ["2", "3", "4"], "grid_size": ["3", "5"], "lam": ["0.0001", "0.01"]}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="runs/gridsearch")
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--epochs", type=int, default=30)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ds, _ = build_corpus(default_roster(seed=0, duration=900.0), BatteryParams())
    base = training.TrainConfig(epochs=args.epochs, grid_update_stop_epoch=min(50, args.epochs))
    result = training.grid_search(SPACE, ds, base, args.budget, args.jobs)
    result.to_csv(out / "gridsearch.csv")
    training.best_config(result, base).to_file(out / "best.ini", header="Best grid-search configuration.")

    flag = " (budget-limited)" if result.partial else ""
    print(f"{len(result.rows)} of {result.space_size} configurations{flag}")
    for r in result.ranked():
        desc = ", ".join(f"{k}={v}" for k, v in r["params"].items())
        print(f"  val {r['val_loss']:.4e}  {desc}")
    for r in result.rows:
        if r["status"] != "ok":
            print(f"  run {r['run']} {r['status']}")
    print(f"-> {out}")


if __name__ == "__main__":
    main()
