"""Full desk-scale pipeline: simulate the corpus, train all four models, benchmark.

Usage: python3 scripts/run_pipeline.py [OUT_DIR] [--epochs N]

Writes dataset/, models/ and reports/ under OUT_DIR (default ./runs/pipeline) and
prints the comparison table.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from kantherm import evalbench, training
from kantherm.dataset import build_corpus, default_roster
from kantherm.thermal_model import BatteryParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="runs/pipeline")
    ap.add_argument("--epochs", type=int, help="override KAN epochs (default 150)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    params = BatteryParams()

    t0 = time.perf_counter()
    ds, _ = build_corpus(default_roster(seed=args.seed), params)
    ds.save(out / "dataset")
    print(f"corpus: {len(ds)} rows, fractions "
          + ", ".join(f"{k} {v:.3f}" for k, v in ds.fractions().items()))

    models = {}
    for arch in training.ARCHS:
        changes = {"seed": args.seed}
        if arch == "kan" and args.epochs:
            changes["epochs"] = args.epochs
        cfg = training.TrainConfig.for_arch(arch, **changes)
        t = time.perf_counter()
        model, report = training.train(training.build_model(cfg), ds, cfg)
        (out / "models").mkdir(parents=True, exist_ok=True)
        model.save(out / "models" / f"{arch}.json")
        report.to_csv(out / "models" / f"{arch}_loss.csv")
        models[arch] = model
        print(f"{arch}: best epoch {report.best_epoch}, val loss {report.best_val_loss:.3e}, "
              f"{time.perf_counter() - t:.1f} s")

    bench, details = evalbench.comparison_table(models, ds, params)
    (out / "reports" / "traces").mkdir(parents=True, exist_ok=True)
    bench.to_csv(out / "reports" / "bench.csv")
    (out / "reports" / "bench.txt").write_text(bench.to_text(), encoding="utf-8")
    for tag, (_, series) in details.items():
        for tr in evalbench.error_traces(ds, series):
            tr.to_csv(out / "reports" / "traces" / f"{tag}_{tr.scenario}.csv")
    print()
    print(bench.to_text(), end="")
    print("timing order:", evalbench.timing_order_holds(bench))
    print(f"total {time.perf_counter() - t0:.0f} s -> {out}")


if __name__ == "__main__":
    main()
