"""Command-line entry point: ``kantherm simulate | train | gridsearch | bench``.

Settings come from an optional ``--config`` file with the sections
``[paths]``, ``[simulate]``, ``[train]`` and ``[space]``, then from trailing
``key=value`` overrides.  Every run writes ``manifest.ini`` in the same format
(plus a ``[run]`` section), so ``--config manifest.ini`` repeats it.  When
``--config`` is absent, ``$KANTHERM_CONFIG_DIR/run.ini`` is used if present.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, baselines, evalbench, kan, training
from .dataset import SPLIT_RATIOS, Dataset, build_corpus, default_roster, histogram2d, \
    load_roster, write_histogram, write_roster
from .errors import ConfigError, KanThermError, NumericalError
from .textio import parse_list, read_ini, write_ini
from .thermal_model import BatteryParams

log = logging.getLogger("kantherm")

ENV_CONFIG_DIR = "KANTHERM_CONFIG_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
PATH_KEYS = ("params", "roster", "dataset", "models", "reports", "space")
SIM_DEFAULTS = {"duration": "1800", "dt": "1", "noise_fraction": "0.005",
                "ratios": ",".join(str(r) for r in SPLIT_RATIOS), "histogram_bins": "20"}
FULL_SCALE_SIM = {"duration": "7200"}
FULL_SCALE_TRAIN = {"batch_size": "100000"}
DEFAULT_SPACE = {"hidden_width": ["2", "3"], "grid_size": ["3", "5"], "lam": ["0.0001"],
                 "epochs": ["20"]}
FULL_SCALE_SPACE = {
    "hidden_width": ["2", "3", "4", "5", "6"], "spline_order": ["2", "3", "4", "5", "6"],
    "grid_size": ["2", "3", "4", "5", "6"], "lam": ["0.01", "0.001", "0.0025", "0.0005", "0.0001"],
    "nu1": ["0.1", "0.25", "0.5", "0.75", "1"], "nu2": ["0.1", "0.25", "0.5", "0.75", "1"],
    "epochs": ["25", "50", "75", "100", "125", "150", "175", "200"],
    "grid_update_stop_epoch": ["25", "50", "75", "100", "125", "150"],
    "batch_size": ["128", "10000", "50000", "75000", "100000", "200000", "300000"],
}


# --- configuration -------------------------------------------------------------

class RunConfig:
    """Resolved settings for one subcommand."""

    def __init__(self, command, args):
        self.command = command
        self.args = args
        self.source = self._config_path(args.config)
        self.base = self.source.parent if self.source else Path.cwd()
        cp = read_ini(self.source) if self.source else None
        section = lambda name: dict(cp[name]) if cp is not None and cp.has_section(name) else {}
        self.paths = {k: self._resolve(v) for k, v in section("paths").items()}
        unknown = set(self.paths) - set(PATH_KEYS)
        if unknown:
            raise ConfigError(f"unknown [paths] key(s): {', '.join(sorted(unknown))}")
        self.simulate = dict(SIM_DEFAULTS, **(FULL_SCALE_SIM if args.paper_scale else {}),
                             **section("simulate"))
        self.train = dict(FULL_SCALE_TRAIN if args.paper_scale else {}, **section("train"))
        self.space = {k: [v.strip() for v in s.split(",") if v.strip()]
                      for k, s in section("space").items()}
        self.seed = args.seed
        for item in args.overrides:
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"override {item!r} is not key=value")
            if key in PATH_KEYS:
                self.paths[key] = Path(value).resolve()
            elif key in SIM_DEFAULTS and command == "simulate":
                self.simulate[key] = value
            else:
                self.train[key] = value
        if self.seed is not None:
            self.train["seed"] = str(self.seed)
        if getattr(args, "out", None):
            self.out = Path(args.out).resolve()
        else:
            default = {"simulate": "dataset", "train": "models", "gridsearch": "reports",
                       "bench": "reports"}[command]
            self.out = self.paths.get(default, Path.cwd() / f"kantherm_{command}")

    @staticmethod
    def _config_path(given):
        if given:
            p = Path(given)
            if not p.is_file():
                raise ConfigError(f"config file not found: {p}")
            return p.resolve()
        env = os.environ.get(ENV_CONFIG_DIR)
        if env:
            p = Path(env) / "run.ini"
            if p.is_file():
                return p.resolve()
        return None

    def _resolve(self, value):
        p = Path(value)
        return (p if p.is_absolute() else self.base / p).resolve()

    def need(self, key, what):
        p = self.paths.get(key)
        if p is None:
            raise ConfigError(f"no {what} given (set [paths] {key} or {key}=PATH)")
        if not p.exists():
            raise ConfigError(f"{what} not found: {p}")
        return p

    def write_manifest(self, directory, extra=None, train_cfg=None, space=None):
        run = {"command": self.command, "version": __version__,
               "seed": "" if self.seed is None else self.seed,
               "paper_scale": bool(self.args.paper_scale)}
        run.update(extra or {})
        paths = dict(self.paths)
        paths[{"simulate": "dataset", "train": "models"}.get(self.command, "reports")] = self.out
        sections = {"run": run, "paths": {k: str(v) for k, v in sorted(paths.items())}}
        if self.command == "simulate":
            sections["simulate"] = self.simulate
        if train_cfg is not None:
            sections["train"] = train_cfg.as_strings()
        if space is not None:
            sections["space"] = {k: ", ".join(v) for k, v in space.items()}
        write_ini(Path(directory) / "manifest.ini", sections,
                  header="Effective configuration; rerun with --config pointing at this file.")


def _float(cfg, key):
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} = {cfg[key]!r} is not a number") from None


def _params(rc: RunConfig) -> BatteryParams:
    if "params" in rc.paths:
        return BatteryParams.from_file(rc.need("params", "battery parameter file"))
    return BatteryParams()


def _dataset(rc: RunConfig) -> Dataset:
    d = rc.need("dataset", "dataset directory")
    return Dataset.load(d)


def _train_config(rc: RunConfig, arch: str) -> training.TrainConfig:
    values = dict(rc.train)
    chosen = arch or values.pop("arch", None) or "kan"
    values.pop("arch", None)
    return training.TrainConfig.for_arch(chosen).with_overrides(values)


# --- subcommands ----------------------------------------------------------------

def cmd_simulate(rc: RunConfig) -> int:
    params = _params(rc)
    seed = rc.seed if rc.seed is not None else 0
    sim = rc.simulate
    if "roster" in rc.paths:
        roster = load_roster(rc.need("roster", "scenario roster"))
    else:
        roster = default_roster(seed, _float(sim, "duration"), _float(sim, "dt"))
    ratios = tuple(parse_list(sim["ratios"], float))
    ds, clean = build_corpus(roster, params, _float(sim, "noise_fraction"), ratios)
    out = rc.out
    (out / "trajectories").mkdir(parents=True, exist_ok=True)
    for tr in clean:
        tr.to_csv(out / "trajectories" / f"{tr.name}.csv")
    ds.save(out)
    counts, ea, eb = histogram2d(ds, bins=int(_float(sim, "histogram_bins")))
    write_histogram(out / "histogram.csv", counts, ea, eb)
    params.to_file(out / "params.ini")
    write_roster(out / "roster.ini", roster, profile_dir=out / "profiles")
    rc.write_manifest(out, {"rows": len(ds), "scenarios": len(roster)})
    print(f"simulated {len(roster)} scenarios, {len(ds)} rows -> {out}")
    return EXIT_OK


def cmd_train(rc: RunConfig) -> int:
    ds = _dataset(rc)
    cfg = _train_config(rc, rc.args.model)
    if cfg.widths[0] != ds.features.shape[1]:
        raise ConfigError(f"model takes {cfg.widths[0]} inputs, dataset has {ds.features.shape[1]}")
    model = training.build_model(cfg)
    progress = lambda e, a, b: log.info("epoch %d train %.4e val %.4e", e, a, b)
    model, report = training.train(model, ds, cfg, progress)
    out = rc.out
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / f"{cfg.arch}.json")
    report.to_csv(out / f"{cfg.arch}_loss.csv")
    cfg.to_file(out / f"{cfg.arch}_train.ini")
    rc.write_manifest(out, {"model": cfg.arch, "params": model.n_params,
                            "best_epoch": report.best_epoch}, train_cfg=cfg)
    print(f"trained {cfg.arch} ({model.n_params} params), best epoch {report.best_epoch}, "
          f"val loss {report.best_val_loss:.4e} -> {out}")
    return EXIT_OK


def cmd_gridsearch(rc: RunConfig) -> int:
    ds = _dataset(rc)
    if "space" in rc.paths:
        space = training.load_space(rc.need("space", "search space file"))
    elif rc.space:
        space = rc.space
    else:
        space = FULL_SCALE_SPACE if rc.args.paper_scale else DEFAULT_SPACE
    if not space or any(not v for v in space.values()):
        raise ConfigError("empty search space")
    base = _train_config(rc, rc.args.model)
    result = training.grid_search(space, ds, base, rc.args.budget, rc.args.jobs,
                                  rc.seed if rc.seed is not None else 0)
    out = rc.out
    out.mkdir(parents=True, exist_ok=True)
    result.to_csv(out / "gridsearch.csv")
    best = result.best
    if best is not None:
        training.best_config(result, base).to_file(
            out / "best.ini", header=f"Best grid-search configuration (run {best['run']}).")
    rc.write_manifest(out, {"runs": len(result.rows), "space_size": result.space_size,
                            "partial": result.partial}, train_cfg=base, space=space)
    flag = " (partial: budget-limited)" if result.partial else ""
    print(f"grid search: {len(result.rows)} of {result.space_size} configurations{flag} -> {out}")
    return EXIT_OK if best is not None else EXIT_NUMERICAL


def cmd_bench(rc: RunConfig) -> int:
    ds = _dataset(rc)
    params = _params(rc)
    models_dir = rc.paths.get("models", Path.cwd() / "kantherm_train")
    names = [n.strip() for n in (rc.args.model or "kan,mlp,rnn,lstm").split(",") if n.strip()]
    if not names:
        raise ConfigError("empty model list")
    models = {}
    for name in names:
        path = Path(name) if name.endswith(".json") else models_dir / f"{name}.json"
        if not path.is_file():
            raise ConfigError(f"model {name!r} not found at {path}")
        models[path.stem] = load_model(path)
    report, details = evalbench.comparison_table(models, ds, params, rc.args.repetitions)
    out = rc.out
    (out / "traces").mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "bench.csv")
    (out / "bench.txt").write_text(report.to_text(), encoding="utf-8")
    for tag, (_, series) in details.items():
        for tr in evalbench.error_traces(ds, series):
            tr.to_csv(out / "traces" / f"{tag}_{tr.scenario}.csv")
    rc.write_manifest(out, {"models": ",".join(models)})
    print(report.to_text(), end="")
    return EXIT_OK


def load_model(path):
    """Load any model container, dispatching on its architecture tag."""
    from . import container
    arch, _, _ = container.read_any(path)
    return kan.load(path) if arch == "kan" else baselines.load(path)


# --- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file ([paths], [simulate], [train], [space])")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--paper-scale", action="store_true",
                        help="use the full-size corpus, batch and search space")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common.add_argument("overrides", nargs="*", metavar="key=value", help="setting overrides")

    p = argparse.ArgumentParser(prog="kantherm", description="KAN battery core-temperature toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="generate the scenario corpus")
    t = sub.add_parser("train", parents=[common], help="train one model")
    t.add_argument("--model", choices=training.ARCHS, help="architecture (default from config, else kan)")
    g = sub.add_parser("gridsearch", parents=[common], help="hyperparameter grid search")
    g.add_argument("--model", choices=training.ARCHS, help="architecture to search")
    g.add_argument("--budget", type=int, help="maximum number of runs (sampled)")
    g.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    b = sub.add_parser("bench", parents=[common], help="evaluate and time trained models")
    b.add_argument("--model", help="comma-separated model names or .json files")
    b.add_argument("--repetitions", type=int, default=5, help="timing repetitions")
    return p


COMMANDS = {"simulate": cmd_simulate, "train": cmd_train, "gridsearch": cmd_gridsearch,
            "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    stray = [e for e in extra if e.startswith("-") or "=" not in e]
    if stray:
        parser.error(f"unrecognized arguments: {' '.join(stray)}")
    args.overrides = list(args.overrides) + extra
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        rc = RunConfig(args.command, args)
        return COMMANDS[args.command](rc)
    except NumericalError as exc:
        print(f"kantherm {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (KanThermError, ValueError, OSError) as exc:
        print(f"kantherm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
