"""Held-out evaluation, prediction timing and the model comparison table.

RMSE is reported in Kelvin against the noise-free core temperature, pooled
over all test scenarios.  Recurrent models cannot predict the first
``lookback - 1`` rows of a scenario; those rows are absent from their
error traces and from their RMSE.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, kan
from .dataset import Dataset, apply, invert
from .errors import ConfigError, ParseError, ShapeError
from .textio import fmt, read_csv, to_float, write_csv
from .thermal_model import BatteryParams, ThermalState, integrate

BENCH_ORDER = ("physics", "mlp", "rnn", "lstm", "kan")
BENCH_HEADER = ("model", "rmse_K", "params", "predict_ms_per_1000")
TRACE_HEADER = ("t", "T1_true", "T1_pred", "abs_err")
TIMING_POINTS = 1000


def rmse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=float).ravel()
    targets = np.asarray(targets, dtype=float).ravel()
    if preds.shape != targets.shape:
        raise ShapeError(f"length mismatch {preds.size} vs {targets.size}")
    if preds.size == 0:
        raise ShapeError("rmse of an empty series")
    d = preds - targets
    return float(np.sqrt(np.mean(d * d)))


# --- prediction ---------------------------------------------------------------

@dataclass
class SeriesPrediction:
    rows: np.ndarray       # dataset rows covered by the split
    pred: np.ndarray       # Kelvin, NaN where the model cannot predict
    valid: np.ndarray      # bool mask of predicted rows

    @property
    def n_predicted(self) -> int:
        return int(self.valid.sum())


def _model_features(model, features):
    stats = getattr(model, "stats", None)
    if stats is None:
        raise ConfigError(f"{getattr(model, 'arch', 'model')} model has no normalization stats")
    features = np.asarray(features, dtype=float)
    width = model.widths[0] if hasattr(model, "widths") else features.shape[1]
    if features.ndim != 2 or features.shape[1] != width:
        raise ShapeError(f"model expects {width} features, got shape {features.shape}")
    return apply(stats, features)


def predict_rows(model, features, scenario):
    """Kelvin predictions for raw feature rows; NaN where no full window exists."""
    X = _model_features(model, features)
    pred = np.full(len(X), np.nan)
    L = getattr(model, "lookback", 1)
    if L <= 1:
        idx = np.arange(len(X))
        out = model.predict(X) if len(X) else np.zeros(0)
    else:
        W, _, idx, _ = baselines.window(X, np.zeros(len(X)), scenario, L)
        out = model.predict(W) if len(W) else np.zeros(0)
    pred[idx] = invert(model.stats, out)
    return pred


def predict_series(model, dataset: Dataset, split: str | None = "test") -> SeriesPrediction:
    rows = np.flatnonzero(dataset.mask(split)) if split else np.arange(len(dataset))
    pred = predict_rows(model, dataset.features[rows], dataset.scenario[rows])
    return SeriesPrediction(rows, pred, np.isfinite(pred))


@dataclass
class EvalReport:
    model: str
    rmse_kelvin: float
    per_scenario: dict = field(default_factory=dict)
    max_abs_error: float = 0.0
    n_points: int = 0


def evaluate(model, dataset: Dataset, tag: str | None = None, split: str = "test",
             series: SeriesPrediction | None = None) -> EvalReport:
    """Pooled RMSE against the clean T1 over the predicted rows of ``split``."""
    s = series or predict_series(model, dataset, split)
    v = s.valid
    if not v.any():
        raise ConfigError(f"no predictable rows in split {split!r}")
    truth = dataset.target_true[s.rows]
    per = {}
    sc = dataset.scenario[s.rows]
    for sid in np.unique(sc):
        m = (sc == sid) & v
        if m.any():
            per[dataset.scenario_names[sid]] = rmse(s.pred[m], truth[m])
    err = np.abs(s.pred[v] - truth[v])
    return EvalReport(tag or model.arch, rmse(s.pred[v], truth[v]), per, float(err.max()), int(v.sum()))


# --- error traces ---------------------------------------------------------------

@dataclass
class ErrorTrace:
    scenario: str
    t: np.ndarray
    true: np.ndarray
    pred: np.ndarray        # NaN = absent

    @property
    def abs_err(self):
        return np.abs(self.true - self.pred)

    def to_csv(self, path) -> None:
        write_csv(path, TRACE_HEADER, zip(self.t.tolist(), self.true.tolist(),
                                          self.pred.tolist(), self.abs_err.tolist()))

    @classmethod
    def from_csv(cls, path, scenario=None) -> "ErrorTrace":
        header, rows = read_csv(path)
        if tuple(header) != TRACE_HEADER:
            raise ParseError(f"{path}: header {header} != {list(TRACE_HEADER)}")
        cols = [np.array([to_float(r[j]) for r in rows]) for j in range(3)]
        return cls(scenario or Path(path).stem, *cols)


def error_traces(dataset: Dataset, series: SeriesPrediction) -> list:
    traces = []
    sc = dataset.scenario[series.rows]
    for sid in np.unique(sc):
        m = sc == sid
        r = series.rows[m]
        traces.append(ErrorTrace(dataset.scenario_names[sid], dataset.time[r],
                                 dataset.target_true[r], series.pred[m]))
    return traces


# --- timing -----------------------------------------------------------------------

def timing_predictor(model):
    """The callable timed for a model: KANs run in their compiled form."""
    if isinstance(model, kan.KanNetwork):
        return kan.compile_inference(model).predict
    return model.predict


def timing_inputs(model, dataset: Dataset, split: str = "test", n: int = TIMING_POINTS):
    """First ``n`` model inputs (rows or windows) from ``split``."""
    rows = np.flatnonzero(dataset.mask(split))
    X = _model_features(model, dataset.features[rows])
    L = getattr(model, "lookback", 1)
    if L > 1:
        X, _, _, _ = baselines.window(X, np.zeros(len(X)), dataset.scenario[rows], L)
    if len(X) < n:
        raise ConfigError(f"timing needs {n} samples, split {split!r} provides {len(X)}")
    return np.ascontiguousarray(X[:n])


def time_call(fn, repetitions: int = 5) -> float:
    """Median wall time of ``fn()`` in ms over ``repetitions`` after one warm-up."""
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    fn()
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return float(statistics.median(times))


def time_prediction(model, inputs, repetitions: int = 5) -> float:
    inputs = np.asarray(inputs, dtype=float)
    if len(inputs) < TIMING_POINTS:
        raise ConfigError(f"timing needs {TIMING_POINTS} samples, got {len(inputs)}")
    predict = timing_predictor(model)
    return time_call(lambda: predict(inputs), repetitions)


def time_physics(params: BatteryParams, dataset: Dataset, split: str = "test",
                 n: int = TIMING_POINTS, repetitions: int = 5) -> float:
    """Time an RK4 re-simulation of ``n`` steps driven by the split's inputs."""
    rows = np.flatnonzero(dataset.mask(split))
    if len(rows) < n:
        raise ConfigError(f"physics timing needs {n} rows, split {split!r} provides {len(rows)}")
    rows = rows[:n]
    currents = dataset.features[rows, 0].tolist()
    coolings = dataset.features[rows, 1].tolist()
    t0 = float(dataset.target_true[rows[0]])
    start = ThermalState(t0, float(dataset.features[rows[0], 3]), float(dataset.features[rows[0], 2]), 0.5)
    return time_call(lambda: integrate(start, currents, coolings, params), repetitions)


# --- comparison table ----------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    model: str
    rmse_kelvin: float | None
    n_params: int
    predict_ms: float


@dataclass
class BenchReport:
    rows: list
    notes: list = field(default_factory=list)

    def row(self, model: str) -> BenchRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)

    def to_csv(self, path) -> None:
        write_csv(path, BENCH_HEADER, [(r.model, r.rmse_kelvin, r.n_params, r.predict_ms)
                                       for r in self.rows])

    @classmethod
    def from_csv(cls, path) -> "BenchReport":
        header, rows = read_csv(path)
        if tuple(header) != BENCH_HEADER:
            raise ParseError(f"{path}: header {header} != {list(BENCH_HEADER)}")
        out = []
        for n, r in enumerate(rows, start=2):
            try:
                out.append(BenchRow(r[0], None if r[1] == "" else float(r[1]), int(r[2]), float(r[3])))
            except (ValueError, IndexError):
                raise ParseError(f"{path}: malformed row", line=n) from None
        return cls(out)

    def to_text(self) -> str:
        head = ("Model", "RMSE [K]", "Params", "Time [ms/1000]")
        body = [(r.model, "-" if r.rmse_kelvin is None else f"{r.rmse_kelvin:.4f}",
                 str(r.n_params), f"{r.predict_ms:.3f}") for r in self.rows]
        widths = [max(len(x[i]) for x in [head] + body) for i in range(4)]
        line = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                       for i, (c, w) in enumerate(zip(cells, widths)))
        out = [line(head), "  ".join("-" * w for w in widths)] + [line(b) for b in body]
        if self.notes:
            out.append("")
            out.extend(f"* {n}" for n in self.notes)
        return "\n".join(out) + "\n"


def comparison_table(models: dict, dataset: Dataset, params: BatteryParams,
                     repetitions: int = 5, split: str = "test"):
    """Benchmark ``{tag: model}``; returns (BenchReport, {tag: (EvalReport, series)}).

    Rows follow the fixed order physics, mlp, rnn, lstm, kan; the physics row
    has no RMSE.  Every model is timed on the same leading test rows.
    """
    if not models:
        raise ConfigError("no models to benchmark")
    for tag, m in models.items():
        if getattr(m, "stats", None) is None:
            raise ConfigError(f"model {tag!r} is untrained (no normalization stats)")
    order = {t: i for i, t in enumerate(BENCH_ORDER)}
    tags = sorted(models, key=lambda t: (order.get(getattr(models[t], "arch", t), len(order)), t))
    rows = [BenchRow("physics", None, params.n_constants,
                     time_physics(params, dataset, split, repetitions=repetitions))]
    details = {}
    lookbacks = []
    for tag in tags:
        m = models[tag]
        series = predict_series(m, dataset, split)
        ev = evaluate(m, dataset, tag, split, series)
        ms = time_prediction(m, timing_inputs(m, dataset, split), repetitions)
        rows.append(BenchRow(tag, ev.rmse_kelvin, int(m.n_params), ms))
        details[tag] = (ev, series)
        if getattr(m, "lookback", 1) > 1:
            lookbacks.append(f"{tag} L={m.lookback}")
    notes = [f"RMSE pooled over split {split!r} against noise-free T1.",
             f"Time: median of {repetitions} runs after one warm-up, {TIMING_POINTS} predictions; "
             "KAN timed in its compiled piecewise-polynomial form; physics is an RK4 "
             f"re-simulation of {TIMING_POINTS} steps.",
             f"Physics params = {params.n_constants} model constants."]
    if lookbacks:
        notes.append("Recurrent RMSE excludes the first L-1 rows of each scenario (" +
                     ", ".join(lookbacks) + ").")
    if any(getattr(models[t], "arch", "") == "lstm" for t in tags):
        notes.append(baselines.LSTM_COUNT_NOTE)
    return BenchReport(rows, notes), details


def timing_order_holds(report: BenchReport) -> dict:
    """Check KAN < MLP < RNN < LSTM and KAN < physics on measured times."""
    ms = {r.model: r.predict_ms for r in report.rows}
    checks = {}
    chain = [m for m in ("kan", "mlp", "rnn", "lstm") if m in ms]
    for a, b in zip(chain, chain[1:]):
        checks[f"{a}<{b}"] = ms[a] < ms[b]
    if "kan" in ms:
        checks["kan<physics"] = ms["kan"] < ms["physics"]
    return checks
