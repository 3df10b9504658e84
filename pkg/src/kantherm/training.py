"""Optimizers, the epoch loop and the hyperparameter grid search.

Losses are computed on the min-max normalized target.  L-BFGS uses the
two-loop recursion with a strong-Wolfe line search; Adam is the standard
bias-corrected update.  All randomness flows from ``TrainConfig.seed``.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import baselines, kan
from .dataset import FEATURES, Dataset
from .errors import ConfigError, NumericalError, ShapeError
from .textio import fmt, parse_list, read_ini, write_csv, write_ini

log = logging.getLogger(__name__)

ARCHS = ("kan", "mlp", "rnn", "lstm")
OPTIMIZERS = ("lbfgs", "adam")
CURVATURE_EPS = 1e-10


# --- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    """Model and optimizer settings for one training run.

    ``lookback = 0`` selects the architecture default (20 for RNN, 50 for
    LSTM).  ``lbfgs_iters`` caps the L-BFGS iterations per epoch on each
    batch; they stop earlier once a step lowers the loss by less than
    ``lbfgs_tol_change`` relative.
    """

    arch: str = "kan"
    widths: tuple = (4, 3, 1)
    grid_size: int = 5
    spline_order: int = 3
    init_sigma: float = 0.1
    lookback: int = 0
    double_bias: bool = False
    epochs: int = 150
    batch_size: int = 100_000
    optimizer: str = "lbfgs"
    lam: float = 1e-4
    nu1: float = 0.25
    nu2: float = 0.25
    grid_update_every: int = 10
    grid_update_stop_epoch: int = 50
    seed: int = 0
    lbfgs_memory: int = 10
    lbfgs_iters: int = 20
    lbfgs_tol_change: float = 1e-9
    adam_lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.arch not in ARCHS:
            raise ConfigError(f"unknown model {self.arch!r}; valid: {', '.join(ARCHS)}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; valid: {', '.join(OPTIMIZERS)}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for name in ("lam", "nu1", "nu2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0")
        if len(self.widths) < 2 or min(self.widths) < 1:
            raise ConfigError(f"bad widths {self.widths}")
        if self.widths[0] != len(FEATURES) or self.widths[-1] != 1:
            raise ConfigError(f"widths must map {len(FEATURES)} features to 1 output, got {self.widths}")
        if self.grid_update_every < 1 or self.lbfgs_memory < 1 or self.lbfgs_iters < 1:
            raise ConfigError("grid_update_every, lbfgs_memory and lbfgs_iters must be >= 1")
        if self.lookback < 0:
            raise ConfigError("lookback must be >= 0")

    @classmethod
    def for_arch(cls, arch: str, **changes) -> "TrainConfig":
        """Defaults per architecture: the KAN settings above, Adam for baselines."""
        base = {"kan": {}, "mlp": {"widths": baselines.MLP_WIDTHS},
                "rnn": {"widths": baselines.RNN_WIDTHS, "init_sigma": baselines.RNN_INPUT_SIGMA},
                "lstm": {"widths": baselines.LSTM_WIDTHS}}
        if arch not in base:
            raise ConfigError(f"unknown model {arch!r}; valid: {', '.join(ARCHS)}")
        opts = dict(base[arch])
        if arch != "kan":
            opts.update(optimizer="adam", batch_size=256, epochs=40, adam_lr=3e-3,
                        lam=0.0, nu1=0.0, nu2=0.0)
        opts.update(changes)
        return cls(arch=arch, **opts)

    @property
    def effective_lookback(self) -> int:
        if self.lookback:
            return self.lookback
        return {"rnn": baselines.RNN_LOOKBACK, "lstm": baselines.LSTM_LOOKBACK}.get(self.arch, 1)

    def with_overrides(self, overrides: dict) -> "TrainConfig":
        """Apply ``key -> text`` overrides; ``hidden_width`` sets a single hidden layer."""
        kinds = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, text in overrides.items():
            if key == "hidden_width":
                changes["widths"] = (self.widths[0], _parse_scalar(key, text, "int"), self.widths[-1])
                continue
            if key not in kinds:
                raise ConfigError(f"unknown training option {key!r}")
            changes[key] = _parse_scalar(key, text, kinds[key])
        return replace(self, **changes)

    def as_strings(self) -> dict:
        return {k: (",".join(str(w) for w in v) if k == "widths" else fmt(v))
                for k, v in asdict(self).items()}

    def to_file(self, path, header: str = "Training configuration.") -> None:
        write_ini(path, {"train": self.as_strings()}, header=header)

    @classmethod
    def from_file(cls, path, arch: str | None = None) -> "TrainConfig":
        cp = read_ini(path)
        if not cp.has_section("train"):
            raise ConfigError(f"{path}: missing [train] section")
        values = dict(cp["train"])
        chosen = arch or values.get("arch", "kan")
        values.pop("arch", None)
        return cls.for_arch(chosen).with_overrides(values)


def _parse_scalar(key, text, kind):
    text = str(text).strip()
    try:
        if kind in ("tuple", tuple):
            return tuple(parse_list(text, int))
        if kind in ("bool", bool):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return text.lower() in ("true", "1", "yes")
        if kind in ("int", int):
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        if kind in ("float", float):
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{key} = {text!r} is not a valid {kind}") from None


# --- model construction and inputs ----------------------------------------------

def build_model(cfg: TrainConfig):
    if cfg.arch == "kan":
        return kan.KanNetwork.create(cfg.widths, cfg.grid_size, cfg.spline_order, cfg.seed,
                                     cfg.init_sigma)
    if cfg.arch == "mlp":
        return baselines.MlpNetwork.create(cfg.widths, cfg.seed)
    if cfg.arch == "rnn":
        return baselines.RnnNetwork.create(cfg.widths, cfg.effective_lookback, cfg.seed, cfg.init_sigma)
    return baselines.LstmNetwork.create(cfg.widths, cfg.effective_lookback, cfg.seed,
                                        cfg.init_sigma, cfg.double_bias)


def model_inputs(model, dataset: Dataset, split: str | None):
    """Normalized inputs, targets and dataset row indices a model consumes.

    Stateless models get one row per sample; recurrent models get windows of
    ``model.lookback`` rows, each predicting the row it ends on.
    """
    X, y = dataset.normalized(split)
    rows = np.flatnonzero(dataset.mask(split)) if split else np.arange(len(dataset))
    L = getattr(model, "lookback", 1)
    if L <= 1:
        return X, y, rows
    W, yw, last, _ = baselines.window(X, y, dataset.scenario[rows], L)
    return W, yw, rows[last]


def objective(model, X, y, cfg: TrainConfig) -> float:
    """Training objective value: MSE plus the KAN sparsity terms."""
    if isinstance(model, kan.KanNetwork):
        out, cache = kan.forward(model, X, keep_cache=True)
        return kan.total_loss(out[:, 0], y, model, cache, cfg.lam, cfg.nu1, cfg.nu2)
    r = model.predict(X) - y
    return float(np.mean(r * r))


# --- Adam -------------------------------------------------------------------------

@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n))


def adam_step(params, grads, state: AdamState, hyper: AdamHyper = AdamHyper()):
    """One bias-corrected Adam update; returns (new params, state)."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ShapeError(f"params {params.shape}, grads {grads.shape}, state {state.m.shape}")
    if not np.all(np.isfinite(grads)):
        bad = np.flatnonzero(~np.isfinite(grads))
        raise NumericalError(f"non-finite gradient at step {state.t + 1} "
                             f"({bad.size} entries, first index {bad[0]})")
    t = state.t + 1
    m = hyper.beta1 * state.m + (1 - hyper.beta1) * grads
    v = hyper.beta2 * state.v + (1 - hyper.beta2) * grads * grads
    m_hat = m / (1 - hyper.beta1 ** t)
    v_hat = v / (1 - hyper.beta2 ** t)
    return params - hyper.lr * m_hat / (np.sqrt(v_hat) + hyper.eps), AdamState(m, v, t)


# --- L-BFGS -------------------------------------------------------------------------

@dataclass
class LbfgsHistory:
    """Curvature pairs (s, y), newest last, at most ``m`` kept."""

    m: int = 10
    s: list = field(default_factory=list)
    y: list = field(default_factory=list)
    skipped: int = 0

    def __len__(self):
        return len(self.s)

    def push(self, s, y) -> bool:
        if float(s @ y) <= CURVATURE_EPS:
            self.skipped += 1
            return False
        self.s.append(s)
        self.y.append(y)
        if len(self.s) > self.m:
            del self.s[0], self.y[0]
        return True

    def reset(self) -> None:
        self.s.clear()
        self.y.clear()

    def direction(self, g):
        """Two-loop recursion: ``-H g`` with ``H0 = (s.y / y.y) I``."""
        q = -np.asarray(g, dtype=float)
        if not self.s:
            return q
        rho = [1.0 / float(s @ y) for s, y in zip(self.s, self.y)]
        alpha = [0.0] * len(self.s)
        for i in range(len(self.s) - 1, -1, -1):
            alpha[i] = rho[i] * float(self.s[i] @ q)
            q -= alpha[i] * self.y[i]
        q *= float(self.s[-1] @ self.y[-1]) / float(self.y[-1] @ self.y[-1])
        for i in range(len(self.s)):
            beta = rho[i] * float(self.y[i] @ q)
            q += (alpha[i] - beta) * self.s[i]
        return q


@dataclass(frozen=True)
class LbfgsStep:
    x: np.ndarray
    f: float
    g: np.ndarray
    alpha: float
    n_evals: int
    flag: str          # wolfe | fallback | converged | stalled


def _cubic_min(a, fa, da, b, fb, db):
    # minimizer of the cubic through two points with slopes, safeguarded
    lo, hi = min(a, b), max(a, b)
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc >= 0:
        d2 = math.copysign(math.sqrt(disc), b - a)
        den = db - da + 2.0 * d2
        if den != 0:
            x = b - (b - a) * (db + d2 - d1) / den
            w = hi - lo
            if lo + 0.1 * w <= x <= hi - 0.1 * w:
                return x
    return 0.5 * (lo + hi)


def strong_wolfe(fun, x, f0, g0, d, alpha0, c1=1e-4, c2=0.9, max_trials=20):
    """Step length satisfying the strong Wolfe conditions along ``d``.

    Returns ``(alpha, f, g, n_evals)``, with ``alpha = None`` on failure.
    """
    dphi0 = float(g0 @ d)
    evals = 0

    def phi(a):
        nonlocal evals
        evals += 1
        f, g = fun(x + a * d)
        return float(f), g, float(g @ d) if np.all(np.isfinite(g)) else math.nan

    def ok_armijo(a, f):
        return math.isfinite(f) and f <= f0 + c1 * a * dphi0

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        while evals < max_trials:
            if math.isfinite(f_hi) and math.isfinite(d_hi):
                a = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            else:
                a = 0.5 * (lo + hi)
            if abs(hi - lo) <= 1e-16 * max(1.0, abs(lo)):
                break
            f, g, da = phi(a)
            if not ok_armijo(a, f) or f >= f_lo:
                hi, f_hi, d_hi = a, f, da
            else:
                if abs(da) <= -c2 * dphi0:
                    return a, f, g
                if da * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = a, f, da
        return None, None, None

    a_prev, f_prev, d_prev = 0.0, f0, dphi0
    a = alpha0
    first = True
    while evals < max_trials:
        f, g, da = phi(a)
        if not ok_armijo(a, f) or (not first and f >= f_prev):
            res = zoom(a_prev, f_prev, d_prev, a, f, da)
            return (*res, evals)
        if abs(da) <= -c2 * dphi0:
            return a, f, g, evals
        if da >= 0:
            res = zoom(a, f, da, a_prev, f_prev, d_prev)
            return (*res, evals)
        a_prev, f_prev, d_prev = a, f, da
        a = min(2.0 * a, 1e10)
        first = False
    return None, None, None, evals


def _armijo_descent(fun, x, f0, g0, alpha0, c1=1e-4, max_halvings=60):
    d = -g0
    slope = float(g0 @ d)
    a = alpha0
    for n in range(1, max_halvings + 1):
        f, g = fun(x + a * d)
        if math.isfinite(f) and f <= f0 + c1 * a * slope:
            return a, float(f), g, n
        a *= 0.5
    return None, None, None, max_halvings


def lbfgs_step(fun, x, f, g, history: LbfgsHistory, c1=1e-4, c2=0.9, max_trials=20,
               gtol=0.0) -> LbfgsStep:
    """One L-BFGS iteration from ``(x, f, g)``; updates ``history`` in place.

    ``fun(x) -> (value, gradient)``.  If the strong-Wolfe search fails within
    ``max_trials`` evaluations the step falls back to Armijo-backtracked
    steepest descent and is flagged ``fallback``.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    gnorm1 = float(np.abs(g).sum())
    if gnorm1 == 0.0 or float(np.abs(g).max()) <= gtol:
        return LbfgsStep(x, f, g, 0.0, 0, "converged")
    d = history.direction(g)
    if float(g @ d) >= 0:
        history.reset()
        d = -g
    alpha0 = 1.0 if len(history) else min(1.0, 1.0 / gnorm1)
    a, f_new, g_new, n = strong_wolfe(fun, x, f, g, d, alpha0, c1, c2, max_trials)
    flag = "wolfe"
    if a is None:
        history.reset()
        a, f_new, g_new, n2 = _armijo_descent(fun, x, f, g, min(1.0, 1.0 / gnorm1), c1)
        n += n2
        flag = "fallback"
        if a is None:
            return LbfgsStep(x, f, g, 0.0, n, "stalled")
        d = -g
    x_new = x + a * d
    g_new = np.asarray(g_new, dtype=float)
    history.push(x_new - x, g_new - g)
    return LbfgsStep(x_new, f_new, g_new, a, n, flag)


def lbfgs_minimize(fun, x0, max_iter=100, m=10, gtol=1e-12, f_tol=0.0):
    """Run L-BFGS from ``x0``; returns ``(x, f, trace)`` with trace of accepted values."""
    x = np.asarray(x0, dtype=float).copy()
    f, g = fun(x)
    trace = [float(f)]
    hist = LbfgsHistory(m)
    for _ in range(max_iter):
        step = lbfgs_step(fun, x, f, g, hist, gtol=gtol)
        if step.flag in ("converged", "stalled"):
            break
        x, f, g = step.x, step.f, step.g
        trace.append(float(f))
        if f <= f_tol:
            break
    return x, float(f), trace


# --- training loop --------------------------------------------------------------------

@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    grid_update: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    best_epoch: int = -1
    # accepted full-batch L-BFGS objective values, one list per stretch of
    # fixed objective (a grid update starts a new one)
    step_losses: list = field(default_factory=list)
    fallbacks: int = 0
    skipped_pairs: int = 0

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch]

    def curves(self):
        return (tuple(self.train_loss), tuple(self.val_loss), tuple(self.grid_update))

    def to_csv(self, path) -> None:
        write_csv(path, ("epoch", "train_loss", "val_loss", "grid_update", "wall_time_s"),
                  zip(self.epochs, self.train_loss, self.val_loss,
                      [int(b) for b in self.grid_update], self.wall_time))


def _batches(n, batch_size, rng):
    if n <= batch_size:
        return [None]
    perm = rng.permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def train(model, dataset: Dataset, cfg: TrainConfig, progress=None):
    """Fit ``model`` on the train split; returns (best-validation model, report).

    ``progress(epoch, train_loss, val_loss)`` is called after each epoch.
    """
    widths = getattr(model, "widths", None)
    if widths is not None and widths[0] != dataset.features.shape[1]:
        raise ShapeError(f"model takes {widths[0]} inputs, dataset has {dataset.features.shape[1]}")
    Xtr, ytr, _ = model_inputs(model, dataset, "train")
    Xva, yva, _ = model_inputs(model, dataset, "val")
    if len(ytr) == 0 or len(yva) == 0:
        raise ConfigError("dataset needs non-empty train and val splits")
    is_kan = isinstance(model, kan.KanNetwork)
    lam, nu1, nu2 = (cfg.lam, cfg.nu1, cfg.nu2) if is_kan else (0.0, 0.0, 0.0)
    rng = np.random.default_rng(cfg.seed)
    report = TrainReport()
    hist = LbfgsHistory(cfg.lbfgs_memory)
    adam = AdamState.zeros(model.n_params)
    hyper = AdamHyper(cfg.adam_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    best, best_val = None, math.inf
    memo = {}

    for epoch in range(cfg.epochs):
        t_start = time.perf_counter()
        updated = is_kan and epoch % cfg.grid_update_every == 0 and epoch < cfg.grid_update_stop_epoch
        if updated:
            kan.grid_update(model, Xtr)
            hist.reset()
        batches = _batches(len(ytr), cfg.batch_size, rng)
        if cfg.optimizer == "lbfgs" and len(batches) > 1:
            hist.reset()
        for b, idx in enumerate(batches):
            xb, yb = (Xtr, ytr) if idx is None else (Xtr[idx], ytr[idx])
            batch_memo = memo if idx is None else None

            def fun(p, xb=xb, yb=yb, batch_memo=batch_memo):
                model.set_params(p)
                return model.loss_and_grad(xb, yb, lam, nu1, nu2, batch_memo)

            where = f"epoch {epoch}, batch {b}"
            if cfg.optimizer == "adam":
                f, g = fun(model.get_params())
                if not math.isfinite(f):
                    raise NumericalError(f"non-finite loss at {where}")
                try:
                    p, adam = adam_step(model.get_params(), g, adam, hyper)
                except NumericalError as exc:
                    raise NumericalError(f"{exc} at {where}") from None
                model.set_params(p)
                continue
            p = model.get_params()
            f, g = fun(p)
            if not math.isfinite(f):
                raise NumericalError(f"non-finite loss at {where}")
            if idx is None and (updated or not report.step_losses):
                report.step_losses.append([float(f)])
            for _ in range(cfg.lbfgs_iters):
                step = lbfgs_step(fun, p, f, g, hist)
                if step.flag in ("converged", "stalled"):
                    break
                decrease = f - step.f
                p, f, g = step.x, step.f, step.g
                report.fallbacks += step.flag == "fallback"
                if idx is None:
                    report.step_losses[-1].append(float(f))
                # a flat objective ends the epoch's iterations early
                if step.flag == "fallback" or decrease <= cfg.lbfgs_tol_change * max(abs(f), 1e-300):
                    break
            model.set_params(p)
        train_loss = objective(model, Xtr, ytr, cfg)
        val_loss = objective(model, Xva, yva, cfg)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise NumericalError(f"non-finite loss after epoch {epoch}")
        report.epochs.append(epoch)
        report.train_loss.append(train_loss)
        report.val_loss.append(val_loss)
        report.grid_update.append(bool(updated))
        report.wall_time.append(time.perf_counter() - t_start)
        if val_loss < best_val:
            best, best_val, report.best_epoch = model.copy(), val_loss, epoch
        if progress is not None:
            progress(epoch, train_loss, val_loss)
    report.skipped_pairs = hist.skipped
    best.stats = dataset.stats
    return best, report



# --- grid search -------------------------------------------------------------------------

SPACE_KEYS = ("hidden_width", "spline_order", "grid_size", "lam", "nu1", "nu2", "epochs",
              "grid_update_stop_epoch", "batch_size")


@dataclass
class SearchResult:
    rows: list               # one dict per run, in run order
    keys: tuple              # searched hyperparameter names
    partial: bool            # budget cut the space short
    space_size: int

    def ranked(self) -> list:
        ok = [r for r in self.rows if r["status"] == "ok"]
        return sorted(ok, key=lambda r: (r["val_loss"], r["run"]))

    @property
    def best(self):
        ranked = self.ranked()
        return ranked[0] if ranked else None

    def to_csv(self, path) -> None:
        header = ("run",) + self.keys + ("train_loss", "val_loss", "status")
        write_csv(path, header, [[r["run"], *(r["params"][k] for k in self.keys),
                                  r["train_loss"], r["val_loss"], r["status"]] for r in self.rows])


def load_space(path) -> dict:
    """Search space from a ``[space]`` section: ``key = v1, v2, ...``."""
    cp = read_ini(path)
    if not cp.has_section("space"):
        raise ConfigError(f"{path}: missing [space] section")
    space = {k: [v.strip() for v in text.split(",") if v.strip()] for k, text in cp["space"].items()}
    if not space or any(len(v) == 0 for v in space.values()):
        raise ConfigError(f"{path}: empty search space")
    return space


def expand_space(space: dict) -> list:
    keys = list(space)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(space[k] for k in keys))]


def _run_candidate(job):
    run, params, base, dataset = job
    try:
        cfg = base.with_overrides({k: str(v) for k, v in params.items()})
        model, rep = train(build_model(cfg), dataset, cfg)
        return {"run": run, "params": params, "train_loss": rep.train_loss[rep.best_epoch],
                "val_loss": rep.best_val_loss, "status": "ok"}
    except (ConfigError, NumericalError, ShapeError, ValueError, ArithmeticError) as exc:
        log.warning("grid search run %d failed: %s", run, exc)
        return {"run": run, "params": params, "train_loss": None, "val_loss": None,
                "status": f"failed: {exc}"}


def grid_search(space: dict, dataset: Dataset, base: TrainConfig | None = None,
                budget: int | None = None, jobs: int = 1, seed: int = 0) -> SearchResult:
    """Train every configuration of ``space`` (or ``budget`` of them, sampled).

    Runs are independent; with ``jobs > 1`` they execute in worker processes.
    Failed runs are recorded with their error and the search continues.
    """
    base = base or TrainConfig()
    combos = expand_space(space)
    if not combos:
        raise ConfigError("empty search space")
    partial = budget is not None and budget < len(combos)
    picked = list(range(len(combos)))
    if partial:
        if budget < 1:
            raise ConfigError("budget must be >= 1")
        picked = sorted(np.random.default_rng(seed).choice(len(combos), budget, replace=False).tolist())
    jobs_list = [(run, combos[i], base, dataset) for run, i in enumerate(picked)]
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_run_candidate, jobs_list))
    else:
        rows = [_run_candidate(j) for j in jobs_list]
    rows.sort(key=lambda r: r["run"])
    return SearchResult(rows, tuple(space), partial, len(combos))


def best_config(result: SearchResult, base: TrainConfig) -> TrainConfig:
    best = result.best
    if best is None:
        raise ConfigError("no successful grid-search run")
    return base.with_overrides({k: str(v) for k, v in best["params"].items()})
