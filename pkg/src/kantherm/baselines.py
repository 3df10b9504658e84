"""MLP, RNN and LSTM baselines in plain numpy with exact backward passes.

Shapes: dense weights are ``(in, out)``, biases ``(out,)``.  Recurrent models
take windows ``(N, L, 4)`` and predict T1 at the last step of each window.
LSTM gate blocks are ordered (input, forget, candidate, output) along the
``4H`` axis of ``W_ih (4, 4H)``, ``W_hh (H, 4H)`` and ``b (4H,)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import container
from .dataset import NormalizationStats
from .errors import ConfigError, ModelFileError, ShapeError

log = logging.getLogger(__name__)

MLP_WIDTHS = (4, 10, 10, 1)
RNN_WIDTHS = (4, 15, 25, 5, 1)
LSTM_WIDTHS = (4, 4, 8, 2, 1)
RNN_LOOKBACK = 20
# Input weights of the tanh RNN need roughly unit-variance fan-in; at 0.1 the hidden
# state barely varies across samples and the narrow ReLU head dies early in training.
RNN_INPUT_SIGMA = 0.5
LSTM_LOOKBACK = 50
REFERENCE_LSTM_COUNT = 288


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def window(features, targets, scenario, L: int):
    """Sliding windows of ``L`` rows that never cross a scenario boundary.

    Returns ``(windows (M, L, F), targets (M,), last_row (M,), skipped)``
    where ``last_row`` indexes the row each window predicts and ``skipped``
    counts scenarios shorter than ``L``.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    scenario = np.asarray(scenario)
    if L < 1:
        raise ConfigError("lookback must be >= 1")
    wins, tg, last = [], [], []
    skipped = 0
    # rows of one scenario are contiguous in a Dataset; split on changes
    bounds = np.flatnonzero(np.diff(scenario)) + 1
    for rows in np.split(np.arange(len(scenario)), bounds):
        if len(rows) == 0:
            continue
        if len(rows) < L:
            skipped += 1
            continue
        f = features[rows[0]:rows[-1] + 1]
        wins.append(sliding_window_view(f, (L, f.shape[1]))[:, 0])
        tg.append(targets[rows[L - 1:]])
        last.append(rows[L - 1:])
    if skipped:
        log.warning("window: %d scenario(s) shorter than lookback %d skipped", skipped, L)
    if not wins:
        return (np.zeros((0, L, features.shape[1])), np.zeros(0), np.zeros(0, dtype=int), skipped)
    return np.concatenate(wins), np.concatenate(tg), np.concatenate(last), skipped


# --- dense stack ------------------------------------------------------------

def _dense_forward(Ws, bs, x):
    acts = [x]
    h = x
    for l, (W, b) in enumerate(zip(Ws, bs)):
        z = h @ W + b
        h = np.maximum(z, 0.0) if l < len(Ws) - 1 else z
        acts.append(h)
    return h, acts


def _dense_backward(Ws, acts, g):
    gW, gb = [None] * len(Ws), [None] * len(Ws)
    for l in range(len(Ws) - 1, -1, -1):
        if l < len(Ws) - 1:
            g = g * (acts[l + 1] > 0)
        gW[l] = acts[l].T @ g
        gb[l] = g.sum(axis=0)
        g = g @ Ws[l].T
    return gW, gb, g


def _dense_init(widths, rng, scale=None):
    Ws, bs = [], []
    for a, b in zip(widths[:-1], widths[1:]):
        sd = np.sqrt(2.0 / a) if scale is None else scale
        Ws.append(rng.normal(0.0, sd, (a, b)))
        bs.append(np.zeros(b))
    return Ws, bs


def _orthogonal(n, rng):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


class _ArrayModel:
    """Flat-parameter plumbing over an ordered dict of named arrays."""

    arch = ""
    lookback = 1
    stats: NormalizationStats | None = None

    def named(self) -> dict:
        raise NotImplementedError

    def _assign(self, name, value):
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return int(sum(a.size for a in self.named().values()))

    def get_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.named().values()])

    def set_params(self, vec) -> None:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.n_params,):
            raise ShapeError(f"expected {self.n_params} parameters, got {vec.shape}")
        pos = 0
        for name, a in self.named().items():
            self._assign(name, vec[pos:pos + a.size].reshape(a.shape).copy())
            pos += a.size

    def loss_and_grad(self, x, y, lam=0.0, nu1=0.0, nu2=0.0, memo=None):
        y = np.asarray(y, dtype=float).reshape(-1)
        out, cache = self.forward(x)
        r = out[:, 0] - y
        grads = self.backward(cache, (2.0 / len(y)) * r[:, None])
        return float(np.mean(r * r)), np.concatenate([grads[n].ravel() for n in self.named()])

    def predict(self, x) -> np.ndarray:
        return self.forward(x)[0][:, 0]

    def save(self, path) -> None:
        payload = {"widths": list(self.widths), "lookback": self.lookback,
                   **self._extra_payload(),
                   "arrays": {n: a.tolist() for n, a in self.named().items()}}
        container.write(path, self.arch, payload, self.stats)

    def _extra_payload(self):
        return {}


@dataclass(eq=False)
class MlpNetwork(_ArrayModel):
    Ws: list
    bs: list
    stats: NormalizationStats | None = None
    arch = "mlp"

    @classmethod
    def create(cls, widths=MLP_WIDTHS, seed=0):
        Ws, bs = _dense_init(widths, np.random.default_rng(seed))
        return cls(Ws, bs)

    @property
    def widths(self):
        return [self.Ws[0].shape[0]] + [W.shape[1] for W in self.Ws]

    def named(self):
        d = {}
        for l, (W, b) in enumerate(zip(self.Ws, self.bs)):
            d[f"W{l}"], d[f"b{l}"] = W, b
        return d

    def _assign(self, name, value):
        (self.Ws if name[0] == "W" else self.bs)[int(name[1:])] = value

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.Ws[0].shape[0]:
            raise ShapeError(f"MLP expects (N, {self.Ws[0].shape[0]}) input, got {x.shape}")
        out, acts = _dense_forward(self.Ws, self.bs, x)
        return out, acts

    def backward(self, acts, d_out):
        gW, gb, _ = _dense_backward(self.Ws, acts, np.asarray(d_out, dtype=float))
        g = {}
        for l in range(len(self.Ws)):
            g[f"W{l}"], g[f"b{l}"] = gW[l], gb[l]
        return g

    def copy(self):
        return MlpNetwork([W.copy() for W in self.Ws], [b.copy() for b in self.bs], self.stats)


def _check_window(x, n_in, L, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[2] != n_in or (L is not None and x.shape[1] != L):
        raise ShapeError(f"{name} expects (N, {L}, {n_in}) windows, got {x.shape}")
    return x


@dataclass(eq=False)
class RnnNetwork(_ArrayModel):
    W_ih: np.ndarray
    W_hh: np.ndarray
    b: np.ndarray
    Ws: list
    bs: list
    lookback: int = RNN_LOOKBACK
    stats: NormalizationStats | None = None
    strict_window: bool = True
    arch = "rnn"

    @classmethod
    def create(cls, widths=RNN_WIDTHS, lookback=RNN_LOOKBACK, seed=0, sigma=RNN_INPUT_SIGMA):
        rng = np.random.default_rng(seed)
        n_in, H = widths[0], widths[1]
        W_ih = rng.normal(0.0, sigma, (n_in, H))
        W_hh = _orthogonal(H, rng)
        Ws, bs = _dense_init(widths[1:], rng)
        return cls(W_ih, W_hh, np.zeros(H), Ws, bs, lookback)

    @property
    def widths(self):
        return [self.W_ih.shape[0], self.W_ih.shape[1]] + [W.shape[1] for W in self.Ws]

    def named(self):
        d = {"W_ih": self.W_ih, "W_hh": self.W_hh, "b": self.b}
        for l, (W, b) in enumerate(zip(self.Ws, self.bs)):
            d[f"head_W{l}"], d[f"head_b{l}"] = W, b
        return d

    def _assign(self, name, value):
        if name.startswith("head_"):
            (self.Ws if name[5] == "W" else self.bs)[int(name[6:])] = value
        else:
            setattr(self, name, value)

    def forward(self, x):
        x = _check_window(x, self.W_ih.shape[0], self.lookback if self.strict_window else None, "RNN")
        N, L, _ = x.shape
        h = np.zeros((N, self.W_hh.shape[0]))
        hs = [h]
        xin = x @ self.W_ih + self.b
        for t in range(L):
            h = np.tanh(xin[:, t] + h @ self.W_hh)
            hs.append(h)
        out, acts = _dense_forward(self.Ws, self.bs, h)
        return out, (x, hs, acts)

    def backward(self, cache, d_out):
        x, hs, acts = cache
        gW, gb, gh = _dense_backward(self.Ws, acts, np.asarray(d_out, dtype=float))
        g_ih = np.zeros_like(self.W_ih)
        g_hh = np.zeros_like(self.W_hh)
        g_b = np.zeros_like(self.b)
        for t in range(x.shape[1] - 1, -1, -1):
            gz = gh * (1.0 - hs[t + 1] ** 2)
            g_ih += x[:, t].T @ gz
            g_hh += hs[t].T @ gz
            g_b += gz.sum(axis=0)
            gh = gz @ self.W_hh.T
        g = {"W_ih": g_ih, "W_hh": g_hh, "b": g_b}
        for l in range(len(self.Ws)):
            g[f"head_W{l}"], g[f"head_b{l}"] = gW[l], gb[l]
        return g

    def copy(self):
        return RnnNetwork(self.W_ih.copy(), self.W_hh.copy(), self.b.copy(),
                          [W.copy() for W in self.Ws], [b.copy() for b in self.bs],
                          self.lookback, self.stats, self.strict_window)


@dataclass(eq=False)
class LstmNetwork(_ArrayModel):
    W_ih: np.ndarray
    W_hh: np.ndarray
    b: np.ndarray
    Ws: list
    bs: list
    lookback: int = LSTM_LOOKBACK
    stats: NormalizationStats | None = None
    b_hh: np.ndarray | None = None   # second bias vector for the double-bias convention
    strict_window: bool = True
    arch = "lstm"

    @classmethod
    def create(cls, widths=LSTM_WIDTHS, lookback=LSTM_LOOKBACK, seed=0, sigma=0.1,
               double_bias=False):
        rng = np.random.default_rng(seed)
        n_in, H = widths[0], widths[1]
        W_ih = rng.normal(0.0, sigma, (n_in, 4 * H))
        W_hh = np.concatenate([_orthogonal(H, rng) for _ in range(4)], axis=1)
        Ws, bs = _dense_init(widths[1:], rng)
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0  # forget-gate bias starts open
        return cls(W_ih, W_hh, b, Ws, bs, lookback,
                   b_hh=np.zeros(4 * H) if double_bias else None)

    @property
    def H(self):
        return self.W_hh.shape[0]

    @property
    def widths(self):
        return [self.W_ih.shape[0], self.H] + [W.shape[1] for W in self.Ws]

    @property
    def bias_convention(self):
        return "double" if self.b_hh is not None else "single"

    def named(self):
        d = {"W_ih": self.W_ih, "W_hh": self.W_hh, "b": self.b}
        if self.b_hh is not None:
            d["b_hh"] = self.b_hh
        for l, (W, b) in enumerate(zip(self.Ws, self.bs)):
            d[f"head_W{l}"], d[f"head_b{l}"] = W, b
        return d

    _assign = RnnNetwork._assign

    def _extra_payload(self):
        return {"bias_convention": self.bias_convention}

    def forward(self, x):
        x = _check_window(x, self.W_ih.shape[0], self.lookback if self.strict_window else None, "LSTM")
        N, L, _ = x.shape
        H = self.H
        bias = self.b if self.b_hh is None else self.b + self.b_hh
        xin = x @ self.W_ih + bias
        h = np.zeros((N, H))
        c = np.zeros((N, H))
        steps = []
        for t in range(L):
            z = xin[:, t] + h @ self.W_hh
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H:2 * H])
            g = np.tanh(z[:, 2 * H:3 * H])
            o = _sigmoid(z[:, 3 * H:])
            c_prev, h_prev = c, h
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            steps.append((h_prev, c_prev, i, f, g, o, tc))
        out, acts = _dense_forward(self.Ws, self.bs, h)
        return out, (x, steps, acts)

    def backward(self, cache, d_out):
        x, steps, acts = cache
        H = self.H
        gW, gb, gh = _dense_backward(self.Ws, acts, np.asarray(d_out, dtype=float))
        gc = np.zeros_like(gh)
        g_ih = np.zeros_like(self.W_ih)
        g_hh = np.zeros_like(self.W_hh)
        g_b = np.zeros_like(self.b)
        gz = np.empty((gh.shape[0], 4 * H))
        for t in range(x.shape[1] - 1, -1, -1):
            h_prev, c_prev, i, f, g, o, tc = steps[t]
            go = gh * tc
            gc = gc + gh * o * (1.0 - tc * tc)
            gz[:, :H] = gc * g * i * (1.0 - i)
            gz[:, H:2 * H] = gc * c_prev * f * (1.0 - f)
            gz[:, 2 * H:3 * H] = gc * i * (1.0 - g * g)
            gz[:, 3 * H:] = go * o * (1.0 - o)
            g_ih += x[:, t].T @ gz
            g_hh += h_prev.T @ gz
            g_b += gz.sum(axis=0)
            gh = gz @ self.W_hh.T
            gc = gc * f
        grads = {"W_ih": g_ih, "W_hh": g_hh, "b": g_b}
        if self.b_hh is not None:
            grads["b_hh"] = g_b.copy()
        for l in range(len(self.Ws)):
            grads[f"head_W{l}"], grads[f"head_b{l}"] = gW[l], gb[l]
        return grads

    def copy(self):
        return LstmNetwork(self.W_ih.copy(), self.W_hh.copy(), self.b.copy(),
                           [W.copy() for W in self.Ws], [b.copy() for b in self.bs],
                           self.lookback, self.stats,
                           None if self.b_hh is None else self.b_hh.copy(), self.strict_window)


# --- counting -----------------------------------------------------------------

def mlp_param_count(widths=MLP_WIDTHS) -> int:
    return int(sum(a * b + b for a, b in zip(widths[:-1], widths[1:])))


def rnn_param_count(widths=RNN_WIDTHS) -> int:
    n_in, H = widths[0], widths[1]
    return n_in * H + H * H + H + mlp_param_count(widths[1:])


def lstm_param_count(widths=LSTM_WIDTHS, double_bias=False) -> int:
    n_in, H = widths[0], widths[1]
    return 4 * (n_in * H + H * H + H * (2 if double_bias else 1)) + mlp_param_count(widths[1:])


LSTM_COUNT_NOTE = (
    f"LSTM [[4,4,8,2,1]] has {lstm_param_count()} learnables with one bias per gate "
    f"({lstm_param_count(double_bias=True)} with separate input/recurrent biases); the "
    f"reference count of {REFERENCE_LSTM_COUNT} is not reproduced by either enumeration.")


# --- persistence ----------------------------------------------------------------

def _arrays(payload, names):
    arrays = container.field(payload, "arrays", dict)
    out = {}
    for n in names:
        if n not in arrays:
            raise ModelFileError("missing", field=f"model.arrays.{n}")
        try:
            out[n] = np.asarray(arrays[n], dtype=float)
        except (TypeError, ValueError):
            raise ModelFileError("not a numeric array", field=f"model.arrays.{n}") from None
    return out


def _head(arr, widths_from, prefix=""):
    Ws, bs = [], []
    for l, (a, b) in enumerate(zip(widths_from[:-1], widths_from[1:])):
        W, bb = arr[f"{prefix}W{l}"], arr[f"{prefix}b{l}"]
        if W.shape != (a, b) or bb.shape != (b,):
            raise ModelFileError(f"expected shapes {(a, b)} and {(b,)}",
                                 field=f"model.arrays.{prefix}W{l}")
        Ws.append(W)
        bs.append(bb)
    return Ws, bs


def load(path):
    """Load any baseline container; the architecture tag selects the class."""
    arch, payload, stats = container.read_any(path)
    widths = [int(w) for w in container.field(payload, "widths", list)]
    lookback = container.field(payload, "lookback", int)
    n = len(widths) - 1
    if arch == "mlp":
        names = [f"{p}{l}" for l in range(n) for p in ("W", "b")]
        arr = _arrays(payload, names)
        Ws, bs = _head(arr, widths)
        return MlpNetwork(Ws, bs, stats)
    if arch in ("rnn", "lstm"):
        double = arch == "lstm" and payload.get("bias_convention") == "double"
        names = ["W_ih", "W_hh", "b"] + (["b_hh"] if double else []) + \
                [f"head_{p}{l}" for l in range(n - 1) for p in ("W", "b")]
        arr = _arrays(payload, names)
        Ws, bs = _head(arr, widths[1:], "head_")
        g = 4 if arch == "lstm" else 1
        H = widths[1]
        for name, shape in (("W_ih", (widths[0], g * H)), ("W_hh", (H, g * H)), ("b", (g * H,))):
            if arr[name].shape != shape:
                raise ModelFileError(f"expected shape {shape}, got {arr[name].shape}",
                                     field=f"model.arrays.{name}")
        if arch == "rnn":
            return RnnNetwork(arr["W_ih"], arr["W_hh"], arr["b"], Ws, bs, lookback, stats)
        return LstmNetwork(arr["W_ih"], arr["W_hh"], arr["b"], Ws, bs, lookback, stats,
                           arr.get("b_hh"))
    raise ModelFileError(f"{arch} is not a baseline architecture", field="arch")


MODEL_CLASSES = {"mlp": MlpNetwork, "rnn": RnnNetwork, "lstm": LstmNetwork}
