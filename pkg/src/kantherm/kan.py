"""Kolmogorov-Arnold network with silu + B-spline edge activations.

Every edge carries ``theta(x) = silu(x) + sum_i c_i B_i(x)`` where the ``B_i``
are the ``G + k`` degree-``k`` B-splines on a uniform grid of ``G`` intervals
over ``[lo, hi]`` extended by ``k`` knots on each side.  The spline
coefficients are the only learnable values; silu enters with a fixed unit
weight.

Layer arrays are stored as ``knots[out, in, G + 2k + 1]`` and
``coef[out, in, G + k]``; a batch of node values is ``(N, width)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import container
from .dataset import NormalizationStats
from .errors import ConfigError, ModelFileError, ShapeError

log = logging.getLogger(__name__)

GRID_MARGIN = 0.05


def silu(x):
    return x / (1.0 + np.exp(-x))


def silu_grad(x):
    s = 1.0 / (1.0 + np.exp(-x))
    return s * (1.0 + x * (1.0 - s))


def uniform_knots(lo, hi, G: int, k: int) -> np.ndarray:
    """Knots ``lo + (j - k) h`` for ``j = 0 .. G + 2k``; broadcasts over ``lo``/``hi``."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    j = np.arange(G + 2 * k + 1) - k
    return lo + j * (hi - lo) / G


@dataclass(frozen=True)
class SplineGrid:
    k: int
    G: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.k < 1 or self.G < 1:
            raise ConfigError(f"spline needs k >= 1 and G >= 1, got k={self.k}, G={self.G}")
        if not self.lo < self.hi:
            raise ConfigError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def knots(self) -> np.ndarray:
        return uniform_knots(self.lo, self.hi, self.G, self.k)

    @property
    def n_basis(self) -> int:
        return self.G + self.k

    @classmethod
    def from_knots(cls, knots, k: int) -> "SplineGrid":
        knots = np.asarray(knots, dtype=float)
        G = len(knots) - 2 * k - 1
        return cls(k, G, float(knots[k]), float(knots[k + G]))


def _safe_inv(d):
    out = np.zeros_like(d)
    np.divide(1.0, d, out=out, where=d > 0)
    return out


def cox_de_boor(x, knots, k: int, derivative: bool = False):
    """All degree-``k`` B-spline values at ``x`` (and optionally d/dx).

    ``x`` has shape ``S`` and ``knots`` shape ``S' + (K,)`` with ``S'``
    broadcastable against ``S``; the result has shape ``S + (K - k - 1,)``.
    Intervals are half-open, so a point on a knot belongs to the span on its
    right.
    """
    t = np.asarray(knots, dtype=float)
    xe = np.asarray(x, dtype=float)[..., None]
    B = ((xe >= t[..., :-1]) & (xe < t[..., 1:])).astype(float)
    prev = B
    for d in range(1, k + 1):
        t_j, t_jd = t[..., :-(d + 1)], t[..., d:-1]
        t_j1, t_jd1 = t[..., 1:-d], t[..., d + 1:]
        prev = B
        B = ((xe - t_j) * _safe_inv(t_jd - t_j) * prev[..., :-1]
             + (t_jd1 - xe) * _safe_inv(t_jd1 - t_j1) * prev[..., 1:])
    if not derivative:
        return B
    t_j, t_jk = t[..., :-(k + 1)], t[..., k:-1]
    t_j1, t_jk1 = t[..., 1:-k], t[..., k + 1:]
    dB = k * (prev[..., :-1] * _safe_inv(t_jk - t_j) - prev[..., 1:] * _safe_inv(t_jk1 - t_j1))
    return B, dB


def bspline_basis(x, grid: SplineGrid) -> np.ndarray:
    """Values of the ``G + k`` basis functions of ``grid`` at ``x``."""
    return cox_de_boor(x, grid.knots, grid.k)


@dataclass
class KanEdge:
    coefficients: np.ndarray
    grid: SplineGrid

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.grid.n_basis,):
            raise ShapeError(f"edge needs {self.grid.n_basis} coefficients, "
                             f"got {self.coefficients.shape}")


def edge_eval(edge: KanEdge, x):
    return silu(np.asarray(x, dtype=float)) + bspline_basis(x, edge.grid) @ edge.coefficients


@dataclass
class KanLayer:
    knots: np.ndarray   # (out, in, G + 2k + 1)
    coef: np.ndarray    # (out, in, G + k)
    k: int

    @property
    def width_out(self) -> int:
        return self.coef.shape[0]

    @property
    def width_in(self) -> int:
        return self.coef.shape[1]

    @property
    def G(self) -> int:
        return self.knots.shape[-1] - 2 * self.k - 1

    def edge(self, out: int, inp: int) -> KanEdge:
        return KanEdge(self.coef[out, inp], SplineGrid.from_knots(self.knots[out, inp], self.k))

    def shared_knots(self):
        """Per-input knots if every output edge of an input shares one grid, else None."""
        if np.array_equal(self.knots, np.broadcast_to(self.knots[:1], self.knots.shape)):
            return self.knots[0]
        return None


@dataclass
class LayerCache:
    x: np.ndarray        # (N, in) layer inputs
    basis: np.ndarray    # (N, in, nb) when shared, else (N, out, in, nb)
    shared: bool
    phi: np.ndarray      # (N, out, in) edge outputs
    dbasis: np.ndarray | None = None  # d basis / dx, kept for layers fed by other layers


@dataclass
class KanNetwork:
    widths: list
    layers: list
    stats: NormalizationStats | None = None
    grid_flags: list = field(default_factory=list)
    arch = "kan"
    lookback = 1

    def __post_init__(self):
        if len(self.layers) != len(self.widths) - 1:
            raise ShapeError("need one layer per consecutive width pair")
        for l, layer in enumerate(self.layers):
            if layer.coef.shape[:2] != (self.widths[l + 1], self.widths[l]):
                raise ShapeError(f"layer {l} coefficient matrix {layer.coef.shape[:2]} does not "
                                 f"match widths {self.widths[l]} -> {self.widths[l + 1]}")

    @classmethod
    def create(cls, widths=(4, 3, 1), G: int = 5, k: int = 3, seed: int = 0, sigma: float = 0.1,
               first_range=(0.0, 1.0), deep_range=(-1.0, 2.0)) -> "KanNetwork":
        SplineGrid(k, G)  # validates k, G
        widths = [int(w) for w in widths]
        if len(widths) < 2 or min(widths) < 1:
            raise ConfigError(f"bad widths {widths}")
        rng = np.random.default_rng(seed)
        layers = []
        for l, (w_in, w_out) in enumerate(zip(widths[:-1], widths[1:])):
            lo, hi = first_range if l == 0 else deep_range
            knots = np.broadcast_to(uniform_knots(lo, hi, G, k), (w_out, w_in, G + 2 * k + 1)).copy()
            coef = rng.normal(0.0, sigma, (w_out, w_in, G + k))
            layers.append(KanLayer(knots, coef, k))
        return cls(widths, layers)

    @property
    def k(self) -> int:
        return self.layers[0].k

    @property
    def G(self) -> int:
        return self.layers[0].G

    @property
    def n_params(self) -> int:
        return param_count(self)

    def get_params(self) -> np.ndarray:
        return np.concatenate([layer.coef.ravel() for layer in self.layers])

    def set_params(self, vec) -> None:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.n_params,):
            raise ShapeError(f"expected {self.n_params} parameters, got {vec.shape}")
        pos = 0
        for layer in self.layers:
            n = layer.coef.size
            layer.coef = vec[pos:pos + n].reshape(layer.coef.shape).copy()
            pos += n

    def copy(self) -> "KanNetwork":
        return KanNetwork(list(self.widths),
                          [KanLayer(L.knots.copy(), L.coef.copy(), L.k) for L in self.layers],
                          self.stats, list(self.grid_flags))

    def predict(self, x) -> np.ndarray:
        """Normalized-space prediction of the single output for inputs (N, W1)."""
        out, _ = forward(self, x, keep_cache=False)
        return out[:, 0]

    def loss_and_grad(self, x, y, lam=0.0, nu1=0.0, nu2=0.0, memo=None):
        return loss_and_grad(self, x, y, lam, nu1, nu2, memo)

    def save(self, path) -> None:
        save(self, path)


def _local_values(f, k: int):
    """Nonzero uniform B-spline values on one knot span, lowest index first.

    Returns the degree-``k`` values and the degree-``k-1`` values (for the
    derivative) as lists of arrays shaped like ``f``.
    """
    vals = [np.ones_like(f)]
    lower = vals
    for d in range(1, k + 1):
        lower = vals
        new = []
        for m in range(d + 1):
            v = 0.0
            if m > 0:
                v = (f + (d - m)) * lower[m - 1]
            if m < d:
                v = v + ((m + 1) - f) * lower[m]
            new.append(v / d)
        vals = new
    return vals, lower


def uniform_basis(x, t0, h, G: int, k: int, derivative: bool = False):
    """Dense basis (and d/dx) on uniform knots ``t0 + j h`` via the local recursion.

    ``x`` is ``(N, I)`` and ``t0``/``h`` are per-column; equals
    :func:`cox_de_boor` on the same knots up to rounding.
    """
    n_int = G + 2 * k
    inv_h = 1.0 / h
    u = (x - t0) * inv_h
    j = np.floor(u)
    inside = (j >= 0) & (j < n_int)
    j = np.clip(j, 0, n_int - 1)
    f = u - j
    j = j.astype(np.intp)
    vals, lower = _local_values(f, k)
    width = G + 3 * k
    nb = G + k
    flat = (np.arange(x.size).reshape(x.shape) * width + j).ravel()
    B = np.zeros(x.shape + (width,))
    Bf = B.reshape(-1)
    for m in range(k + 1):
        Bf[flat + m] = (vals[m] * inside).ravel()
    B = B[..., k:k + nb]
    if not derivative:
        return B
    dB = np.zeros(x.shape + (width,))
    dBf = dB.reshape(-1)
    for m in range(k + 1):
        dv = (lower[m - 1] if m > 0 else 0.0) - (lower[m] if m < k else 0.0)
        dBf[flat + m] = (dv * inside * inv_h).ravel()
    return B, dB[..., k:k + nb]


def _uniform_spec(knots):
    """(t0, h) per input if ``knots`` (in, K) are uniform, else None."""
    t0 = knots[:, 0]
    h = knots[:, 1] - knots[:, 0]
    if np.any(h <= 0):
        return None
    expect = t0[:, None] + np.arange(knots.shape[1]) * h[:, None]
    if not np.allclose(knots, expect, rtol=0, atol=1e-12 * max(1.0, float(np.abs(knots).max()))):
        return None
    return t0, h


def _layer_basis(layer: KanLayer, x, derivative=False):
    """Basis values for a layer; shape (N, in, nb) if grids are shared per input."""
    shared = layer.shared_knots()
    if shared is not None:
        spec = _uniform_spec(shared)
        if spec is not None:
            return uniform_basis(x, spec[0], spec[1], layer.G, layer.k, derivative), True
        return cox_de_boor(x, shared, layer.k, derivative), True
    return cox_de_boor(x[:, None, :], layer.knots, layer.k, derivative), False


def _spline_sum(B, coef, shared):
    # per-edge spline values (N, out, in)
    if shared:
        return np.matmul(B.transpose(1, 0, 2), coef.transpose(1, 2, 0)).transpose(1, 2, 0)
    return np.einsum("noib,oib->noi", B, coef)


def _layer_forward(layer: KanLayer, x, keep_cache=True, memo=None, need_dx=False):
    dB = None
    if memo is not None and memo.get("x") is x and np.array_equal(memo["knots"], layer.knots):
        B, shared = memo["B"], memo["shared"]
    elif keep_cache and need_dx:
        (B, dB), shared = _layer_basis(layer, x, derivative=True)
    else:
        B, shared = _layer_basis(layer, x)
        if memo is not None:
            memo.update(x=x, knots=layer.knots.copy(), B=B, shared=shared)
    phi = silu(x)[:, None, :] + _spline_sum(B, layer.coef, shared)
    cache = LayerCache(x, B, shared, phi, dB) if keep_cache else None
    return phi.sum(axis=2), cache


def forward(net: KanNetwork, x, keep_cache: bool = True, memo: dict | None = None):
    """Propagate inputs through all layers.

    ``x`` is a single input vector of length ``W1`` or a batch ``(N, W1)``;
    the output has matching leading shape.  The cache keeps every layer's
    inputs, basis values and per-edge outputs.  ``memo`` (a dict owned by the
    caller) reuses the first layer's basis across calls on the same array.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.widths[0]:
        raise ShapeError(f"input width {x.shape[-1]} != network input width {net.widths[0]}")
    caches = []
    h = x
    for l, layer in enumerate(net.layers):
        h, c = _layer_forward(layer, h, keep_cache, memo if l == 0 else None, need_dx=l > 0)
        caches.append(c)
    return (h[0] if single else h), (caches if keep_cache else None)


def backward(net: KanNetwork, cache, d_output, d_edges=None):
    """Reverse-mode gradients of a scalar loss with respect to every coefficient.

    ``d_output`` is dLoss/d(network output) shaped like the forward output.
    ``d_edges`` optionally adds direct per-edge sensitivities dLoss/dphi
    (one ``(N, out, in)`` array per layer), used by the sparsity terms.
    Returns a list of arrays shaped like each layer's ``coef``.
    """
    g = np.asarray(d_output, dtype=float)
    if g.ndim == 1 and cache and cache[-1].x.shape[0] == 1 and g.shape[0] == net.widths[-1]:
        g = g[None, :]
    if len(cache) != len(net.layers):
        raise ShapeError("cache does not match network depth")
    grads = [None] * len(net.layers)
    for l in range(len(net.layers) - 1, -1, -1):
        layer, c = net.layers[l], cache[l]
        if c.phi.shape[1:] != layer.coef.shape[:2] or g.shape != (c.x.shape[0], layer.width_out):
            raise ShapeError(f"stale cache for layer {l}")
        g_phi = np.broadcast_to(g[:, :, None], c.phi.shape)
        if d_edges is not None and d_edges[l] is not None:
            g_phi = g_phi + d_edges[l]
        if c.shared:
            grads[l] = np.matmul(g_phi.transpose(2, 1, 0), c.basis.transpose(1, 0, 2)).transpose(1, 0, 2)
        else:
            grads[l] = np.einsum("noi,noib->oib", g_phi, c.basis)
        if l > 0:
            if c.dbasis is not None:
                dspline = _spline_sum(c.dbasis, layer.coef, c.shared)
            else:
                (_, dB), shared = _layer_basis(layer, c.x, derivative=True)
                dspline = _spline_sum(dB, layer.coef, shared)
            dphi_dx = silu_grad(c.x)[:, None, :] + dspline
            g = np.einsum("noi,noi->ni", g_phi, dphi_dx)
    return grads


def _phi(obj):
    return obj.phi if isinstance(obj, LayerCache) else np.asarray(obj, dtype=float)


def edge_l1(cache_or_phi) -> np.ndarray:
    """Per-edge mean absolute output over the batch, shape (out, in)."""
    phi = _phi(cache_or_phi)
    if phi.size == 0 or phi.shape[0] == 0:
        raise ShapeError("empty batch")
    return np.abs(phi).mean(axis=0)


def layer_l1(cache_or_phi) -> float:
    """Sum over edges of the batch-mean absolute edge output."""
    return float(edge_l1(cache_or_phi).sum())


def _entropy_from_l1(a):
    total = a.sum()
    if total <= 0:
        return 0.0, np.zeros_like(a)
    p = a / total
    logp = np.log(p, out=np.zeros_like(p), where=p > 0)
    S = float(-(p * logp).sum())
    return S, logp


def layer_entropy(cache_or_phi) -> float:
    """Self-entropy of the layer's normalized edge L1 distribution (0 for an all-zero layer)."""
    return _entropy_from_l1(edge_l1(cache_or_phi))[0]


def regularization(cache, nu1: float, nu2: float):
    """Value of nu1 * sum|Theta|_1 + nu2 * sum S(Theta) and its dphi per layer."""
    value = 0.0
    d_edges = []
    for c in cache:
        a = edge_l1(c)
        S, logp = _entropy_from_l1(a)
        A = a.sum()
        value += nu1 * A + nu2 * S
        da = np.full_like(a, nu1)
        if A > 0:
            da = da + nu2 * (-logp - S) / A
        n = c.phi.shape[0]
        d_edges.append(da[None, :, :] * np.sign(c.phi) / n)
    return value, d_edges


def total_loss(pred, target, net, cache, lam: float, nu1: float, nu2: float) -> float:
    """MSE plus lam * (nu1 * sum of layer L1 + nu2 * sum of layer entropies)."""
    pred = np.asarray(pred, dtype=float).reshape(-1)
    target = np.asarray(target, dtype=float).reshape(-1)
    if pred.shape != target.shape:
        raise ShapeError(f"pred {pred.shape} vs target {target.shape}")
    mse = float(np.mean((pred - target) ** 2))
    if lam == 0:
        return mse
    reg, _ = regularization(cache, nu1, nu2)
    return mse + lam * reg


def loss_and_grad(net: KanNetwork, x, y, lam=0.0, nu1=0.0, nu2=0.0, memo=None):
    """Total loss on a batch and its gradient as a flat vector."""
    out, cache = forward(net, x, memo=memo)
    y = np.asarray(y, dtype=float).reshape(-1)
    pred = out[:, 0]
    if pred.shape != y.shape:
        raise ShapeError(f"pred {pred.shape} vs target {y.shape}")
    r = pred - y
    loss = float(np.mean(r * r))
    d_out = (2.0 / len(y)) * r[:, None]
    d_edges = None
    if lam != 0:
        reg, d_edges = regularization(cache, nu1, nu2)
        loss += lam * reg
        d_edges = [lam * d for d in d_edges]
    grads = backward(net, cache, d_out, d_edges)
    return loss, np.concatenate([g.ravel() for g in grads])


@dataclass(frozen=True)
class _PolyLayer:
    scale: np.ndarray    # (in, 1) reciprocal knot spacing
    shift: np.ndarray    # (in, 1) maps x to interval coordinate + 1
    tables: tuple        # k+1 arrays (out, in * (n_int + 2)), highest power last
    top: float
    offsets: np.ndarray  # (in, 1) row offset of each input's table block


@dataclass(frozen=True)
class CompiledKan:
    """Inference-only KAN with every spline stored as per-interval polynomials.

    Each knot interval of each edge holds the power-basis coefficients of the
    spline restricted to it; outside the knot span a zero row is selected.
    Evaluation is one table lookup plus Horner's rule, feature-major, and
    matches :func:`forward` to rounding.  Parameters are not editable.
    """

    layers: tuple
    n_params: int
    stats: NormalizationStats | None = None
    arch = "kan"
    lookback = 1

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.layers[0].scale.shape[0]:
            raise ShapeError(f"expected (N, {self.layers[0].scale.shape[0]}) input, got {x.shape}")
        h = np.ascontiguousarray(x.T)
        for layer in self.layers:
            g = h * layer.scale
            g += layer.shift
            np.clip(g, 0.0, layer.top, out=g)
            j = g.astype(np.intp)
            g -= j
            j += layer.offsets
            acc = layer.tables[-1].take(j, axis=1)
            for table in layer.tables[-2::-1]:
                acc *= g
                acc += table.take(j, axis=1)
            s = np.exp(-h)
            s += 1.0
            np.divide(h, s, out=s)
            out = acc.sum(axis=1)
            out += s.sum(axis=0)
            h = out
        return h[0]


def compile_inference(net: KanNetwork) -> CompiledKan:
    """Convert a network with shared uniform grids to :class:`CompiledKan`."""
    layers = []
    for l, layer in enumerate(net.layers):
        shared = layer.shared_knots()
        spec = _uniform_spec(shared) if shared is not None else None
        if spec is None:
            raise ConfigError(f"layer {l}: compiled inference needs shared uniform grids")
        t0, h = spec
        k, G, I, O = layer.k, layer.G, layer.width_in, layer.width_out
        n_int = G + 2 * k
        # k+1 interior samples per interval determine the local polynomial exactly
        us = (np.arange(k + 1) + 0.5) / (k + 1)
        pos = (np.arange(n_int)[:, None] + us[None, :]).reshape(-1)
        B = uniform_basis(t0 + pos[:, None] * h, t0, h, G, k)
        vals = np.einsum("mib,oib->mio", B, layer.coef).reshape(n_int, k + 1, I * O)
        poly = np.linalg.solve(np.vander(us, k + 1, increasing=True), vals)
        poly = poly.reshape(n_int, k + 1, I, O)
        full = np.zeros((k + 1, O, I, n_int + 2))
        full[:, :, :, 1:-1] = poly.transpose(1, 3, 2, 0)
        tables = tuple(np.ascontiguousarray(full[p].reshape(O, -1)) for p in range(k + 1))
        inv_h = 1.0 / h
        layers.append(_PolyLayer(inv_h[:, None], (1.0 - t0 * inv_h)[:, None], tables,
                                 float(n_int + 1), (np.arange(I) * (n_int + 2))[:, None]))
    return CompiledKan(tuple(layers), net.n_params, net.stats)


def grid_update(net: KanNetwork, samples, margin: float = GRID_MARGIN) -> KanNetwork:
    """Refit each edge's grid to the observed range of its inputs.

    Layers are processed in order; a layer's inputs are computed with the
    already-updated preceding layers.  New coefficients are the least-squares
    fit of the old spline part on the samples.  Inputs with a degenerate
    sample range keep their grid and are recorded in ``net.grid_flags``.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ShapeError("grid_update needs a non-empty (N, W1) sample batch")
    if x.shape[1] != net.widths[0]:
        raise ShapeError(f"sample width {x.shape[1]} != {net.widths[0]}")
    net.grid_flags = []
    for l, layer in enumerate(net.layers):
        k, G = layer.k, layer.G
        B_old, shared = _layer_basis(layer, x)
        old = _spline_sum(B_old, layer.coef, shared)
        new_knots = layer.knots.copy()
        new_coef = layer.coef.copy()
        for i in range(layer.width_in):
            lo, hi = float(x[:, i].min()), float(x[:, i].max())
            span = hi - lo
            if not np.isfinite(span) or span <= 1e-12 * max(1.0, abs(lo), abs(hi)):
                net.grid_flags.append((l, i))
                log.info("grid update: layer %d input %d has degenerate range, grid kept", l, i)
                continue
            knots = uniform_knots(lo - margin * span, hi + margin * span, G, k)
            A = uniform_basis(x[:, i:i + 1], knots[:1], knots[1:2] - knots[:1], G, k)[:, 0, :]
            sol, *_ = np.linalg.lstsq(A, old[:, :, i], rcond=None)
            new_knots[:, i, :] = knots
            new_coef[:, i, :] = sol.T
        layer.knots, layer.coef = new_knots, new_coef
        x, _ = _layer_forward(layer, x, keep_cache=False)
    return net


def param_count(net: KanNetwork) -> int:
    return int(sum(W_in * W_out * (layer.G + layer.k) for layer, W_in, W_out in
                   zip(net.layers, net.widths[:-1], net.widths[1:])))


def save(net: KanNetwork, path) -> None:
    layers = []
    for layer in net.layers:
        layers.append({"edges": [[{"knots": layer.knots[o, i].tolist(),
                                   "coefficients": layer.coef[o, i].tolist()}
                                  for i in range(layer.width_in)]
                                 for o in range(layer.width_out)]})
    container.write(path, "kan", {"widths": list(net.widths), "k": net.k, "G": net.G,
                                  "layers": layers}, net.stats)


def load(path) -> KanNetwork:
    payload, stats = container.read(path, "kan")
    widths = container.field(payload, "widths", list)
    k = container.field(payload, "k", int)
    G = container.field(payload, "G", int)
    layers_in = container.field(payload, "layers", list)
    if len(layers_in) != len(widths) - 1:
        raise ModelFileError(f"{len(layers_in)} layers for widths {widths}", field="layers")
    layers = []
    for l, (entry, w_in, w_out) in enumerate(zip(layers_in, widths[:-1], widths[1:])):
        edges = container.field(entry, "edges", list, f"layers[{l}]")
        if len(edges) != w_out or any(len(row) != w_in for row in edges):
            raise ModelFileError(f"expected {w_out}x{w_in} edges", field=f"layers[{l}].edges")
        knots = np.empty((w_out, w_in, G + 2 * k + 1))
        coef = np.empty((w_out, w_in, G + k))
        for o in range(w_out):
            for i in range(w_in):
                name = f"layers[{l}].edges[{o}][{i}]"
                kn = np.asarray(container.field(edges[o][i], "knots", list, name), dtype=float)
                cf = np.asarray(container.field(edges[o][i], "coefficients", list, name), dtype=float)
                if kn.shape != (G + 2 * k + 1,):
                    raise ModelFileError(f"expected {G + 2 * k + 1} knots, got {kn.size}",
                                         field=f"{name}.knots")
                if cf.shape != (G + k,):
                    raise ModelFileError(f"expected {G + k} coefficients, got {cf.size}",
                                         field=f"{name}.coefficients")
                knots[o, i], coef[o, i] = kn, cf
        layers.append(KanLayer(knots, coef, k))
    return KanNetwork(widths, layers, stats)
