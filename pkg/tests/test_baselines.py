import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kantherm import baselines
from kantherm.baselines import (
    LstmNetwork, MlpNetwork, RnnNetwork, lstm_param_count, mlp_param_count, rnn_param_count,
    window,
)
from kantherm.dataset import NormalizationStats
from kantherm.errors import ConfigError, ModelFileError, ShapeError


def fd_error(model, x, y, eps=1e-6):
    """Relative error between the analytic gradient and central differences."""
    _, g = model.loss_and_grad(x, y)
    p = model.get_params()
    fd = np.empty_like(p)
    for j in range(len(p)):
        q = p.copy()
        q[j] += eps
        model.set_params(q)
        fp, _ = model.loss_and_grad(x, y)
        q[j] -= 2 * eps
        model.set_params(q)
        fm, _ = model.loss_and_grad(x, y)
        fd[j] = (fp - fm) / (2 * eps)
    model.set_params(p)
    return np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)


def zeroed(model):
    model.set_params(np.zeros(model.n_params))
    return model


# --- windowing ---------------------------------------------------------------------

def _rows(n, scen=0):
    return np.arange(n * 4, dtype=float).reshape(n, 4), np.arange(n, dtype=float), np.full(n, scen)


def test_window_exact_length_single():
    X, y, s = _rows(20)
    W, t, last, skipped = window(X, y, s, 20)
    assert W.shape == (1, 20, 4) and skipped == 0
    assert t[0] == 19 and last[0] == 19


def test_window_count_single_scenario():
    X, y, s = _rows(100)
    W, t, last, _ = window(X, y, s, 20)
    assert len(W) == 81
    np.testing.assert_array_equal(W[5], X[5:25])
    np.testing.assert_array_equal(t, y[19:])


def test_window_two_scenarios_never_cross():
    X = np.vstack([_rows(100)[0], _rows(100)[0] + 1000])
    y = np.arange(200, dtype=float)
    s = np.repeat([0, 1], 100)
    W, t, last, _ = window(X, y, s, 50)
    assert len(W) == 102
    first_row = last - 49
    assert np.all(s[first_row] == s[last])


def test_window_short_scenario_skipped_with_count():
    X = np.zeros((30, 4))
    s = np.repeat([0, 1], [10, 20])
    W, t, last, skipped = window(X, np.zeros(30), s, 15)
    assert skipped == 1 and len(W) == 6


def test_window_all_short_gives_empty():
    W, t, last, skipped = window(np.zeros((5, 4)), np.zeros(5), np.zeros(5), 10)
    assert W.shape == (0, 10, 4) and skipped == 1


def test_window_bad_lookback():
    with pytest.raises(ConfigError):
        window(np.zeros((5, 4)), np.zeros(5), np.zeros(5), 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=5), st.integers(1, 25))
def test_window_count_is_sum_over_scenarios(lengths, L):
    s = np.repeat(np.arange(len(lengths)), lengths)
    X = np.random.default_rng(0).random((len(s), 4))
    W, t, last, skipped = window(X, np.zeros(len(s)), s, L)
    assert len(W) == sum(n - L + 1 for n in lengths if n >= L)
    assert skipped == sum(n < L for n in lengths)
    if len(W):
        assert np.all(s[last - L + 1] == s[last])


# --- counts and construction ----------------------------------------------------------

def test_param_counts():
    assert mlp_param_count() == 171 == MlpNetwork.create().n_params
    assert rnn_param_count() == 836 == RnnNetwork.create().n_params
    assert lstm_param_count() == 205 == LstmNetwork.create().n_params
    assert lstm_param_count(double_bias=True) == 221 == LstmNetwork.create(double_bias=True).n_params


def test_lstm_count_note_mentions_all_counts():
    note = baselines.LSTM_COUNT_NOTE
    assert "205" in note and "221" in note and "288" in note


@pytest.mark.parametrize("widths", [(4, 2, 1), (4, 10, 10, 1), (3, 5, 6, 2)])
def test_mlp_count_is_enumeration(widths):
    m = MlpNetwork.create(widths)
    assert m.n_params == sum(a.size for a in m.named().values()) == mlp_param_count(widths)


def test_recurrent_widths_and_lookback():
    r, l = RnnNetwork.create(), LstmNetwork.create()
    assert r.widths == [4, 15, 25, 5, 1] and r.lookback == 20 and r.W_hh.shape == (15, 15)
    assert l.widths == [4, 4, 8, 2, 1] and l.lookback == 50
    assert l.W_ih.shape == (4, 16) and l.W_hh.shape == (4, 16) and l.b.shape == (16,)


def test_recurrent_weights_orthogonal_and_forget_bias():
    r = RnnNetwork.create(seed=3)
    np.testing.assert_allclose(r.W_hh @ r.W_hh.T, np.eye(15), atol=1e-12)
    l = LstmNetwork.create(seed=3)
    np.testing.assert_allclose(l.b[4:8], 1.0)
    np.testing.assert_allclose(l.b[:4], 0.0)


def test_create_is_seeded():
    a, b = RnnNetwork.create(seed=5), RnnNetwork.create(seed=5)
    np.testing.assert_array_equal(a.get_params(), b.get_params())
    assert not np.array_equal(a.get_params(), RnnNetwork.create(seed=6).get_params())


# --- forward ---------------------------------------------------------------------------

@pytest.mark.parametrize("model, shape", [
    (MlpNetwork.create(), (7, 4)),
    (RnnNetwork.create(), (7, 20, 4)),
    (LstmNetwork.create(), (7, 50, 4)),
])
def test_zero_weights_output_zero(model, shape, rng):
    zeroed(model)
    np.testing.assert_array_equal(model.predict(rng.normal(size=shape)), 0.0)


def test_mlp_hand_value():
    m = MlpNetwork([np.array([[1.0], [-1.0]]), np.array([[2.0]])], [np.array([0.5]), np.array([0.1])])
    # relu(1 - 3 + 0.5) = 0 ; relu(3 - 1 + 0.5) = 2.5 -> 5.1
    np.testing.assert_allclose(m.predict(np.array([[1.0, 3.0], [3.0, 1.0]])), [0.1, 5.1])


def test_rnn_hand_value():
    r = RnnNetwork(np.array([[1.0]]), np.array([[0.5]]), np.zeros(1),
                   [np.array([[1.0]])], [np.zeros(1)], lookback=2)
    h1 = np.tanh(0.3)
    h2 = np.tanh(0.2 + 0.5 * h1)
    np.testing.assert_allclose(r.predict(np.array([[[0.3], [0.2]]])), [h2], rtol=1e-15)


def test_lstm_hand_value():
    H = 1
    W_ih = np.array([[1.0, 2.0, 3.0, 4.0]])
    l = LstmNetwork(W_ih, np.zeros((1, 4)), np.zeros(4), [np.array([[1.0]])], [np.zeros(1)], lookback=1)
    x = 0.5
    sig = lambda z: 1 / (1 + np.exp(-z))
    c = sig(0.5) * np.tanh(1.5)
    h = sig(2.0) * np.tanh(c)
    np.testing.assert_allclose(l.predict(np.array([[[x]]])), [h], rtol=1e-14)
    assert l.H == H


@pytest.mark.parametrize("model, bad", [
    (MlpNetwork.create(), np.zeros((3, 5))),
    (RnnNetwork.create(), np.zeros((3, 19, 4))),
    (RnnNetwork.create(), np.zeros((3, 20, 3))),
    (LstmNetwork.create(), np.zeros((3, 20, 4))),
])
def test_shape_mismatch(model, bad):
    with pytest.raises(ShapeError):
        model.predict(bad)


def test_set_params_length_checked():
    with pytest.raises(ShapeError):
        MlpNetwork.create().set_params(np.zeros(170))


def test_params_round_trip(rng):
    for m in (MlpNetwork.create(), RnnNetwork.create(), LstmNetwork.create(double_bias=True)):
        p = rng.normal(size=m.n_params)
        m.set_params(p)
        np.testing.assert_array_equal(m.get_params(), p)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 10.0), st.integers(0, 10_000))
def test_relu_positive_homogeneity(alpha, seed):
    r = np.random.default_rng(seed)
    m = MlpNetwork.create((4, 6, 5, 1), seed=seed)
    for b in m.bs:
        b[:] = 0.0
    x = r.normal(size=(8, 4))
    base = m.predict(x)
    m.Ws[0] = m.Ws[0] * alpha
    np.testing.assert_allclose(m.predict(x), alpha * base, rtol=1e-12, atol=1e-12)


# --- gradients -----------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_mlp_gradient_finite_difference(seed):
    r = np.random.default_rng(seed)
    m = MlpNetwork.create(seed=seed)
    for b in m.bs:
        b += r.normal(0, 0.1, b.shape)
    assert fd_error(m, r.normal(size=(20, 4)), r.normal(size=20)) < 1e-5


@pytest.mark.parametrize("seed", range(10))
def test_rnn_gradient_finite_difference(seed):
    r = np.random.default_rng(seed)
    m = RnnNetwork.create(lookback=3, seed=seed)
    m.set_params(m.get_params() + r.normal(0, 0.1, m.n_params))
    assert fd_error(m, r.normal(size=(12, 3, 4)), r.normal(size=12)) < 1e-4


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("double_bias", [False, True])
def test_lstm_gradient_finite_difference(seed, double_bias):
    r = np.random.default_rng(seed)
    m = LstmNetwork.create(lookback=3, seed=seed, double_bias=double_bias)
    m.set_params(m.get_params() + r.normal(0, 0.3, m.n_params))
    assert fd_error(m, r.normal(size=(12, 3, 4)), r.normal(size=12)) < 1e-4


def test_full_length_rnn_gradient():
    r = np.random.default_rng(1)
    m = RnnNetwork.create(seed=1)
    assert fd_error(m, r.normal(size=(4, 20, 4)), r.normal(size=4)) < 1e-4


def test_loss_value_is_mse(rng):
    m = MlpNetwork.create(seed=2)
    x, y = rng.normal(size=(9, 4)), rng.normal(size=9)
    f, _ = m.loss_and_grad(x, y)
    assert f == pytest.approx(np.mean((m.predict(x) - y) ** 2), rel=1e-14)


# --- persistence -------------------------------------------------------------------------------

def _stats():
    return NormalizationStats(np.array([0.0, 1, 2, 3, 4]), np.array([1.0, 2, 3, 4, 5]))


@pytest.mark.parametrize("model", [
    MlpNetwork.create(seed=1), RnnNetwork.create(seed=1), LstmNetwork.create(seed=1),
    LstmNetwork.create(seed=1, double_bias=True), RnnNetwork.create(lookback=7, seed=2),
])
def test_save_load_bit_identical(tmp_path, model, rng):
    model.stats = _stats()
    path = tmp_path / "m.json"
    model.save(path)
    back = baselines.load(path)
    assert type(back) is type(model)
    np.testing.assert_array_equal(back.get_params(), model.get_params())
    assert back.lookback == model.lookback
    np.testing.assert_array_equal(back.stats.mins, model.stats.mins)
    shape = (3, 4) if model.lookback == 1 else (3, model.lookback, 4)
    x = rng.normal(size=shape)
    np.testing.assert_array_equal(back.predict(x), model.predict(x))


def test_load_lstm_bias_convention(tmp_path):
    m = LstmNetwork.create(double_bias=True)
    m.save(tmp_path / "l.json")
    assert baselines.load(tmp_path / "l.json").bias_convention == "double"


def test_load_missing_array_names_field(tmp_path):
    path = tmp_path / "m.json"
    MlpNetwork.create().save(path)
    doc = json.loads(path.read_text())
    del doc["model"]["arrays"]["W1"]
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError, match="W1"):
        baselines.load(path)


def test_load_wrong_shape_names_field(tmp_path):
    path = tmp_path / "m.json"
    RnnNetwork.create().save(path)
    doc = json.loads(path.read_text())
    doc["model"]["arrays"]["W_hh"] = [[0.0]]
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError, match="W_hh"):
        baselines.load(path)


def test_load_truncated(tmp_path):
    path = tmp_path / "m.json"
    MlpNetwork.create().save(path)
    path.write_text(path.read_text()[:50])
    with pytest.raises(ModelFileError):
        baselines.load(path)
