"""Shared fixtures: small simulated corpora and trained toy models."""

from __future__ import annotations

import numpy as np
import pytest

from kantherm.dataset import build_corpus, default_roster
from kantherm.thermal_model import BatteryParams


@pytest.fixture(scope="session")
def params():
    return BatteryParams()


@pytest.fixture(scope="session")
def small_corpus(params):
    """Nineteen 10-minute scenarios; about 11k rows, test split over 1000 rows."""
    ds, clean = build_corpus(default_roster(seed=0, duration=600.0), params)
    return ds


@pytest.fixture(scope="session")
def tiny_corpus(params):
    """Nineteen 2-minute scenarios for fast training loops."""
    ds, clean = build_corpus(default_roster(seed=0, duration=120.0), params)
    return ds


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_toy_dataset(n=200, seed=0, n_val=60):
    """Smooth 4-feature regression split into one train and one val scenario."""
    from kantherm.dataset import Dataset, fit_normalization

    r = np.random.default_rng(seed)
    X = r.uniform(-1.0, 1.0, (n + n_val, 4))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2 - 0.3 * X[:, 2] * X[:, 3]
    sid = np.repeat([0, 1], [n, n_val])
    ds = Dataset(X, y, y.copy(), np.arange(n + n_val, dtype=float), sid,
                 ["toy_train", "toy_val"], ["synthetic-dynamic"] * 2, ["train", "val"])
    ds.stats = fit_normalization(ds.subset("train").raw_rows())
    return ds


@pytest.fixture
def toy_dataset():
    return make_toy_dataset()


ACCEPTANCE_LINES = []


def report_criterion(name, ok, detail=""):
    """Record and print one acceptance line; returns ``ok`` for asserting."""
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
