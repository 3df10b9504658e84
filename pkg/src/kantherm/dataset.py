"""Scenario roster, current profiles, sensor noise, splits and normalization.

Feature order is fixed everywhere as ``(I, Qc, Tinf, T2)`` with target ``T1``.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, ParseError, ShapeError
from .textio import (fmt, format_pairs, parse_pairs, read_csv, read_ini, to_float,
                     write_csv, write_ini)
from .thermal_model import BatteryParams, Trajectory, simulate

log = logging.getLogger(__name__)

ONE_C_AMPS = 2.3
FEATURES = ("I", "Qc", "Tinf", "T2")
TARGET = "T1"
CHANNELS = FEATURES + (TARGET,)
PROFILE_KINDS = ("constant-current", "file-loaded", "synthetic-dynamic")
_KIND_ALIASES = {"cc": "constant-current", "constant-current": "constant-current",
                 "dynamic": "synthetic-dynamic", "synthetic-dynamic": "synthetic-dynamic",
                 "file": "file-loaded", "file-loaded": "file-loaded"}
SPLITS = ("train", "val", "test")
SPLIT_RATIOS = (0.74, 0.16, 0.10)


@dataclass(frozen=True)
class CurrentProfile:
    name: str
    times: np.ndarray
    currents: np.ndarray
    kind: str = "synthetic-dynamic"
    seed: int | None = None        # generator provenance for synthetic-dynamic
    peak_c_rate: float = 3.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        i = np.asarray(self.currents, dtype=float)
        if t.shape != i.shape or t.ndim != 1 or len(t) < 1:
            raise ShapeError("profile times and currents must be equal-length 1-D arrays")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ConfigError(f"profile {self.name}: times must start at 0 and strictly increase")
        if not np.all(np.isfinite(i)):
            raise ConfigError(f"profile {self.name}: non-finite current")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "currents", i)

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.currents.tolist()))

    def current_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.currents))

    def to_csv(self, path) -> None:
        write_csv(path, ("t", "I"), zip(self.times.tolist(), self.currents.tolist()))


def synth_profile(kind: str, value: float, duration: float, dt: float,
                  peak_c_rate: float = 3.0, name: str | None = None) -> CurrentProfile:
    """Constant-current (``value`` = signed C-rate) or seeded drive-cycle surrogate.

    The dynamic surrogate is a train of flat pulses of random length and level
    (mostly discharge, some regenerative charge) plus zero-mean 1 Hz dither,
    clipped to ``peak_c_rate``.  ``value`` is the seed for the dynamic kind.
    """
    kind = _KIND_ALIASES.get(kind)
    if kind not in ("constant-current", "synthetic-dynamic"):
        raise ConfigError(f"unknown profile kind {kind!r}; use 'cc' or 'dynamic'")
    if not duration > 0 or not dt > 0:
        raise ConfigError("duration and dt must be > 0")
    n = int(round(duration / dt))
    t = np.arange(n + 1) * dt
    if kind == "constant-current":
        cur = np.full(n + 1, value * ONE_C_AMPS)
        return CurrentProfile(name or f"cc_{fmt(float(value))}c", t, cur, kind)

    peak = min(peak_c_rate, 3.0) * ONE_C_AMPS
    rng = np.random.default_rng(int(value))
    cur = np.empty(n + 1)
    pos = 0
    while pos <= n:
        seg = int(rng.integers(20, 150) / dt) + 1
        u = rng.random()
        if u < 0.15:
            level = 0.0
        elif u < 0.35:
            level = -rng.uniform(0.1, 0.5) * peak
        else:
            level = rng.uniform(0.1, 1.0) * peak
        cur[pos:pos + seg] = level
        pos += seg
    # smooth the pulse edges over ~5 s so the profile resembles a driven cycle
    w = max(1, int(round(5.0 / dt)))
    kernel = np.ones(w) / w
    cur = np.convolve(np.pad(cur, (w - 1, 0), mode="edge"), kernel, mode="valid")
    dither = rng.normal(0.0, 0.03 * peak, n + 1)
    cur = np.clip(cur + dither - dither.mean(), -peak, peak)
    return CurrentProfile(name or f"dynamic_s{int(value)}", t, cur, kind,
                          seed=int(value), peak_c_rate=float(peak_c_rate))


def load_profile(path, name: str | None = None) -> CurrentProfile:
    """Read a two-column ``t,I`` CSV (header optional)."""
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"profile file not found: {path}")
    times, currents = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ParseError(f"expected 2 columns, got {len(parts)}", line=lineno)
            try:
                t, i = float(parts[0]), float(parts[1])
            except ValueError:
                if not times:  # header
                    continue
                raise ParseError(f"non-numeric row {line!r}", line=lineno) from None
            if times and t <= times[-1]:
                raise ParseError(f"time {t} does not increase (previous {times[-1]})", line=lineno)
            if not np.isfinite(i):
                raise ParseError("non-finite current", line=lineno)
            times.append(t)
            currents.append(i)
    if not times:
        raise ParseError(f"{path}: no samples")
    if times[0] != 0:
        raise ParseError(f"first time must be 0, got {times[0]}", line=None)
    return CurrentProfile(name or path.stem, np.array(times), np.array(currents), "file-loaded")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    profile: CurrentProfile
    initial_soc: float
    initial_temp: float
    cooling_schedule: tuple = ((0.0, 0.0),)
    duration: float = 1800.0
    dt: float = 1.0
    noise_seed: int = 0
    role: str = ""  # "cc_1c" / "dynamic" to pin a scenario into the test split

    def __post_init__(self):
        if not self.duration > 0 or not self.dt > 0:
            raise ConfigError(f"scenario {self.name}: duration and dt must be > 0")
        if not 0.0 <= self.initial_soc <= 1.0:
            raise ConfigError(f"scenario {self.name}: initial_soc outside [0, 1]")
        sched = tuple((float(a), float(b)) for a, b in self.cooling_schedule)
        if not sched or any(b[0] <= a[0] for a, b in zip(sched, sched[1:])):
            raise ConfigError(f"scenario {self.name}: cooling schedule times must increase")
        object.__setattr__(self, "cooling_schedule", sched)

    @property
    def kind(self) -> str:
        return self.profile.kind

    def current_at(self, t: float) -> float:
        return self.profile.current_at(t)

    def cooling_at(self, t: float) -> float:
        ts, qs = zip(*self.cooling_schedule)
        return float(np.interp(t, ts, qs))


def add_noise(traj: Trajectory, fraction: float, seed: int) -> Trajectory:
    """Gaussian sensor noise with sigma = fraction * (channel range) per channel."""
    if not 0.0 <= fraction < 1.0:
        raise ConfigError(f"noise fraction {fraction} outside [0, 1)")
    if fraction == 0:
        return traj.copy()
    rng = np.random.default_rng(seed)
    out = {}
    for attr in ("current", "cooling", "t_inf", "t2", "t1"):
        x = getattr(traj, attr)
        sigma = fraction * (x.max() - x.min())
        out[attr] = x + rng.normal(0.0, 1.0, x.shape) * sigma
    return traj.copy(**out)


@dataclass
class NormalizationStats:
    mins: np.ndarray
    maxs: np.ndarray
    channels: tuple = CHANNELS

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=float)
        self.maxs = np.asarray(self.maxs, dtype=float)
        if self.mins.shape != (len(self.channels),) or self.maxs.shape != self.mins.shape:
            raise ShapeError("stats need one (min, max) per channel")
        if np.any(self.maxs < self.mins):
            raise ConfigError("normalization max < min")

    def as_dict(self):
        return {f"{c}_{k}": float(v) for c, lo, hi in zip(self.channels, self.mins, self.maxs)
                for k, v in (("min", lo), ("max", hi))}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls([float(d[f"{c}_min"]) for c in CHANNELS],
                       [float(d[f"{c}_max"]) for c in CHANNELS])
        except KeyError as exc:
            raise ConfigError(f"normalization stats missing {exc.args[0]}") from None


def fit_normalization(rows) -> NormalizationStats:
    """Fit per-channel min/max on training rows of shape (N, 5)."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(CHANNELS) or len(rows) == 0:
        raise ShapeError(f"expected (N>0, {len(CHANNELS)}) rows, got {rows.shape}")
    return NormalizationStats(rows.min(axis=0), rows.max(axis=0))


def _stat_slice(stats, width):
    if width == len(stats.channels):
        return stats.mins, stats.maxs
    if width == len(FEATURES):
        return stats.mins[:width], stats.maxs[:width]
    raise ShapeError(f"rows have {width} channels, stats have {len(stats.channels)}")


def apply(stats: NormalizationStats, rows) -> np.ndarray:
    """Min-max scale rows of 4 (features) or 5 (features + target) channels."""
    rows = np.asarray(rows, dtype=float)
    lo, hi = _stat_slice(stats, rows.shape[-1])
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (rows - lo) / safe, 0.5)


def invert(stats: NormalizationStats, values, channel: str | int = TARGET) -> np.ndarray:
    """Undo :func:`apply`; a 1-D ``values`` is taken as one channel (target by default)."""
    values = np.asarray(values, dtype=float)
    if values.ndim >= 1 and values.shape[-1] in (4, 5) and channel is None:
        lo, hi = _stat_slice(stats, values.shape[-1])
    else:
        idx = stats.channels.index(channel) if isinstance(channel, str) else channel
        lo, hi = stats.mins[idx], stats.maxs[idx]
    return np.where(hi > lo, values * (hi - lo) + lo, lo)


@dataclass
class Dataset:
    """Rows of features ``(I, Qc, Tinf, T2)``, noisy target and clean target T1."""

    features: np.ndarray
    target: np.ndarray
    target_true: np.ndarray
    time: np.ndarray
    scenario: np.ndarray
    scenario_names: list
    scenario_kinds: list
    scenario_split: list
    stats: NormalizationStats | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.target)

    def split_of_rows(self) -> np.ndarray:
        return np.array(self.scenario_split, dtype=object)[self.scenario] if len(self) else np.array([])

    def mask(self, split: str) -> np.ndarray:
        ids = [i for i, s in enumerate(self.scenario_split) if s == split]
        return np.isin(self.scenario, ids)

    def subset(self, split: str) -> "Dataset":
        m = self.mask(split)
        return Dataset(self.features[m], self.target[m], self.target_true[m], self.time[m],
                       self.scenario[m], self.scenario_names, self.scenario_kinds,
                       self.scenario_split, self.stats, self.meta)

    def scenario_ids(self, split: str | None = None) -> list:
        return [i for i, s in enumerate(self.scenario_split) if split is None or s == split]

    def rows_of(self, scenario_id: int) -> np.ndarray:
        return np.flatnonzero(self.scenario == scenario_id)

    def raw_rows(self) -> np.ndarray:
        return np.column_stack([self.features, self.target])

    def normalized(self, split: str | None = None):
        """Normalized (features, target) for a split using the stored stats."""
        if self.stats is None:
            raise ConfigError("dataset has no normalization stats")
        ds = self if split is None else self.subset(split)
        z = apply(self.stats, ds.raw_rows())
        return z[:, :4], z[:, 4]

    def fractions(self) -> dict:
        n = max(len(self), 1)
        return {s: float(self.mask(s).sum()) / n for s in SPLITS}

    # persistence ---------------------------------------------------------
    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        header = ("scenario", "split", "t") + CHANNELS + ("T1_true",)
        splits = self.scenario_split
        rows = ((self.scenario_names[s], splits[s], t, *f, y, yt) for s, t, f, y, yt in zip(
            self.scenario.tolist(), self.time.tolist(), self.features.tolist(),
            self.target.tolist(), self.target_true.tolist()))
        write_csv(d / "dataset.csv", header, rows)
        sections = {
            "dataset": {"rows": len(self), "scenarios": len(self.scenario_names),
                        **{f"rows_{s}": int(self.mask(s).sum()) for s in SPLITS},
                        **{k: v for k, v in self.meta.items()}},
            "scenarios": {n: f"{k}, {s}" for n, k, s in zip(
                self.scenario_names, self.scenario_kinds, self.scenario_split)},
        }
        if self.stats is not None:
            sections["normalization"] = self.stats.as_dict()
        write_ini(d / "metadata.ini", sections, header="Dataset sidecar metadata.")

    @classmethod
    def load(cls, directory) -> "Dataset":
        d = Path(directory)
        cp = read_ini(d / "metadata.ini")
        names, kinds, splits = [], [], []
        for name, val in cp["scenarios"].items():
            kind, split = [v.strip() for v in val.split(",")]
            names.append(name)
            kinds.append(kind)
            splits.append(split)
        header, rows = read_csv(d / "dataset.csv")
        index = {n: i for i, n in enumerate(names)}
        try:
            sid = np.array([index[r[0]] for r in rows], dtype=int)
        except KeyError as exc:
            raise ParseError(f"dataset.csv names unknown scenario {exc.args[0]}") from None
        num = np.array([[to_float(v) for v in r[2:]] for r in rows], dtype=float).reshape(-1, 7)
        stats = NormalizationStats.from_dict(cp["normalization"]) if cp.has_section("normalization") else None
        meta = {k: v for k, v in cp["dataset"].items()
                if k not in ("rows", "scenarios") and not k.startswith("rows_")}
        return cls(num[:, 1:5], num[:, 5], num[:, 6], num[:, 0], sid, names, kinds, splits,
                   stats, meta)


def _pick_required_tests(trajs: Sequence[Trajectory]) -> list:
    def cc1c(tr):
        return tr.kind == "constant-current" and np.allclose(np.abs(tr.current), ONE_C_AMPS)

    def dyn(tr):
        return tr.kind in ("synthetic-dynamic", "file-loaded")

    picks = []
    roles = [tr.role for tr in trajs]
    for test, role, prefer in ((cc1c, "cc_1c", lambda tr: tr.current[0] < 0),
                               (dyn, "dynamic", lambda tr: np.abs(tr.current).max() <= 2 * ONE_C_AMPS + 1e-9)):
        cands = [i for i, tr in enumerate(trajs) if roles[i] == role] or \
                [i for i, tr in enumerate(trajs) if test(tr)]
        preferred = [i for i in cands if prefer(trajs[i])]
        if cands:
            picks.append((preferred or cands)[0])
    return picks


def assign_splits(trajs: Sequence[Trajectory], ratios=SPLIT_RATIOS) -> list:
    """Assign whole scenarios to train/val/test, matching row ratios."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.shape != (3,) or np.any(ratios < 0) or ratios.sum() <= 0:
        raise ConfigError(f"bad split ratios {ratios.tolist()}")
    ratios = ratios / ratios.sum()
    n = len(trajs)
    need = int(np.count_nonzero(ratios))
    if n < max(need, 1) or (ratios[2] > 0 and n < 3):
        raise ConfigError(f"cannot split {n} scenario(s) into {need} non-empty subsets")
    sizes = np.array([len(tr) for tr in trajs], dtype=float)
    total = sizes.sum()
    tags = [None] * n
    if ratios[2] > 0:
        for i in _pick_required_tests(trajs):
            tags[i] = "test"
    # held-out scenarios come preferably from the largest profile family, so
    # each has siblings in train; then larger scenarios first
    family = Counter(tr.kind for i, tr in enumerate(trajs) if tags[i] is None)
    free = sorted((i for i in range(n) if tags[i] is None),
                  key=lambda i: (-family[trajs[i].kind], -sizes[i], i))
    # greedy fill of test then val toward their row targets; leftovers train
    for split, r in (("test", ratios[2]), ("val", ratios[1])):
        if r == 0:
            continue
        have = sum(sizes[i] for i in range(n) if tags[i] == split)
        target = r * total
        if have == 0 and free:
            best = min(free, key=lambda i: (abs(sizes[i] - target), free.index(i)))
            tags[best] = split
            free.remove(best)
            have = sizes[best]
        for i in list(free):
            if len(free) <= (1 if ratios[0] > 0 else 0):
                break
            if abs(have + sizes[i] - target) < abs(have - target):
                tags[i] = split
                free.remove(i)
                have += sizes[i]
    for i in free:
        tags[i] = "train" if ratios[0] > 0 else ("val" if ratios[1] > 0 else "test")
    return tags


def split(scenarios: Sequence[Trajectory], ratios=SPLIT_RATIOS, clean: Sequence[Trajectory] | None = None,
          fit_stats: bool = True) -> Dataset:
    """Assemble a Dataset from (noisy) trajectories with whole-scenario split tags."""
    tags = assign_splits(scenarios, ratios)
    clean = clean if clean is not None else scenarios
    feats, tgt, tgt_true, times, sids = [], [], [], [], []
    for sid, (tr, cl) in enumerate(zip(scenarios, clean)):
        f = np.column_stack([tr.current, tr.cooling, tr.t_inf, tr.t2])
        keep = np.all(np.isfinite(f), axis=1) & np.isfinite(tr.t1) & np.isfinite(cl.t1)
        feats.append(f[keep])
        tgt.append(tr.t1[keep])
        tgt_true.append(cl.t1[keep])
        times.append(tr.t[keep])
        sids.append(np.full(int(keep.sum()), sid))
    ds = Dataset(np.vstack(feats), np.concatenate(tgt), np.concatenate(tgt_true),
                 np.concatenate(times), np.concatenate(sids).astype(int),
                 [tr.name for tr in scenarios], [tr.kind for tr in scenarios], tags)
    if fit_stats and ds.mask("train").any():
        ds.stats = fit_normalization(ds.subset("train").raw_rows())
    return ds


def histogram2d(dataset: Dataset, channel_a: str = "I", channel_b: str = "T1", bins: int = 20,
                split_name: str | None = "train"):
    """2-D count grid of two channels; returns (counts, edges_a, edges_b)."""
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    ds = dataset if split_name is None else dataset.subset(split_name)
    raw = ds.raw_rows()
    if len(raw) == 0:
        return np.zeros((bins, bins), dtype=int), np.linspace(0, 1, bins + 1), np.linspace(0, 1, bins + 1)
    a = raw[:, CHANNELS.index(channel_a)]
    b = raw[:, CHANNELS.index(channel_b)]
    counts, ea, eb = np.histogram2d(a, b, bins=bins)
    return counts.astype(int), ea, eb


def write_histogram(path, counts, edges_a, edges_b, names=("I", "T1")) -> None:
    rows = []
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            rows.append((edges_a[i], edges_a[i + 1], edges_b[j], edges_b[j + 1], int(counts[i, j])))
    a, b = names
    write_csv(path, (f"{a}_lo", f"{a}_hi", f"{b}_lo", f"{b}_hi", "count"), rows)


# --- roster ---------------------------------------------------------------

def default_roster(seed: int = 0, duration: float = 1800.0, dt: float = 1.0) -> list:
    """Nineteen scenarios: 6 CC, 9 dynamic (3 seeds x 3 SOC), 4 with cooling schedules."""
    D = duration
    roster = []

    def add(name, profile, soc, temp, cooling, dur=D, role=""):
        roster.append(ScenarioSpec(name, profile, soc, temp, tuple(cooling), dur, dt,
                                   noise_seed=seed * 1000 + len(roster), role=role))

    def cc(rate, name):
        return synth_profile("cc", rate, D, dt, name=name)

    # constant current: 1C/2C/3C, discharge from full or charge from low SOC
    add("cc_1c_charge_298", cc(-1, "cc_1c_charge"), 0.2, 298.15, [(0, 0.05)], role="cc_1c")
    add("cc_1c_discharge_308", cc(1, "cc_1c_discharge"), 1.0, 308.15, [(0, 0.0)])
    add("cc_2c_discharge_298", cc(2, "cc_2c_discharge"), 1.0, 298.15, [(0, 0.1)])
    add("cc_2c_charge_308", cc(-2, "cc_2c_charge"), 0.0, 308.15, [(0, 0.15)])
    add("cc_3c_discharge_298", cc(3, "cc_3c_discharge"), 1.0, 298.15, [(0, 0.15)])
    add("cc_3c_charge_308", cc(-3, "cc_3c_charge"), 0.0, 308.15, [(0, 0.3)])
    # dynamic drive-cycle surrogates; the first one is the scaled (<= 2C) test cycle
    temps = (293.15, 298.15, 303.15)
    for j, s in enumerate((1, 2, 3)):
        for m, soc in enumerate((0.9, 0.7, 0.5)):
            scaled = j == 0 and m == 0
            prof = synth_profile("dynamic", seed * 100 + s, D, dt,
                                 peak_c_rate=2.0 if scaled else 3.0,
                                 name=f"dyn_s{s}" + ("_scaled" if scaled else ""))
            add(f"dyn_s{s}_soc{int(soc * 100)}" + ("_scaled" if scaled else ""), prof, soc,
                temps[(j + m) % 3], [(0, 0.05 + 0.05 * m)], role="dynamic" if scaled else "")
    # varied cooling schedules; step edges ramp over 60 s (less on short runs)
    r = min(60.0, 0.05 * D)
    add("cool_ramp_cc_2c", cc(2, "cc_2c_discharge"), 1.0, 303.15, [(0, 0.0), (D, 0.4)])
    add("cool_steps_dyn_s4", synth_profile("dynamic", seed * 100 + 4, D, dt, name="dyn_s4"), 0.8,
        298.15, [(0, 0.0), (D * 0.3, 0.0), (D * 0.3 + r, 0.3), (D * 0.7, 0.3), (D * 0.7 + r, 0.1)])
    add("cool_ramp_cc_1p5c_charge", cc(-1.5, "cc_1.5c_charge"), 0.1, 293.15, [(0, 0.3), (D, 0.05)])
    add("cool_rest", cc(0, "rest"), 0.5, 308.15, [(0, 0.0), (D * 0.2, 0.0), (D * 0.2 + r, 0.25),
                                                   (D * 0.6, 0.25), (D * 0.6 + r, 0.0)])
    return roster


def write_roster(path, roster: Sequence[ScenarioSpec], profile_dir=None) -> None:
    """Write a roster config; file-loaded profiles are referenced by path."""
    sections = {}
    for sc in roster:
        p = sc.profile
        body = {"initial_soc": sc.initial_soc, "initial_temp": sc.initial_temp,
                "duration": sc.duration, "dt": sc.dt, "noise_seed": sc.noise_seed,
                "cooling": format_pairs(sc.cooling_schedule)}
        if sc.role:
            body["role"] = sc.role
        if p.kind == "constant-current":
            body.update(kind="cc", c_rate=float(p.currents[0] / ONE_C_AMPS), profile_name=p.name)
        elif p.kind == "synthetic-dynamic":
            body.update(kind="dynamic", profile_name=p.name, seed=p.seed,
                        peak_c_rate=p.peak_c_rate)
        else:
            if profile_dir is None:
                raise ConfigError("file-loaded profiles need profile_dir to be written")
            Path(profile_dir).mkdir(parents=True, exist_ok=True)
            target = Path(profile_dir) / f"{p.name}.csv"
            p.to_csv(target)
            body.update(kind="file", path=str(target), profile_name=p.name)
        sections[f"scenario {sc.name}"] = body
    write_ini(path, sections, header="Scenario roster: one [scenario NAME] section per scenario.")


def load_roster(path) -> list:
    cp = read_ini(path)
    roster = []
    for sec_name in cp.sections():
        if not sec_name.startswith("scenario "):
            continue
        name = sec_name.split(" ", 1)[1].strip()
        s = cp[sec_name]
        try:
            duration = float(s.get("duration", "1800"))
            dt = float(s.get("dt", "1"))
            kind = s["kind"].strip()
            pname = s.get("profile_name", name)
            if kind == "cc":
                prof = synth_profile("cc", float(s["c_rate"]), duration, dt, name=pname)
            elif kind == "dynamic":
                prof = synth_profile("dynamic", int(s["seed"]), duration, dt,
                                     peak_c_rate=float(s.get("peak_c_rate", "3")), name=pname)
            elif kind == "file":
                prof = load_profile(s["path"], name=pname)
            else:
                raise ConfigError(f"[{sec_name}] unknown kind {kind!r}")
            roster.append(ScenarioSpec(
                name, prof, float(s["initial_soc"]), float(s["initial_temp"]),
                tuple(parse_pairs(s.get("cooling", "0:0"))), duration, dt,
                int(s.get("noise_seed", "0")), s.get("role", "").strip()))
        except KeyError as exc:
            raise ConfigError(f"[{sec_name}] missing key {exc.args[0]}") from None
        except ValueError as exc:
            raise ConfigError(f"[{sec_name}] {exc}") from None
    if not roster:
        raise ConfigError(f"{path}: roster has no [scenario ...] sections")
    return roster


def simulate_roster(roster: Sequence[ScenarioSpec], params: BatteryParams) -> list:
    trajs = []
    for sc in roster:
        tr = simulate(sc, params)
        tr.name = sc.name
        if tr.truncated:
            log.info("scenario %s truncated at t=%g s (SOC limit)", sc.name, tr.t[-1])
        trajs.append(tr)
    return trajs


def build_corpus(roster: Sequence[ScenarioSpec], params: BatteryParams, noise_fraction: float = 0.005,
                 ratios=SPLIT_RATIOS):
    """Simulate, add noise and split.  Returns (dataset, clean trajectories)."""
    clean = simulate_roster(roster, params)
    noisy = []
    for sc, tr in zip(roster, clean):
        noisy.append(add_noise(tr, noise_fraction, sc.noise_seed))
    ds = split(noisy, ratios, clean=clean)
    ds.meta.update({"noise_fraction": noise_fraction,
                    "noise_seeds": " ".join(str(sc.noise_seed) for sc in roster),
                    "ratios": " ".join(fmt(float(r)) for r in ratios)})
    return ds, clean
