"""Versioned JSON model container shared by every architecture.

Layout (UTF-8 JSON object)::

    {
      "format": "kantherm-model",
      "version": 1,
      "arch": "kan" | "mlp" | "rnn" | "lstm",
      "normalization": null | {"I_min": ..., "I_max": ..., ..., "T1_max": ...},
      "model": { architecture-specific payload }
    }

Floats are written with Python's shortest round-trip repr, so a save/load
cycle is bit-exact.  KAN payload: ``widths``, ``k``, ``G`` and
``layers[l].edges[out][in] = {"knots": [...], "coefficients": [...]}``.
Baseline payloads carry ``lookback`` plus named weight arrays (nested lists,
row-major, shapes documented in :mod:`kantherm.baselines`).
"""

from __future__ import annotations

import json
from pathlib import Path

from .dataset import NormalizationStats
from .errors import ConfigError, ModelFileError

FORMAT = "kantherm-model"
VERSION = 1
ARCHES = ("kan", "mlp", "rnn", "lstm")


def write(path, arch: str, payload: dict, stats: NormalizationStats | None = None) -> None:
    doc = {"format": FORMAT, "version": VERSION, "arch": arch,
           "normalization": stats.as_dict() if stats is not None else None,
           "model": payload}
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")


def read_any(path):
    path = Path(path)
    if not path.is_file():
        raise ModelFileError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFileError(f"{path}: corrupt model file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFileError(f"not a {FORMAT} container", field="format")
    if doc.get("version") != VERSION:
        raise ModelFileError(f"unsupported version {doc.get('version')!r} (expected {VERSION})",
                             field="version")
    arch = doc.get("arch")
    if arch not in ARCHES:
        raise ModelFileError(f"unknown architecture {arch!r}", field="arch")
    stats = None
    if doc.get("normalization") is not None:
        try:
            stats = NormalizationStats.from_dict(doc["normalization"])
        except (ConfigError, TypeError, ValueError) as exc:
            raise ModelFileError(str(exc), field="normalization") from None
    model = doc.get("model")
    if not isinstance(model, dict):
        raise ModelFileError("missing model payload", field="model")
    return arch, model, stats


def read(path, arch: str):
    found, payload, stats = read_any(path)
    if found != arch:
        raise ModelFileError(f"expected a {arch} model, file holds {found}", field="arch")
    return payload, stats


def field(obj, name: str, kind, prefix: str = "model"):
    if not isinstance(obj, dict) or name not in obj:
        raise ModelFileError("missing", field=f"{prefix}.{name}")
    value = obj[name]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ModelFileError(f"expected integer, got {value!r}", field=f"{prefix}.{name}")
    elif not isinstance(value, kind):
        raise ModelFileError(f"expected {kind.__name__}", field=f"{prefix}.{name}")
    return value
