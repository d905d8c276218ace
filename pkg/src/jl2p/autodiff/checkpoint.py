"""JSON checkpoints: parameter name -> shape + flat values, plus a free-form header."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def dump_checkpoint(params: dict, header=None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "header": header or {},
        "params": {
            name: {"shape": list(params[name].shape),
                   "values": [float(x) for x in np.ravel(params[name].data)]}
            for name in sorted(params)
        },
    }
    return json.dumps(doc, sort_keys=True)


def save_checkpoint(path, params: dict, header=None):
    Path(path).write_text(dump_checkpoint(params, header))


def load_checkpoint(path):
    """Return ``(arrays, header)`` where ``arrays`` maps names to float64 ndarrays."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: not a JSON checkpoint ({e})") from e
    if doc.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format_version {doc.get('format_version')!r}")
    arrays = {}
    for name, rec in doc["params"].items():
        vals = np.asarray(rec["values"], dtype=np.float64)
        shape = tuple(rec["shape"])
        if int(np.prod(shape)) != vals.size:
            raise CheckpointError(f"{path}: parameter {name} has {vals.size} values "
                                  f"for shape {shape}")
        arrays[name] = vals.reshape(shape)
    return arrays, doc.get("header", {})
