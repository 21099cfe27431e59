"""JSON/CSV plumbing shared by the command line."""
from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np

from . import __version__


class SchemaError(ValueError):
    """An input file does not match the expected layout."""


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x} in output")
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    return obj


def dumps(obj) -> str:
    """Canonical text: fixed key order, floats at 12 significant digits."""
    return json.dumps(_clean(obj), indent=1) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path, *required: str):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if required:
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected a JSON object")
        missing = [k for k in required if k not in data]
        if missing:
            raise SchemaError(f"{path}: missing field(s) {', '.join(missing)}")
    return data


class RunManifest:
    """Provenance written next to each output as ``<output>.manifest.json``.

    Kept out of the output itself so outputs stay byte-identical across runs.
    """

    def __init__(self, command: str, inputs=(), seed=None):
        self.command = command
        self.inputs = [str(p) for p in inputs if p]
        self.outputs: list[str] = []
        self.seed = seed
        self._start = time.perf_counter()

    def write(self, output) -> None:
        self.outputs.append(str(output))
        record = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "version": __version__,
            "duration_s": round(time.perf_counter() - self._start, 6),
        }
        Path(str(output) + ".manifest.json").write_text(json.dumps(record, indent=1) + "\n")
