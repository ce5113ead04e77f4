"""Deterministic serialization helpers.

JSON is written with sorted keys and every float at 17 significant digits,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no nan/inf literal
        return json.dumps(repr(x))
    text = f"{x:.17g}"
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(obj[k], indent, _level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path


def thread_count() -> int:
    """Worker cap from ``COHERENT_KIT_THREADS``; 0 or unset means all CPUs."""
    raw = os.environ.get("COHERENT_KIT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n
