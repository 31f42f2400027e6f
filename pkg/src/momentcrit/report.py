"""Deterministic JSON reports.

Floats are written as the shortest decimal that round-trips, complex numbers
as ``[re, im]`` pairs, and all mappings with sorted keys, so identical inputs
produce byte-identical output.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any, Iterable

import numpy as np

from . import __version__
from .witnesses.verdict import CLASSICAL, ENTANGLED, NONCLASSICAL, WitnessVerdict

TOOL = "momentcrit"
REPORT_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SUITE_FAILED = 3
EXIT_NONCLASSICAL = 10
EXIT_ENTANGLED = 20


def _float(x: float):
    if math.isfinite(x):
        return float(x)
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(float(obj.real)), _float(float(obj.imag))]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, range)):
        return [to_jsonable(x) for x in obj]
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def verdict_record(v: WitnessVerdict, embed_matrices: bool = False) -> dict:
    rec = {
        "witness_id": v.witness_id,
        "verdict": v.verdict,
        "value": v.value,
        "threshold": v.threshold,
        "margin": v.margin,
        "tolerance": v.tolerance,
        "determinants": v.determinants,
        "quantities": v.quantities,
        "flags": v.flags,
        "params": v.params,
        "notes": v.notes,
        "matrices": [
            {k: val for k, val in m.items() if embed_matrices or k != "entries"}
            for m in v.provenance
        ],
    }
    return to_jsonable(rec)


def exit_code(verdicts: Iterable[WitnessVerdict | str]) -> int:
    labels = {v if isinstance(v, str) else v.verdict for v in verdicts}
    if ENTANGLED in labels:
        return EXIT_ENTANGLED
    if NONCLASSICAL in labels:
        return EXIT_NONCLASSICAL
    return EXIT_OK


def summary(verdicts: list[WitnessVerdict]) -> dict:
    counts = {CLASSICAL: 0, NONCLASSICAL: 0, ENTANGLED: 0}
    for v in verdicts:
        counts[v.verdict] = counts.get(v.verdict, 0) + 1
    return {"counts": counts, "exit_code": exit_code(verdicts)}


def document(command: str, *, input: dict, tolerances: dict, body: dict,
             wall_clock: float | None = None) -> dict:
    doc = {
        "report_version": REPORT_VERSION,
        "tool": {"name": TOOL, "version": __version__},
        "command": command,
        "input": input,
        "tolerances": tolerances,
        **body,
    }
    if wall_clock is not None:
        doc["wall_clock_seconds"] = wall_clock
    return to_jsonable(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"
