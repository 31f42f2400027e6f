"""YAML state specifications and correlation grids.

Documents are validated against the JSON schemas shipped in ``schemas/``
before any state is built.  Diagnostics name the offending field path and,
when the document came from text, its line number.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml

from . import fock
from .errors import CutoffError, SpecError, TruncationError
from .fock import FockState, ModeShape
from .witnesses.twotime import CorrelationGrid

SCHEMA_VERSION = 1
MIX_WEIGHT_TOL = 1e-9
RAW_FIELDS = {"raw_amplitudes": "amplitudes", "raw_density": "density"}


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("momentcrit").joinpath("schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def _line_map(text: str) -> dict[tuple, int]:
    """Map field paths to 1-based source lines using the YAML node tree."""
    out: dict[tuple, int] = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out

    def walk(node, path):
        if node is None:
            return
        out[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                out[path + (k.value,)] = k.start_mark.line + 1
                walk(v, path + (k.value,))
                out[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    walk(root, ())
    return out


def _fmt_path(path) -> str:
    s = ""
    for p in path:
        s += f"[{p}]" if isinstance(p, int) else (f".{p}" if s else str(p))
    return s or "<root>"


def _where(source: str, lines: dict, path) -> str:
    path = tuple(path)
    while path and path not in lines:
        path = path[:-1]
    line = lines.get(path)
    return f"{source}:{line}" if line else source


def _parse_yaml(text: str, source: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{source}:{mark.line + 1}" if mark else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise SpecError(f"{loc}: malformed YAML: {problem}") from None


def _validate(doc, schema_name: str, source: str, lines: dict):
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = list(validator.iter_errors(doc))
    if not errors:
        return
    # the deepest error is usually the most specific one
    err = max(errors, key=lambda e: (len(e.absolute_path), len(list(e.context or ()))))
    leaf = err
    while leaf.context:
        leaf = max(leaf.context, key=lambda e: len(e.absolute_path))
    path = list(leaf.absolute_path) or list(err.absolute_path)
    raise SpecError(f"{_where(source, lines, path)}: field {_fmt_path(path)}: {leaf.message}")


# ---------------------------------------------------------------------------
# State construction


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _modes_of(node: dict, path: str) -> int:
    shape = node.get("shape") or {}
    declared = shape.get("modes")
    if "cutoffs" in shape:
        n = len(shape["cutoffs"])
        if declared is not None and declared != n:
            raise SpecError(f"{path}.shape: modes = {declared} but {n} cutoffs given")
        declared = n
    kind = node["constructor"]
    p = node.get("parameters") or {}
    inferred = None
    if kind == "coherent":
        a = p["alpha"]
        if isinstance(a, list) and a and all(isinstance(x, list) for x in a):
            inferred = len(a)
        elif isinstance(a, list) and declared != 1:
            inferred = len(a)
    elif kind in ("fock", "thermal"):
        v = p["n" if kind == "fock" else "nbar"]
        inferred = len(v) if isinstance(v, list) else None
    elif kind == "squeezed_vacuum":
        inferred = 1
    elif kind == "tmsv":
        inferred = 2
    elif kind == "tensor":
        inferred = sum(_modes_of(f, f"{path}.parameters.factors[{i}]")
                       for i, f in enumerate(p["factors"]))
    elif kind == "mixture":
        ms = {_modes_of(c["state"], f"{path}.parameters.components[{i}].state")
              for i, c in enumerate(p["components"])}
        if len(ms) != 1:
            raise SpecError(f"{path}.parameters.components: components have different mode counts {sorted(ms)}")
        inferred = ms.pop()
    if declared is not None and inferred is not None and declared != inferred:
        raise SpecError(f"{path}.shape: modes = {declared} but the {kind} parameters describe {inferred}")
    M = declared if declared is not None else inferred
    if M is None:
        M = 1
    return M


def _alphas(node: dict, M: int, path: str) -> list[complex]:
    a = node["parameters"]["alpha"]
    if isinstance(a, list) and a and all(isinstance(x, list) for x in a):
        vals = a
    elif isinstance(a, list) and M == 1 and len(a) == 2:
        vals = [a]
    elif isinstance(a, list):
        vals = a
    else:
        vals = [a] * M
    if len(vals) != M:
        raise SpecError(f"{path}.parameters.alpha: {len(vals)} amplitudes for {M} modes")
    return [_complex(x) for x in vals]


def _scalars(node: dict, key: str, M: int, path: str) -> list:
    v = node["parameters"][key]
    vals = v if isinstance(v, list) else [v] * M
    if len(vals) != M:
        raise SpecError(f"{path}.parameters.{key}: {len(vals)} values for {M} modes")
    return vals


def default_cutoffs(node: dict, path: str = "spec") -> list[int]:
    """Cutoffs from ``shape.cutoffs`` when present, else the per-constructor rule."""
    shape = node.get("shape") or {}
    M = _modes_of(node, path)
    if "cutoffs" in shape:
        return [int(d) for d in shape["cutoffs"]]
    kind = node["constructor"]
    p = node.get("parameters") or {}
    if kind == "coherent":
        return [fock.suggest_cutoff("coherent", alpha=a) for a in _alphas(node, M, path)]
    if kind == "fock":
        return [fock.suggest_cutoff("fock", n=n) for n in _scalars(node, "n", M, path)]
    if kind == "thermal":
        return [fock.suggest_cutoff("thermal", nbar=nb) for nb in _scalars(node, "nbar", M, path)]
    if kind == "squeezed_vacuum":
        return [fock.suggest_cutoff("squeezed_vacuum", r=p["r"])]
    if kind == "tmsv":
        return [fock.suggest_cutoff("tmsv", r=p["r"])] * 2
    if kind == "tensor":
        out: list[int] = []
        for i, f in enumerate(p["factors"]):
            out += default_cutoffs(f, f"{path}.parameters.factors[{i}]")
        return out
    if kind == "mixture":
        cuts = [default_cutoffs(c["state"], f"{path}.parameters.components[{i}].state")
                for i, c in enumerate(p["components"])]
        return [max(col) for col in zip(*cuts)]
    raise SpecError(f"{path}.shape.cutoffs: required for constructor {kind}")


def _build(node: dict, cutoffs: list[int], leakage_tol: float, path: str) -> FockState:
    kind = node["constructor"]
    p = node.get("parameters") or {}
    M = _modes_of(node, path)
    if len(cutoffs) != M:
        raise SpecError(f"{path}.shape.cutoffs: {len(cutoffs)} cutoffs for {M} modes")
    own = (node.get("shape") or {}).get("cutoffs")
    if own is not None and list(own) != list(cutoffs):
        raise SpecError(f"{path}.shape.cutoffs: {list(own)} conflicts with the enclosing shape {list(cutoffs)}")
    shape = ModeShape(tuple(cutoffs))
    try:
        if kind == "coherent":
            return fock.make_coherent(shape, _alphas(node, M, path), leakage_tol=leakage_tol,
                                      allow_large_amplitude=bool(p.get("allow_large_amplitude", False)))
        if kind == "fock":
            return fock.make_fock(shape, _scalars(node, "n", M, path))
        if kind == "thermal":
            return fock.make_thermal(shape, _scalars(node, "nbar", M, path), leakage_tol=leakage_tol)
        if kind == "squeezed_vacuum":
            return fock.make_sq_vac(shape, float(p["r"]), float(p.get("theta", 0.0)), leakage_tol=leakage_tol)
        if kind == "tmsv":
            return fock.make_tmsv(shape, float(p["r"]), leakage_tol=leakage_tol)
        if kind == "tensor":
            out, k = None, 0
            for i, f in enumerate(p["factors"]):
                fp = f"{path}.parameters.factors[{i}]"
                m = _modes_of(f, fp)
                s = _build(f, cutoffs[k:k + m], leakage_tol, fp)
                k += m
                out = s if out is None else fock.tensor(out, s)
            return out
        if kind == "mixture":
            comps = p["components"]
            w = np.array([float(c["weight"]) for c in comps])
            if abs(w.sum() - 1.0) > MIX_WEIGHT_TOL:
                raise SpecError(f"{path}.parameters.components: weights sum to {w.sum():.12g}, not 1")
            w = w / w.sum()
            parts = [(float(wi), _build(c["state"], cutoffs, leakage_tol,
                                        f"{path}.parameters.components[{i}].state"))
                     for i, (wi, c) in enumerate(zip(w, comps))]
            return fock.mix(parts)
        if kind == "raw_amplitudes":
            amps = np.array([_complex(x) for x in p["amplitudes"]])
            if amps.size != shape.dimension:
                raise SpecError(f"{path}.parameters.amplitudes: {amps.size} entries, "
                                f"shape needs {shape.dimension}")
            return fock.from_amplitudes(shape, amps, leakage_tol=leakage_tol)
        if kind == "raw_density":
            rows = p["density"]
            if len(rows) != shape.dimension or any(len(r) != shape.dimension for r in rows):
                raise SpecError(f"{path}.parameters.density: must be {shape.dimension} x {shape.dimension}")
            rho = np.array([[_complex(x) for x in r] for r in rows])
            return fock.from_density(shape, rho, leakage_tol=leakage_tol)
    except (SpecError, CutoffError, TruncationError, ValueError) as exc:
        if getattr(exc, "located", False):
            raise
        cls = type(exc) if isinstance(exc, (SpecError, CutoffError, TruncationError)) else SpecError
        msg = str(exc)
        where = path
        if isinstance(exc, CutoffError) and kind == "coherent":
            where += ".parameters.alpha"
        elif isinstance(exc, CutoffError) and kind == "fock":
            where += ".parameters.n"
        elif kind in RAW_FIELDS:
            where += ".parameters." + RAW_FIELDS[kind]
        elif isinstance(exc, (CutoffError, TruncationError)):
            where += ".shape"
        located = cls(msg if msg.startswith(path) else f"{where}: {msg}")
        located.located = True
        raise located from None
    raise SpecError(f"{path}.constructor: unknown constructor {kind!r}")


@dataclass
class LoadedState:
    state: FockState
    spec: dict
    cutoffs: tuple[int, ...]
    cutoffs_source: str
    digest: str
    source: str = "<memory>"
    notes: list[str] = field(default_factory=list)

    def describe(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "digest": self.digest,
            "constructor": self.spec["constructor"],
            "num_modes": self.state.num_modes,
            "cutoffs": list(self.cutoffs),
            "cutoffs_source": self.cutoffs_source,
            "kind": self.state.kind,
            "leakage": self.state.leakage,
            "provenance": self.spec.get("provenance", ""),
        }


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def load_state_text(text: str, source: str = "<memory>") -> LoadedState:
    doc = _parse_yaml(text, source)
    if not isinstance(doc, dict):
        raise SpecError(f"{source}: a state spec must be a mapping, got {type(doc).__name__}")
    lines = _line_map(text)
    _validate(doc, "state_spec", source, lines)
    return _load(doc, source, digest_bytes(text.encode()), lines)


def load_state_dict(doc: dict, source: str = "<memory>") -> LoadedState:
    _validate(doc, "state_spec", source, {})
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return _load(doc, source, digest_bytes(text.encode()), {})


def load_state(path) -> LoadedState:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read state spec {str(path)!r}: {exc.strerror}") from None
    return load_state_text(text, str(path))


def _load(doc: dict, source: str, digest: str, lines: dict) -> LoadedState:
    leak = float(doc.get("leakage_tol", fock.DEFAULT_LEAKAGE_TOL))
    try:
        explicit = "cutoffs" in (doc.get("shape") or {})
        cutoffs = default_cutoffs(doc)
        if math.prod(cutoffs) > fock.MAX_DIMENSION:
            raise CutoffError(f"spec.shape.cutoffs: dimension guard: product of cutoffs {cutoffs} exceeds {fock.MAX_DIMENSION}")
        state = _build(doc, cutoffs, leak, "spec")
    except (SpecError, CutoffError, TruncationError) as exc:
        field_path, _, rest = str(exc).partition(": ")
        parts = tuple(int(x) if x.isdigit() else x
                      for x in field_path.replace("[", ".").replace("]", "").split(".")[1:])
        label = _fmt_path(parts)
        raise type(exc)(f"{_where(source, lines, parts)}: field {label}: {rest}") from None
    return LoadedState(state, doc, tuple(cutoffs), "explicit" if explicit else "default", digest, source)


# ---------------------------------------------------------------------------
# Correlation grids


def load_grid_text(text: str, source: str = "<memory>") -> tuple[CorrelationGrid, str]:
    doc = _parse_yaml(text, source)
    if not isinstance(doc, dict):
        raise SpecError(f"{source}: a correlation grid must be a mapping")
    lines = _line_map(text)
    _validate(doc, "correlation_grid", source, lines)
    try:
        grid = CorrelationGrid(doc["times"], doc["taus"], np.array(doc["g2"], dtype=float),
                               doc.get("g1"), bool(doc.get("stationary", False)))
    except ValueError as exc:
        raise SpecError(f"{source}: {exc}") from None
    return grid, digest_bytes(text.encode())


def load_grid(path) -> tuple[CorrelationGrid, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read grid {str(path)!r}: {exc.strerror}") from None
    return load_grid_text(text, str(path))


def coherent_mixture_doc(spec: fock.CoherentMixtureSpec, cutoffs) -> dict:
    """A StateSpec document reproducing ``spec`` (used to report failing draws)."""
    comps = [{"weight": w, "state": {"constructor": "coherent",
                                     "parameters": {"alpha": [[a.real, a.imag] for a in alpha]}}}
             for w, alpha in spec.components]
    return {"schema_version": SCHEMA_VERSION, "shape": {"cutoffs": list(cutoffs)},
            "constructor": "mixture", "parameters": {"components": comps}}
