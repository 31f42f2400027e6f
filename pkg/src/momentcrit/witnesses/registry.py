"""Catalog of named witnesses keyed by stable string ids.

A reference may carry parameters in brackets, e.g. ``table2.hz.x60[m=2,n=1]``
or ``table1.quadrature_squeezing[phi=min,offsets=0:1.5707963267948966]``.
Vector values are ``:``-separated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import SpecError
from ..fock import MomentCache, cache_for
from . import entanglement as ent
from . import nonclassical as nc
from .verdict import DEFAULT_TOL_REL, WitnessVerdict

ENTANGLEMENT = "table2"
NONCLASSICALITY = "table1"


@dataclass(frozen=True)
class WitnessEntry:
    witness_id: str
    table: str
    operator_set: str
    threshold: str
    min_modes: int
    max_modes: int | None
    runner: Callable[..., WitnessVerdict]
    defaults: dict[str, Any] = field(default_factory=dict)
    uses_pt: bool = False
    description: str = ""

    def accepts(self, num_modes: int) -> bool:
        return num_modes >= self.min_modes and (self.max_modes is None or num_modes <= self.max_modes)

    def run(self, state, params: dict | None = None, *, tol_rel: float = DEFAULT_TOL_REL,
            pt_mode: int | None = None) -> WitnessVerdict:
        cache = cache_for(state)
        M = cache.state.num_modes
        if not self.accepts(M):
            span = f"{self.min_modes}" if self.max_modes == self.min_modes else \
                f"{self.min_modes}..{self.max_modes if self.max_modes else 'any'}"
            raise SpecError(f"witness {self.witness_id} needs {span} modes, state has {M}")
        params = dict(params or {})
        unknown = set(params) - set(self.defaults)
        if unknown:
            allowed = ", ".join(sorted(self.defaults)) or "none"
            raise SpecError(f"witness {self.witness_id}: unknown parameter(s) "
                            f"{', '.join(sorted(unknown))}; allowed: {allowed}")
        merged = {**self.defaults, **params}
        kwargs: dict[str, Any] = {"tol_rel": tol_rel, "witness_id": self.witness_id}
        if self.uses_pt:
            kwargs["pt_mode"] = 0 if pt_mode is None else int(pt_mode)
            if not 0 <= kwargs["pt_mode"] < M:
                raise SpecError(f"pt mode {kwargs['pt_mode']} outside 0..{M - 1}")
        v = self.runner(cache, **merged, **kwargs)
        v.params.setdefault("id_params", {k: merged[k] for k in sorted(merged)})
        return v


def _entries() -> list[WitnessEntry]:
    E = WitnessEntry
    out = [
        E("table1.quadrature_squeezing", NONCLASSICALITY, "(1, X_phi)", "d < 0", 1, None,
          lambda c, phi, offsets, weights, **kw: nc.w_quadrature_squeezing(
              c, phi, c=weights, offsets=offsets, **kw),
          {"phi": "min", "offsets": None, "weights": None},
          description="multimode quadrature squeezing; phi is a common rotation of all phases"),
        E("table1.principal_squeezing.luks", NONCLASSICALITY, "(da12^dag, da12) = (1, a12^dag, a12)",
          "d < 0", 2, 2, lambda c, **kw: nc.w_principal_squeezing(c, **kw)),
        E("table1.sum_squeezing.hillery", NONCLASSICALITY, "(1, V_phi)", "d < 0", 2, 2,
          lambda c, phi, **kw: nc.w_sum_squeezing(c, phi, **kw), {"phi": "min"}),
        E("table1.sum_squeezing.an_tinh", NONCLASSICALITY, "(1, calV_phi)", "d < 0", 2, None,
          lambda c, phi, **kw: nc.w_sum_squeezing_mm(c, phi, **kw), {"phi": "min"}),
        E("table1.difference_squeezing.hillery", NONCLASSICALITY, "(1, W_phi)",
          "d < 0 (squeezed if d < -min(<n1>,<n2>)/2)", 2, 2,
          lambda c, phi, **kw: nc.w_difference_squeezing(c, phi, **kw), {"phi": "min"}),
        E("table1.difference_squeezing.an_tinh", NONCLASSICALITY, "(1, calW_phi)",
          "d < 0 (squeezed if d < (|<C>| - <D>)/4)", 2, None,
          lambda c, phi, K, **kw: nc.w_difference_squeezing_mm(c, phi, K=K, **kw),
          {"phi": "min", "K": 1}),
        E("table1.sub_poisson.sum", NONCLASSICALITY, "(1, n1 + n2)", "d < 0", 2, 2,
          lambda c, **kw: nc.w_sub_poisson(c, +1, **kw)),
        E("table1.sub_poisson.difference", NONCLASSICALITY, "(1, n1 - n2)", "d < 0", 2, 2,
          lambda c, **kw: nc.w_sub_poisson(c, -1, **kw)),
        E("table1.csi.agarwal", NONCLASSICALITY, "(n1, n2)", "d < 0", 2, 2,
          lambda c, **kw: nc.w_agarwal(c, **kw)),
        E("table1.muirhead.lee", NONCLASSICALITY, "(n1 - n2) and (1, n1 - n2)", "d < 0", 2, 2,
          lambda c, **kw: nc.w_lee(c, **kw)),
    ]
    for var in nc.ZOO_VARIANTS:
        out.append(E(f"table1.zoo.{var}", NONCLASSICALITY,
                     "(" + ", ".join(nc.zoo_sets()[var].labels) + ")", "d < 0", 2, 2,
                     (lambda v: lambda c, **kw: nc.w_zoo(c, v, **kw))(var)))
    out += [
        E("table2.duan", ENTANGLEMENT, "Gamma(1, a, b) = (da, db^dag) = (1, a, b^dag)", "d < 0", 2, 2,
          lambda c, **kw: ent.w_duan(c, **kw), uses_pt=True),
        E("table2.simon", ENTANGLEMENT, "Gamma(1, a, a^, b, b^)", "d < 0", 2, 2,
          lambda c, **kw: ent.w_simon(c, **kw), uses_pt=True),
        E("table2.mancini", ENTANGLEMENT, "Gamma(1, a+b, a^+b^)", "d < 0", 2, 2,
          lambda c, **kw: ent.w_mancini(c, **kw), uses_pt=True),
    ]
    hz_params = {"x60": {"m": 1, "n": 1}, "z24": {"k": 1, "l": 1, "m": 1}, "z26": {"k": 1, "l": 1, "m": 1}}
    for var in ent.HZ_VARIANTS:
        nmodes = 3 if var in ent.THREE_MODE else 2
        F = ent.hz_set(var)
        out.append(E(f"table2.hz.{var}", ENTANGLEMENT, "Gamma(" + ", ".join(F.labels) + ")", "d < 0",
                     nmodes, nmodes, (lambda v: lambda c, **kw: ent.w_hz(c, v, **kw))(var),
                     hz_params.get(var, {}), uses_pt=True))
    for ident in ent.DECOMPOSITIONS:
        if ident == "simon_x43":
            continue
        FG = ent._sets((0, 1))[ident]
        out.append(E(f"table2.decomposition.{ident}", ENTANGLEMENT,
                     "Gamma(" + ", ".join(FG.labels) + ")", "d < 0", 2, 2,
                     (lambda i: lambda c, **kw: ent.w_decomposition(c, i, **kw))(ident), uses_pt=True))
    return sorted(out, key=lambda e: e.witness_id)


REGISTRY: dict[str, WitnessEntry] = {e.witness_id: e for e in _entries()}
GRID_WITNESSES = ("table1.antibunching", "table1.hyperbunching")


def ids() -> list[str]:
    return sorted(REGISTRY)


def get(witness_id: str) -> WitnessEntry:
    try:
        return REGISTRY[witness_id]
    except KeyError:
        raise SpecError(f"unknown witness id {witness_id!r}; valid ids: {', '.join(ids())}") from None


def applicable(num_modes: int, table: str | None = None) -> list[WitnessEntry]:
    return [e for e in REGISTRY.values() if e.accepts(num_modes) and (table is None or e.table == table)]


# ---------------------------------------------------------------------------
# Reference parsing

def _parse_value(text: str):
    text = text.strip()
    if ":" in text:
        return [float(x) for x in text.split(":")]
    if text in ("min", "none", "None"):
        return None if text.lower() == "none" else text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise SpecError(f"cannot parse parameter value {text!r}") from None


def parse_ref(ref: str) -> tuple[str, dict[str, Any]]:
    """``"table2.hz.x60[m=2,n=1]"`` -> ``("table2.hz.x60", {"m": 2, "n": 1})``."""
    m = re.fullmatch(r"\s*([A-Za-z0-9_.]+)\s*(?:\[(.*)\])?\s*", ref)
    if not m:
        raise SpecError(f"malformed witness reference {ref!r}")
    wid, body = m.group(1), m.group(2)
    params: dict[str, Any] = {}
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise SpecError(f"parameter {part!r} in {ref!r} must look like name=value")
            k, v = part.split("=", 1)
            params[k.strip()] = _parse_value(v)
    return wid, params


def split_refs(text: str) -> list[str]:
    """Split a comma-separated list, ignoring commas inside brackets."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur).strip())
    return [x for x in out if x]


def run(ref: str, state, *, tol_rel: float = DEFAULT_TOL_REL, pt_mode: int | None = None,
        params: dict | None = None) -> WitnessVerdict:
    wid, p = parse_ref(ref)
    return get(wid).run(state, {**p, **(params or {})}, tol_rel=tol_rel, pt_mode=pt_mode)


def run_all(state, *, tol_rel: float = DEFAULT_TOL_REL, pt_mode: int | None = None,
            table: str | None = None) -> list[WitnessVerdict]:
    cache = state if isinstance(state, MomentCache) else cache_for(state)
    return [e.run(cache, tol_rel=tol_rel, pt_mode=pt_mode)
            for e in applicable(cache.state.num_modes, table)]


def sweep(ref: str, state, parameter: str = "phi", lo: float | None = None, hi: float | None = None,
          values=None, *, tol_rel: float = DEFAULT_TOL_REL, pt_mode: int | None = None,
          grid: int | None = None, iterations: int | None = None):
    """Scan one witness parameter and return the most violating setting.

    Continuous parameters use a fixed grid followed by golden-section
    refinement on ``[lo, hi]``; integer parameters (or explicit ``values``)
    are scanned exhaustively.
    """
    from .sweep import GOLDEN_ITERATIONS, GRID_POINTS, sweep_callable, sweep_discrete

    wid, base = parse_ref(ref)
    entry = get(wid)
    if parameter not in entry.defaults:
        raise SpecError(f"witness {wid} has no parameter {parameter!r}")
    cache = cache_for(state)

    def fn(x):
        return entry.run(cache, {**base, parameter: x}, tol_rel=tol_rel, pt_mode=pt_mode)

    integer = isinstance(entry.defaults[parameter], int) and not isinstance(entry.defaults[parameter], bool)
    if values is not None or integer:
        if values is None:
            if lo is None or hi is None:
                raise ValueError("integer sweeps need lo and hi")
            values = range(int(lo), int(hi) + 1)
        return sweep_discrete(fn, values, parameter)
    if lo is None or hi is None:
        raise ValueError("continuous sweeps need lo and hi")
    return sweep_callable(fn, float(lo), float(hi), parameter,
                          grid or GRID_POINTS, GOLDEN_ITERATIONS if iterations is None else iterations)
