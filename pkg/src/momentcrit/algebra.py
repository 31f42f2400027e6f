"""Symbolic ladder-operator algebra in normally ordered canonical form.

Every polynomial is stored as a map from a monomial key to a complex
coefficient.  A key is a sorted tuple of ``(mode, p, q)`` triples meaning
``prod_m (a_m^dag)^p (a_m)^q``; modes with ``p == q == 0`` are omitted, so the
identity has the empty key ``()``.

Rendering format
----------------
``render`` writes one term per summand, joined by ``" + "``.  A term is the
coefficient as ``(re+imi)`` followed by ``<name>d^<p> <name>^<q>`` for every
mode up to the highest mode used by the operator.  Modes are named ``a``,
``b``, ``c``, then ``m3``, ``m4``, ... .  Example: ``(0.5+0i) ad^1 a^0 bd^0 b^1``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

DROP_REL = 1e-14
_MODE_NAMES = ("a", "b", "c")


def mode_name(m: int) -> str:
    return _MODE_NAMES[m] if m < len(_MODE_NAMES) else f"m{m}"


def mode_index(name: str) -> int:
    if name in _MODE_NAMES:
        return _MODE_NAMES.index(name)
    if re.fullmatch(r"m\d+", name):
        return int(name[1:])
    raise ValueError(f"unknown mode name {name!r}")


def phase(phi: float) -> complex:
    """``exp(i phi)``, exact at integer multiples of pi/2."""
    k = phi / (math.pi / 2)
    if abs(k - round(k)) < 1e-15 * max(1.0, abs(k)):
        return (1, 1j, -1, -1j)[int(round(k)) % 4]
    return cmath.exp(1j * phi)


# ---------------------------------------------------------------------------
# Keys and per-mode reordering
# ---------------------------------------------------------------------------

def make_key(exponents: Mapping[int, tuple[int, int]]) -> tuple:
    out = []
    for m in sorted(exponents):
        p, q = exponents[m]
        if p < 0 or q < 0:
            raise ValueError("exponents must be non-negative")
        if p or q:
            out.append((int(m), int(p), int(q)))
    return tuple(out)


def key_dict(key: tuple) -> dict[int, tuple[int, int]]:
    return {m: (p, q) for m, p, q in key}


@lru_cache(maxsize=None)
def reorder_coefficients(q: int, p: int) -> tuple[tuple[int, int], ...]:
    """Expansion of ``a^q (a^dag)^p`` as ``sum_k c_k (a^dag)^(p-k) a^(q-k)``.

    Returns ``((k, c_k), ...)`` with ``c_k = k! C(q,k) C(p,k)`` as exact integers.
    """
    return tuple((k, math.factorial(k) * math.comb(q, k) * math.comb(p, k)) for k in range(min(p, q) + 1))


def _mode_product(pq1: tuple[int, int], pq2: tuple[int, int]) -> list[tuple[int, int, int]]:
    """(a^dag^p1 a^q1)(a^dag^p2 a^q2) as a list of (p, q, integer coefficient)."""
    p1, q1 = pq1
    p2, q2 = pq2
    return [(p1 + p2 - k, q1 + q2 - k, c) for k, c in reorder_coefficients(q1, p2)]


def _key_product(k1: tuple, k2: tuple) -> list[tuple[tuple, int]]:
    d1, d2 = key_dict(k1), key_dict(k2)
    partial: list[tuple[dict, int]] = [({}, 1)]
    for m in sorted(set(d1) | set(d2)):
        expansions = _mode_product(d1.get(m, (0, 0)), d2.get(m, (0, 0)))
        partial = [
            ({**exps, m: (p, q)}, c * ck) for exps, c in partial for p, q, ck in expansions
        ]
    return [(make_key(exps), c) for exps, c in partial]


def _key_normal_product(k1: tuple, k2: tuple) -> tuple:
    d1, d2 = key_dict(k1), key_dict(k2)
    out = {}
    for m in set(d1) | set(d2):
        p1, q1 = d1.get(m, (0, 0))
        p2, q2 = d2.get(m, (0, 0))
        out[m] = (p1 + p2, q1 + q2)
    return make_key(out)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    """``coeff * prod_m (a_m^dag)^p_m (a_m)^q_m``."""

    coeff: complex
    key: tuple = ()

    @classmethod
    def of(cls, coeff: complex = 1.0, **exponents) -> "Monomial":
        """``Monomial.of(0.5, a=(1, 0), b=(0, 1))`` is ``0.5 a^dag b``."""
        return cls(complex(coeff), make_key({mode_index(k): v for k, v in exponents.items()}))

    def to_poly(self) -> "PolyOperator":
        return PolyOperator({self.key: self.coeff})


class PolyOperator:
    """Finite complex combination of normally ordered monomials (immutable)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple, complex] | Iterable[tuple[tuple, complex]] = ()):
        acc: dict[tuple, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            key = tuple(key)
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = _simplify(acc)

    # construction ---------------------------------------------------------
    @classmethod
    def identity(cls, c: complex = 1.0) -> "PolyOperator":
        return cls({(): c})

    @classmethod
    def zero(cls) -> "PolyOperator":
        return cls()

    @classmethod
    def ladder(cls, mode: int, dagger: bool = False) -> "PolyOperator":
        return cls({((mode, 1, 0) if dagger else (mode, 0, 1),): 1.0})

    @classmethod
    def monomial(cls, exponents: Mapping[int, tuple[int, int]], coeff: complex = 1.0) -> "PolyOperator":
        return cls({make_key(exponents): coeff})

    @classmethod
    def coerce(cls, x) -> "PolyOperator":
        if isinstance(x, PolyOperator):
            return x
        if isinstance(x, Monomial):
            return x.to_poly()
        if isinstance(x, Word):
            return rewrite_normal(x)
        if isinstance(x, (int, float, complex, np.number)):
            return cls.identity(complex(x))
        raise TypeError(f"cannot interpret {type(x).__name__} as an operator")

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def modes(self) -> set[int]:
        return {m for key in self._terms for m, _, _ in key}

    @property
    def num_modes(self) -> int:
        ms = self.modes()
        return max(ms) + 1 if ms else 0

    def degree(self) -> int:
        return max((sum(p + q for _, p, q in key) for key in self._terms), default=0)

    def coefficient(self, key: tuple) -> complex:
        return self._terms.get(tuple(key), 0j)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return self.is_close(self.adjoint(), tol)

    def is_close(self, other, tol: float = 1e-12) -> bool:
        other = PolyOperator.coerce(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= tol for k in keys)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # algebra --------------------------------------------------------------
    def adjoint(self) -> "PolyOperator":
        return adjoint(self)

    def __eq__(self, other) -> bool:
        try:
            other = PolyOperator.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other):
        try:
            other = PolyOperator.coerce(other)
        except TypeError:
            return NotImplemented
        return PolyOperator(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return PolyOperator({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = PolyOperator.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return PolyOperator.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return PolyOperator({k: c * other for k, c in self._terms.items()})
        try:
            other = PolyOperator.coerce(other)
        except TypeError:
            return NotImplemented
        return operator_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return PolyOperator.coerce(other) * self

    def __truediv__(self, x):
        return self * (1.0 / x)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = PolyOperator.identity()
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"PolyOperator({render(self)!r})"

    def __str__(self):
        return render(self)


def _simplify(acc: dict[tuple, complex]) -> dict[tuple, complex]:
    nz = {k: c for k, c in acc.items() if c != 0}
    if not nz:
        return {}
    cut = DROP_REL * max(abs(c) for c in nz.values())
    return {k: nz[k] for k in sorted(nz) if abs(nz[k]) >= cut}


@dataclass(frozen=True)
class Word:
    """Non-commutative product of ladder letters, read left to right."""

    letters: tuple[tuple[int, bool], ...] = ()
    coeff: complex = 1.0

    def __post_init__(self):
        letters = tuple((int(m), bool(d)) for m, d in self.letters)
        if any(m < 0 for m, _ in letters):
            raise ValueError("mode indices must be non-negative")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coeff", complex(self.coeff))

    @classmethod
    def parse(cls, text: str, coeff: complex = 1.0) -> "Word":
        """Parse whitespace-separated letters such as ``"a a^ b^"``.

        A trailing ``^``, ``d`` or a dagger sign marks a creation operator.
        """
        letters = []
        for tok in text.split():
            dag = tok.endswith(("^", "†")) or (tok.endswith("d") and len(tok) > 1)
            name = tok[:-1] if dag else tok
            letters.append((mode_index(name), dag))
        return cls(tuple(letters), coeff)

    def adjoint(self) -> "Word":
        return Word(tuple((m, not d) for m, d in reversed(self.letters)), self.coeff.conjugate())

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters, self.coeff * other.coeff)

    def __len__(self):
        return len(self.letters)

    def modes(self) -> set[int]:
        return {m for m, _ in self.letters}

    def __str__(self):
        body = " ".join(mode_name(m) + ("^" if d else "") for m, d in self.letters)
        return f"{_fmt_coeff(self.coeff)} {body}".rstrip()


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def adjoint(op) -> PolyOperator:
    op = PolyOperator.coerce(op)
    return PolyOperator({tuple((m, q, p) for m, p, q in key): c.conjugate() for key, c in op.items()})


def operator_product(f, g) -> PolyOperator:
    """Ordinary operator product ``f g`` rewritten into normal order."""
    f, g = PolyOperator.coerce(f), PolyOperator.coerce(g)
    acc: dict[tuple, complex] = {}
    for k1, c1 in f.items():
        for k2, c2 in g.items():
            for key, n in _key_product(k1, k2):
                acc[key] = acc.get(key, 0j) + c1 * c2 * float(n)
    return PolyOperator(acc)


def normal_product(f, g) -> PolyOperator:
    """``:f g:``, i.e. exponent addition with no commutator corrections."""
    f, g = PolyOperator.coerce(f), PolyOperator.coerce(g)
    acc: dict[tuple, complex] = {}
    for k1, c1 in f.items():
        for k2, c2 in g.items():
            key = _key_normal_product(k1, k2)
            acc[key] = acc.get(key, 0j) + c1 * c2
    return PolyOperator(acc)


def rewrite_normal(w) -> PolyOperator:
    """Expand a word (or polynomial) into normally ordered form."""
    if isinstance(w, PolyOperator):
        return w
    if not isinstance(w, Word):
        w = Word(tuple(w))
    # letters of different modes commute; keep the within-mode order
    per_mode: dict[int, list[tuple[int, int, int]]] = {}
    for m in sorted(w.modes()):
        poly = [(0, 0, 1)]
        for mm, dag in w.letters:
            if mm != m:
                continue
            step = (1, 0) if dag else (0, 1)
            nxt: dict[tuple[int, int], int] = {}
            for p, q, c in poly:
                for p2, q2, c2 in _mode_product((p, q), step):
                    nxt[(p2, q2)] = nxt.get((p2, q2), 0) + c * c2
            poly = [(p, q, c) for (p, q), c in sorted(nxt.items()) if c]
        per_mode[m] = poly
    partial: list[tuple[dict, int]] = [({}, 1)]
    for m, poly in per_mode.items():
        partial = [({**e, m: (p, q)}, c * ck) for e, c in partial for p, q, ck in poly]
    return PolyOperator([(make_key(e), w.coeff * float(c)) for e, c in partial])


def commutator(f, g) -> PolyOperator:
    f, g = PolyOperator.coerce(f), PolyOperator.coerce(g)
    return operator_product(f, g) - operator_product(g, f)


def transpose_modes(op, modes: Iterable[int]) -> PolyOperator:
    """Swap creation and annihilation exponents on ``modes`` (coefficients kept).

    For a monomial set whose elements carry only creation or only
    annihilation operators on each transposed mode, the normally ordered
    moment matrix of the image equals the partial-transpose moment matrix of
    the original set.
    """
    modes = set(modes)
    op = PolyOperator.coerce(op)
    return PolyOperator(
        {make_key({m: ((q, p) if m in modes else (p, q)) for m, p, q in key}): c for key, c in op.items()}
    )


def expect(op, state_or_cache) -> complex:
    """``<op>`` for a normally ordered polynomial on a state or MomentCache."""
    from .fock import cache_for

    cache = cache_for(state_or_cache)
    return cache.expect(PolyOperator.coerce(op).terms)


def shift_by_mean(op, state_or_cache) -> PolyOperator:
    """``op - <op>`` with the mean taken on the given state."""
    op = PolyOperator.coerce(op)
    return op - expect(op, state_or_cache)


# ---------------------------------------------------------------------------
# Named operators
# ---------------------------------------------------------------------------

def a(m: int = 0) -> PolyOperator:
    return PolyOperator.ladder(m, False)


def ad(m: int = 0) -> PolyOperator:
    return PolyOperator.ladder(m, True)


def number(m: int = 0) -> PolyOperator:
    return PolyOperator.monomial({m: (1, 1)})


def identity() -> PolyOperator:
    return PolyOperator.identity()


def _prod(ops: Sequence[PolyOperator]) -> PolyOperator:
    out = PolyOperator.identity()
    for op in ops:
        out = out * op
    return out


def quadrature(phi, c=None, modes: Sequence[int] | None = None) -> PolyOperator:
    """``sum_m c_m (a_m e^{i phi_m} + a_m^dag e^{-i phi_m})`` with real ``c_m``."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if modes is None:
        modes = tuple(range(phi.size))
    c = np.ones(len(modes)) if c is None else np.atleast_1d(np.asarray(c, dtype=float))
    if not (len(modes) == phi.size == c.size):
        raise ValueError("phi, c and modes must have equal length")
    out = PolyOperator.zero()
    for m, ph, cm in zip(modes, phi, c):
        out = out + float(cm) * (phase(ph) * a(m) + phase(-ph) * ad(m))
    return out


def a12(modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    return a(modes[0]) + a(modes[1])


def V(phi: float, modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    m1, m2 = modes
    return 0.5 * (phase(-phi) * a(m1) * a(m2) + phase(phi) * ad(m1) * ad(m2))


def V_z(modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    return 0.5 * (number(modes[0]) + number(modes[1]) + 1)


def W(phi: float, modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    m1, m2 = modes
    return 0.5 * (phase(phi) * a(m1) * ad(m2) + phase(-phi) * ad(m1) * a(m2))


def W_z(modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    return 0.5 * (number(modes[0]) - number(modes[1]))


def V_multi(phi: float, modes: Sequence[int]) -> PolyOperator:
    lower = _prod([a(m) for m in modes])
    return 0.5 * (phase(-phi) * lower + phase(phi) * lower.adjoint())


def W_multi(phi: float, modes: Sequence[int], K: int) -> PolyOperator:
    if not 0 < K < len(modes):
        raise ValueError(f"need 0 < K < M, got K={K}, M={len(modes)}")
    core = _prod([a(m) for m in modes[:K]] + [ad(m) for m in modes[K:]])
    half = 0.5 * phase(-phi) * core
    return half + half.adjoint()


def C_sum(modes: Sequence[int]) -> PolyOperator:
    return _prod([1 + number(m) for m in modes]) - _prod([number(m) for m in modes])


def C_diff(modes: Sequence[int], K: int) -> PolyOperator:
    ks, ms = modes[:K], modes[K:]
    return (_prod([1 + number(k) for k in ks]) * _prod([number(m) for m in ms])
            - _prod([number(k) for k in ks]) * _prod([1 + number(m) for m in ms]))


def D_diff(modes: Sequence[int], K: int) -> PolyOperator:
    ks, ms = modes[:K], modes[K:]
    return (_prod([1 + number(k) for k in ks]) * _prod([number(m) for m in ms])
            + _prod([number(k) for k in ks]) * _prod([1 + number(m) for m in ms])
            - 2 * _prod([number(j) for j in modes]))


def n_pm(sign: int, modes: tuple[int, int] = (0, 1)) -> PolyOperator:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return number(modes[0]) + sign * number(modes[1])


NAMED = {
    "identity": lambda: identity(),
    "a": a,
    "ad": ad,
    "n": number,
    "quadrature": quadrature,
    "a12": a12,
    "V": V,
    "V_z": V_z,
    "W": W,
    "W_z": W_z,
    "V_multi": V_multi,
    "W_multi": W_multi,
    "C_sum": C_sum,
    "C_diff": C_diff,
    "D_diff": D_diff,
    "n_pm": n_pm,
}


def build_named(name: str, **params) -> PolyOperator:
    try:
        builder = NAMED[name]
    except KeyError:
        raise KeyError(f"unknown operator {name!r}; known: {', '.join(sorted(NAMED))}") from None
    return builder(**params)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt_num(x: float) -> str:
    if x == 0:
        return "0"
    return repr(float(x)).rstrip("0").rstrip(".") if float(x).is_integer() else repr(float(x))


def _fmt_coeff(c: complex) -> str:
    re_s = _fmt_num(c.real)
    im_s = _fmt_num(c.imag)
    if not im_s.startswith("-"):
        im_s = "+" + im_s
    return f"({re_s}{im_s}i)"


def render(op) -> str:
    op = PolyOperator.coerce(op)
    if op.is_zero():
        return "(0+0i)"
    M = op.num_modes
    parts = []
    for key, c in op.items():
        d = key_dict(key)
        factors = []
        for m in range(M):
            p, q = d.get(m, (0, 0))
            name = mode_name(m)
            factors.append(f"{name}d^{p} {name}^{q}")
        parts.append(" ".join([_fmt_coeff(c)] + factors))
    return " + ".join(parts)
