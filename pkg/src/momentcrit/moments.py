"""Matrices of moments and robust positivity decisions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import PolyOperator
from .errors import NumericalInconsistencyError
from .fock import MomentCache, cache_for

NORMAL = "normal"
GAMMA = "gamma"
PLAIN = "plain"

SCALE_FLOOR = 1e-12
ASYMMETRY_TOL = 1e-8
# entries of mean-shifted sets are differences of O(1) moments
ASYMMETRY_ABS = 1e-12
FLUSH_REL = 1e-30
MINOR_LIMIT = 6


@dataclass(frozen=True)
class OperatorSet:
    ops: tuple[PolyOperator, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        ops = tuple(PolyOperator.coerce(f) for f in self.ops)
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "labels", labels)
        if not ops:
            raise ValueError("an operator set needs at least one operator")
        if len(labels) != len(ops):
            raise ValueError("one label per operator is required")
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique, got {labels}")

    @classmethod
    def of(cls, *ops, labels: Sequence[str] | None = None) -> "OperatorSet":
        if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
            ops = tuple(ops[0])
        ops = tuple(PolyOperator.coerce(f) for f in ops)
        if labels is None:
            labels = tuple(alg.render(f) for f in ops)
            if len(set(labels)) != len(labels):
                labels = tuple(f"f{i}" for i in range(len(ops)))
        return cls(ops, tuple(labels))

    def __len__(self):
        return len(self.ops)

    def without(self, k: int) -> "OperatorSet":
        keep = [i for i in range(len(self)) if i != k]
        return self.subset(keep)

    def subset(self, idx: Iterable[int]) -> "OperatorSet":
        idx = list(idx)
        return OperatorSet(tuple(self.ops[i] for i in idx), tuple(self.labels[i] for i in idx))

    def modes(self) -> set[int]:
        out: set[int] = set()
        for f in self.ops:
            out |= f.modes()
        return out

    def transposed(self, pt_modes: Iterable[int]) -> "OperatorSet":
        pt = tuple(pt_modes)
        return OperatorSet(tuple(alg.transpose_modes(f, pt) for f in self.ops),
                           tuple(f"T[{s}]" for s in self.labels))


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    entries: np.ndarray
    mode: str
    source: OperatorSet
    pt_modes: tuple[int, ...] = ()
    asymmetry: float = 0.0

    @property
    def scale(self) -> float:
        return max(float(np.max(np.abs(self.entries))), SCALE_FLOOR)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def determinant(self) -> float:
        return float(np.linalg.det(self.entries).real)

    def submatrix(self, idx: Sequence[int]) -> "MomentMatrix":
        idx = list(idx)
        return MomentMatrix(self.entries[np.ix_(idx, idx)], self.mode, self.source.subset(idx),
                            self.pt_modes, self.asymmetry)

    def describe(self) -> str:
        if self.mode == GAMMA:
            return f"gamma(pt_modes={list(self.pt_modes)})"
        return self.mode


@dataclass(frozen=True)
class PositivityReport:
    determinant: float
    determinant_normalized: float
    min_eigenvalue: float
    scale: float
    tol_rel: float
    verdict: str
    all_principal_minors_nonneg: bool | None = None
    most_negative_minor: tuple[tuple[int, ...], float] | None = None
    eigenvalues: tuple[float, ...] = field(default=())

    @property
    def is_psd(self) -> bool:
        return self.verdict == "psd"

    @property
    def determinant_sign(self) -> int:
        if self.determinant_normalized < -self.tol_rel:
            return -1
        if self.determinant_normalized > self.tol_rel:
            return 1
        return 0


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _finish(raw: np.ndarray, mode: str, F: OperatorSet, pt_modes=()) -> MomentMatrix:
    herm = (raw + raw.conj().T) / 2
    asym = float(np.max(np.abs(raw - raw.conj().T))) / 2 if raw.size else 0.0
    scale = max(float(np.max(np.abs(herm))), SCALE_FLOOR)
    if asym > ASYMMETRY_TOL * scale + ASYMMETRY_ABS:
        raise NumericalInconsistencyError(
            f"{mode} moment matrix is not Hermitian: asymmetry {asym:.3e} vs scale {scale:.3e}; "
            "check cutoffs and operator modes"
        )
    herm.setflags(write=False)
    return MomentMatrix(herm, mode, F, tuple(pt_modes), asym)


def _check_modes(F: OperatorSet, cache: MomentCache):
    M = cache.state.num_modes
    bad = [m for m in F.modes() if m >= M]
    if bad:
        raise ValueError(f"operator set uses modes {sorted(bad)} but the state has {M} modes")


def build_normal(F: OperatorSet, state) -> MomentMatrix:
    """Entries ``<:f_i^dag f_j:>``."""
    if not isinstance(F, OperatorSet):
        F = OperatorSet.of(*F)
    cache = cache_for(state)
    _check_modes(F, cache)
    N = len(F)
    adj = [f.adjoint() for f in F.ops]
    raw = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            raw[i, j] = cache.expect(alg.normal_product(adj[i], F.ops[j]).terms)
    return _finish(raw, NORMAL, F)


@lru_cache(maxsize=65536)
def _swapped_pair(ki: tuple, kj: tuple, pt: frozenset) -> tuple[tuple[tuple, int], ...]:
    """Normal-ordered expansion of ``(f_i^dag f_j)^Gamma`` for monomial keys.

    On transposed modes the i- and j-side exponents trade places before the
    plain product is formed.
    """
    di, dj = alg.key_dict(ki), alg.key_dict(kj)
    left, right = {}, {}
    for m in set(di) | set(dj):
        src_l, src_r = (dj, di) if m in pt else (di, dj)
        p, q = src_l.get(m, (0, 0))
        left[m] = (q, p)  # adjoint of the left factor
        right[m] = src_r.get(m, (0, 0))
    return tuple(alg._key_product(alg.make_key(left), alg.make_key(right)))


def _plain_like(F: OperatorSet, state, pt_modes: Iterable[int], mode: str) -> MomentMatrix:
    if not isinstance(F, OperatorSet):
        F = OperatorSet.of(*F)
    cache = cache_for(state)
    _check_modes(F, cache)
    pt = frozenset(int(m) for m in pt_modes)
    M = cache.state.num_modes
    if any(not 0 <= m < M for m in pt):
        raise ValueError(f"pt modes {sorted(pt)} outside 0..{M - 1}")
    N = len(F)
    raw = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            total = 0j
            for ki, ci in F.ops[i].items():
                for kj, cj in F.ops[j].items():
                    w = ci.conjugate() * cj
                    for key, n in _swapped_pair(ki, kj, pt):
                        total += w * float(n) * cache.normal(key)
            raw[i, j] = total
    return _finish(raw, mode, F, tuple(sorted(pt)))


def build_gamma(F: OperatorSet, state, pt_modes: Iterable[int]) -> MomentMatrix:
    """Entries ``<(f_i^dag f_j)^Gamma>`` by the exponent-swap rule on ``pt_modes``."""
    pt_modes = tuple(pt_modes)
    if not pt_modes:
        raise ValueError("build_gamma needs at least one transposed mode")
    return _plain_like(F, state, pt_modes, GAMMA)


def build_plain(F: OperatorSet, state) -> MomentMatrix:
    """Entries ``<f_i^dag f_j>`` without normal ordering."""
    return _plain_like(F, state, (), PLAIN)


# ---------------------------------------------------------------------------
# Positivity
# ---------------------------------------------------------------------------

def principal_minors(A: np.ndarray) -> Iterable[tuple[tuple[int, ...], float]]:
    N = A.shape[0]
    for r in range(1, N + 1):
        for idx in itertools.combinations(range(N), r):
            yield idx, float(np.linalg.det(A[np.ix_(idx, idx)]).real)


def positivity(Mx: MomentMatrix | np.ndarray, tol_rel: float = 1e-9) -> PositivityReport:
    """Decide positive semidefiniteness with a scale-relative tolerance.

    The eigenvalue test is authoritative: ``npd`` iff the lowest eigenvalue is
    below ``-tol_rel * scale``.  The determinant is reported alongside, and its
    sign is read from ``det(M / scale)`` with the same ``tol_rel``.
    """
    A = Mx.entries if isinstance(Mx, MomentMatrix) else np.asarray(Mx, dtype=complex)
    A = (A + A.conj().T) / 2
    N = A.shape[0]
    scale = max(float(np.max(np.abs(A))), SCALE_FLOOR)
    An = A / scale
    # subnormal entries make LAPACK's LU divide by zero; they are far below any tolerance
    An[np.abs(An) < FLUSH_REL] = 0.0
    det_n = float(np.linalg.det(An).real)
    det = det_n * scale ** N
    eigs = np.linalg.eigvalsh(A)
    lam = float(eigs[0])
    minors_ok = None
    worst = None
    if N <= MINOR_LIMIT:
        worst_idx, worst_val = min(principal_minors(An), key=lambda t: t[1])
        minors_ok = worst_val >= -tol_rel
        worst = (worst_idx, worst_val * scale ** len(worst_idx))
    if lam < -tol_rel * scale:
        verdict = "npd"
    elif minors_ok is False:
        verdict = "indefinite-negative-minor"
    else:
        verdict = "psd"
    return PositivityReport(det, det_n, lam, scale, tol_rel, verdict, minors_ok, worst,
                            tuple(float(e) for e in eigs))


def has_factorized_structure(F: OperatorSet) -> bool:
    """Each operator carries, per mode, only creation or only annihilation powers."""
    for f in F.ops:
        for m in f.modes():
            cre = any(p for key, _ in f.items() for mm, p, q in key if mm == m)
            ann = any(q for key, _ in f.items() for mm, p, q in key if mm == m)
            if cre and ann:
                return False
    return True


def separability_psd_check(F: OperatorSet, state, tol_rel: float = 1e-9) -> bool:
    """Whether the normally ordered moment matrix of ``F`` is PSD on ``state``.

    ``F`` must have the per-mode creation-only / annihilation-only structure
    for which PSD on product states implies PSD on all separable states.
    """
    if not isinstance(F, OperatorSet):
        F = OperatorSet.of(*F)
    if not has_factorized_structure(F):
        raise ValueError("operator set mixes creation and annihilation powers on one mode")
    return positivity(build_normal(F, state), tol_rel).is_psd
