"""Truncated multimode Fock-space states and exact ladder-operator contractions.

Conventions
-----------
Mode ``m`` has local dimension ``d_m`` (levels ``0 .. d_m-1``).  The ladder
operators act as ``a|n> = sqrt(n)|n-1>`` and ``a^dag|n> = sqrt(n+1)|n+1>``, with
``a^dag|d-1> = 0``.  The truncated ``a^dag`` matrix is therefore exactly the
transpose of the truncated ``a`` matrix.

States are never renormalised after truncation; the lost norm (pure) or trace
(density) is stored as ``leakage``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CutoffError, TruncationError

DEFAULT_LEAKAGE_TOL = 1e-8
# Largest dense Hilbert-space dimension we are willing to allocate.
MAX_DIMENSION = 1 << 16

PURE = "pure"
DENSITY = "density"

# A normally ordered monomial key: sorted ((mode, p, q), ...) meaning
# prod_m (a_m^dag)^p (a_m)^q, with (p, q) == (0, 0) entries omitted.
MonomialKey = tuple


@dataclass(frozen=True)
class ModeShape:
    """Number of modes and per-mode local dimensions."""

    cutoffs: tuple[int, ...]

    def __post_init__(self):
        cutoffs = tuple(int(d) for d in self.cutoffs)
        object.__setattr__(self, "cutoffs", cutoffs)
        if len(cutoffs) < 1:
            raise CutoffError("a state needs at least one mode")
        if any(d < 2 for d in cutoffs):
            raise CutoffError(f"every cutoff must be >= 2, got {cutoffs}")
        if math.prod(cutoffs) > MAX_DIMENSION:
            raise CutoffError(
                f"total dimension {math.prod(cutoffs)} exceeds the dense limit {MAX_DIMENSION}"
            )

    @classmethod
    def of(cls, *cutoffs: int) -> "ModeShape":
        if len(cutoffs) == 1 and isinstance(cutoffs[0], (tuple, list)):
            cutoffs = tuple(cutoffs[0])
        return cls(tuple(cutoffs))

    @property
    def num_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dimension(self) -> int:
        return math.prod(self.cutoffs)


@dataclass(frozen=True, eq=False)
class FockState:
    """A pure vector or density operator on a truncated multimode Fock space.

    ``amplitudes`` is a flat vector of length ``D`` for pure states and a
    ``D x D`` matrix for density operators, ``D = prod(cutoffs)``, in row-major
    (mode 0 slowest) order.
    """

    shape: ModeShape
    kind: str
    amplitudes: np.ndarray
    leakage: float = field(default=0.0)

    def __post_init__(self):
        dim = self.shape.dimension
        arr = np.asarray(self.amplitudes, dtype=complex)
        if self.kind == PURE:
            if arr.shape != (dim,):
                raise ValueError(f"pure amplitudes must have shape ({dim},), got {arr.shape}")
        elif self.kind == DENSITY:
            if arr.shape != (dim, dim):
                raise ValueError(f"density must have shape ({dim}, {dim}), got {arr.shape}")
            if np.max(np.abs(arr - arr.conj().T), initial=0.0) > 1e-12:
                raise ValueError("density operator is not Hermitian to 1e-12")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def num_modes(self) -> int:
        return self.shape.num_modes

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return self.shape.cutoffs

    @property
    def is_pure(self) -> bool:
        return self.kind == PURE

    def norm(self) -> float:
        """Squared norm (pure) or trace (density) actually carried by the array."""
        if self.is_pure:
            return float(np.vdot(self.amplitudes, self.amplitudes).real)
        return float(np.trace(self.amplitudes).real)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return self.amplitudes

    def as_density(self) -> "FockState":
        if not self.is_pure:
            return self
        return FockState(self.shape, DENSITY, self.density(), self.leakage)

    def check(self, leakage_tol: float = DEFAULT_LEAKAGE_TOL, eig_tol: float = 1e-10) -> None:
        """Full invariant check, including positivity for density operators."""
        deficit = 1.0 - self.norm()
        if abs(deficit - self.leakage) > 1e-12:
            raise ValueError(f"recorded leakage {self.leakage} does not match norm deficit {deficit}")
        if self.leakage < 0.0 or self.leakage > leakage_tol:
            raise TruncationError(f"leakage {self.leakage:.3e} outside [0, {leakage_tol:.1e}]")
        if not self.is_pure:
            lowest = float(np.linalg.eigvalsh(self.amplitudes)[0])
            if lowest < -eig_tol:
                raise ValueError(f"density operator has eigenvalue {lowest:.3e} < -{eig_tol:.0e}")


def _finalize(shape: ModeShape, kind: str, data: np.ndarray, leakage_tol: float) -> FockState:
    state = FockState(shape, kind, data)
    deficit = 1.0 - state.norm()
    if deficit < -1e-12:
        raise ValueError(f"state norm exceeds one by {-deficit:.3e}")
    deficit = max(deficit, 0.0)
    if deficit > leakage_tol:
        raise TruncationError(
            f"truncation leakage {deficit:.3e} exceeds leakage_tol {leakage_tol:.1e}; "
            f"raise the cutoffs {shape.cutoffs} or pass a larger leakage_tol"
        )
    object.__setattr__(state, "leakage", deficit)
    return state


def _as_shape(shape) -> ModeShape:
    if isinstance(shape, ModeShape):
        return shape
    if isinstance(shape, int):
        return ModeShape((shape,))
    return ModeShape(tuple(shape))


def _kron_all(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


def _coherent_vector(alpha: complex, d: int) -> np.ndarray:
    c = np.empty(d, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, d):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def make_coherent(shape, alpha, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL,
                  allow_large_amplitude: bool = False) -> FockState:
    """Product coherent state |alpha_1> ... |alpha_M>, truncated, not renormalised.

    The soft guard ``|alpha_m|^2 <= d_m / 4`` keeps truncation leakage small;
    set ``allow_large_amplitude`` to bypass it.
    """
    shape = _as_shape(shape)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if alpha.shape != (shape.num_modes,):
        raise ValueError(f"need {shape.num_modes} amplitudes, got {alpha.shape[0]}")
    for m, (a, d) in enumerate(zip(alpha, shape.cutoffs)):
        if abs(a) ** 2 > d / 4 and not allow_large_amplitude:
            raise CutoffError(
                f"cutoff guard |alpha|^2 <= d/4 violated on mode {m}: "
                f"|alpha|^2 = {abs(a) ** 2:.4g}, d = {d}"
            )
    vec = _kron_all([_coherent_vector(a, d) for a, d in zip(alpha, shape.cutoffs)])
    return _finalize(shape, PURE, vec, leakage_tol)


def make_fock(shape, occupation) -> FockState:
    shape = _as_shape(shape)
    occupation = tuple(int(n) for n in np.atleast_1d(occupation))
    if len(occupation) != shape.num_modes:
        raise ValueError(f"need {shape.num_modes} occupations, got {len(occupation)}")
    for m, (n, d) in enumerate(zip(occupation, shape.cutoffs)):
        if not 0 <= n < d:
            raise CutoffError(f"occupation {n} on mode {m} outside 0..{d - 1}")
    vec = np.zeros(shape.dimension, dtype=complex)
    vec[np.ravel_multi_index(occupation, shape.cutoffs)] = 1.0
    return FockState(shape, PURE, vec, 0.0)


def make_thermal(shape, nbar, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> FockState:
    """Product of thermal (geometric photon-number) states, as a density operator."""
    shape = _as_shape(shape)
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    if nbar.shape != (shape.num_modes,):
        raise ValueError(f"need {shape.num_modes} mean occupations, got {nbar.shape[0]}")
    if np.any(nbar < 0):
        raise ValueError("mean occupations must be non-negative")
    diags = []
    for nb, d in zip(nbar, shape.cutoffs):
        n = np.arange(d)
        if nb == 0:
            p = (n == 0).astype(float)
        else:
            p = np.exp(n * math.log(nb / (1 + nb)) - math.log1p(nb))
        diags.append(p)
    p = _kron_all(diags).real
    return _finalize(shape, DENSITY, np.diag(p).astype(complex), leakage_tol)


def make_sq_vac(shape, r: float, theta: float = 0.0, *,
                leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> FockState:
    """Single-mode squeezed vacuum.

    Amplitudes ``c_{2k} = (e^{i theta} tanh r / 2)^k sqrt((2k)!) / (k! sqrt(cosh r))``,
    so ``<a^2> = e^{i theta} sinh r cosh r``.  At ``theta = 0`` the quadrature
    ``x(pi/2) = i(a - a^dag)`` is the squeezed one.
    """
    shape = _as_shape(shape)
    if shape.num_modes != 1:
        raise ValueError("squeezed vacuum is a single-mode state")
    d = shape.cutoffs[0]
    vec = np.zeros(d, dtype=complex)
    vec[0] = 1 / math.sqrt(math.cosh(r))
    ratio = np.exp(1j * theta) * math.tanh(r)
    for n in range(2, d, 2):
        # c_n / c_{n-2} = ratio * sqrt((n-1) n) / n ... written via the k recursion
        k = n // 2
        vec[n] = vec[n - 2] * ratio * math.sqrt((2 * k - 1) * 2 * k) / (2 * k)
    return _finalize(shape, PURE, vec, leakage_tol)


def make_tmsv(shape, r: float, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> FockState:
    """Two-mode squeezed vacuum ``sum_n tanh(r)^n / cosh(r) |n, n>``."""
    shape = _as_shape(shape)
    if shape.num_modes != 2:
        raise ValueError("two-mode squeezed vacuum needs exactly two modes")
    d1, d2 = shape.cutoffs
    vec = np.zeros((d1, d2), dtype=complex)
    t = math.tanh(r)
    for n in range(min(d1, d2)):
        vec[n, n] = t ** n / math.cosh(r)
    return _finalize(shape, PURE, vec.ravel(), leakage_tol)


def from_amplitudes(shape, amplitudes, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> FockState:
    return _finalize(_as_shape(shape), PURE, np.asarray(amplitudes, dtype=complex), leakage_tol)


def from_density(shape, rho, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL,
                 eig_tol: float = 1e-10) -> FockState:
    state = _finalize(_as_shape(shape), DENSITY, np.asarray(rho, dtype=complex), leakage_tol)
    state.check(leakage_tol=leakage_tol, eig_tol=eig_tol)
    return state


def tensor(s1: FockState, s2: FockState) -> FockState:
    """Product state; pure if both factors are pure."""
    shape = ModeShape(s1.cutoffs + s2.cutoffs)
    leakage = 1.0 - (1.0 - s1.leakage) * (1.0 - s2.leakage)
    if s1.is_pure and s2.is_pure:
        return FockState(shape, PURE, np.kron(s1.amplitudes, s2.amplitudes), leakage)
    return FockState(shape, DENSITY, np.kron(s1.density(), s2.density()), leakage)


def mix(components: Iterable[tuple[float, FockState]]) -> FockState:
    """Convex mixture ``sum_i w_i rho_i``; always returns a density operator."""
    components = list(components)
    if not components:
        raise ValueError("mixture needs at least one component")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must be non-negative and sum to 1, got {weights.tolist()}")
    shape = components[0][1].shape
    if any(s.shape != shape for _, s in components):
        raise ValueError("all mixture components must share one ModeShape")
    rho = np.zeros((shape.dimension, shape.dimension), dtype=complex)
    leakage = 0.0
    for w, s in components:
        rho += w * s.density()
        leakage += w * s.leakage
    rho = (rho + rho.conj().T) / 2
    return FockState(shape, DENSITY, rho, leakage)


@dataclass(frozen=True)
class CoherentMixtureSpec:
    """Weighted mixture of product coherent states; its P function is a sum of deltas."""

    components: tuple[tuple[float, tuple[complex, ...]], ...]

    def __post_init__(self):
        comps = tuple((float(w), tuple(complex(a) for a in alpha)) for w, alpha in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("need at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("weights must be positive")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if len({len(a) for _, a in comps}) != 1:
            raise ValueError("all amplitude vectors need the same number of modes")

    @property
    def num_modes(self) -> int:
        return len(self.components[0][1])

    @classmethod
    def random(cls, rng: np.random.Generator, num_modes: int = 2, max_components: int = 5,
               max_abs: float = 1.5) -> "CoherentMixtureSpec":
        k = int(rng.integers(1, max_components + 1))
        w = rng.random(k) + 0.05
        w = w / w.sum()
        comps = []
        for wi in w:
            mod = max_abs * np.sqrt(rng.random(num_modes))
            ph = rng.uniform(0, 2 * np.pi, num_modes)
            comps.append((float(wi), tuple(mod * np.exp(1j * ph))))
        # exact unit sum for the validator
        total = sum(wi for wi, _ in comps)
        comps[-1] = (comps[-1][0] + (1.0 - total), comps[-1][1])
        return cls(tuple(comps))

    def to_state(self, shape, *, leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> FockState:
        shape = _as_shape(shape)
        parts = [(w, make_coherent(shape, alpha, leakage_tol=leakage_tol)) for w, alpha in self.components]
        return mix(parts)


# ---------------------------------------------------------------------------
# Expectation values
# ---------------------------------------------------------------------------

def _lower(t: np.ndarray, axis: int) -> np.ndarray:
    d = t.shape[axis]
    out = np.zeros_like(t)
    src = [slice(None)] * t.ndim
    dst = [slice(None)] * t.ndim
    src[axis] = slice(1, d)
    dst[axis] = slice(0, d - 1)
    w_shape = [1] * t.ndim
    w_shape[axis] = d - 1
    out[tuple(dst)] = t[tuple(src)] * np.sqrt(np.arange(1, d)).reshape(w_shape)
    return out


def _raise(t: np.ndarray, axis: int) -> np.ndarray:
    d = t.shape[axis]
    out = np.zeros_like(t)
    src = [slice(None)] * t.ndim
    dst = [slice(None)] * t.ndim
    src[axis] = slice(0, d - 1)
    dst[axis] = slice(1, d)
    w_shape = [1] * t.ndim
    w_shape[axis] = d - 1
    out[tuple(dst)] = t[tuple(src)] * np.sqrt(np.arange(1, d)).reshape(w_shape)
    return out


def _word_letters(word) -> tuple[tuple[tuple[int, bool], ...], complex]:
    letters = getattr(word, "letters", None)
    if letters is not None:
        return tuple(letters), complex(getattr(word, "coeff", 1.0))
    return tuple((int(m), bool(dag)) for m, dag in word), 1.0 + 0j


def expect_word(state: FockState, word) -> complex:
    """<word> by applying the letters right to left on the truncated space.

    ``word`` is a sequence of ``(mode, dagger)`` letters read as an operator
    product (leftmost letter applied last), or any object with ``letters``
    and ``coeff`` attributes.
    """
    letters, coeff = _word_letters(word)
    M = state.num_modes
    for m, _ in letters:
        if not 0 <= m < M:
            raise ValueError(f"word references mode {m}, state has {M} modes")
    dims = state.cutoffs
    if state.is_pure:
        t = state.amplitudes.reshape(dims)
        out = t
        for m, dag in reversed(letters):
            out = _raise(out, m) if dag else _lower(out, m)
        return coeff * complex(np.vdot(t.ravel(), out.ravel()))
    D = state.shape.dimension
    t = state.amplitudes.reshape(dims + (D,))
    for m, dag in reversed(letters):
        t = _raise(t, m) if dag else _lower(t, m)
    return coeff * complex(np.trace(t.reshape(D, D)))


def _ladder_weights(n: np.ndarray, k: int) -> np.ndarray:
    """sqrt((n+k)! / n!) elementwise."""
    w = np.ones(n.shape, dtype=float)
    for j in range(1, k + 1):
        w = w * np.sqrt(n + j)
    return w


def expect_normal(state: FockState, key: MonomialKey) -> complex:
    """<prod_m (a_m^dag)^p_m (a_m)^q_m> for a normally ordered monomial key.

    Uses ``tr(a^dag^p a^q rho) = sum_n f_p(n) f_q(n) rho[n+q, n+p]`` per mode,
    which touches only O(D) entries.
    """
    M = state.num_modes
    dims = state.cutoffs
    pq = [(0, 0)] * M
    for m, p, q in key:
        if not 0 <= m < M:
            raise ValueError(f"monomial references mode {m}, state has {M} modes")
        pq[m] = (p, q)
    lengths = [d - max(p, q) for d, (p, q) in zip(dims, pq)]
    if any(L <= 0 for L in lengths):
        return 0j
    weights = [
        _ladder_weights(np.arange(L, dtype=float), p) * _ladder_weights(np.arange(L, dtype=float), q)
        for L, (p, q) in zip(lengths, pq)
    ]
    row = tuple(slice(q, q + L) for (p, q), L in zip(pq, lengths))
    col = tuple(slice(p, p + L) for (p, q), L in zip(pq, lengths))
    if state.is_pure:
        t = state.amplitudes.reshape(dims)
        block = t[col].conj() * t[row]
    else:
        t = state.amplitudes.reshape(dims + dims)
        sub = t[row + col]
        letters = "abcdefghijklmnop"[:M]
        block = np.einsum(f"{letters}{letters}->{letters}", sub)
    for m, w in enumerate(weights):
        shp = [1] * M
        shp[m] = w.size
        block = block * w.reshape(shp)
    return complex(block.sum())


class MomentCache:
    """Memoised normally ordered moments of one state.

    Entries are filled on first request and never change afterwards, so one
    cache can back every witness evaluated on the same state.
    """

    def __init__(self, state: FockState):
        self.state = state
        self._values: dict[MonomialKey, complex] = {}

    def __len__(self) -> int:
        return len(self._values)

    def normal(self, key: MonomialKey) -> complex:
        try:
            return self._values[key]
        except KeyError:
            value = 1.0 - self.state.leakage + 0j if not key else expect_normal(self.state, key)
            self._values[key] = value
            return value

    def expect(self, terms: Mapping[MonomialKey, complex]) -> complex:
        """Expectation of a polynomial given as ``{key: coefficient}``."""
        total = 0j
        for key, c in terms.items():
            total += c * self.normal(key)
        return total


def cache_for(state_or_cache) -> MomentCache:
    if isinstance(state_or_cache, MomentCache):
        return state_or_cache
    return MomentCache(state_or_cache)


# ---------------------------------------------------------------------------
# Cutoff suggestions
# ---------------------------------------------------------------------------

def _tail_cutoff(probs: np.ndarray, d_min: int, eps: float, power: int = 4) -> int:
    n = np.arange(probs.size, dtype=float)
    weighted = probs * (n + 1.0) ** power
    tail = np.cumsum(weighted[::-1])[::-1]
    ok = np.nonzero(tail < eps)[0]
    d = int(ok[0]) if ok.size else probs.size
    return max(d, d_min)


def suggest_cutoff(kind: str, eps: float = 1e-12, **params) -> int:
    """Smallest local dimension keeping degree-4 moment tails below ``eps``.

    ``kind`` is one of ``coherent`` (``alpha``), ``thermal`` (``nbar``),
    ``squeezed_vacuum`` (``r``), ``tmsv`` (``r``) or ``fock`` (``n``).
    """
    N = 4096
    n = np.arange(N, dtype=float)
    if kind == "coherent":
        mu = abs(complex(params["alpha"])) ** 2
        if mu == 0:
            return 2
        logp = -mu + n * math.log(mu) - np.array([math.lgamma(k + 1) for k in range(N)])
        d = _tail_cutoff(np.exp(logp), 8, eps)
        return max(d, math.ceil(4 * mu))
    if kind == "thermal":
        nb = float(params["nbar"])
        if nb == 0:
            return 2
        p = np.exp(n * math.log(nb / (1 + nb)) - math.log1p(nb))
        return _tail_cutoff(p, 8, eps)
    if kind == "squeezed_vacuum":
        r = float(params["r"])
        if r == 0:
            return 2
        t2 = math.tanh(abs(r)) ** 2
        k = n[: N // 2]
        logp = (k * math.log(t2) + np.array([math.lgamma(2 * j + 1) for j in range(N // 2)])
                - 2 * np.array([math.lgamma(j + 1) for j in range(N // 2)])
                - k * math.log(4) - math.log(math.cosh(r)))
        p = np.zeros(N)
        p[0::2] = np.exp(logp)
        return _tail_cutoff(p, 8, eps)
    if kind == "tmsv":
        r = float(params["r"])
        base = max(24, math.ceil(12 * math.cosh(r) ** 2))
        if r == 0:
            return base
        p = np.exp(n * math.log(math.tanh(abs(r)) ** 2) - 2 * math.log(math.cosh(r)))
        return max(base, _tail_cutoff(p, 8, eps))
    if kind == "fock":
        return int(params["n"]) + 5
    raise ValueError(f"no cutoff rule for {kind!r}")
