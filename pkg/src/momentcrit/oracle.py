"""Brute-force dense reference implementation used to cross-check the main path.

Everything here is built from explicit Kronecker products of truncated ladder
matrices and an explicit index transposition of the density matrix.  Nothing
is shared with the contraction or reordering code in ``fock``/``moments``
beyond the operator containers themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .algebra import PolyOperator, Word
from .fock import DENSITY, FockState, ModeShape
from .moments import GAMMA, NORMAL, PLAIN, MomentMatrix, OperatorSet

MAX_ORACLE_DIM = 2048


@dataclass(frozen=True, eq=False)
class DenseOperator:
    shape: ModeShape
    matrix: np.ndarray

    def __post_init__(self):
        D = self.shape.dimension
        if self.matrix.shape != (D, D):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match dimension {D}")

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.shape, self.matrix.conj().T)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.shape, self.matrix @ other.matrix)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.shape, self.matrix - other.matrix)


def _check_size(shape: ModeShape, allow_large: bool):
    if shape.dimension > MAX_ORACLE_DIM and not allow_large:
        raise ValueError(
            f"oracle dimension {shape.dimension} exceeds {MAX_ORACLE_DIM}; pass allow_large=True"
        )


def lowering_matrix(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def _local(d: int, p: int, q: int) -> np.ndarray:
    A = lowering_matrix(d)
    Ad = A.T.copy()
    return np.linalg.matrix_power(Ad, p) @ np.linalg.matrix_power(A, q)


def _embed(shape: ModeShape, factors: dict[int, np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m, d in enumerate(shape.cutoffs):
        out = np.kron(out, factors.get(m, np.eye(d, dtype=complex)))
    return out


def materialize(op, shape, *, allow_large: bool = False) -> DenseOperator:
    """Dense matrix of a normally ordered polynomial or a plain word."""
    shape = shape if isinstance(shape, ModeShape) else ModeShape(tuple(shape))
    _check_size(shape, allow_large)
    D = shape.dimension
    if isinstance(op, Word):
        mat = op.coeff * np.eye(D, dtype=complex)
        for m, dag in op.letters:
            A = lowering_matrix(shape.cutoffs[m])
            mat = mat @ _embed(shape, {m: A.T if dag else A})
        return DenseOperator(shape, mat)
    op = PolyOperator.coerce(op)
    if op.num_modes > shape.num_modes:
        raise ValueError("operator references modes outside the shape")
    mat = np.zeros((D, D), dtype=complex)
    for key, c in op.items():
        factors = {m: _local(shape.cutoffs[m], p, q) for m, p, q in key}
        mat += c * _embed(shape, factors)
    return DenseOperator(shape, mat)


def oracle_expect(state: FockState, op) -> complex:
    X = materialize(op, state.shape, allow_large=True).matrix
    if state.is_pure:
        psi = state.amplitudes
        return complex(np.vdot(psi, X @ psi))
    return complex(np.trace(X @ state.amplitudes))


def oracle_pt(state: FockState, pt_modes: Iterable[int]) -> FockState:
    """Explicit partial transpose of a density operator on ``pt_modes``."""
    if state.kind != DENSITY:
        raise ValueError("oracle_pt needs a density operator; call as_density() first")
    dims = state.cutoffs
    M = len(dims)
    t = state.amplitudes.reshape(dims + dims)
    axes = list(range(2 * M))
    for m in pt_modes:
        axes[m], axes[M + m] = axes[M + m], axes[m]
    D = state.shape.dimension
    rho_g = np.ascontiguousarray(np.transpose(t, axes)).reshape(D, D)
    return FockState(state.shape, DENSITY, rho_g, state.leakage)


def _normal_dense(fi: PolyOperator, fj: PolyOperator, shape: ModeShape) -> np.ndarray:
    # :f_i^dag f_j: assembled term by term from raw exponents
    D = shape.dimension
    out = np.zeros((D, D), dtype=complex)
    for ki, ci in fi.items():
        for kj, cj in fj.items():
            exps: dict[int, list[int]] = {}
            for m, p, q in ki:  # adjoint of the i-side term swaps p and q
                e = exps.setdefault(m, [0, 0])
                e[0] += q
                e[1] += p
            for m, p, q in kj:
                e = exps.setdefault(m, [0, 0])
                e[0] += p
                e[1] += q
            factors = {m: _local(shape.cutoffs[m], p, q) for m, (p, q) in exps.items()}
            out += np.conj(ci) * cj * _embed(shape, factors)
    return out


def oracle_moment_matrix(F: OperatorSet, state: FockState, mode: str = NORMAL,
                         pt_modes: Iterable[int] = (), *, allow_large: bool = False) -> MomentMatrix:
    """Moment matrix by dense traces.

    ``normal``: ``tr[:f_i^dag f_j: rho]``.  ``plain``: ``tr[f_i^dag f_j rho]``.
    ``gamma``: ``tr[f_i^dag f_j rho^Gamma]`` with rho^Gamma from ``oracle_pt``.
    """
    if not isinstance(F, OperatorSet):
        F = OperatorSet.of(*F)
    shape = state.shape
    _check_size(shape, allow_large)
    pt_modes = tuple(sorted(pt_modes))
    N = len(F)
    rho = state.density()
    if mode == GAMMA:
        rho = oracle_pt(state.as_density(), pt_modes).amplitudes
    out = np.empty((N, N), dtype=complex)
    if mode == NORMAL:
        for i in range(N):
            for j in range(N):
                out[i, j] = np.trace(_normal_dense(F.ops[i], F.ops[j], shape) @ rho)
    elif mode in (GAMMA, PLAIN):
        mats = [materialize(f, shape, allow_large=True).matrix for f in F.ops]
        for i in range(N):
            for j in range(N):
                out[i, j] = np.trace(mats[i].conj().T @ mats[j] @ rho)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return MomentMatrix(out, mode, F, pt_modes if mode == GAMMA else (), 0.0)


def min_eigenvalue(state: FockState) -> float:
    return float(np.linalg.eigvalsh(state.density())[0])
