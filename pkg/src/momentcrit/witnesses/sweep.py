"""Deterministic scalar parameter sweeps: fixed grid, then golden-section refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .verdict import WitnessVerdict

GRID_POINTS = 64
GOLDEN_ITERATIONS = 40
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass
class SweepResult:
    parameter: str
    best_value: float
    best: WitnessVerdict
    trace: list[tuple[float, float]] = field(default_factory=list)


def _objective(v: WitnessVerdict) -> float:
    # smaller is "more violating"
    return -v.margin


def golden_minimize(f: Callable[[float], float], lo: float, hi: float,
                    iterations: int = GOLDEN_ITERATIONS) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def minimize_scalar(f: Callable[[float], float], lo: float, hi: float, grid: int = GRID_POINTS,
                    iterations: int = GOLDEN_ITERATIONS) -> tuple[float, list[tuple[float, float]]]:
    """Grid scan of ``f`` on ``[lo, hi]`` then golden-section on the best cell."""
    if not (hi > lo) or grid < 2:
        raise ValueError(f"empty sweep range [{lo}, {hi}] with {grid} grid points")
    memo: dict[float, float] = {}

    def g(x: float) -> float:
        if x not in memo:
            memo[x] = f(x)
        return memo[x]

    xs = [lo + (hi - lo) * i / (grid - 1) for i in range(grid)]
    trace = [(x, g(x)) for x in xs]
    i_best = min(range(grid), key=lambda i: trace[i][1])
    a = xs[max(i_best - 1, 0)]
    b = xs[min(i_best + 1, grid - 1)]
    x_ref, f_ref, gtrace = _golden_with_trace(g, a, b, iterations)
    trace += gtrace
    x_best = x_ref if f_ref < trace[i_best][1] else xs[i_best]
    return x_best, trace


def sweep_callable(fn: Callable[[float], WitnessVerdict], lo: float, hi: float, parameter: str = "x",
                   grid: int = GRID_POINTS, iterations: int = GOLDEN_ITERATIONS) -> SweepResult:
    """Minimise ``value - threshold`` of ``fn(x)`` over ``[lo, hi]``."""
    cache: dict[float, WitnessVerdict] = {}

    def run(x: float) -> WitnessVerdict:
        if x not in cache:
            cache[x] = fn(x)
        return cache[x]

    x_best, trace = minimize_scalar(lambda x: _objective(run(x)), lo, hi, grid, iterations)
    return SweepResult(parameter, x_best, run(x_best), trace)


def _golden_with_trace(f, a, b, iterations):
    trace: list[tuple[float, float]] = []

    def g(x):
        y = f(x)
        trace.append((x, y))
        return y

    x, y = golden_minimize(g, a, b, iterations)
    return x, y, trace


def sweep_discrete(fn: Callable[[float], WitnessVerdict], values: Sequence, parameter: str = "x") -> SweepResult:
    values = list(values)
    if not values:
        raise ValueError("empty sweep range")
    trace = []
    best = None
    best_x = None
    for x in values:
        v = fn(x)
        trace.append((x, _objective(v)))
        if best is None or _objective(v) < _objective(best):
            best, best_x = v, x
    return SweepResult(parameter, best_x, best, trace)
