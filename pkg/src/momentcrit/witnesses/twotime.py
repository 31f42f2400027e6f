"""Two-time intensity-correlation witnesses evaluated on sampled grids.

Values are looked up by exact match on the sample coordinates; there is no
interpolation between grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridLookupError
from .verdict import DEFAULT_TOL_REL, NONCLASSICAL, WitnessVerdict, check_agree, decide

MATCH_TOL = 1e-12
SCALE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    """``g2[i, j] = G2(times[i], times[i] + taus[j])`` and optional ``g1[i] = G1(times[i])``.

    For a stationary field only the first row is used and ``t`` is ignored.
    """

    times: tuple[float, ...]
    taus: tuple[float, ...]
    g2: np.ndarray
    g1: tuple[float, ...] | None = None
    stationary: bool = False

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        taus = tuple(float(t) for t in self.taus)
        g2 = np.asarray(self.g2, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "g2", g2)
        if not times or not taus:
            raise ValueError("grid needs at least one time and one delay")
        if g2.shape != (len(times), len(taus)):
            raise ValueError(f"G2 grid must be {len(times)} x {len(taus)}, got {g2.shape}")
        if not np.all(np.isfinite(g2)):
            raise ValueError("G2 grid contains non-finite values")
        if self.g1 is not None:
            g1 = tuple(float(x) for x in self.g1)
            if len(g1) != len(times):
                raise ValueError(f"G1 must have one value per time ({len(times)}), got {len(g1)}")
            object.__setattr__(self, "g1", g1)
        for i, t in enumerate(times):
            j = self._find(self.taus, 0.0)
            if j is not None and g2[i, j] < 0:
                raise ValueError(f"G2({t}, {t}) = {g2[i, j]} is negative")

    @staticmethod
    def _find(axis, x):
        for k, v in enumerate(axis):
            if abs(v - x) <= MATCH_TOL * max(1.0, abs(x)):
                return k
        return None

    def _row(self, t: float):
        if self.stationary:
            return 0
        return self._find(self.times, t)

    def G2(self, t: float, tau: float) -> float:
        i, j = self._row(t), self._find(self.taus, tau)
        if i is None or j is None:
            raise GridLookupError(f"grid has no sample at (t, tau) = ({t!r}, {tau!r})")
        return float(self.g2[i, j])

    def G1(self, t: float) -> float:
        if self.g1 is None:
            raise GridLookupError("grid carries no G1 values")
        i = self._row(t)
        if i is None:
            raise GridLookupError(f"grid has no G1 sample at t = {t!r}")
        return self.g1[i]


def _scale(*xs) -> float:
    return max(max(abs(x) for x in xs), SCALE_FLOOR)


def w_antibunching(grid: CorrelationGrid, t: float, tau: float, *, tol_rel: float = DEFAULT_TOL_REL,
                   witness_id: str = "table1.antibunching") -> WitnessVerdict:
    """``det [[G2(t,t), G2(t,t+tau)], [G2(t,t+tau), G2(t+tau,t+tau)]]``."""
    g_tt = grid.G2(t, 0.0)
    g_x = grid.G2(t, tau)
    g_ss = grid.G2(t + tau, 0.0)
    det = g_tt * g_ss - g_x ** 2
    s = _scale(g_tt, g_x, g_ss)
    denom = g_tt * g_ss
    g2n = g_x / math.sqrt(denom) if denom > 0 else None
    return decide(
        witness_id, det, 0.0, tol_rel * s ** 2, NONCLASSICAL,
        determinants={"d": det},
        quantities={"G2_tt": g_tt, "G2_t_tau": g_x, "G2_tau_tau": g_ss, "g2": g2n},
        params={"t": t, "tau": tau, "tol_rel": tol_rel},
    )


def w_hyperbunching(grid: CorrelationGrid, t: float, tau: float, *, tol_rel: float = DEFAULT_TOL_REL,
                    witness_id: str = "table1.hyperbunching") -> WitnessVerdict:
    """Covariance determinant, checked against the bordered 3x3 form with ``(1, n(t), n(t+tau))``."""
    g_tt = grid.G2(t, 0.0)
    g_x = grid.G2(t, tau)
    g_ss = grid.G2(t + tau, 0.0)
    n_t, n_s = grid.G1(t), grid.G1(t + tau)
    c_tt, c_x, c_ss = g_tt - n_t * n_t, g_x - n_t * n_s, g_ss - n_s * n_s
    det2 = c_tt * c_ss - c_x ** 2
    m3 = np.array([[1.0, n_t, n_s], [n_t, g_tt, g_x], [n_s, g_x, g_ss]])
    det3 = float(np.linalg.det(m3))
    s2 = _scale(c_tt, c_x, c_ss)
    s3 = _scale(1.0, n_t, n_s, g_tt, g_x, g_ss)
    check_agree("hyperbunching 2x2 vs 3x3", det2, det3, max(s2 ** 2, s3 ** 3))
    denom = c_tt * c_ss
    gbar = c_x / math.sqrt(denom) if denom > 0 else None
    return decide(
        witness_id, det2, 0.0, tol_rel * max(s2 ** 2, s3 ** 3), NONCLASSICAL,
        determinants={"d_2x2": det2, "d_3x3": det3},
        quantities={"cov_tt": c_tt, "cov_t_tau": c_x, "cov_tau_tau": c_ss, "g2_bar": gbar,
                    "G1_t": n_t, "G1_t_tau": n_s},
        params={"t": t, "tau": tau, "tol_rel": tol_rel},
    )
