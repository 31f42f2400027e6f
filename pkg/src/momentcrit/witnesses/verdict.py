"""Verdict record shared by every witness, plus tolerance helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import NumericalInconsistencyError
from ..moments import MomentMatrix, positivity

CLASSICAL = "classical-consistent"
NONCLASSICAL = "nonclassical"
ENTANGLED = "entangled(NPT)"

DEFAULT_TOL_REL = 1e-8
AGREE_REL = 1e-9


@dataclass
class WitnessVerdict:
    """Outcome of one witness on one state.

    ``margin = threshold - value``; a positive margin larger than
    ``tolerance`` is a violation of the classical (or separable) bound.
    """

    witness_id: str
    verdict: str
    value: float
    threshold: float
    margin: float
    tolerance: float
    determinants: dict[str, float] = field(default_factory=dict)
    quantities: dict[str, Any] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    notes: str = ""
    params: dict[str, Any] = field(default_factory=dict)
    provenance: list[dict[str, Any]] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return self.verdict != CLASSICAL

    @property
    def relative_margin(self) -> float:
        """Margin in units of the tolerance scale (tolerance / tol_rel)."""
        tol_rel = self.params.get("tol_rel", DEFAULT_TOL_REL)
        unit = self.tolerance / tol_rel if tol_rel else 1.0
        return self.margin / unit if unit else self.margin


def matrix_record(name: str, Mx: MomentMatrix, tol_rel: float) -> dict[str, Any]:
    rep = positivity(Mx, tol_rel)
    return {
        "name": name,
        "mode": Mx.describe(),
        "operators": list(Mx.source.labels),
        "size": Mx.size,
        "scale": Mx.scale,
        "asymmetry": Mx.asymmetry,
        "determinant": rep.determinant,
        "min_eigenvalue": rep.min_eigenvalue,
        "positivity": rep.verdict,
        "entries": Mx.entries,
    }


def det_tolerance(Mx: MomentMatrix, tol_rel: float) -> float:
    """Absolute tolerance for an N x N determinant: ``tol_rel * scale**N``."""
    return tol_rel * Mx.scale ** Mx.size


def decide(witness_id: str, value: float, threshold: float, tolerance: float, label: str,
           **extra) -> WitnessVerdict:
    margin = threshold - value
    verdict = label if margin > tolerance else CLASSICAL
    return WitnessVerdict(witness_id, verdict, float(value), float(threshold), float(margin),
                          float(tolerance), **extra)


def check_agree(name: str, x: float, y: float, unit: float, leakage: float = 0.0,
                rel: float = AGREE_REL) -> float:
    """Require ``|x - y| <= (rel + 10 * leakage) * unit``; returns the gap.

    Identities that involve ``<1>`` pick up corrections proportional to the
    truncation leakage, hence the leakage term.
    """
    gap = abs(x - y)
    bound = (rel + 10.0 * leakage) * max(unit, 1e-300)
    if not np.isfinite(gap) or gap > bound:
        raise NumericalInconsistencyError(
            f"{name}: paths disagree, |{x!r} - {y!r}| = {gap:.3e} > {bound:.3e}"
        )
    return gap
