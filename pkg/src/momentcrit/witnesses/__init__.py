"""Named nonclassicality and entanglement witnesses."""

from .entanglement import w_decomposition, w_duan, w_hz, w_mancini, w_simon
from .nonclassical import (
    w_agarwal,
    w_csi,
    w_difference_squeezing,
    w_difference_squeezing_mm,
    w_lee,
    w_principal_squeezing,
    w_quadrature_squeezing,
    w_sub_poisson,
    w_sum_squeezing,
    w_sum_squeezing_mm,
    w_zoo,
)
from .registry import REGISTRY, applicable, get, ids, parse_ref, run, run_all, split_refs, sweep
from .sweep import SweepResult, sweep_callable, sweep_discrete
from .twotime import CorrelationGrid, w_antibunching, w_hyperbunching
from .verdict import CLASSICAL, ENTANGLED, NONCLASSICAL, WitnessVerdict

__all__ = [
    "CLASSICAL", "ENTANGLED", "NONCLASSICAL", "REGISTRY", "CorrelationGrid", "SweepResult",
    "WitnessVerdict", "applicable", "get", "ids", "parse_ref", "run", "run_all", "split_refs",
    "sweep", "sweep_callable", "sweep_discrete", "w_agarwal", "w_antibunching", "w_csi",
    "w_decomposition", "w_difference_squeezing", "w_difference_squeezing_mm", "w_duan", "w_hz",
    "w_hyperbunching", "w_lee", "w_mancini", "w_principal_squeezing", "w_quadrature_squeezing",
    "w_simon", "w_sub_poisson", "w_sum_squeezing", "w_sum_squeezing_mm", "w_zoo",
]
