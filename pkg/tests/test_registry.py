import math

import pytest

from momentcrit import fock
from momentcrit.errors import SpecError
from momentcrit.witnesses import registry as reg
from momentcrit.witnesses.verdict import CLASSICAL, ENTANGLED


def test_id_count_and_sorted():
    ids = reg.ids()
    assert ids == sorted(ids)
    assert len(ids) == 29
    assert "table2.hz.x4" in ids and "table1.csi.agarwal" in ids


def test_tables_disjoint():
    for e in reg.REGISTRY.values():
        assert e.witness_id.startswith(e.table + ".")


def test_grid_witnesses_not_state_witnesses():
    for wid in reg.GRID_WITNESSES:
        assert wid not in reg.REGISTRY
        with pytest.raises(SpecError):
            reg.get(wid)


def test_unknown_id_lists_valid():
    with pytest.raises(SpecError, match="table2.duan"):
        reg.get("table9.nope")


@pytest.mark.parametrize("ref,expected", [
    ("table2.hz.x4", ("table2.hz.x4", {})),
    ("table2.hz.x60[m=2,n=1]", ("table2.hz.x60", {"m": 2, "n": 1})),
    ("table1.quadrature_squeezing[phi=0.5]", ("table1.quadrature_squeezing", {"phi": 0.5})),
    ("table1.quadrature_squeezing[offsets=0:1.5]", ("table1.quadrature_squeezing", {"offsets": [0.0, 1.5]})),
    ("table1.sum_squeezing.hillery[phi=min]", ("table1.sum_squeezing.hillery", {"phi": "min"})),
])
def test_parse_ref(ref, expected):
    assert reg.parse_ref(ref) == expected


@pytest.mark.parametrize("ref", ["", "a b", "table2.hz.x60[m]", "table2.hz.x60[m=two]"])
def test_parse_ref_errors(ref):
    with pytest.raises(SpecError):
        reg.parse_ref(ref)


def test_split_refs_keeps_brackets():
    assert reg.split_refs("table2.hz.x60[m=2,n=1], table2.duan") == ["table2.hz.x60[m=2,n=1]", "table2.duan"]


def test_applicable_by_modes():
    two = {e.witness_id for e in reg.applicable(2)}
    three = {e.witness_id for e in reg.applicable(3)}
    assert "table2.hz.x4" in two and "table2.hz.x4" not in three
    assert "table2.hz.x34" in three and "table2.hz.x34" not in two
    assert {e.witness_id for e in reg.applicable(1)} == {"table1.quadrature_squeezing"}


def test_run_tmsv(tmsv_one):
    v = reg.run("table2.hz.x4", tmsv_one)
    assert v.verdict == ENTANGLED
    assert v.value == pytest.approx(-math.sinh(1.0) ** 2, abs=1e-9)


def test_run_params_and_echo(tmsv_half):
    v = reg.run("table2.hz.x60[m=2]", tmsv_half)
    assert v.params["id_params"] == {"m": 2, "n": 1}


def test_run_rejects_unknown_param(tmsv_half):
    with pytest.raises(SpecError, match="allowed"):
        reg.run("table2.duan[phi=1]", tmsv_half)


def test_run_rejects_wrong_mode_count(sq_vac_half):
    with pytest.raises(SpecError, match="modes"):
        reg.run("table2.duan", sq_vac_half)


def test_run_rejects_pt_mode_out_of_range(tmsv_half):
    with pytest.raises(SpecError):
        reg.run("table2.hz.x4", tmsv_half, pt_mode=2)


def test_run_all_coherent_classical(coherent2):
    vs = reg.run_all(coherent2)
    assert len(vs) == len(reg.applicable(2))
    assert all(v.verdict == CLASSICAL for v in vs)


def test_run_all_table_filter(coherent2):
    vs = reg.run_all(coherent2, table=reg.ENTANGLEMENT)
    assert vs and all(v.witness_id.startswith("table2.") for v in vs)


def test_discrete_sweep(tmsv_half):
    res = reg.sweep("table2.hz.x60", tmsv_half, "m", 1, 3)
    assert [x for x, _ in res.trace] == [1, 2, 3]
    assert res.best_value == min(res.trace, key=lambda t: t[1])[0] == 2
    assert res.best.params["m"] == 2


def test_sweep_vacuum_product():
    st = fock.make_fock((4, 4), (0, 0))
    res = reg.sweep("table1.quadrature_squeezing", st, "phi", 0.0, math.pi)
    assert res.best.verdict == CLASSICAL
