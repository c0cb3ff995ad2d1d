import pytest

from catalogs import case_fixtures_p3, double_p2_catalog
from aswdegen.errors import HypothesisViolated, SchemaError
from aswdegen.ffseries import BiElement, ResidueSeries
from aswdegen.torsor_p import alpha_p_equivalent
from aswdegen.torsor_p2 import (DegenDataP2, DegTypeP2, carry_level, classify_boundary_p2,
                                displayed_witness_pair, extract_degen_data, is_admissible_pair,
                                lift_degen_data, normalize_germ_p2, normalized_witness_pair,
                                satisfies_condition_star)

FIXTURES = {label: (A1, A2, levels) for label, A1, A2, levels in case_fixtures_p3()}


def test_carry_level():
    assert carry_level(3, 3) == 21
    assert carry_level(2, 1) == 3


@pytest.mark.parametrize("label", list(FIXTURES))
def test_germ_branches_and_levels(label):
    A1, A2, levels = FIXTURES[label]
    cover = normalize_germ_p2(A1, A2)
    assert cover.case == label
    assert (cover.n1, cover.n2) == levels
    assert cover.delta == cover.delta1 + cover.delta2 == 2 * (levels[0] + levels[1])


@pytest.mark.parametrize("label", ["b", "c-1", "c-4", "c-5"])
def test_default_lift_reproduces_datum(label):
    A1, A2, levels = FIXTURES[label]
    datum = extract_degen_data(normalize_germ_p2(A1, A2))
    lifted = lift_degen_data(datum)
    again = normalize_germ_p2(lifted.generic.x1, lifted.generic.x2)
    assert (again.n1, again.n2) == levels
    assert extract_degen_data(again).canonical() == datum.canonical()


@pytest.mark.parametrize("label", ["c-2", "c-3"])
def test_branches_above_the_carry_need_the_second_lift_variant(label):
    A1, A2, levels = FIXTURES[label]
    datum = extract_degen_data(normalize_germ_p2(A1, A2))
    assert not datum.carry_marker
    lifted = lift_degen_data(datum, variant=2, m=10)
    again = normalize_germ_p2(lifted.generic.x1, lifted.generic.x2)
    assert again.case == label and (again.n1, again.n2) == levels
    assert extract_degen_data(again).canonical() == datum.canonical()
    assert lifted.predicted_delta == (6, 16)


def test_lift_and_datum_validation():
    a = ResidueSeries(3, {1: 1})
    zeros = (ResidueSeries.zero(3),) * 2
    with pytest.raises(HypothesisViolated):
        lift_degen_data(DegenDataP2("C", a, a, zeros, False, (2, 5)))
    with pytest.raises(HypothesisViolated):
        DegenDataP2("C", ResidueSeries(3, {3: 1}), a, zeros)
    with pytest.raises(SchemaError):
        DegenDataP2("C", a, a, zeros[:1])
    with pytest.raises(SchemaError):
        DegenDataP2("D", a, a)
    with pytest.raises(HypothesisViolated):
        DegenDataP2("B", a, ResidueSeries(3, {3: 1}))


def test_kind_b_canonical_form_drops_regular_pth_powers():
    datum = DegenDataP2("B", ResidueSeries(3, {1: 1}), ResidueSeries(3, {1: 1, 3: 2, -3: 1}), levels=(0, 2))
    assert datum.canonical().second == ResidueSeries(3, {1: 1, -3: 1})


@pytest.mark.parametrize("pair,default,strict,star", [
    (((0, -1), (0, -7)), True, True, True),
    (((0, -1), (0, -8)), False, False, False),
    (((0, -2), (0, -14)), True, True, True),
    (((3, -1), (7, -7)), True, True, True),
    (((3, -1), (6, -7)), False, False, False),
    (((3, -1), (8, -1)), True, True, False),
    (((0, -1), (2, -4)), True, False, False),
    (((0, -1), (2, -5)), False, True, False),
])
def test_admissibility_and_condition_star_at_p3(pair, default, strict, star):
    ty = DegTypeP2(*pair)
    assert is_admissible_pair(ty, 3) is default
    assert is_admissible_pair(ty, 3, strict_paper=True) is strict
    assert satisfies_condition_star(ty, 3) is star


def test_split_pairs_are_never_admissible():
    assert not is_admissible_pair(DegTypeP2((0, -1), (0, -7), "Full"), 3)
    with pytest.raises(SchemaError):
        DegTypeP2((0, -1), (0, -7), "Half")


@pytest.mark.parametrize("p", [2, 3])
def test_double_boundaries_classify_as_catalogued(p):
    for label, A1, A2, tside, _ in double_p2_catalog(p, 1):
        ty = classify_boundary_p2(BiElement(p, A1), BiElement(p, A2))
        assert (tuple(ty.first), tuple(ty.second)) == tside, label


def test_witness_forms():
    a = ResidueSeries(3, {1: 1})
    b = ResidueSeries(3, {0: 1})
    f, g = displayed_witness_pair(a, b)
    assert not alpha_p_equivalent(f, g, a)
    # the engine's own elimination of both coordinate systems gives equivalent torsors
    f, g = normalized_witness_pair(a, b)
    assert alpha_p_equivalent(f, g, a)
    with pytest.raises(HypothesisViolated):
        displayed_witness_pair(ResidueSeries(5, {1: 1}), ResidueSeries(5, {0: 1}))
