import pytest

from catalogs import genus_catalog
from aswdegen.errors import HypothesisViolated, NegativeGenus, NonIntegralGenus, SchemaError
from aswdegen.genus import (BoundaryEntry, GermGenusQuery, different_profile, different_step, germ_genus,
                            germ_genus_via_rh)


def q(p, kind, rank, r, *entries, thickness=None):
    return GermGenusQuery(p, kind, rank, r, tuple(entries), thickness)


def test_smooth_verdict_for_genus_zero_single_branch():
    res = germ_genus(q(3, "smooth", "p", 2, BoundaryEntry("p", (0, -1))))
    assert (res.genus, res.branches, res.verdict) == (0, 1, "smooth")
    assert res.formula == "(r+m-1)(p-1)/2"


def test_ordinary_double_point_verdict_and_thickness_divisibility():
    entries = (BoundaryEntry("p", (0, -1)), BoundaryEntry("p", (1, 1)))
    assert germ_genus(q(3, "double", "p", 0, *entries, thickness=3)).verdict == "ordinary double point"
    with pytest.raises(HypothesisViolated):
        germ_genus(q(3, "double", "p", 0, *entries, thickness=4))


def test_singular_verdict_when_genus_is_positive():
    res = germ_genus(q(3, "smooth", "p", 4, BoundaryEntry("split")))
    assert res.genus == 2 and res.branches == 3 and res.verdict == "singular"


def test_strict_flag_switches_factor_and_leaves_a_note():
    query = q(5, "double", "p", 4, BoundaryEntry("split"), BoundaryEntry("split"))
    default = germ_genus(query)
    strict = germ_genus(query, strict_paper=True)
    assert default.genus == 4 and strict.genus == 3
    assert any("strict" in n for n in strict.notes)
    assert germ_genus_via_rh(query) == default.genus


@pytest.mark.parametrize("p", [2, 3, 5])
def test_default_closed_form_matches_riemann_hurwitz(p):
    for label, query, _, _ in genus_catalog(p):
        try:
            g = germ_genus(query).genus
        except NonIntegralGenus:
            continue
        assert g == germ_genus_via_rh(query), label


def test_inequality_and_parity_failures():
    with pytest.raises(HypothesisViolated):
        germ_genus(q(3, "smooth", "p", 0, BoundaryEntry("split")))
    with pytest.raises(NonIntegralGenus):
        germ_genus(q(2, "smooth", "p", 3, BoundaryEntry("p", (0, -1))))


def test_negative_genus_from_riemann_hurwitz():
    with pytest.raises(NegativeGenus):
        germ_genus_via_rh(q(3, "smooth", "p", 0, BoundaryEntry("p", (0, -2))))


def test_query_schema_errors():
    with pytest.raises(SchemaError):
        q(3, "triple", "p", 0, BoundaryEntry("split"))
    with pytest.raises(SchemaError):
        q(3, "smooth", "p", 0, BoundaryEntry("split"), BoundaryEntry("split"))
    with pytest.raises(SchemaError):
        q(3, "smooth", "p", 0, BoundaryEntry("p", (0, -3)))
    with pytest.raises(SchemaError):
        q(3, "smooth", "p", 0, BoundaryEntry("pair", pair=((0, -1), (0, -7))))
    with pytest.raises(SchemaError):
        q(3, "double", "p", 0, BoundaryEntry("split"), BoundaryEntry("split"), thickness=0)
    with pytest.raises(SchemaError):
        GermGenusQuery.from_dict({"p": 3, "germ_kind": "smooth"})


def test_query_dict_round_trip():
    query = q(3, "smooth", "p2", 10, BoundaryEntry("pair", pair=((0, -1), (0, -7))))
    assert GermGenusQuery.from_dict(query.to_dict()).to_dict() == query.to_dict()


def test_different_profile():
    prof = different_profile(4, 16, 3, 2, 3)
    assert prof.values == (4, 10, 16) and prof.is_increasing
    assert prof.at(1) == different_step(4, 0, 1, 3, 3)
    with pytest.raises(HypothesisViolated):
        different_profile(4, 15, 3, 2, 3)
    with pytest.raises(HypothesisViolated):
        different_profile(0, 0, 0, 1, 3)
