import pytest

from aswdegen.errors import HypothesisViolated, RootExtensionNeeded, TotallyRamified
from aswdegen.ffseries import BiElement, ResidueSeries
from aswdegen.torsor_p import (DegTypeP, RationalFunctionData, alpha_p_equivalent, conductor_at_point,
                               local_expansion, local_type_at_point, monomial_parameter,
                               normalize_boundary_p, normalize_germ_p, split_witness)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_radicial_boundary_type_and_delta(p):
    cover = normalize_boundary_p(BiElement(p, {(-2 * p, -1): 1}))
    assert cover.type == DegTypeP(2, -1)
    assert cover.delta == 2 * (p - 1)
    assert cover.special_fibre_rhs == ResidueSeries(p, {-1: 1})


@pytest.mark.parametrize("p", [2, 3, 5])
def test_type_is_invariant_under_artin_schreier_coboundaries(p):
    a = BiElement(p, {(-2 * p, -1): 1})
    b = BiElement(p, {(-2, -1): 1, (0, 2): 1})
    shifted = a + b.frobenius() - b
    assert normalize_boundary_p(shifted).type == normalize_boundary_p(a).type


def test_etale_and_split_boundaries():
    assert normalize_boundary_p(BiElement(3, {(0, -2): 1})).type == DegTypeP(0, -2)
    cover = normalize_boundary_p(BiElement(3, {(1, -2): 1}))
    assert cover.type.split and cover.delta == 0
    assert normalize_germ_p(BiElement(3, {(0, 1): 1})).type.is_etale


def test_totally_ramified_is_reported():
    with pytest.raises(TotallyRamified):
        normalize_boundary_p(BiElement(3, {(-1, -1): 1}))


def test_monomial_parameter():
    cover = normalize_boundary_p(BiElement(5, {(-5, -2): 4}))
    u = monomial_parameter(cover)
    assert pow(u, -2, 5) == 4
    with pytest.raises(RootExtensionNeeded) as exc:
        monomial_parameter(normalize_boundary_p(BiElement(5, {(-5, -2): 2})))
    assert exc.value.degree == 2


def test_split_witness_solves_the_equation_up_to_truncation():
    a = BiElement(3, {(1, -1): 1})
    b = split_witness(a, 4)
    residual = b.frobenius() - b + a
    assert residual.gauss_valuation() >= 81
    with pytest.raises(HypothesisViolated):
        split_witness(BiElement(3, {(0, 1): 1}))


def test_rational_function_local_data():
    f = RationalFunctionData.from_terms(3, [(0, -2, 1), (1, -1, 2), (0, 4, 1)])
    assert f.poles() == [0, 1, "inf"]
    assert [local_type_at_point(f, q, "etale") for q in f.poles()] == [-2, -1, -4]
    assert conductor_at_point(f, "inf", "etale") == 4
    # at x = 2 all terms are regular: x^-2 + 2(x-1)^-1 + x^4 evaluated at 2 is 1 mod 3
    assert local_expansion(f, 2, 4).coeff(0) == 1


def test_etale_type_strips_pth_power_poles():
    g = RationalFunctionData.from_terms(3, [(0, -3, 1)])
    assert local_type_at_point(g, 0, "etale") == -1
    with pytest.raises(HypothesisViolated):
        local_type_at_point(g, 0, "bogus")


def test_alpha_p_equivalence_in_cover_ring():
    v = ResidueSeries(3, {1: 1})  # y^3 = x
    assert alpha_p_equivalent({(3, 0): 1}, {}, v)
    assert alpha_p_equivalent({(1, 0): 1}, {}, v)
    assert not alpha_p_equivalent({(0, 1): 1}, {}, v)
    assert alpha_p_equivalent({(0, 1): 1, (2, 0): 1}, {(0, 1): 1, (2, 0): 1}, v)
    with pytest.raises(HypothesisViolated):
        alpha_p_equivalent({}, {}, ResidueSeries(3, {3: 1}))
