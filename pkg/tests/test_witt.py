from itertools import product

import pytest

from aswdegen.errors import HypothesisViolated, SchemaError
from aswdegen.ffseries import BiElement, ResidueSeries
from aswdegen.witt import (GroupSchemeTag, WittVec2, carry_coefficients, frobenius_map, inclusion_map,
                           isogeny_phi_m1m2, isogeny_phi_m1m2_componentwise, isogeny_phi_n,
                           restriction, torsor_equations, verschiebung, witt_carry)


def const(p, c):
    return ResidueSeries.constant(p, c)


@pytest.mark.parametrize("p,expected", [(2, (1,)), (3, (1, 1)), (5, (1, 2, 2, 1))])
def test_carry_coefficients(p, expected):
    assert carry_coefficients(p) == expected


@pytest.mark.parametrize("p", [2, 3, 5])
def test_untwisted_constants_form_cyclic_group_of_order_p2(p):
    """W_2(F_p) is Z/p^2: the vector (1, 0) has additive order exactly p^2."""
    one = WittVec2(const(p, 1), const(p, 0))
    acc = WittVec2.zero_like(one)
    order = 0
    while True:
        acc = acc + one
        order += 1
        if acc.is_zero():
            break
    assert order == p * p


def test_twist_constraints():
    x = const(3, 1)
    with pytest.raises(HypothesisViolated):
        WittVec2(x, x, (1, 2))
    with pytest.raises(HypothesisViolated):
        WittVec2(x, x, (-1, 0))
    with pytest.raises(HypothesisViolated):
        WittVec2(x, x) + WittVec2(x, x, (0, 1))


def test_positive_scale_kills_carry_in_residue_domain():
    p = 3
    x, y = const(p, 1), const(p, 1)
    assert witt_carry(x, y, 1) == ResidueSeries.zero(p)
    assert witt_carry(x, y, 0) != ResidueSeries.zero(p)


def test_integral_carry_is_pi_scaled():
    p = 2
    x = BiElement(p, {(0, 1): 1})
    y = BiElement(p, {(0, 2): 1})
    assert witt_carry(x, y, 3) == witt_carry(x, y, 0).shift_pi(3)


def test_verschiebung_and_restriction_exact_sequence():
    p = 3
    v = verschiebung(ResidueSeries(p, {2: 1}))
    assert restriction(v) == ResidueSeries.zero(p)
    u = WittVec2(ResidueSeries(p, {1: 1}), ResidueSeries(p, {0: 2}))
    assert restriction(u + v) == restriction(u)


@pytest.mark.parametrize("p", [3, 5])
def test_isogeny_group_and_componentwise_agree_for_odd_p(p):
    for a, b in product(range(p), repeat=2):
        for tw in [(0, 0), (1, p), (1, p + 1)]:
            u = WittVec2(BiElement(p, {(0, 1): a}), BiElement(p, {(1, -1): b}), tw)
            assert isogeny_phi_m1m2(u) == isogeny_phi_m1m2_componentwise(u)


def test_isogeny_kernel_has_order_p2_for_p_equal_2():
    p = 2
    kernel_group = kernel_literal = 0
    for a, b in product(range(p), repeat=2):
        u = WittVec2(const(p, a), const(p, b))
        kernel_group += isogeny_phi_m1m2(u).is_zero()
        kernel_literal += isogeny_phi_m1m2_componentwise(u).is_zero()
    assert kernel_group == 4
    assert kernel_literal == 2


def test_isogeny_phi_n():
    x = BiElement(3, {(0, 1): 1})
    assert isogeny_phi_n(x, 2) == BiElement(3, {(0, 3): 1, (4, 1): 2})


def test_frobenius_and_inclusion_twists():
    u = WittVec2(BiElement(2, {(0, 1): 1}), BiElement(2, {(0, 1): 1}), (1, 3))
    assert frobenius_map(u).twist == (2, 6)
    assert inclusion_map(u).x1 == BiElement(2, {(1, 1): 1})


def test_group_scheme_tags_and_equations():
    assert GroupSchemeTag.Mn(0).kind == "EtaleZpZ"
    assert GroupSchemeTag.W(1, 3).rank_exponent == 2
    with pytest.raises(SchemaError):
        GroupSchemeTag("Foo")
    rec = torsor_equations(GroupSchemeTag.Mn(2), BiElement(3, {(0, -1): 1}))
    assert rec.unicode().startswith("X^p − π⁴X = ")
    rec2 = torsor_equations(GroupSchemeTag.W(1, 3), [BiElement(2, {(0, 1): 1}), BiElement(2, {(0, 3): 1})])
    assert "T2^p" in rec2.unicode() and "C(p,k)/p" in rec2.unicode()
    with pytest.raises(SchemaError):
        torsor_equations(GroupSchemeTag.W(1, 3), BiElement(2, {(0, 1): 1}))
