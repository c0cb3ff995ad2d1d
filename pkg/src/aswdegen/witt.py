"""Length-two Witt vectors in characteristic p with a twisted group law.

A twist (m1, m2) with m2 - p*m1 >= 0 scales the carry of the second
component by pi^(m2 - p*m1).  Coefficients are either ``BiElement`` (the
integral ring, where pi is a genuine element) or ``ResidueSeries`` (the
special fibre, where pi = 0 so any positive scale kills the carry).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Union

from .errors import HypothesisViolated, SchemaError
from .ffseries import EXACT, BiElement, ResidueSeries

Coeff = Union[BiElement, ResidueSeries]


@lru_cache(maxsize=None)
def carry_coefficients(p: int) -> tuple[int, ...]:
    """(C(p,k)/p mod p) for k = 1..p-1, via exact integer binomials."""
    out = []
    for k in range(1, p):
        q, r = divmod(comb(p, k), p)
        assert r == 0
        out.append(q % p)
    return tuple(out)


def _zero_like(x: Coeff) -> Coeff:
    if isinstance(x, BiElement):
        return BiElement.zero(x.p, EXACT, x.t_window)
    return ResidueSeries.zero(x.p)


def pi_power(x: Coeff, e: int) -> Coeff | None:
    """Multiply x by pi^e; in the residue domain pi^e = 0 for e > 0."""
    if e < 0:
        raise HypothesisViolated(f"negative pi-exponent {e}")
    if isinstance(x, BiElement):
        return x.shift_pi(e)
    return x if e == 0 else _zero_like(x)


def witt_carry(x1: Coeff, y1: Coeff, scale_exp: int = 0) -> Coeff:
    """pi^scale_exp * sum_k (C(p,k)/p) x1^k y1^(p-k)."""
    if scale_exp < 0:
        raise HypothesisViolated(f"carry scale exponent {scale_exp} < 0")
    p = x1.p
    if isinstance(x1, ResidueSeries) and scale_exp > 0:
        return _zero_like(x1)
    total = _zero_like(x1)
    for k, c in enumerate(carry_coefficients(p), start=1):
        if c:
            total = total + (x1 ** k * y1 ** (p - k)).scale(c)
    return pi_power(total, scale_exp)


@dataclass(frozen=True)
class WittVec2:
    x1: Coeff
    x2: Coeff
    twist: tuple[int, int] = (0, 0)

    def __post_init__(self):
        m1, m2 = self.twist
        if m1 < 0 or m2 < 0:
            raise HypothesisViolated(f"twist {self.twist} has a negative entry")
        if m2 - self.p * m1 < 0:
            raise HypothesisViolated(f"twist {self.twist} violates m2 - p*m1 >= 0")
        if type(self.x1) is not type(self.x2) or self.x1.p != self.x2.p:
            raise HypothesisViolated("Witt components must share domain and characteristic")

    @property
    def p(self) -> int:
        return self.x1.p

    @property
    def scale_exp(self) -> int:
        return self.twist[1] - self.p * self.twist[0]

    @classmethod
    def zero_like(cls, u: "WittVec2") -> "WittVec2":
        return cls(_zero_like(u.x1), _zero_like(u.x2), u.twist)

    def _same(self, other: "WittVec2"):
        if not isinstance(other, WittVec2):
            raise TypeError("expected a WittVec2")
        if other.twist != self.twist:
            raise HypothesisViolated(f"twist mismatch {self.twist} vs {other.twist}")

    def __add__(self, other: "WittVec2") -> "WittVec2":
        self._same(other)
        return WittVec2(self.x1 + other.x1,
                        self.x2 + other.x2 - witt_carry(self.x1, other.x1, self.scale_exp),
                        self.twist)

    def __neg__(self) -> "WittVec2":
        # second component solves x2 + y2 - carry(x1, -x1) = 0
        y1 = -self.x1
        return WittVec2(y1, -self.x2 + witt_carry(self.x1, y1, self.scale_exp), self.twist)

    def __sub__(self, other: "WittVec2") -> "WittVec2":
        return self + (-other)

    def is_zero(self) -> bool:
        z1 = _zero_like(self.x1)
        return self.x1 == z1 and self.x2 == _zero_like(self.x2)


def witt_add(u: WittVec2, v: WittVec2) -> WittVec2:
    return u + v


def witt_sub(u: WittVec2, v: WittVec2) -> WittVec2:
    return u - v


def witt_neg(u: WittVec2) -> WittVec2:
    return -u


def verschiebung(x: Coeff, twist: tuple[int, int] = (0, 0)) -> WittVec2:
    return WittVec2(_zero_like(x), x, twist)


def restriction(u: WittVec2) -> Coeff:
    return u.x1


def to_generic(u: WittVec2) -> tuple[BiElement, BiElement]:
    """Coordinates in the untwisted Witt group over K: (x1/pi^m1, x2/pi^m2)."""
    if not isinstance(u.x1, BiElement):
        raise HypothesisViolated("generic-fibre coordinates need integral (BiElement) components")
    m1, m2 = u.twist
    return u.x1.shift_pi(-m1), u.x2.shift_pi(-m2)


def from_generic(y1: BiElement, y2: BiElement, twist: tuple[int, int]) -> WittVec2:
    m1, m2 = twist
    return WittVec2(y1.shift_pi(m1), y2.shift_pi(m2), twist)


def isogeny_phi_n(x: BiElement, n: int) -> BiElement:
    """x^p - pi^((p-1)n) x."""
    if n < 0:
        raise HypothesisViolated("n must be >= 0")
    return x ** x.p - pi_power(x, (x.p - 1) * n)


def frobenius_map(u: WittVec2) -> WittVec2:
    m1, m2 = u.twist
    p = u.p
    return WittVec2(u.x1 ** p, u.x2 ** p, (p * m1, p * m2))


def inclusion_map(u: WittVec2) -> WittVec2:
    m1, m2 = u.twist
    p = u.p
    return WittVec2(pi_power(u.x1, m1 * (p - 1)), pi_power(u.x2, m2 * (p - 1)), (p * m1, p * m2))


def isogeny_phi_m1m2(u: WittVec2) -> WittVec2:
    """Frobenius minus the inclusion, as a difference in the twisted group law.

    For odd p this equals the componentwise expression
    (x1^p - pi^{m1(p-1)} x1, x2^p - pi^{m2(p-1)} x2 - sum_k (C(p,k)/p) pi^{m2 p - m1(pk+p-k)} x1^{pk} (-x1)^{p-k}).
    For p = 2 the group inverse of (a, b) is not (-a, -b); the difference is
    taken in the group so that the kernel has order p^2.
    """
    return frobenius_map(u) - inclusion_map(u)


def isogeny_phi_m1m2_componentwise(u: WittVec2) -> WittVec2:
    """The componentwise expression with -x1 substituted literally (see isogeny_phi_m1m2)."""
    m1, m2 = u.twist
    p = u.p
    x1, x2 = u.x1, u.x2
    first = x1 ** p - pi_power(x1, m1 * (p - 1))
    second = x2 ** p - pi_power(x2, m2 * (p - 1))
    for k, c in enumerate(carry_coefficients(p), start=1):
        e = m2 * p - m1 * (p * k + p - k)
        if e < 0:
            raise HypothesisViolated(f"pi-exponent {e} < 0 in the isogeny carry")
        if c:
            second = second - pi_power((x1 ** (p * k) * (-x1) ** (p - k)).scale(c), e)
    return WittVec2(first, second, (p * m1, p * m2))


# ------------------------------------------------------------ group scheme tags

_TAG_KINDS = ("Mn", "Wm1m2", "Hm1m2", "EtaleZpZ", "EtaleZp2Z", "AlphaP", "Hk", "Gk")
_RANK2 = {"Wm1m2", "Hm1m2", "EtaleZp2Z", "Hk", "Gk"}


@dataclass(frozen=True)
class GroupSchemeTag:
    kind: str
    params: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _TAG_KINDS:
            raise SchemaError(f"unknown group scheme {self.kind!r}")
        if self.kind == "Mn" and self.params == (0,):
            object.__setattr__(self, "kind", "EtaleZpZ")
            object.__setattr__(self, "params", ())
        if any(x < 0 for x in self.params):
            raise HypothesisViolated(f"negative parameter in {self.kind}{self.params}")

    @classmethod
    def Mn(cls, n: int) -> "GroupSchemeTag":
        return cls("Mn", (n,))

    @classmethod
    def W(cls, m1: int, m2: int) -> "GroupSchemeTag":
        return cls("Wm1m2", (m1, m2))

    @classmethod
    def H(cls, m1: int, m2: int) -> "GroupSchemeTag":
        return cls("Hm1m2", (m1, m2))

    @property
    def rank_exponent(self) -> int:
        return 2 if self.kind in _RANK2 else 1

    @property
    def n(self) -> int:
        """pi-level of a rank-p tag (0 for the etale group)."""
        if self.kind == "EtaleZpZ":
            return 0
        if self.kind == "Mn":
            return self.params[0]
        raise ValueError(f"{self} is not a rank-p integral group")

    def special_fibre(self) -> "GroupSchemeTag":
        if self.kind == "Mn":
            return GroupSchemeTag("AlphaP")
        if self.kind == "Hm1m2":
            m1, m2 = self.params
            if m1 == 0 and m2 == 0:
                return GroupSchemeTag("EtaleZp2Z")
            return GroupSchemeTag("Hk") if m1 == 0 else GroupSchemeTag("Gk")
        return self

    def label(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}({','.join(map(str, self.params))})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    def __str__(self):
        return self.label()


# ------------------------------------------------------------ equation records

def _pi_unicode(e: int) -> str:
    sup = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")
    return "" if e == 0 else ("π" if e == 1 else "π" + str(e).translate(sup))


def _pi_latex(e: int) -> str:
    return "" if e == 0 else ("\\pi" if e == 1 else f"\\pi^{{{e}}}")


@dataclass(frozen=True)
class Equation:
    """lhs_var^p - pi^lhs_pi_exp * lhs_var = rhs (+ a carry term in the second Witt slot)."""
    var: str
    pi_exp: int | None
    rhs: Coeff
    carry_of: str | None = None
    carry_twist: tuple[int, int] | None = None

    def lhs_text(self, style: str = "unicode") -> str:
        if style == "latex":
            if self.pi_exp is None:
                return f"{self.var}^p"
            return f"{self.var}^p-{_pi_latex(self.pi_exp)}{self.var}"
        if self.pi_exp is None:
            return f"{self.var}^p"
        return f"{self.var}^p − {_pi_unicode(self.pi_exp)}{self.var}"

    def carry_text(self, style: str = "unicode") -> str:
        if self.carry_of is None:
            return ""
        m1, m2 = self.carry_twist
        if style == "latex":
            return (f"+p^{{-1}}\\sum_{{k=1}}^{{p-1}}\\binom pk\\pi^{{pm_2-m_1(pk+p-k)}}"
                    f"{self.carry_of}^{{pk}}(-{self.carry_of})^{{p-k}}\\ (m_1,m_2)=({m1},{m2})")
        return (f" + Σₖ (C(p,k)/p)·π^(p·{m2}−{m1}(pk+p−k))·{self.carry_of}^(pk)·(−{self.carry_of})^(p−k)")

    def render(self, style: str = "unicode") -> str:
        rhs = str(self.rhs)
        return f"{self.lhs_text(style)} = {rhs}{self.carry_text(style)}"

    def to_dict(self) -> dict:
        return {"var": self.var, "pi_exp": self.pi_exp, "rhs": self.rhs.to_dict(),
                "carry_of": self.carry_of,
                "carry_twist": list(self.carry_twist) if self.carry_twist else None}


@dataclass(frozen=True)
class EquationRecord:
    tag: GroupSchemeTag
    equations: tuple[Equation, ...]
    p: int = field(default=0)

    def to_dict(self) -> dict:
        return {"group": self.tag.to_dict(), "p": self.p,
                "equations": [e.to_dict() for e in self.equations],
                "text": self.unicode()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    def unicode(self) -> str:
        return "; ".join(e.render("unicode") for e in self.equations)

    def latex(self) -> str:
        return ",\\quad ".join(e.render("latex") for e in self.equations)


def torsor_equations(tag: GroupSchemeTag, rhs) -> EquationRecord:
    """Structured defining equations of a torsor under ``tag`` with given right-hand side(s)."""
    rhs_list = list(rhs) if isinstance(rhs, (list, tuple)) else [rhs]
    if len(rhs_list) != tag.rank_exponent:
        raise SchemaError(f"{tag} expects {tag.rank_exponent} right-hand side(s), got {len(rhs_list)}")
    p = rhs_list[0].p
    k = tag.kind
    if k in ("EtaleZpZ", "Mn"):
        n = tag.n
        eqs = (Equation("X", n * (p - 1), rhs_list[0]),)
    elif k == "AlphaP":
        eqs = (Equation("x", None, rhs_list[0]),)
    elif k in ("Hm1m2", "Wm1m2", "EtaleZp2Z"):
        m1, m2 = tag.params if k != "EtaleZp2Z" else (0, 0)
        eqs = (Equation("T1", m1 * (p - 1), rhs_list[0]),
               Equation("T2", m2 * (p - 1), rhs_list[1], carry_of="T1", carry_twist=(m1, m2)))
    elif k == "Hk":
        eqs = (Equation("t1", 0, rhs_list[0]), Equation("t2", None, rhs_list[1]))
    else:  # Gk
        eqs = (Equation("t1", None, rhs_list[0]), Equation("t2", None, rhs_list[1]))
    return EquationRecord(tag, eqs, p)
