"""Degree-p^2 engine: cyclic covers given by length-two Witt vector equations
F(T) - T = A over a germ R[[T]] or a boundary R[[T]]{T^-1}.

The second level is computed inside the integral ring B of the first-level
cover, B = A[X]/(X^p - pi^(n1(p-1)) X - a1), where X = pi^n1 T1.  Elements of
B are tuples of p coefficients; the reduction at a given pi-level is a tuple
of residue series, read as an element of k[t][x]/(x^p - a1bar) (radicial) or
of k[t][x]/(x^p - x - a1bar) (etale).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .errors import (
    HypothesisViolated,
    IndeterminateAtPrecision,
    NonTerminatingBudget,
    NotInSpan,
    RamifiedAssumptionViolated,
    ReducibleSpecialFibre,
    SchemaError,
)
from .ffseries import EXACT, BiElement, ResidueSeries, fp_inv
from .torsor_p import (
    _frobenius_classes,
    _poly_divmod,
    NormalizedPCover,
    normalize_boundary_p,
    normalize_germ_p,
    split_witness,
)
from .witt import GroupSchemeTag, WittVec2, carry_coefficients, torsor_equations

Coeff = Union[BiElement, ResidueSeries]

CASES = ("a", "b", "c-1", "c-2", "c-3", "c-4", "c-5")
SPLIT_LEVELS = (None, "TopOnly", "Full")


def carry_level(p: int, n1: int) -> int:
    """pi-denominator n1(p(p-1)+1) at which the Witt carry first appears."""
    return n1 * (p * (p - 1) + 1)


def _zero_of(x: Coeff) -> Coeff:
    if isinstance(x, BiElement):
        return BiElement.zero(x.p, EXACT, x.t_window)
    return ResidueSeries.zero(x.p)


def _one_of(x: Coeff) -> Coeff:
    if isinstance(x, BiElement):
        return BiElement.monomial(x.p, 0, 0, 1, EXACT, x.t_window)
    return ResidueSeries.constant(x.p, 1)


# ------------------------------------------------------------------ cover rings

class CoverRing:
    """Quotient ring C[X]/(X^p - lam X - a1) over C = BiElement or ResidueSeries."""

    def __init__(self, lam: Coeff, a1: Coeff, var: str = "T1"):
        self.p = a1.p
        self.lam = lam
        self.a1 = a1
        self.var = var
        self._xp_powers: list[CoverElement] | None = None

    def zero(self) -> "CoverElement":
        z = _zero_of(self.a1)
        return CoverElement(self, [z] * self.p)

    def const(self, c: Coeff) -> "CoverElement":
        z = _zero_of(self.a1)
        return CoverElement(self, [c] + [z] * (self.p - 1))

    def element(self, comps: Sequence[Coeff]) -> "CoverElement":
        if len(comps) != self.p:
            raise SchemaError(f"expected {self.p} components, got {len(comps)}")
        return CoverElement(self, list(comps))

    def mul(self, u: "CoverElement", v: "CoverElement") -> "CoverElement":
        p = self.p
        z = _zero_of(self.a1)
        prod = [z] * (2 * p - 1)
        for i, ui in enumerate(u.comps):
            if ui.is_exact_zero():
                continue
            for j, vj in enumerate(v.comps):
                if not vj.is_exact_zero():
                    prod[i + j] = prod[i + j] + ui * vj
        for d in range(2 * p - 2, p - 1, -1):
            c = prod[d]
            if c.is_exact_zero():
                continue
            prod[d] = z
            prod[d - p + 1] = prod[d - p + 1] + c * self.lam
            prod[d - p] = prod[d - p] + c * self.a1
        return CoverElement(self, prod[:p])

    def frobenius(self, u: "CoverElement") -> "CoverElement":
        """u^p, using (sum b_i X^i)^p = sum b_i^p (X^p)^i."""
        if self._xp_powers is None:
            xp = self.element([self.a1, self.lam] + [_zero_of(self.a1)] * (self.p - 2))
            powers = [self.const(_one_of(self.a1))]
            for _ in range(1, self.p):
                powers.append(self.mul(powers[-1], xp))
            self._xp_powers = powers
        out = self.zero()
        for i, b in enumerate(u.comps):
            if not b.is_exact_zero():
                out = out + self._xp_powers[i].scale_by(b.frobenius())
        return out


class CoverElement:
    """sum_i comps[i] * X^i in a CoverRing."""

    __slots__ = ("ring", "comps")

    def __init__(self, ring: CoverRing, comps: list[Coeff]):
        self.ring = ring
        self.comps = tuple(comps)

    @property
    def p(self) -> int:
        return self.ring.p

    def __add__(self, other: "CoverElement") -> "CoverElement":
        return CoverElement(self.ring, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "CoverElement") -> "CoverElement":
        return CoverElement(self.ring, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self) -> "CoverElement":
        return CoverElement(self.ring, [-a for a in self.comps])

    def __mul__(self, other: "CoverElement") -> "CoverElement":
        return self.ring.mul(self, other)

    def scale_by(self, c: Coeff) -> "CoverElement":
        return CoverElement(self.ring, [a * c for a in self.comps])

    def shift_pi(self, k: int) -> "CoverElement":
        return CoverElement(self.ring, [a.shift_pi(k) for a in self.comps])

    def frobenius(self) -> "CoverElement":
        return self.ring.frobenius(self)

    def is_exact_zero(self) -> bool:
        return all(c.is_exact_zero() for c in self.comps)

    def valuation(self):
        """pi-adic valuation: the minimum over components."""
        known = [c.gauss_valuation() for c in self.comps if len(c)]
        unknown = [c.pi_prec for c in self.comps if not len(c) and c.pi_prec != EXACT]
        if not known:
            if unknown:
                raise IndeterminateAtPrecision(f"element is O(pi^{min(unknown)})")
            return EXACT
        v = min(known)
        if unknown and min(unknown) <= v:
            raise IndeterminateAtPrecision(f"valuation undecided below pi^{min(unknown)}")
        return v

    def slice(self, level: int) -> tuple[ResidueSeries, ...]:
        return tuple(c.slice(level) for c in self.comps)

    def reduce_mod_pi(self) -> tuple[ResidueSeries, ...]:
        return tuple(c.reduce_mod_pi() for c in self.comps)

    def render(self) -> str:
        parts = []
        for i, c in enumerate(self.comps):
            if c.is_exact_zero():
                continue
            body = str(c)
            if i == 0:
                parts.append(f"({body})")
            else:
                mono = self.ring.var if i == 1 else f"{self.ring.var}^{i}"
                parts.append(f"({body})*{mono}")
        return " + ".join(parts) if parts else "0"

    __str__ = render

    def __repr__(self):
        return f"CoverElement({self.render()})"

    def __eq__(self, other):
        return isinstance(other, CoverElement) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def to_dict(self) -> dict:
        return {"basis": self.ring.var, "components": [c.to_dict() for c in self.comps]}


def z_valuation(comps: Sequence[ResidueSeries], m1: int) -> int | float:
    """Valuation of sum r_i x^i for a parameter z with v_z(t) = p and v_z(x) = m1 (p prime to m1)."""
    p = len(comps)
    vals = [p * c.valuation() + i * m1 for i, c in enumerate(comps) if len(c)]
    return min(vals) if vals else EXACT


def _render_residue_cover(comps: Sequence[ResidueSeries], var: str = "t1") -> str:
    parts = []
    for i, c in enumerate(comps):
        if not len(c):
            continue
        body = str(c)
        if i == 0:
            parts.append(f"({body})")
        else:
            parts.append(f"({body})*{var}" + ("" if i == 1 else f"^{i}"))
    return " + ".join(parts) if parts else "0"


# ------------------------------------------------------------- Av decomposition

@dataclass(frozen=True)
class AvDecomposition:
    """u = pi^shift * (sum_j f_coeffs[j]^p v^j + pi * remainder) over the integral ring,
    or u = sum_j f_coeffs[j]^p v^j + remainder over the residue field (remainder = the
    part no monomial combination reaches)."""
    f_coeffs: tuple[Coeff, ...]
    remainder: Coeff
    shift: int
    basis: Coeff
    steps: int = 0

    @property
    def p(self) -> int:
        return self.basis.p

    def span_part(self) -> Coeff:
        total = _zero_of(self.basis)
        for j, a in enumerate(self.f_coeffs):
            if not a.is_exact_zero():
                total = total + a.frobenius() * self.basis ** j
        return total

    def reconstruct(self) -> Coeff:
        if isinstance(self.basis, BiElement):
            return (self.span_part() + self.remainder.shift_pi(1)).shift_pi(self.shift)
        return self.span_part() + self.remainder

    def middle_is_pth_power(self) -> bool:
        """The middle term -sum j a_j^p X^(p(j-1)+1) reduces to a p-th power iff a_j = 0 for j >= 1."""
        return all(a.is_exact_zero() for a in self.f_coeffs[1:])


def _greedy_span(u: ResidueSeries, v: ResidueSeries, germ: bool,
                 budget: int | None = None) -> tuple[list[ResidueSeries], ResidueSeries, int]:
    """Lowest-exponent-first solve of u = sum_j b_j^p v^j + g.

    The exponent classes j*val(v) mod p are distinct, so each leading monomial
    t^s of the running remainder is matched by exactly one t^(pq) v^j.  Over a
    germ only q >= 0 is allowed; unreachable monomials go to g.
    """
    p = u.p
    if v.is_pth_power():
        raise HypothesisViolated(f"{v} is a p-th power; 1, v, ..., v^(p-1) is not a p-basis")
    if not u.is_exact() or not v.is_exact():
        raise IndeterminateAtPrecision("span decomposition needs exactly known series")
    if germ and u.lower_bound() >= 0 and v.lower_bound() >= 0:
        return _germ_span(u, v)
    m, lc = v.leading()
    if m % p == 0:
        raise HypothesisViolated(f"t-valuation {m} of {v} is divisible by p")
    inv_m = fp_inv(m % p, p)
    powers = [v ** j for j in range(p)]
    inv_lc = [fp_inv(pow(lc, j, p), p) for j in range(p)]
    coeffs: list[dict[int, int]] = [dict() for _ in range(p)]
    rest: dict[int, int] = {}
    if budget is None:
        lo, hi = u.lower_bound(), u.max_exponent()
        budget = 64 + 8 * p * (abs(hi - lo) + abs(m) + v.max_exponent() + 1)
    r = u
    steps = 0
    while len(r):
        steps += 1
        if steps > budget:
            raise NonTerminatingBudget(f"span decomposition exceeded {budget} steps")
        s, c = r.leading()
        j = (s * inv_m) % p
        q = (s - j * m) // p
        if germ and q < 0:
            rest[s] = c
            r = r - ResidueSeries.monomial(p, s, c)
            continue
        coef = c * inv_lc[j] % p
        coeffs[j][q] = (coeffs[j].get(q, 0) + coef) % p
        r = r - powers[j].shift(p * q).scale(coef)
    return [ResidueSeries(p, d) for d in coeffs], ResidueSeries(p, rest), steps


def _germ_span(u: ResidueSeries, v: ResidueSeries) -> tuple[list[ResidueSeries], ResidueSeries, int]:
    """Polynomial version of the span solve with a canonical remainder.

    Over k[z], z = t^p, the classes of 1, v, ..., v^(p-1) span a full-rank
    lattice in k[t] = k[z]^p.  A lower-triangular basis H of that lattice (column
    Euclid, row by row) reduces u to the unique vector whose r-th entry has
    degree below H[r][r]; the quotients give the coefficients b_j.
    """
    p = u.p
    zero = ResidueSeries.zero(p)
    one = ResidueSeries.constant(p, 1)
    H = [_frobenius_classes(v ** j) for j in range(p)]   # H[c][r]: column c, row r
    U = [[one if i == c else zero for i in range(p)] for c in range(p)]  # column c of the transform
    steps = 0
    for r in range(p):
        while True:
            live = [c for c in range(r, p) if len(H[c][r])]
            if not live:
                raise HypothesisViolated("span lattice is degenerate")  # pragma: no cover
            piv = min(live, key=lambda c: H[c][r].max_exponent())
            others = [c for c in live if c != piv]
            if not others:
                break
            for c in others:
                q, _ = _poly_divmod(H[c][r], H[piv][r])
                H[c] = [a - q * b for a, b in zip(H[c], H[piv])]
                U[c] = [a - q * b for a, b in zip(U[c], U[piv])]
                steps += 1
        H[r], H[piv] = H[piv], H[r]
        U[r], U[piv] = U[piv], U[r]
        lead = H[r][r].coeffs[H[r][r].max_exponent()]
        inv = fp_inv(lead, p)
        H[r] = [a.scale(inv) for a in H[r]]
        U[r] = [a.scale(inv) for a in U[r]]
    w = _frobenius_classes(u)
    coeff = [zero] * p
    for r in range(p):
        q, _ = _poly_divmod(w[r], H[r][r])
        if len(q):
            w = [a - q * b for a, b in zip(w, H[r])]
            coeff = [a + q * b for a, b in zip(coeff, U[r])]
    rest = ResidueSeries(p, {p * e + r: c for r in range(p) for e, c in w[r].items()})
    # coeff[j](z) = b_j(t)^p and over F_p the coefficients of b_j are those of coeff[j]
    return coeff, rest, steps


def decompose_Av(u: Coeff, v: Coeff, germ: bool | None = None,
                 budget: int | None = None) -> AvDecomposition:
    """Write u as an element of A^p[v] plus a remainder.

    Residue inputs return the unreachable part as ``remainder``.  Integral inputs
    factor out the pi-valuation of u and require its leading reduction to lie in
    the span; the next-order part is returned as ``remainder`` with u = pi^shift *
    (f(v) + pi * remainder).
    """
    if isinstance(u, ResidueSeries) != isinstance(v, ResidueSeries):
        raise SchemaError("u and v must both be residue series or both integral elements")
    if isinstance(u, ResidueSeries):
        coeffs, g, steps = _greedy_span(u, v, bool(germ), budget)
        return AvDecomposition(tuple(coeffs), g, 0, v, steps)
    germ = u.is_germ if germ is None else germ
    if v.gauss_valuation() != 0:
        raise HypothesisViolated("v must be a unit for the integral decomposition")
    vbar = v.reduce_mod_pi()
    if u.is_exact_zero():
        zero = _zero_of(u)
        return AvDecomposition(tuple([zero] * u.p), zero, 0, v, 0)
    shift = u.gauss_valuation()
    u0 = u.shift_pi(-shift)
    coeffs, g, steps = _greedy_span(u0.reduce_mod_pi(), vbar, germ, budget)
    if len(g):
        raise NotInSpan(f"reduction has monomials outside A^p[v]: {g}")
    window = u.t_window
    lifts = tuple(BiElement.from_residue(c, 0, EXACT, None if window is None else min(0, window))
                  for c in coeffs)
    dec = AvDecomposition(lifts, _zero_of(u), shift, v, steps)
    rest = u0 - dec.span_part()
    if len(rest) and rest.lower_bound() < 1:
        raise HypothesisViolated("leading reduction did not cancel")  # pragma: no cover
    return AvDecomposition(lifts, rest.shift_pi(-1), shift, v, steps)


@dataclass(frozen=True)
class TransformRecord:
    """g - W^p + W for W = pi^-m sum a_j X^j, split as leading + middle + h."""
    element: CoverElement
    leading: CoverElement
    middle: tuple[tuple[int, BiElement, int], ...]  # (j, -j a_j^p, exponent p(j-1)+1 of X)
    middle_level: int
    h: CoverElement
    h_level: int
    middle_is_pth_power: bool


def transform_g_tilde(decomp: AvDecomposition, n: int, m: int) -> TransformRecord:
    """Apply the substitution T2 -> T2 + pi^-m sum a_j T^j to g = pi^-pm f(v), where
    T^p - pi^(n(p-1)) T = v and f(v) = sum a_j^p v^j."""
    p = decomp.p
    v = decomp.basis
    if not isinstance(v, BiElement):
        v = BiElement.from_residue(v, 0, EXACT, 0)
    mid_level = p * m - n * (p - 1)
    if mid_level <= 0:
        raise HypothesisViolated(f"p*m - n(p-1) = {mid_level} <= 0: the middle term is integral; "
                                 "branch elsewhere in the case analysis")
    window = v.t_window
    lifts = [a if isinstance(a, BiElement) else BiElement.from_residue(a, 0, EXACT, window)
             for a in decomp.f_coeffs]
    ring = CoverRing(BiElement.monomial(p, n * (p - 1), 0, 1, EXACT, window), v, "T")
    f_v = _zero_of(v)
    for j, a in enumerate(lifts):
        f_v = f_v + a.frobenius() * v ** j
    g = ring.const(f_v.shift_pi(-p * m))
    W = ring.element([a.shift_pi(-m) for a in lifts])
    out = g - ring.frobenius(W) + W
    middle = tuple((j, (-a.frobenius()).scale(j), p * (j - 1) + 1)
                   for j, a in enumerate(lifts) if j >= 1 and not a.is_exact_zero())
    # X^(p(j-1)+1) = X (X^p)^(j-1) = X (pi^(n(p-1)) X + v)^(j-1); its pi^0 part is v^(j-1) X
    zero = _zero_of(v)
    mid_comps = [zero] * p
    for j, c, _ in middle:
        mid_comps[1] = mid_comps[1] + c * v ** (j - 1)
    mid = ring.element(mid_comps).shift_pi(-mid_level)
    h_level = p * m - 2 * n * (p - 1)
    h = (out - W - mid).shift_pi(h_level)
    if not h.is_exact_zero() and h.valuation() < 0:
        raise HypothesisViolated("h term has an unexpected pole")  # pragma: no cover
    return TransformRecord(out, W, middle, mid_level, h, h_level, not middle)


# ------------------------------------------------------------------ result types

def _is_int(x) -> bool:
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


@dataclass(frozen=True)
class DegTypeP2:
    """Degeneration type {(n1, m1), (n2, m2)}; n2 may be a non-integral rational when
    the pair is being tested for admissibility."""
    first: tuple[int, int]
    second: tuple[Rational, int]
    split_level: str | None = None
    case: str | None = field(default=None, compare=False)
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.split_level not in SPLIT_LEVELS:
            raise SchemaError(f"split_level must be one of {SPLIT_LEVELS}")

    @property
    def n1(self):
        return self.first[0]

    @property
    def m1(self):
        return self.first[1]

    @property
    def n2(self):
        return self.second[0]

    @property
    def m2(self):
        return self.second[1]

    def deltas(self, p: int) -> tuple:
        return (self.n1 * (p - 1), self.n2 * (p - 1))

    def to_dict(self) -> dict:
        n2 = self.n2
        return {"first": list(self.first),
                "second": [int(n2) if _is_int(n2) else str(n2), self.m2],
                "split_level": self.split_level, "case": self.case, "notes": list(self.notes)}

    def __str__(self):
        s = f"{{({self.n1}, {self.m1}), ({self.n2}, {self.m2})}}"
        if self.split_level:
            s += f" [{self.split_level} split]"
        if self.case:
            s += f" [{self.case}]"
        return s


@dataclass(frozen=True)
class StripRecord:
    """One substitution T2 -> T2 + pi^(-level/p) sum b_j X^j removing a span part at pi^-level."""
    level: int
    coeffs: tuple[ResidueSeries, ...]

    @property
    def nontrivial(self) -> bool:
        return any(len(c) for c in self.coeffs[1:])


@dataclass(frozen=True)
class SecondLevel:
    """Outcome of the pi-adic elimination at the second level over a radicial first level."""
    ring: CoverRing
    rhs: CoverElement          # final generic right-hand side in the B basis
    level: int                 # L: final pi-denominator, n2 = L / p
    leading: tuple[ResidueSeries, ...]
    strips: tuple[StripRecord, ...]
    initial_pole: int | None   # pole order of the adjusted A2 alone
    carry_level: int
    f_level: int | None
    g_remainder: ResidueSeries

    @property
    def n2(self) -> int:
        return self.level // self.ring.p


@dataclass(frozen=True)
class NormalizedP2Cover:
    """Germ normal form: case tag, both integral equations, special fibre and deltas."""
    case: str
    tie: bool
    first: NormalizedPCover
    n1: int
    n2: int
    group: GroupSchemeTag | None
    integral: tuple                     # (first rhs, second rhs)
    special_fibre: tuple                # (a1bar, components of the second reduction)
    levels: dict
    strips: tuple[StripRecord, ...] = ()
    g_bar: ResidueSeries | None = None
    c_bar: tuple[ResidueSeries, ...] = ()
    carry_marker: bool = False
    notes: tuple[str, ...] = ()
    generic: WittVec2 | None = None

    @property
    def p(self) -> int:
        return self.first.p

    @property
    def delta1(self) -> int:
        return self.n1 * (self.p - 1)

    @property
    def delta2(self) -> int:
        return self.n2 * (self.p - 1)

    @property
    def delta(self) -> int:
        return self.delta1 + self.delta2

    @property
    def label(self) -> str:
        return self.case + (" tie" if self.tie else "")

    @property
    def type(self) -> DegTypeP2:
        a1bar, second = self.special_fibre
        m1 = self.first.type.m
        if isinstance(second, tuple):
            m2 = z_valuation(second, m1) if self.n1 else min(
                (self.p * c.valuation() + i * m1 for i, c in enumerate(second) if len(c)),
                default=0)
        else:
            m2 = second.valuation() if len(second) else 0
        return DegTypeP2((self.n1, m1), (self.n2, int(m2)), None, self.label)

    def equations(self) -> list:
        """Integral equations: the first-level record and a rendering of the second."""
        rhs1, rhs2 = self.integral
        first = self.first.equations()
        if self.case == "a":
            return [torsor_equations(GroupSchemeTag("EtaleZp2Z"), [rhs1, rhs2])]
        if self.case == "b":
            return [torsor_equations(GroupSchemeTag.W(0, self.n2), [rhs1, rhs2])]
        lhs = f"T̃2^p − π^{self.n2 * (self.p - 1)}·T̃2"
        return [first, f"{lhs} = {rhs2}"]

    def equation_texts(self) -> list[str]:
        return [e if isinstance(e, str) else e.unicode() for e in self.equations()]

    def special_fibre_text(self) -> str:
        a1bar, second = self.special_fibre
        if self.case == "a":
            return (f"t1^p − t1 = {a1bar}; t2^p − t2 = {second} "
                    "+ Σₖ (C(p,k)/p)·a1^k·t1^(p−k)")
        if self.case == "b":
            return f"t1^p − t1 = {a1bar}; t̃2^p = {second}"
        return f"t̃1^p = {a1bar}; t̃2^p = {_render_residue_cover(second, 't̃1')}"

    def to_dict(self) -> dict:
        a1bar, second = self.special_fibre
        return {
            "case": self.case,
            "tie": self.tie,
            "label": self.label,
            "type": self.type.to_dict(),
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta": self.delta,
            "group": self.group.to_dict() if self.group else None,
            "first": self.first.to_dict(),
            "integral_equations": self.equation_texts(),
            "special_fibre_equation": self.special_fibre_text(),
            "special_fibre": {
                "a1bar": a1bar.to_dict(),
                "second": ([c.to_dict() for c in second] if isinstance(second, tuple)
                           else second.to_dict()),
            },
            "levels": {k: v for k, v in self.levels.items()},
            "strips": [{"level": s.level, "coeffs": [c.to_dict() for c in s.coeffs]}
                       for s in self.strips],
            "g_bar": self.g_bar.to_dict() if self.g_bar is not None else None,
            "c_bar": [c.to_dict() for c in self.c_bar],
            "carry_marker": self.carry_marker,
            "notes": list(self.notes),
        }


# ------------------------------------------------------------ second-level core

def _pi_mono(p: int, i: int, window) -> BiElement:
    return BiElement.monomial(p, i, 0, 1, EXACT, window)


def _wp(b: BiElement) -> WittVec2:
    """Artin-Schreier-Witt coboundary F(B) - B of B = (b, 0)."""
    B = WittVec2(b, _zero_of(b))
    return WittVec2(b.frobenius(), _zero_of(b)) - B


def _apply_first_level_shifts(A1: BiElement, A2: BiElement, cover: NormalizedPCover) -> WittVec2:
    """Replay the rank-p normalization of A1 as Witt coboundaries so the pair stays equivalent."""
    w = WittVec2(A1, A2)
    p = A1.p
    for level, e, c in cover.shifts:
        b = BiElement(p, {(level, e): c}, EXACT, A1.t_window)
        w = w - _wp(b)
    return w


def _carry_rhs(ring: CoverRing, A1: BiElement, A2: BiElement, n1: int) -> CoverElement:
    """A2 - sum_k c_k A1^k T1^(p-k) written in the basis of X = pi^n1 T1."""
    p = ring.p
    comps = [A2] + [_zero_of(A2)] * (p - 1)
    for k, c in enumerate(carry_coefficients(p), start=1):
        if c:
            comps[p - k] = comps[p - k] - (A1 ** k).shift_pi(-n1 * (p - k)).scale(c)
    return ring.element(comps)


def _default_loop_budget(top: int) -> int:
    return 16 + 4 * max(1, top)


def second_level(A1: BiElement, A2: BiElement, n1: int, germ: bool,
                 budget: int | None = None) -> SecondLevel:
    """Eliminate span parts from the second level over a radicial first level.

    A1 must have pi-valuation -p*n1 with a reduction that is not a p-th power
    (no first-level normalization is performed here).  At each pole level L the
    degree-0 component of the leading reduction is split over the basis
    {1, a1bar, ..., a1bar^(p-1)}; its span part is removed by the substitution
    T2 -> T2 + pi^(-L/p) sum b_j X^j.  The loop stops at the first level whose
    leading reduction survives.
    """
    p = A1.p
    if n1 <= 0:
        raise HypothesisViolated("second_level needs a radicial first level (n1 > 0)")
    window = A1.t_window
    a1 = A1.shift_pi(p * n1)
    if a1.gauss_valuation() != 0:
        raise HypothesisViolated(f"A1 must have pi-valuation {-p * n1}")
    a1bar = a1.reduce_mod_pi()
    ring = CoverRing(_pi_mono(p, n1 * (p - 1), window), a1, "T̃1")
    R = _carry_rhs(ring, A1, A2, n1)
    E_c = carry_level(p, n1)
    initial = None
    if len(A2):
        v2 = A2.gauss_valuation()
        initial = -v2 if v2 < 0 else None
    top = max(E_c, initial or 0)
    budget = _default_loop_budget(top) if budget is None else budget
    strips: list[StripRecord] = []
    f_level = None
    steps = 0
    while True:
        steps += 1
        if steps > budget:
            raise NonTerminatingBudget(f"second-level elimination exceeded {budget} rounds")
        v = R.valuation()
        if v == EXACT or v >= 0:
            raise HypothesisViolated("second level became integral")  # pragma: no cover
        L = -v
        if L % p:
            raise RamifiedAssumptionViolated(
                f"second-level pole order {L} is prime to p: ramification index p")
        lead = R.slice(v)
        coeffs, g, _ = _greedy_span(lead[0], a1bar, germ)
        if any(len(c) for c in coeffs):
            rec = StripRecord(L, tuple(coeffs))
            strips.append(rec)
            if rec.nontrivial and f_level is None:
                f_level = L - n1 * (p - 1)
            W = ring.element([BiElement.from_residue(c, -L // p, EXACT, window) for c in coeffs])
            R = R - ring.frobenius(W) + W
            lead = R.slice(v)
        if any(len(c) for c in lead):
            return SecondLevel(ring, R, L, lead, tuple(strips), initial, E_c, f_level, g)


# ------------------------------------------------------------------ germ engine

def _first_level_germ(A1: BiElement) -> NormalizedPCover:
    first = normalize_germ_p(A1)
    if first.type.split:
        raise ReducibleSpecialFibre("first-level torsor is trivial over the germ: "
                                    "the special fibre is not irreducible")
    return first


def _decompose_middle(D1: ResidueSeries, a1bar: ResidueSeries, carry: bool,
                      germ: bool) -> tuple[ResidueSeries, ...]:
    """Recover c_j from D1 = -sum j c_j^p a1^(j-1) - [carry] a1^(p-1)."""
    p = a1bar.p
    d, g, _ = _greedy_span(-D1, a1bar, germ)
    if len(g):
        raise HypothesisViolated(f"x-component {D1} is not of the middle-term shape")
    top = d[p - 1]
    expected = ResidueSeries.constant(p, 1) if carry else ResidueSeries.zero(p)
    if top != expected:
        raise HypothesisViolated("x-component has an unexpected a1^(p-1) coefficient")
    # d_(j-1)^p = j c_j^p and Frobenius is the identity on F_p coefficients
    return tuple(d[j - 1].scale(fp_inv(j, p)) for j in range(1, p))


def _tag_radicial(sl: SecondLevel) -> tuple[str, bool, list[str]]:
    notes = []
    L, E_c = sl.level, sl.carry_level
    M = sl.initial_pole
    if M is None or M < E_c:
        return "c-1", False, notes
    if M == E_c:
        notes.append(f"m2 = -{E_c}: second level meets the carry at its first pole")
        return "c-1", True, notes
    carry = L == E_c
    f_here = sl.f_level is not None and L == sl.f_level
    g_here = len(sl.g_remainder) > 0
    present = (f_here, g_here, carry)
    table = {
        (True, False, False): ("c-2", False),
        (False, True, False): ("c-3", False),
        (False, False, True): ("c-4", False),
        (True, False, True): ("c-2", True),
        (True, True, False): ("c-3", True),
        (False, True, True): ("c-4", True),
        (True, True, True): ("c-5", False),
    }
    if present not in table:
        raise HypothesisViolated(f"no surviving term at level {L}")  # pragma: no cover
    case, tie = table[present]
    return case, tie, notes


def normalize_germ_p2(A1: BiElement, A2: BiElement, budget: int | None = None) -> NormalizedP2Cover:
    """Integral normal form of the Z/p^2Z cover F(T) - T = (A1, A2) over a germ."""
    if not A1.is_germ:
        A1 = A1.as_germ(min(0, A1.t_exponent_range()[0]))
    if not A2.is_germ:
        A2 = A2.as_germ(min(0, A2.t_exponent_range()[0]))
    p = A1.p
    first = _first_level_germ(A1)
    w = _apply_first_level_shifts(A1, A2, first)
    A1n, A2n = w.x1, w.x2
    n1 = first.type.n
    a1bar = first.special_fibre_rhs
    if n1 == 0:
        return _germ_etale_first(first, A1n, A2n, budget)
    sl = second_level(A1n, A2n, n1, germ=True, budget=budget)
    case, tie, notes = _tag_radicial(sl)
    lead = sl.leading
    if any(len(c) for c in lead[2:]):
        raise HypothesisViolated("higher x-components survive at the final level")  # pragma: no cover
    carry = sl.level == sl.carry_level
    c_bar = _decompose_middle(lead[1], a1bar, carry, germ=True)
    g_bar = lead[0]
    group = None
    if case == "c-3" and not tie and not any(s.nontrivial for s in sl.strips):
        group = GroupSchemeTag.H(n1, sl.n2)
        notes.append(f"torsor under H({n1},{sl.n2})")
    else:
        notes.append("the special fibre is not a torsor under a finite flat group scheme "
                     "in general" if case != "c-3" else "c-3 reached after substitutions")
    integral2 = sl.rhs.shift_pi(p * sl.n2)
    levels = {"carry": sl.carry_level, "f": sl.f_level, "initial": sl.initial_pole,
              "final": sl.level}
    return NormalizedP2Cover(case, tie, first, n1, sl.n2, group, (first.integral_rhs, integral2),
                             (a1bar, lead), levels, sl.strips, g_bar, c_bar, carry,
                             tuple(notes), WittVec2(A1n, A2n))


def _germ_etale_first(first: NormalizedPCover, A1n: BiElement, A2n: BiElement,
                      budget: int | None) -> NormalizedP2Cover:
    p = first.p
    a1bar = first.special_fibre_rhs
    second = normalize_germ_p(A2n, budget)
    A2f = second.generic_rhs
    generic = WittVec2(A1n, A2f)
    notes = list(second.notes)
    levels = {"carry": 0, "f": None, "initial": None, "final": p * second.type.n}
    if second.type.split or second.type.n == 0:
        a2bar = ResidueSeries.zero(p) if second.type.split else second.special_fibre_rhs
        return NormalizedP2Cover("a", False, first, 0, 0, GroupSchemeTag("EtaleZp2Z"),
                                 (A1n, A2f), (a1bar, a2bar), levels, notes=tuple(notes),
                                 generic=generic)
    n2 = second.type.n
    return NormalizedP2Cover("b", False, first, 0, n2, GroupSchemeTag.W(0, n2),
                             (A1n, second.integral_rhs), (a1bar, second.special_fibre_rhs),
                             levels, notes=tuple(notes), generic=generic)


def residue_cover_dict(comps: Sequence[ResidueSeries]) -> dict[tuple[int, int], int]:
    """{(i, k): c} for sum_k comps[k] x^k, as consumed by alpha_p_equivalent."""
    out = {}
    for k, c in enumerate(comps):
        for i, coef in c.items():
            out[(i, k)] = coef
    return out


# ------------------------------------------------------------- boundary engine

def _residue_strip(ring: CoverRing, r: CoverElement, m1: int, artin_schreier: bool,
                   budget: int = 4096) -> tuple[CoverElement, int | float]:
    """Remove leading p-th powers (w^p, or w^p - w when artin_schreier) from r in a
    residue cover ring until its z-valuation is prime to p.  Returns (r, z-valuation);
    the valuation is EXACT when r becomes zero, and for Artin-Schreier stripping it
    stops as soon as no pole remains."""
    p = ring.p
    lc1 = ring.a1.leading()[1]
    inv_m1 = fp_inv(m1 % p, p)
    for _ in range(budget):
        zv = z_valuation(r.comps, m1)
        if zv == EXACT or (artin_schreier and zv >= 0) or zv % p:
            return r, zv
        e0 = zv // p
        c0 = r.comps[0]
        if not len(c0) or p * c0.valuation() != zv:
            raise HypothesisViolated("leading term is not in the degree-0 component")  # pragma: no cover
        j = (e0 * inv_m1) % p
        E = (e0 - j * m1) // p
        coef = c0.leading()[1] * fp_inv(pow(lc1, j, p), p) % p
        comps = [ResidueSeries.zero(p)] * p
        comps[j] = ResidueSeries.monomial(p, E, coef)
        w = ring.element(comps)
        r = r - ring.frobenius(w)
        if artin_schreier:
            r = r + w
    raise NonTerminatingBudget(f"residue stripping exceeded {budget} steps")


def classify_boundary_p2(A1: BiElement, A2: BiElement, budget: int | None = None) -> DegTypeP2:
    """Degeneration type {(n1, m1), (n2, m2)} of the cover over a boundary ring."""
    if A1.is_germ:
        A1 = A1.as_boundary()
    if A2.is_germ:
        A2 = A2.as_boundary()
    p = A1.p
    first = normalize_boundary_p(A1, budget)
    w = _apply_first_level_shifts(A1, A2, first)
    A1n, A2n = w.x1, w.x2
    if first.type.split:
        return _boundary_full_split(A1n, A2n, first, budget)
    n1, m1 = first.type.n, first.type.m
    a1bar = first.special_fibre_rhs
    if n1 == 0:
        second = normalize_boundary_p(A2n, budget)
        ring = CoverRing(ResidueSeries.constant(p, 1), a1bar, "x")
        if second.type.split or second.type.n == 0:
            a2bar = ResidueSeries.zero(p) if second.type.split else second.special_fibre_rhs
            comps = [a2bar] + [ResidueSeries.zero(p)] * (p - 1)
            for k, c in enumerate(carry_coefficients(p), start=1):
                if c:
                    comps[p - k] = comps[p - k] - (a1bar ** k).scale(c)
            r, zv = _residue_strip(ring, ring.element(comps), m1, artin_schreier=True)
            if zv == EXACT or zv >= 0:
                return DegTypeP2((0, m1), (0, 0), "TopOnly", "a",
                                 ("second level trivial over the boundary",))
            return DegTypeP2((0, m1), (0, int(zv)), None, "a")
        comps = [second.special_fibre_rhs] + [ResidueSeries.zero(p)] * (p - 1)
        r, zv = _residue_strip(ring, ring.element(comps), m1, artin_schreier=False)
        return DegTypeP2((0, m1), (second.type.n, int(zv)), None, "b")
    sl = second_level(A1n, A2n, n1, germ=False, budget=budget)
    zv = z_valuation(sl.leading, m1)
    carry = sl.level == sl.carry_level
    f_here = sl.f_level is not None and sl.level == sl.f_level
    if carry and f_here:
        case, notes = "c-3", ("tie: carry and middle term share the pole order",)
    elif carry:
        case, notes = "c-2", ()
    else:
        case, notes = "c-1", ()
    if (sl.initial_pole or 0) == sl.carry_level and carry:
        notes = notes + ("tie-case: m2 equals the carry pole order",)
    return DegTypeP2((n1, m1), (sl.n2, int(zv)), None, case, notes)


def _boundary_full_split(A1n: BiElement, A2n: BiElement, first: NormalizedPCover,
                         budget: int | None) -> DegTypeP2:
    """First level split: T1 is a function on the base; classify the second level alone."""
    p = A1n.p
    if len(A1n) and A1n.gauss_valuation() > 0:
        t1 = -split_witness(A1n, terms=6)
    else:
        raise HypothesisViolated("first level is trivial only after a residue field "
                                 "extension; cannot split it over F_p")
    rhs = A2n
    for k, c in enumerate(carry_coefficients(p), start=1):
        if c:
            rhs = rhs - (A1n ** k * t1 ** (p - k)).scale(c)
    lowest = rhs.lower_bound() if len(rhs) else 0
    keep = max(8, 4 - 2 * min(0, lowest))
    rhs = BiElement(p, {k: c for k, c in rhs.items() if k[0] < keep}, keep, None)
    second = normalize_boundary_p(rhs, budget)
    notes = ("first level splits: the cover is a disjoint union of rank-p covers",)
    if second.type.split:
        return DegTypeP2((0, 0), (0, 0), "Full", "a", notes)
    return DegTypeP2((0, 0), (second.type.n, second.type.m), "Full", None, notes)


# ------------------------------------------------------- admissibility / (*)

def _P(p: int) -> int:
    return p * (p - 1) + 1


def _exists_m2(value: int, p: int, pred=lambda m2: True) -> bool:
    """Is value = p*m2 for an integer m2 prime to p satisfying pred?"""
    if value % p:
        return False
    m2 = value // p
    return m2 % p != 0 and pred(m2)


def is_admissible_pair(pair: DegTypeP2, p: int, strict_paper: bool = False) -> bool:
    """Admissibility of {(n1, m1), (n2, m2)} for covers of degree p^2.

    ``strict_paper`` uses +m1(p-1) in the n1 = 0, n2 != 0 branch instead of the
    -m1(p-1) that boundary classification actually produces.
    """
    if pair.split_level is not None:
        return False
    n1, m1 = pair.first
    n2, mt = pair.second
    if not (_is_int(n1) and _is_int(n2)) or n1 < 0 or n2 < 0:
        return False
    n2 = int(n2)
    P = _P(p)
    if m1 % p == 0 or mt % p == 0:
        return False
    if n1 == 0 and n2 == 0:
        if m1 >= 0 or mt >= 0:
            return False
        # mt = m1 P is the minimum for every m2 in [p m1, -1]; otherwise the other
        # term is the minimum, which forces m2 < p m1 < 0
        return mt == m1 * P or _exists_m2(mt + m1 * (p - 1), p, lambda m2: mt < m1 * P)
    if n1 == 0:
        if m1 >= 0:
            return False
        sign = 1 if strict_paper else -1
        return _exists_m2(mt - sign * m1 * (p - 1), p)
    bound = Fraction(n1 * P, p)
    if n2 > bound:
        return _exists_m2(mt + m1 * (p - 1), p)
    if n2 == bound:
        return mt == m1 * P or _exists_m2(mt + m1 * (p - 1), p, lambda m2: m2 < p * m1)
    return False


def satisfies_condition_star(pair: DegTypeP2, p: int) -> bool:
    """Sign and inequality constraints on the type of a cover with smooth special fibre."""
    if pair.split_level is not None:
        return False
    n1, m1 = pair.first
    n2, mt = pair.second
    if not (_is_int(n1) and _is_int(n2)) or n1 < 0 or n2 < 0:
        return False
    n2 = int(n2)
    P = _P(p)
    if m1 > -1 or m1 % p == 0:
        return False
    if n1 == 0 and n2 == 0:
        return mt == m1 * P or _exists_m2(mt + m1 * (p - 1), p, lambda m2: mt < m1 * P)
    if n1 == 0:
        return _exists_m2(mt + m1 * (p - 1), p, lambda m2: m2 <= p * m1)
    if mt > -1:
        return False
    bound = Fraction(n1 * P, p)
    if n2 > bound:
        return _exists_m2(mt + m1 * (p - 1), p, lambda m2: m2 <= p * m1)
    if n2 == bound:
        return mt == m1 * P or _exists_m2(mt + m1 * (p - 1), p, lambda m2: m2 < p * m1)
    return False


# ------------------------------------------------------- degeneration data

@dataclass(frozen=True)
class DegenDataP:
    """Rank-p degeneration datum: level n and the reduced right-hand side."""
    n: int
    abar: ResidueSeries

    def __post_init__(self):
        if self.n < 0:
            raise HypothesisViolated("n must be >= 0")
        if self.n > 0 and self.abar.is_pth_power():
            raise HypothesisViolated("radicial datum must not be a p-th power")

    @property
    def p(self) -> int:
        return self.abar.p

    def to_dict(self) -> dict:
        return {"rank": "p", "n": self.n, "abar": self.abar.to_dict()}


KIND_GROUP = {"A": "EtaleZp2Z", "B": "Hk", "C": "Gk"}


@dataclass(frozen=True)
class DegenDataP2:
    """Rank-p^2 degeneration datum.

    kind A: etale pair (a1bar, a2bar); B: etale a1bar followed by an alpha_p
    equation t2^p = a2bar; C: alpha_p-by-alpha_p pair (a1bar, gbar) plus
    (c1bar, ..., c_{p-1}bar) and whether the carry term -t1^(p(p-1)+1) occurs.
    The group of kind B is the etale-by-alpha_p group (tag Hk), kind C the
    alpha_p-by-alpha_p group (tag Gk).
    """
    kind: str
    first: ResidueSeries
    second: ResidueSeries
    c_bar: tuple[ResidueSeries, ...] = ()
    carry_marker: bool = False
    levels: tuple[int, int] = field(default=(0, 0), compare=False)

    def __post_init__(self):
        if self.kind not in KIND_GROUP:
            raise SchemaError(f"kind must be A, B or C, got {self.kind!r}")
        p = self.first.p
        if self.kind == "C":
            if self.first.is_pth_power():
                raise HypothesisViolated("kind C needs a1bar not a p-th power")
            if len(self.c_bar) != p - 1:
                raise SchemaError(f"kind C needs {p - 1} functions c_j")
        if self.kind == "B" and self.second.is_pth_power():
            raise HypothesisViolated("kind B needs a2bar not a p-th power")

    @property
    def p(self) -> int:
        return self.first.p

    @property
    def group(self) -> GroupSchemeTag:
        return GroupSchemeTag(KIND_GROUP[self.kind])

    def canonical(self) -> "DegenDataP2":
        """Canonical representatives over the germ."""
        p = self.p
        if self.kind == "C":
            _, g, _ = _greedy_span(self.second, self.first, germ=True)
            return DegenDataP2("C", self.first, g, self.c_bar, self.carry_marker, self.levels)
        if self.kind == "B":
            keep = {e: c for e, c in self.second.items() if e % p or e < 0}
            return DegenDataP2("B", self.first, ResidueSeries(p, keep), (), False, self.levels)
        return self

    def to_dict(self) -> dict:
        return {"rank": "p2", "kind": self.kind, "group": self.group.to_dict(),
                "first": self.first.to_dict(), "second": self.second.to_dict(),
                "c_bar": [c.to_dict() for c in self.c_bar],
                "carry_marker": self.carry_marker, "levels": list(self.levels)}


def extract_degen_data(res: Union[NormalizedP2Cover, NormalizedPCover]):
    """Degeneration datum carried by a normalized germ cover."""
    if isinstance(res, NormalizedPCover):
        if res.type.split:
            raise HypothesisViolated("a split torsor carries no degeneration datum")
        return DegenDataP(res.type.n, res.special_fibre_rhs)
    a1bar, second = res.special_fibre
    levels = (res.n1, res.n2)
    if res.case == "a":
        return DegenDataP2("A", a1bar, second, (), False, levels)
    if res.case == "b":
        return DegenDataP2("B", a1bar, second, (), False, levels)
    return DegenDataP2("C", a1bar, res.g_bar, res.c_bar, res.carry_marker, levels)


@dataclass(frozen=True)
class LiftedCover:
    """Generic equations of a lift plus the predicted levels."""
    generic: Union[BiElement, WittVec2]
    equations: tuple[str, ...]
    predicted_delta: tuple[int, ...]
    variant: int = 1

    def to_dict(self) -> dict:
        gen = self.generic
        if isinstance(gen, WittVec2):
            generic = [gen.x1.to_dict(), gen.x2.to_dict()]
        else:
            generic = gen.to_dict()
        return {"generic": generic, "equations": list(self.equations),
                "predicted_delta": list(self.predicted_delta), "variant": self.variant}


def _lift(r: ResidueSeries, level: int = 0) -> BiElement:
    return BiElement.from_residue(r, level, EXACT, min(0, r.lower_bound() if len(r) else 0))


def lift_degen_data(data, n: int | None = None, m: int | None = None,
                    variant: int = 1) -> LiftedCover:
    """Lift a degeneration datum to generic equations over the germ.

    rank p: X^p - X = pi^(-pn) a.  Kind A: (a1, a2).  Kind B: (a1, pi^(-p n) a2).
    Kind C, variant 1 (n = n1 divisible by p): (a1 pi^(-p n), f(a1) pi^(-p^2 n) +
    g pi^(-E)) with f(a1) = sum_j c_j^p a1^j and E = n(p(p-1)+1); variant 2 takes
    the f-part at pi^(-p m) with p m - n(p-1) > E and g next to the middle term.
    """
    if isinstance(data, DegenDataP):
        p = data.p
        nn = data.n if n is None else n
        gen = _lift(data.abar, -p * nn)
        eq = f"X^p − π^{nn * (p - 1)}X = {_lift(data.abar)}"
        return LiftedCover(gen, (eq,), (nn * (p - 1),))
    p = data.p
    a1 = _lift(data.first)
    if data.kind == "A":
        a2 = _lift(data.second)
        w = WittVec2(a1, a2)
        return LiftedCover(w, (f"(T1, T2)^F − (T1, T2) = ({a1}, {a2})",), (0, 0))
    if data.kind == "B":
        n2 = data.levels[1] if n is None else n
        if n2 <= 0:
            raise HypothesisViolated("kind B needs a positive second level")
        w = WittVec2(a1, _lift(data.second, -p * n2))
        return LiftedCover(w, (f"T1^p − T1 = {a1}",
                               f"T̃2^p − π^{n2 * (p - 1)}T̃2 = {_lift(data.second)} + carry"),
                           (0, n2 * (p - 1)))
    n1 = data.levels[0] if n is None else n
    if n1 <= 0 or n1 % p:
        raise HypothesisViolated("kind C lift needs n1 > 0 divisible by p")
    E = carry_level(p, n1)
    f_a1 = _zero_of(a1)
    for j, c in enumerate(data.c_bar, start=1):
        if len(c):
            f_a1 = f_a1 + _lift(c).frobenius() * a1 ** j
    A1 = a1.shift_pi(-p * n1)
    if variant == 1:
        A2 = f_a1.shift_pi(-p * p * n1) + _lift(data.second, -E)
        n2 = E // p
    else:
        if m is None:
            m = (E + n1 * (p - 1)) // p + p
        top = p * m - n1 * (p - 1)
        if top <= E or top % p:
            raise HypothesisViolated(f"variant 2 needs p*m - n1(p-1) > {E} and divisible by p")
        A2 = f_a1.shift_pi(-p * m) + _lift(data.second, -top)
        n2 = top // p
    eqs = (f"X^p − π^{n1 * (p - 1)}X = {a1}",
           f"second level: A2 = {A2}")
    return LiftedCover(WittVec2(A1, A2), eqs, (n1 * (p - 1), n2 * (p - 1)), variant)


# ------------------------------------------------------------- witness helpers

def _poly_dict(terms) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for key, c in terms:
        out[key] = out.get(key, 0) + c
    return out


def displayed_witness_pair(a1bar: ResidueSeries, b1bar: ResidueSeries) -> tuple[dict, dict]:
    """The two c-1 reductions for p = 3 in the coordinate y = t1 (y^3 = a1bar):
    t2^3 = -y^7 from (T1, T2), and the reduction written for the translated
    coordinates S = T + (pi^-3 b1, 0) after substituting s = y + b1bar:
    -y^7 + 2 y^3 b^4 + y b^6.  Returned as {(t-exponent, y-exponent): coeff}."""
    p = a1bar.p
    if p != 3:
        raise HypothesisViolated("the displayed witness equations are written for p = 3")
    f = {(0, 7): p - 1}
    g_terms = [((0, 7), p - 1)]
    for e, c in (b1bar ** 4).items():
        g_terms.append(((e, 3), 2 * c))
    for e, c in (b1bar ** 6).items():
        g_terms.append(((e, 1), c))
    g = {k: c % p for k, c in _poly_dict(g_terms).items() if c % p}
    return f, g


def normalized_witness_pair(a1bar: ResidueSeries, b1bar: ResidueSeries,
                            n1: int = 3) -> tuple[dict, dict]:
    """Engine version of the same comparison: run the second-level elimination for
    (pi^-(p n1) a1, 0) and for its translate by the Witt coboundary of
    (pi^-n1 b1, 0), then rewrite the second reduction in y = s - b1bar."""
    from math import comb

    p = a1bar.p
    a1 = BiElement.from_residue(a1bar, -p * n1, EXACT, 0)
    zero = BiElement.zero(p, EXACT, 0)
    t_form = second_level(a1, zero, n1, germ=True)
    b = BiElement.from_residue(b1bar, -n1, EXACT, 0)
    s_vec = WittVec2(a1, zero) + _wp(b)
    s_form = second_level(s_vec.x1, s_vec.x2, n1, germ=True)
    if s_form.level != t_form.level:
        raise HypothesisViolated("the two forms end at different pi-levels")  # pragma: no cover
    terms = []
    for k, comp in enumerate(s_form.leading):
        for i, c in comp.items():
            for ell in range(k + 1):
                for e, cb in (b1bar ** (k - ell)).items():
                    terms.append(((i + e, ell), c * comb(k, ell) * cb))
    g = {key: c % p for key, c in _poly_dict(terms).items() if c % p}
    return residue_cover_dict(t_form.leading), g
