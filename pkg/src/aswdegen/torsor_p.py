"""Degree-p engine: integral models of Artin-Schreier equations over a boundary
R[[T]]{T^-1} or a germ R[[T]], their degeneration type (n, m), local
conductors of residue functions on P^1, and alpha_p-torsor equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import comb
from typing import Mapping, Sequence, Union

from .errors import (
    HypothesisViolated,
    IndeterminateAtPrecision,
    NonTerminatingBudget,
    TotallyRamified,
)
from .ffseries import EXACT, BiElement, ResidueSeries, fp_inv, fp_root
from .witt import GroupSchemeTag, EquationRecord, torsor_equations


@dataclass(frozen=True)
class DegTypeP:
    n: int
    m: int
    split: bool = False

    def delta_for(self, p: int) -> int:
        return 0 if self.split else self.n * (p - 1)

    @property
    def conductor(self) -> int:
        return -self.m

    @property
    def is_etale(self) -> bool:
        return self.n == 0

    def as_tuple(self) -> tuple[int, int] | str:
        return "split" if self.split else (self.n, self.m)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "split": self.split}

    def __str__(self):
        return "split" if self.split else f"({self.n}, {self.m})"


SPLIT = DegTypeP(0, 0, True)


@dataclass(frozen=True)
class NormalizedPCover:
    type: DegTypeP
    integral_rhs: BiElement
    special_fibre_rhs: ResidueSeries
    group: GroupSchemeTag
    generic_rhs: BiElement
    steps: int = 0
    notes: tuple[str, ...] = field(default=())
    # (pi_level, t_exp, coeff) of every b = coeff*pi^level*T^exp with b - b^p added
    shifts: tuple[tuple[int, int, int], ...] = field(default=())

    @property
    def p(self) -> int:
        return self.generic_rhs.p

    @property
    def delta(self) -> int:
        return self.type.delta_for(self.p)

    def equations(self) -> EquationRecord:
        return torsor_equations(self.group, self.integral_rhs)

    def special_fibre_equation(self) -> EquationRecord:
        if self.type.split:
            return torsor_equations(GroupSchemeTag("EtaleZpZ"), BiElement.zero(self.p))
        if self.type.n == 0:
            return torsor_equations(GroupSchemeTag("EtaleZpZ"),
                                    BiElement.from_residue(self.special_fibre_rhs))
        return torsor_equations(GroupSchemeTag("AlphaP"),
                                BiElement.from_residue(self.special_fibre_rhs))

    def to_dict(self) -> dict:
        return {
            "type": self.type.to_dict(),
            "delta": self.delta,
            "conductor": None if self.type.split else self.type.conductor,
            "group": self.group.to_dict(),
            "integral_equation": self.equations().unicode(),
            "special_fibre_equation": self.special_fibre_equation().unicode(),
            "integral_rhs": self.integral_rhs.to_dict(),
            "special_fibre_rhs": self.special_fibre_rhs.to_dict(),
            "steps": self.steps,
            "notes": list(self.notes),
        }


def _default_budget(a: BiElement) -> int:
    v0 = a.lower_bound()
    if a.pi_prec != EXACT:
        window = a.pi_prec - v0
    else:
        levels = a.pi_levels()
        window = (levels[-1] - v0 + 1) if levels else 1
    return 4 * max(1, int(window))


def _artin_schreier_shift(a: BiElement, level: int, exp: int, coeff: int) -> BiElement:
    """Replace coeff*pi^(p*level)*T^(p*exp) by coeff*pi^level*T^exp (adds b - b^p)."""
    p = a.p
    b = BiElement(p, {(level, exp): coeff}, EXACT, a.t_window)
    return a + b - b.frobenius()


def _strippable(e: int, p: int, germ: bool, etale: bool) -> bool:
    if e % p:
        return False
    if germ:
        # only functions regular on the germ may be added; constants are fixed by Frobenius on F_p
        return e > 0 if etale else e >= 0
    return e < 0 if etale else True


def _normalize(a_K: BiElement, germ: bool, budget: int | None) -> NormalizedPCover:
    p = a_K.p
    budget = _default_budget(a_K) if budget is None else budget
    a = a_K
    notes: list[str] = []
    shifts: list[tuple[int, int, int]] = []
    steps = 0
    while True:
        steps += 1
        if steps > budget:
            raise NonTerminatingBudget(f"normalization exceeded {budget} steps; raise pi_prec")
        if len(a) == 0:
            if a.pi_prec == EXACT or a.pi_prec >= 1:
                return _split(a, steps, notes + ["right-hand side has positive valuation"], shifts)
            raise IndeterminateAtPrecision(f"right-hand side is O(pi^{a.pi_prec}); valuation unknown")
        v = a.gauss_valuation()
        if v > 0:
            return _split(a, steps, notes + ["right-hand side has positive valuation"], shifts)
        lead = a.slice(v)
        if v == 0:
            return _finish_etale(a, germ, steps, notes, shifts)
        nu = -v
        if nu % p:
            raise TotallyRamified(f"valuation {v} is not divisible by p={p}: ramification index p")
        n0 = nu // p
        strip = [(e, c) for e, c in lead.items() if _strippable(e, p, germ, etale=False)]
        keep = [e for e, _ in lead.items() if not _strippable(e, p, germ, etale=False)]
        for e, c in strip:
            a = _artin_schreier_shift(a, -n0, e // p, c)
            shifts.append((-n0, e // p, c))
        if keep:
            integral = a.shift_pi(nu)
            sf = integral.reduce_mod_pi()
            m = sf.valuation()
            return NormalizedPCover(DegTypeP(n0, int(m)), integral, sf, GroupSchemeTag.Mn(n0),
                                    a, steps, tuple(notes), tuple(shifts))
        notes.append(f"reduction at level {v} is a p-th power; descended from n={n0}")


def _split(a: BiElement, steps: int, notes: list[str],
           shifts: list[tuple[int, int, int]]) -> NormalizedPCover:
    zero = ResidueSeries.zero(a.p)
    return NormalizedPCover(SPLIT, a, zero, GroupSchemeTag("EtaleZpZ"), a, steps, tuple(notes),
                            tuple(shifts))


def _finish_etale(a: BiElement, germ: bool, steps: int, notes: list[str],
                  shifts: list[tuple[int, int, int]]) -> NormalizedPCover:
    p = a.p
    while True:
        lead = a.slice(0)
        target = [(e, c) for e, c in lead.items() if _strippable(e, p, germ, etale=True)]
        if not target:
            break
        e, c = target[0]  # smallest strippable exponent first
        a = _artin_schreier_shift(a, 0, e // p, c)
        shifts.append((0, e // p, c))
    sf = a.reduce_mod_pi()
    poles = [e for e, _ in sf.items() if e < 0]
    if not poles:
        if germ:
            return NormalizedPCover(DegTypeP(0, 0), a, sf, GroupSchemeTag("EtaleZpZ"), a, steps,
                                    tuple(notes + ["etale, unramified over the closed point"]),
                                    tuple(shifts))
        note = "no pole after stripping: trivial over an algebraically closed residue field"
        if sf.coeffs.get(0):
            note += "; a constant term remains, which needs a residue field extension to kill"
        return _split(a, steps, notes + [note], shifts)
    m = min(poles)
    return NormalizedPCover(DegTypeP(0, m), a, sf, GroupSchemeTag("EtaleZpZ"), a, steps, tuple(notes),
                            tuple(shifts))


def normalize_boundary_p(a_K: BiElement, budget: int | None = None) -> NormalizedPCover:
    """Integral model of X^p - X = a_K over the boundary ring."""
    if a_K.is_germ:
        a_K = a_K.as_boundary()
    return _normalize(a_K, germ=False, budget=budget)


def normalize_germ_p(a_K: BiElement, budget: int | None = None) -> NormalizedPCover:
    """Integral model over a germ: only functions without poles in T may be added."""
    if not a_K.is_germ:
        a_K = a_K.as_germ(min(0, a_K.t_exponent_range()[0]))
    return _normalize(a_K, germ=True, budget=budget)


def monomial_parameter(cover: NormalizedPCover) -> int:
    """Unit u in F_p with (u*T)^m matching the leading term of the special fibre.

    Raises RootExtensionNeeded when the leading coefficient has no m-th root in F_p.
    """
    if cover.type.split:
        raise HypothesisViolated("split torsor has no conductor")
    m, c = cover.special_fibre_rhs.leading()
    return fp_root(c, m, cover.p)


def split_witness(a_K: BiElement, terms: int = 8) -> BiElement:
    """Truncated b = a + a^p + a^(p^2) + ... with b^p - b = -a, for v(a) > 0."""
    if a_K.gauss_valuation() <= 0:
        raise HypothesisViolated("split witness needs positive valuation")
    b = BiElement.zero(a_K.p, a_K.pi_prec, a_K.t_window)
    term = a_K
    for _ in range(terms):
        b = b + term
        term = term.frobenius()
    return b


# ------------------------------------------------------------- residue functions

@dataclass(frozen=True)
class RationalFunctionData:
    """Finite sum of c * (x - a)^e over F_p; ``terms`` holds (a, e, c)."""
    p: int
    terms: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_terms(cls, p: int, terms: Sequence[Sequence[int]]) -> "RationalFunctionData":
        return cls(p, tuple((int(a) % p, int(e), int(c) % p) for a, e, c in terms if c % p))

    def to_dict(self) -> dict:
        return {"p": self.p, "terms": [list(t) for t in self.terms]}

    def poles(self) -> list[Union[int, str]]:
        pts: set = set()
        for a, e, _ in self.terms:
            if e < 0:
                pts.add(a)
            elif e > 0:
                pts.add("inf")
        return sorted(pts, key=lambda x: (isinstance(x, str), x))

    def __str__(self):
        parts = []
        for a, e, c in self.terms:
            base = "x" if a == 0 else f"(x-{a})"
            parts.append(f"{c}*{base}^{e}")
        return " + ".join(parts) or "0"


def _gen_binom(e: int, k: int) -> int:
    if e >= 0:
        return comb(e, k)
    return (-1) ** k * comb(k - e - 1, k)


def local_expansion(f: RationalFunctionData, point: Union[int, str], prec: int) -> ResidueSeries:
    """Laurent expansion of f in the local parameter at ``point`` modulo s^prec."""
    p = f.p
    out: dict[int, int] = {}
    for a, e, c in f.terms:
        if point == "inf":
            # (x - a)^e = s^-e (1 - a s)^e with s = 1/x
            k = 0
            while k - e < prec:
                coef = _gen_binom(e, k) * pow(-a, k, p) if a else (1 if k == 0 else 0)
                if coef:
                    out[k - e] = out.get(k - e, 0) + c * coef
                if a == 0 or (e >= 0 and k >= e):
                    break
                k += 1
        else:
            b = int(point) % p
            if a == b:
                if e < prec:
                    out[e] = out.get(e, 0) + c
                continue
            d = (b - a) % p
            k = 0
            while k < prec:
                if e >= 0 and k > e:
                    break
                coef = _gen_binom(e, k) * (pow(d, e - k, p) if e - k >= 0 else pow(fp_inv(d, p), k - e, p))
                if coef % p:
                    out[k] = out.get(k, 0) + c * coef
                k += 1
    return ResidueSeries(p, out, prec)


def local_type_at_point(f: RationalFunctionData, point: Union[int, str], kind: str,
                        search: int | None = None) -> int | None:
    """Leading exponent after p-power stripping at ``point``.

    kind 'etale': Artin-Schreier stripping of negative p-divisible exponents;
    returns the (negative) leading pole exponent, or None when no pole survives.
    kind 'alpha_p': drop every p-divisible exponent; returns the leading
    exponent of what remains (may be positive).
    """
    p = f.p
    if kind not in ("etale", "alpha_p"):
        raise HypothesisViolated(f"unknown torsor kind {kind!r}")
    if kind == "etale":
        s = local_expansion(f, point, 0).coeffs
        for e in sorted(s):
            if e % p == 0 and s.get(e):
                c = s.pop(e)
                s[e // p] = (s.get(e // p, 0) + c) % p
                if not s[e // p]:
                    del s[e // p]
        poles = [e for e, c in s.items() if c and e < 0]
        return min(poles) if poles else None
    limit = search if search is not None else 4 * p + max(abs(e) for _, e, _ in f.terms) + 2
    series = local_expansion(f, point, limit).strip_pth_powers()
    if len(series) == 0:
        raise IndeterminateAtPrecision(f"expansion at {point} is a p-th power up to s^{limit}")
    return series.valuation()


def conductor_at_point(f: RationalFunctionData, point: Union[int, str], kind: str) -> int:
    """Prime-to-p pole order of f at point after stripping (negative of the local type)."""
    m = local_type_at_point(f, point, kind)
    if m is None:
        return 0
    return -m


# ----------------------------------------------------------- alpha_p equivalence

def _poly(p: int, coeffs: Mapping[int, int]) -> ResidueSeries:
    return ResidueSeries(p, dict(coeffs))


def _poly_divmod(num: ResidueSeries, den: ResidueSeries) -> tuple[ResidueSeries, ResidueSeries]:
    p = num.p
    q: dict[int, int] = {}
    r = dict(num.coeffs)
    dlead_e, dlead_c = max(den.items())
    inv = fp_inv(dlead_c, p)
    while r:
        e = max(r)
        if e < dlead_e:
            break
        c = r[e] * inv % p
        q[e - dlead_e] = c
        for de, dc in den.items():
            k = e - dlead_e + de
            r[k] = (r.get(k, 0) - c * dc) % p
            if not r[k]:
                del r[k]
    return ResidueSeries(p, q), ResidueSeries(p, r)


def _det(mat: list[list[ResidueSeries]], p: int) -> ResidueSeries:
    n = len(mat)
    total = ResidueSeries.zero(p)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = ResidueSeries.constant(p, 1)
        for i in range(n):
            term = term * mat[i][perm[i]]
        total = total + (term if inv % 2 == 0 else -term)
    return total


def _frobenius_classes(f: ResidueSeries) -> list[ResidueSeries]:
    """Write f(x) = sum_r x^r F_r(x^p); return [F_0(z), ..., F_{p-1}(z)]."""
    p = f.p
    cls: list[dict[int, int]] = [dict() for _ in range(p)]
    for e, c in f.items():
        if e < 0:
            raise HypothesisViolated("polynomial context expected (no negative exponents)")
        cls[e % p][e // p] = c
    return [ResidueSeries(p, d) for d in cls]


def decompose_over_pth_powers(d0: ResidueSeries, v: ResidueSeries) -> list[ResidueSeries] | None:
    """Solve d0 = sum_j a_j^p v^j with polynomials a_j, or None if impossible.

    The classes of 1, v, ..., v^(p-1) form a basis of F_p(x) over F_p(x^p) when
    v is not a p-th power, so the coefficients are unique; they are found by
    Cramer's rule over F_p[z], z = x^p.
    """
    p = d0.p
    if v.is_pth_power():
        raise HypothesisViolated("v is a p-th power; 1, v, ..., v^(p-1) is not a p-basis")
    cols = [_frobenius_classes(v ** j) for j in range(p)]
    mat = [[cols[j][r] for j in range(p)] for r in range(p)]
    rhs = _frobenius_classes(d0)
    det = _det(mat, p)
    out = []
    for j in range(p):
        mj = [row[:] for row in mat]
        for r in range(p):
            mj[r][j] = rhs[r]
        q, rem = _poly_divmod(_det(mj, p), det)
        if len(rem):
            return None
        out.append(q)  # A_j(z) = a_j(x)^p, and over F_p a_j(x) = A_j(x)
    return out


def _reduce_cover_ring(h: Mapping[tuple[int, int], int], v: ResidueSeries) -> list[ResidueSeries]:
    """Reduce sum c x^i y^k modulo y^p = v to components d_0..d_{p-1} in k[x]."""
    p = v.p
    comps = [ResidueSeries.zero(p) for _ in range(p)]
    for (i, k), c in h.items():
        q, r = divmod(k, p)
        comps[r] = comps[r] + ResidueSeries.monomial(p, i, c) * (v ** q)
    return comps


def alpha_p_equivalent(f: Mapping[tuple[int, int], int], g: Mapping[tuple[int, int], int],
                       v: ResidueSeries) -> bool:
    """True iff f - g is a p-th power in F_p[x][y]/(y^p - v).

    f and g map (i, k) to the coefficient of x^i y^k.
    """
    p = v.p
    if v.is_pth_power():
        raise HypothesisViolated("v is a p-th power")
    diff = dict(f)
    for key, c in g.items():
        diff[key] = (diff.get(key, 0) - c) % p
    comps = _reduce_cover_ring({k: c for k, c in diff.items() if c % p}, v)
    # p-th powers of sum h_k y^k are sum h_k^p v^k: they carry no y-component
    if any(len(c) for c in comps[1:]):
        return False
    return decompose_over_pth_powers(comps[0], v) is not None
