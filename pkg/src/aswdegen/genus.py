"""Vanishing-cycles bookkeeping for cyclic covers of formal germs.

All formulas are evaluated in exact integer arithmetic: the numerator
N with 2*g_y = N is computed first, then halved with a parity check.
Degeneration types use signed conductors m as produced by the boundary
engines (poles are negative).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import HypothesisViolated, NegativeGenus, NonIntegralGenus, SchemaError

ENTRY_KINDS = ("p", "split", "pair", "p_components")


@dataclass(frozen=True)
class BoundaryEntry:
    """Induced torsor on one boundary of a germ.

    kind 'p':            rank-p torsor of type (n, m)
    kind 'split':        completely split (p copies for rank p, p^2 for rank p^2)
    kind 'pair':         irreducible rank-p^2 torsor of type ((n1, m1), (n2, m2))
    kind 'p_components': rank-p^2 cover with p components, each of rank-p type (n, m)
    """
    kind: str
    type: tuple[int, int] | None = None
    pair: tuple[tuple[int, int], tuple[int, int]] | None = None

    def __post_init__(self):
        if self.kind not in ENTRY_KINDS:
            raise SchemaError(f"unknown boundary entry kind {self.kind!r}")
        if self.kind in ("p", "p_components") and self.type is None:
            raise SchemaError(f"boundary entry {self.kind!r} needs a type (n, m)")
        if self.kind == "pair" and self.pair is None:
            raise SchemaError("boundary entry 'pair' needs ((n1, m1), (n2, m2))")

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryEntry":
        kind = d.get("kind")
        t = d.get("type")
        pr = d.get("pair")
        return cls(kind,
                   tuple(int(x) for x in t) if t is not None else None,
                   tuple(tuple(int(x) for x in q) for q in pr) if pr is not None else None)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.type is not None:
            out["type"] = list(self.type)
        if self.pair is not None:
            out["pair"] = [list(q) for q in self.pair]
        return out

    def check(self, p: int, rank: str) -> None:
        if rank == "p" and self.kind in ("pair", "p_components"):
            raise SchemaError(f"entry kind {self.kind!r} requires rank p^2")
        if rank == "p2" and self.kind == "p":
            raise SchemaError("entry kind 'p' requires rank p")
        types = [self.type] if self.type is not None else []
        if self.pair is not None:
            types = list(self.pair)
        for n, m in types:
            if n < 0:
                raise SchemaError(f"type ({n}, {m}) has negative n")
            if m % p == 0 and not (n == 0 and m == 0):
                raise SchemaError(f"conductor {m} of type ({n}, {m}) is divisible by p={p}")

    def branches(self, p: int, rank: str) -> int:
        if self.kind in ("p", "pair"):
            return 1
        if self.kind == "p_components":
            return p
        return p if rank == "p" else p * p


@dataclass(frozen=True)
class BoundaryProfile:
    entries: tuple[BoundaryEntry, ...]

    @classmethod
    def of(cls, *entries: BoundaryEntry) -> "BoundaryProfile":
        return cls(tuple(entries))

    def to_dict(self) -> list:
        return [e.to_dict() for e in self.entries]


def _half(numerator: int, label: str) -> int:
    if numerator % 2:
        raise NonIntegralGenus(f"2*g_y = {numerator} is odd ({label})")
    if numerator < 0:
        raise NegativeGenus(f"2*g_y = {numerator} < 0 ({label})")
    return numerator // 2


def _check_common(p: int, g_x: int, d_eta: int) -> None:
    if p < 2:
        raise SchemaError(f"p={p} is not a prime")
    if g_x < 0:
        raise SchemaError(f"g_x={g_x} < 0")
    if d_eta < 0:
        raise SchemaError(f"d_eta={d_eta} < 0")


def _rank_p_term(n: int, m: int, p: int) -> int:
    # an etale type (0, 0) is the trivial torsor and contributes nothing
    if n == 0 and m == 0:
        return 0
    return (-m - 1) * (p - 1)


def d_s_p(profile: BoundaryProfile, p: int) -> int:
    total = 0
    for e in profile.entries:
        e.check(p, "p")
        if e.kind == "p":
            total += _rank_p_term(*e.type, p)
    return total


def d_s_p2(profile: BoundaryProfile, p: int, p_component_weight: int | None = None) -> int:
    """p*d_{s,1} + d_{s,2}; a p-components entry counts ``p_component_weight`` times (default p)."""
    w = p if p_component_weight is None else p_component_weight
    total = 0
    for e in profile.entries:
        e.check(p, "p2")
        if e.kind == "pair":
            (n1, m1), (n2, m2) = e.pair
            total += p * _rank_p_term(n1, m1, p) + _rank_p_term(n2, m2, p)
        elif e.kind == "p_components":
            total += w * _rank_p_term(*e.type, p)
    return total


def local_rh_p(g_x: int, d_eta: int, profile: BoundaryProfile, p: int) -> int:
    """Solve 2g_y - 2 = p(2g_x - 2) + d_eta - d_s for g_y."""
    _check_common(p, g_x, d_eta)
    num = p * (2 * g_x - 2) + d_eta - d_s_p(profile, p) + 2
    return _half(num, "local Riemann-Hurwitz, rank p")


def local_rh_p2(g_x: int, d_eta: int | tuple[int, int], profile: BoundaryProfile, p: int,
                strict_paper: bool = False) -> int:
    """Solve 2g_y - 2 = p^2(2g_x - 2) + d_eta - d_s for g_y.

    ``d_eta`` is either the total or the pair (d_eta1, d_eta2) with
    d_eta = p*d_eta1 + d_eta2.  With ``strict_paper`` a p-components entry
    enters d_s with weight 1 instead of p.
    """
    if isinstance(d_eta, (tuple, list)):
        d_eta = p * int(d_eta[0]) + int(d_eta[1])
    _check_common(p, g_x, d_eta)
    ds = d_s_p2(profile, p, 1 if strict_paper else None)
    num = p * p * (2 * g_x - 2) + d_eta - ds + 2
    return _half(num, "local Riemann-Hurwitz, rank p^2")


# ------------------------------------------------------------------ closed forms

@dataclass(frozen=True)
class GermGenusQuery:
    p: int
    germ_kind: str               # 'smooth' | 'double'
    rank: str                    # 'p' | 'p2'
    r: int
    boundaries: tuple[BoundaryEntry, ...]
    thickness: int | None = None
    branches: int | None = None  # optional; checked against the boundary data

    def __post_init__(self):
        if self.germ_kind not in ("smooth", "double"):
            raise SchemaError(f"germ_kind must be 'smooth' or 'double', got {self.germ_kind!r}")
        if self.rank not in ("p", "p2"):
            raise SchemaError(f"rank must be 'p' or 'p2', got {self.rank!r}")
        if self.r < 0:
            raise SchemaError(f"r={self.r} < 0")
        want = 1 if self.germ_kind == "smooth" else 2
        if len(self.boundaries) != want:
            raise SchemaError(f"a {self.germ_kind} germ has {want} boundaries, got {len(self.boundaries)}")
        if self.thickness is not None and self.thickness <= 0:
            raise SchemaError(f"thickness {self.thickness} must be positive")
        for e in self.boundaries:
            e.check(self.p, self.rank)
        if self.branches is not None and self.branches != self.branch_count:
            raise SchemaError(f"branches={self.branches} but the boundary data gives {self.branch_count}")

    @property
    def branch_count(self) -> int:
        return sum(e.branches(self.p, self.rank) for e in self.boundaries)

    @property
    def d_eta(self) -> int:
        return self.r * (self.p - 1)

    def profile(self) -> BoundaryProfile:
        return BoundaryProfile(self.boundaries)

    @classmethod
    def from_dict(cls, d: dict) -> "GermGenusQuery":
        try:
            return cls(int(d["p"]), d["germ_kind"], d["rank"], int(d["r"]),
                       tuple(BoundaryEntry.from_dict(e) for e in d["boundaries"]),
                       d.get("thickness"), d.get("branches"))
        except KeyError as exc:
            raise SchemaError(f"genus query is missing field {exc}") from None

    def to_dict(self) -> dict:
        return {"p": self.p, "germ_kind": self.germ_kind, "rank": self.rank, "r": self.r,
                "boundaries": [e.to_dict() for e in self.boundaries],
                "thickness": self.thickness, "branches": self.branch_count}


@dataclass(frozen=True)
class GermGenusResult:
    genus: int
    branches: int
    formula: str
    verdict: str                 # 'smooth' | 'ordinary double point' | 'singular'
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"genus": self.genus, "branches": self.branches, "formula": self.formula,
                "verdict": self.verdict, "notes": list(self.notes)}


def _evaluate(numerator: int, factor: int, label: str, inequality: str) -> int:
    if numerator < 0:
        raise HypothesisViolated(f"necessary inequality {inequality} fails ({label})")
    total = numerator * factor
    if total % 2:
        raise NonIntegralGenus(f"{label}: {numerator}*{factor} is odd")
    return total // 2


def _sorted_by_kind(entries: Sequence[BoundaryEntry], order: Sequence[str]) -> list[BoundaryEntry]:
    return sorted(entries, key=lambda e: order.index(e.kind))


def _closed_form(q: GermGenusQuery, strict_paper: bool) -> tuple[int, int, str, str, list[str]]:
    """Return (numerator, factor, formula label, inequality text, notes); g = numerator*factor/2."""
    p, r = q.p, q.r
    notes: list[str] = []
    kinds = sorted(e.kind for e in q.boundaries)
    b = q.branch_count
    if q.rank == "p" and q.germ_kind == "smooth":
        e, = q.boundaries
        if e.kind == "p":
            if e.type == (0, 0):
                raise SchemaError("type (0, 0) is the split torsor; use kind 'split'")
            m = e.type[1]
            return r + m - 1, p - 1, "(r+m-1)(p-1)/2", "r+m-1 >= 0", notes
        return r - 2, p - 1, "(r-2)(p-1)/2", "r-2 >= 0", notes
    if q.rank == "p":
        if kinds == ["p", "p"]:
            m1, m2 = q.boundaries[0].type[1], q.boundaries[1].type[1]
            return r + m1 + m2, p - 1, "(r+m1+m2)(p-1)/2", "r+m1+m2 >= 0", notes
        if kinds == ["p", "split"]:
            m2 = _sorted_by_kind(q.boundaries, ["split", "p"])[1].type[1]
            return r + m2 - 1, p - 1, "(r+m2-1)(p-1)/2", "r+m2-1 >= 0", notes
        if strict_paper:
            notes.append("strict: factor (p-2) used for the 2p-branch case")
            return r - 2, p - 2, "(r-2)(p-2)/2", "r-2 >= 0", notes
        notes.append("2p-branch case uses (p-1)/2; the strict variant has (p-2)/2")
        return r - 2, p - 1, "(r-2)(p-1)/2", "r-2 >= 0", notes
    if q.germ_kind == "smooth":
        e, = q.boundaries
        if e.kind == "pair":
            (_, m1), (_, m2) = e.pair
            return r + p * m1 + m2 - p - 1, p - 1, "(r+p*m1+m2-p-1)(p-1)/2", "r+p*m1+m2-p-1 >= 0", notes
        if e.kind == "p_components":
            m = e.type[1]
            return r + p * m - p - 2, p - 1, "(r+p*m-p-2)(p-1)/2", "r+p*m-p-2 >= 0", notes
        return r - 2 * p - 2, p - 1, "(r-2p-2)(p-1)/2", "r-2p-2 >= 0", notes
    # rank p^2 double germ
    if kinds == ["pair", "pair"]:
        (_, m11), (_, m12) = q.boundaries[0].pair
        (_, m21), (_, m22) = q.boundaries[1].pair
        return (r + p * m11 + p * m21 + m12 + m22, p - 1, "(r+p*m11+p*m21+m12+m22)(p-1)/2",
                "r+p*m11+p*m21+m12+m22 >= 0", notes)
    if kinds == ["p_components", "pair"]:
        comp, pr = _sorted_by_kind(q.boundaries, ["p_components", "pair"])
        m1 = comp.type[1]
        (_, m21), (_, m22) = pr.pair
        if strict_paper:
            notes.append("strict: alternative p+1 branch formula (r+p*m21+p+m1+m22) used")
            return (r + p * m21 + p + m1 + m22, p - 1, "(r+p*m21+p+m1+m22)(p-1)/2",
                    "r+p*m21+p+m1+m22 >= 0", notes)
        return (r + p * m1 + p * m21 + m22 - 1, p - 1, "(r+p*m1+p*m21+m22-1)(p-1)/2",
                "r+p*m1+p*m21+m22-1 >= 0", notes)
    if kinds == ["p_components", "p_components"]:
        ma, mb = q.boundaries[0].type[1], q.boundaries[1].type[1]
        if strict_paper:
            notes.append("strict: alternative 2p branch formula (r+m1+m2-2p) used")
            return r + ma + mb - 2 * p, p - 1, "(r+m1+m2-2p)(p-1)/2", "r+m1+m2-2p >= 0", notes
        return r + p * (ma + mb) - 2, p - 1, "(r+p*m1+p*m2-2)(p-1)/2", "r+p*m1+p*m2-2 >= 0", notes
    if kinds == ["pair", "split"]:
        (_, m21), (_, m22) = _sorted_by_kind(q.boundaries, ["split", "pair"])[1].pair
        return (r + p * m21 + m22 - p - 1, p - 1, "(r+p*m21+m22-p-1)(p-1)/2",
                "r+p*m21+m22-p-1 >= 0", notes)
    if kinds == ["p_components", "split"]:
        m = _sorted_by_kind(q.boundaries, ["split", "p_components"])[1].type[1]
        if strict_paper:
            notes.append("strict: alternative p^2+p branch formula (r+m-2p-1) used; its companion "
                         "condition is an equality '=0' while the other cases use inequalities, "
                         "and only the inequality is enforced")
            return r + m - 2 * p - 1, p - 1, "(r+m-2p-1)(p-1)/2", "r+m-2p-1 >= 0", notes
        return r + p * m - p - 2, p - 1, "(r+p*m-p-2)(p-1)/2", "r+p*m-p-2 >= 0", notes
    if kinds == ["split", "split"]:
        return r - 2 * p - 2, p - 1, "(r-2p-2)(p-1)/2", "r-2p-2 >= 0", notes
    raise SchemaError(f"no genus formula for boundary kinds {kinds} ({b} branches)")


def germ_genus(q: GermGenusQuery, strict_paper: bool = False) -> GermGenusResult:
    """Closed-form genus of the point above a smooth or double germ, plus a verdict."""
    num, factor, label, ineq, notes = _closed_form(q, strict_paper)
    g = _evaluate(num, factor, label, ineq)
    b = q.branch_count
    verdict = "singular"
    if q.germ_kind == "smooth" and g == 0 and b == 1:
        verdict = "smooth"
    elif q.germ_kind == "double" and g == 0 and b == 2:
        divisor = q.p if q.rank == "p" else q.p * q.p
        if q.thickness is not None and q.thickness % divisor:
            raise HypothesisViolated(
                f"g_y = 0 with two branches forces thickness divisible by {divisor}, got e={q.thickness}")
        verdict = "ordinary double point"
    return GermGenusResult(g, b, label, verdict, tuple(notes))


def germ_genus_via_rh(q: GermGenusQuery, strict_paper: bool = False) -> int:
    """The same genus through the local Riemann-Hurwitz formula with g_x = 0."""
    if q.rank == "p":
        return local_rh_p(0, q.d_eta, q.profile(), q.p)
    return local_rh_p2(0, q.d_eta, q.profile(), q.p, strict_paper=strict_paper)


# ---------------------------------------------------------------- different profile

@dataclass(frozen=True)
class DifferentProfile:
    p: int
    m: int
    values: tuple[int, ...]

    def at(self, t: int) -> int:
        return self.values[t]

    @property
    def is_increasing(self) -> bool:
        return all(a < b for a, b in zip(self.values, self.values[1:]))

    def to_dict(self) -> dict:
        return {"p": self.p, "m": self.m, "values": list(self.values),
                "increasing": self.is_increasing}


def different_profile(delta_0: int, delta_t: int, m: int, t: int, p: int) -> DifferentProfile:
    """Affine degree of the different along a chain of t steps: delta(s) = delta_0 + m(p-1)s."""
    if m <= 0:
        raise HypothesisViolated(f"m={m} must be positive")
    if t < 0:
        raise HypothesisViolated(f"t={t} must be nonnegative")
    if delta_t - delta_0 != m * (p - 1) * t:
        raise HypothesisViolated(
            f"inconsistent endpoints: delta(t)-delta(0) = {delta_t - delta_0} != m(p-1)t = {m * (p - 1) * t}")
    return DifferentProfile(p, m, tuple(delta_0 + m * (p - 1) * s for s in range(t + 1)))


def different_step(delta_t1: int, t1: int, t2: int, m: int, p: int) -> int:
    return delta_t1 + m * (p - 1) * (t2 - t1)


def rank_p_entry(n: int, m: int) -> BoundaryEntry:
    return BoundaryEntry("split") if (n, m) == (0, 0) else BoundaryEntry("p", (n, m))


def pair_entry(first: Iterable[int], second: Iterable[int]) -> BoundaryEntry:
    return BoundaryEntry("pair", pair=(tuple(first), tuple(second)))
