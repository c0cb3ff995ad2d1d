"""Exact arithmetic over F_p, truncated Laurent series in t, and truncated
two-variable expansions sum c_ij pi^i T^j.

Precision conventions
---------------------
* ``ResidueSeries.prec``: every exponent >= prec is unknown.  ``EXACT``
  (math.inf) marks a series known exactly.
* ``BiElement.pi_prec``: coefficients of pi^i with i >= pi_prec are unknown.
  In the T direction elements are finite Laurent polynomials, known exactly.
* ``BiElement.t_window``: when set the element lives in the power-series
  (germ) ring and every stored T-exponent is >= t_window.  ``None`` means
  the boundary ring with T^{-1} allowed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from sympy import isprime

from .errors import (
    IndeterminateAtPrecision,
    MixedContext,
    NegativeValuation,
    NotAPthPower,
    RootExtensionNeeded,
    SchemaError,
)

EXACT = math.inf
Prec = Union[int, float]


@dataclass(frozen=True)
class PrimeChar:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or not isprime(self.p):
            raise SchemaError(f"characteristic must be a prime >= 2, got {self.p!r}")

    def __int__(self) -> int:
        return self.p


def as_prime(p: Union[int, PrimeChar]) -> int:
    if isinstance(p, PrimeChar):
        return p.p
    return PrimeChar(p).p


# ---------------------------------------------------------------- F_p helpers

def fp_inv(c: int, p: int) -> int:
    c %= p
    if c == 0:
        raise ZeroDivisionError("inverse of 0 in F_p")
    return pow(c, p - 2, p)


def fp_root(c: int, m: int, p: int) -> int:
    """Return some b in F_p with b^m = c.

    Raises RootExtensionNeeded carrying the degree d of the smallest
    extension F_{p^d} containing an m-th root of c.
    """
    c %= p
    if m == 0:
        raise ValueError("0-th root")
    if c == 0:
        return 0
    m_abs = abs(m)
    for b in range(1, p):
        if pow(b, m_abs, p) == (c if m > 0 else fp_inv(c, p)):
            return b
    target = c if m > 0 else fp_inv(c, p)
    order = 1
    while pow(target, order, p) != 1:
        order += 1
    d = 1
    while True:
        q1 = p ** d - 1
        if (q1 // math.gcd(m_abs, q1)) % order == 0:
            raise RootExtensionNeeded(
                f"{c} has no {m}-th root in F_{p}; it exists in F_{p}^{d}", d)
        d += 1


def _min_prec(a: Prec, b: Prec) -> Prec:
    return a if a <= b else b


def _fmt_prec(prec: Prec):
    return None if prec == EXACT else int(prec)


def _parse_prec(value) -> Prec:
    if value is None or value == "inf":
        return EXACT
    if not isinstance(value, int):
        raise SchemaError(f"precision must be an integer or null, got {value!r}")
    return value


# ------------------------------------------------------------ ResidueSeries

class ResidueSeries:
    """Element of F_p((t)) known modulo t^prec."""

    __slots__ = ("p", "_terms", "prec")

    def __init__(self, p: Union[int, PrimeChar], coeffs: Mapping[int, int] | None = None,
                 prec: Prec = EXACT):
        p = as_prime(p)
        terms = {}
        for e, c in (coeffs or {}).items():
            c %= p
            if c and e < prec:
                terms[int(e)] = c
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "_terms", tuple(sorted(terms.items())))
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("ResidueSeries is immutable")

    # construction
    @classmethod
    def zero(cls, p, prec: Prec = EXACT) -> "ResidueSeries":
        return cls(p, {}, prec)

    @classmethod
    def monomial(cls, p, exp: int, coeff: int = 1, prec: Prec = EXACT) -> "ResidueSeries":
        return cls(p, {exp: coeff}, prec)

    @classmethod
    def constant(cls, p, c: int, prec: Prec = EXACT) -> "ResidueSeries":
        return cls(p, {0: c}, prec)

    @property
    def coeffs(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, e: int) -> int:
        if e >= self.prec:
            raise IndeterminateAtPrecision(f"coefficient of t^{e} unknown (prec {self.prec})")
        return dict(self._terms).get(e, 0)

    def is_exact(self) -> bool:
        return self.prec == EXACT

    def is_exact_zero(self) -> bool:
        return not self._terms and self.prec == EXACT

    def is_zero(self) -> bool:
        """True only when the series is known to vanish."""
        if self._terms:
            return False
        if self.prec == EXACT:
            return True
        raise IndeterminateAtPrecision("zero so far, but only known modulo t^%d" % self.prec)

    def valuation(self) -> Prec:
        if self._terms:
            return self._terms[0][0]
        if self.prec == EXACT:
            return EXACT
        raise IndeterminateAtPrecision(f"valuation unknown: series is O(t^{self.prec})")

    t_valuation = valuation

    def lower_bound(self) -> Prec:
        return self._terms[0][0] if self._terms else self.prec

    def leading(self) -> tuple[int, int]:
        v = self.valuation()
        if v == EXACT:
            raise IndeterminateAtPrecision("exact zero has no leading term")
        return self._terms[0]

    def max_exponent(self) -> int:
        return self._terms[-1][0] if self._terms else -1

    def truncate(self, prec: Prec) -> "ResidueSeries":
        return ResidueSeries(self.p, self.coeffs, _min_prec(prec, self.prec))

    # ring structure
    def _check(self, other) -> "ResidueSeries":
        if isinstance(other, int):
            return ResidueSeries.constant(self.p, other)
        if not isinstance(other, ResidueSeries):
            return NotImplemented
        if other.p != self.p:
            raise ValueError(f"characteristic mismatch: {self.p} vs {other.p}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        prec = _min_prec(self.prec, other.prec)
        out = dict(self._terms)
        for e, c in other._terms:
            out[e] = out.get(e, 0) + c
        return ResidueSeries(self.p, out, prec)

    __radd__ = __add__

    def __neg__(self):
        return ResidueSeries(self.p, {e: -c for e, c in self._terms}, self.prec)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        prec = _min_prec(self.prec + other.lower_bound(), other.prec + self.lower_bound())
        out: dict[int, int] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = e1 + e2
                if e < prec:
                    out[e] = out.get(e, 0) + c1 * c2
        return ResidueSeries(self.p, out, prec)

    __rmul__ = __mul__

    def scale(self, c: int) -> "ResidueSeries":
        return ResidueSeries(self.p, {e: v * c for e, v in self._terms}, self.prec)

    def shift(self, k: int) -> "ResidueSeries":
        """Multiply by t^k."""
        return ResidueSeries(self.p, {e + k: c for e, c in self._terms}, self.prec + k)

    def frobenius(self) -> "ResidueSeries":
        """self^p; coefficients are fixed because c^p = c in F_p."""
        return ResidueSeries(self.p, {self.p * e: c for e, c in self._terms}, self.p * self.prec)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = ResidueSeries.constant(self.p, 1)
        base = self
        while n and n % self.p == 0:
            base = base.frobenius()
            n //= self.p
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self, prec: Prec | None = None) -> "ResidueSeries":
        """Multiplicative inverse known modulo t^prec.

        Without ``prec`` the result is exact for monomials and otherwise
        known to the precision the input supports.
        """
        v, c0 = self.leading()
        if len(self._terms) == 1 and self.prec == EXACT:
            return ResidueSeries.monomial(self.p, -v, fp_inv(c0, self.p))
        supported = self.prec - 2 * v
        if prec is None:
            if supported == EXACT:
                raise IndeterminateAtPrecision("inverse of an exact non-monomial needs a target precision")
            prec = supported
        else:
            prec = _min_prec(prec, supported)
        n_rel = int(prec + v)
        if n_rel <= 0:
            return ResidueSeries.zero(self.p, prec)
        u = {e - v: c for e, c in self._terms}
        inv0 = fp_inv(c0, self.p)
        w = [0] * n_rel
        w[0] = inv0
        for k in range(1, n_rel):
            s = 0
            for i in range(1, k + 1):
                ui = u.get(i)
                if ui:
                    s += ui * w[k - i]
            w[k] = (-s * inv0) % self.p
        return ResidueSeries(self.p, {k - v: w[k] for k in range(n_rel)}, prec)

    def is_pth_power(self) -> bool:
        return all(e % self.p == 0 for e, _ in self._terms)

    def pth_root(self) -> "ResidueSeries":
        if not self.is_pth_power():
            raise NotAPthPower(f"{self} has an exponent prime to {self.p}")
        prec = self.prec if self.prec == EXACT else -((-self.prec) // self.p)
        return ResidueSeries(self.p, {e // self.p: c for e, c in self._terms}, prec)

    def derivative(self) -> "ResidueSeries":
        prec = self.prec - 1 if self.prec != EXACT else EXACT
        return ResidueSeries(self.p, {e - 1: e * c for e, c in self._terms}, prec)

    def strip_pth_powers(self, nonneg_only: bool = False) -> "ResidueSeries":
        """Drop monomials with exponent divisible by p (canonical form mod p-th powers)."""
        keep = {e: c for e, c in self._terms
                if e % self.p != 0 or (nonneg_only and e < 0)}
        return ResidueSeries(self.p, keep, self.prec)

    # comparisons / display
    def __eq__(self, other):
        if isinstance(other, int):
            other = ResidueSeries.constant(self.p, other)
        if not isinstance(other, ResidueSeries):
            return NotImplemented
        return self.p == other.p and self._terms == other._terms and self.prec == other.prec

    def __hash__(self):
        return hash((self.p, self._terms, self.prec))

    def __repr__(self):
        return f"ResidueSeries({self.p}, {self.coeffs}, prec={_fmt_prec(self.prec)})"

    def __str__(self):
        return format_series(self._terms, "t", self.prec)

    def to_dict(self, var: str = "t") -> dict:
        return {"p": self.p, "var": var, "prec": _fmt_prec(self.prec),
                "terms": [[e, c] for e, c in self._terms]}

    def to_json(self, var: str = "t") -> str:
        return json.dumps(self.to_dict(var), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ResidueSeries":
        try:
            p = data["p"]
            terms = data.get("terms", [])
            coeffs: dict[int, int] = {}
            for e, c in terms:
                if not isinstance(e, int) or not isinstance(c, int):
                    raise SchemaError(f"bad term {[e, c]!r}")
                coeffs[e] = coeffs.get(e, 0) + c
            return cls(p, coeffs, _parse_prec(data.get("prec")))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed series: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ResidueSeries":
        return cls.from_dict(json.loads(text))


def format_series(terms: Iterable[tuple[int, int]], var: str, prec: Prec = EXACT) -> str:
    parts = []
    for e, c in terms:
        if e == 0:
            parts.append(str(c))
        else:
            mono = var if e == 1 else f"{var}^{e}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
    if prec != EXACT:
        parts.append(f"O({var}^{prec})")
    return " + ".join(parts) if parts else "0"


# ----------------------------------------------------------------- BiElement

class BiElement:
    """Finite sum of c * pi^i * T^j with coefficients in F_p, known mod pi^pi_prec."""

    __slots__ = ("p", "_terms", "pi_prec", "t_window")

    def __init__(self, p: Union[int, PrimeChar], terms: Mapping[tuple[int, int], int] | None = None,
                 pi_prec: Prec = EXACT, t_window: int | None = None):
        p = as_prime(p)
        out = {}
        for (i, j), c in (terms or {}).items():
            c %= p
            if c and i < pi_prec:
                if t_window is not None and j < t_window:
                    raise MixedContext(f"T-exponent {j} below the germ window {t_window}")
                out[(int(i), int(j))] = c
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "_terms", tuple(sorted(out.items())))
        object.__setattr__(self, "pi_prec", pi_prec)
        object.__setattr__(self, "t_window", t_window)

    def __setattr__(self, name, value):
        raise AttributeError("BiElement is immutable")

    @classmethod
    def zero(cls, p, pi_prec: Prec = EXACT, t_window: int | None = None) -> "BiElement":
        return cls(p, {}, pi_prec, t_window)

    @classmethod
    def monomial(cls, p, i: int, j: int, coeff: int = 1, pi_prec: Prec = EXACT,
                 t_window: int | None = None) -> "BiElement":
        return cls(p, {(i, j): coeff}, pi_prec, t_window)

    @classmethod
    def from_residue(cls, series: ResidueSeries, pi_exp: int = 0, pi_prec: Prec = EXACT,
                     t_window: int | None = None) -> "BiElement":
        """Monomial-wise lift of a residue series placed at pi^pi_exp."""
        if series.prec != EXACT:
            raise IndeterminateAtPrecision("only exactly known residue series can be lifted")
        return cls(series.p, {(pi_exp, e): c for e, c in series.items()}, pi_prec, t_window)

    @property
    def terms(self) -> dict[tuple[int, int], int]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    @property
    def is_germ(self) -> bool:
        return self.t_window is not None

    def as_boundary(self) -> "BiElement":
        return BiElement(self.p, self.terms, self.pi_prec, None)

    def as_germ(self, window: int = 0) -> "BiElement":
        return BiElement(self.p, self.terms, self.pi_prec, window)

    def with_pi_prec(self, pi_prec: Prec) -> "BiElement":
        return BiElement(self.p, self.terms, _min_prec(pi_prec, self.pi_prec), self.t_window)

    def is_exact_zero(self) -> bool:
        return not self._terms and self.pi_prec == EXACT

    def gauss_valuation(self) -> Prec:
        if self._terms:
            return min(i for (i, _), _ in self._terms)
        if self.pi_prec == EXACT:
            return EXACT
        raise IndeterminateAtPrecision(f"valuation unknown: element is O(pi^{self.pi_prec})")

    def lower_bound(self) -> Prec:
        return min(i for (i, _), _ in self._terms) if self._terms else self.pi_prec

    def slice(self, i: int) -> ResidueSeries:
        """The coefficient of pi^i, a Laurent polynomial in t."""
        if i >= self.pi_prec:
            raise IndeterminateAtPrecision(f"coefficient of pi^{i} unknown (pi_prec {self.pi_prec})")
        return ResidueSeries(self.p, {j: c for (a, j), c in self._terms if a == i})

    def pi_levels(self) -> list[int]:
        return sorted({i for (i, _), _ in self._terms})

    def reduce_mod_pi(self) -> ResidueSeries:
        if self._terms:
            v = self.gauss_valuation()
            if v < 0:
                raise NegativeValuation(f"gauss valuation {v} < 0; reduce after rescaling")
        return self.slice(0)

    def t_exponent_range(self) -> tuple[int, int]:
        js = [j for (_, j), _ in self._terms]
        return (min(js), max(js)) if js else (0, 0)

    # ring structure
    def _check(self, other):
        if isinstance(other, int):
            return BiElement(self.p, {(0, 0): other}, EXACT, self.t_window)
        if not isinstance(other, BiElement):
            return NotImplemented
        if other.p != self.p:
            raise ValueError(f"characteristic mismatch: {self.p} vs {other.p}")
        if (self.t_window is None) != (other.t_window is None):
            raise MixedContext("cannot combine a germ element with a boundary element; "
                               "coerce explicitly with as_boundary()")
        return other

    @staticmethod
    def _window(a: int | None, b: int | None, mul: bool) -> int | None:
        if a is None:
            return None
        return min(a, b, a + b) if mul else min(a, b)

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms:
            out[k] = out.get(k, 0) + c
        return BiElement(self.p, out, _min_prec(self.pi_prec, other.pi_prec),
                         self._window(self.t_window, other.t_window, False))

    __radd__ = __add__

    def __neg__(self):
        return BiElement(self.p, {k: -c for k, c in self._terms}, self.pi_prec, self.t_window)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        prec = _min_prec(self.pi_prec + other.lower_bound(), other.pi_prec + self.lower_bound())
        out: dict[tuple[int, int], int] = {}
        for (i1, j1), c1 in self._terms:
            for (i2, j2), c2 in other._terms:
                i = i1 + i2
                if i < prec:
                    k = (i, j1 + j2)
                    out[k] = out.get(k, 0) + c1 * c2
        return BiElement(self.p, out, prec, self._window(self.t_window, other.t_window, True))

    __rmul__ = __mul__

    def scale(self, c: int) -> "BiElement":
        return BiElement(self.p, {k: v * c for k, v in self._terms}, self.pi_prec, self.t_window)

    def shift_pi(self, k: int) -> "BiElement":
        """Multiply by pi^k."""
        return BiElement(self.p, {(i + k, j): c for (i, j), c in self._terms},
                         self.pi_prec + k, self.t_window)

    def shift_t(self, k: int) -> "BiElement":
        """Multiply by T^k."""
        window = None if self.t_window is None else self.t_window + k
        return BiElement(self.p, {(i, j + k): c for (i, j), c in self._terms}, self.pi_prec, window)

    def frobenius(self) -> "BiElement":
        p = self.p
        window = None if self.t_window is None else min(self.t_window, p * self.t_window)
        return BiElement(p, {(p * i, p * j): c for (i, j), c in self._terms},
                         p * self.pi_prec, window)

    def __pow__(self, n: int):
        if n < 0:
            if len(self._terms) != 1 or self.pi_prec != EXACT:
                raise IndeterminateAtPrecision("only exact monomials are inverted")
            ((i, j), c), = self._terms
            window = None if self.t_window is None else -j
            mono = BiElement(self.p, {(-i, -j): fp_inv(c, self.p)}, EXACT, window)
            return mono ** (-n)
        result = BiElement(self.p, {(0, 0): 1}, EXACT, self.t_window)
        base = self
        while n and n % self.p == 0:
            base = base.frobenius()
            n //= self.p
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def swap_parameter(self, thickness: int) -> "BiElement":
        """Rewrite in the opposite parameter S of a double point S*T = pi^thickness.

        Each pi^i T^j becomes pi^(i + thickness*j) S^(-j).  Needs an exact input,
        because unknown pi-tails would spread over every T-degree.
        """
        if self.pi_prec != EXACT:
            raise IndeterminateAtPrecision("parameter swap needs an exactly known element")
        return BiElement(self.p, {(i + thickness * j, -j): c for (i, j), c in self._terms})

    def __eq__(self, other):
        if not isinstance(other, BiElement):
            return NotImplemented
        return (self.p, self._terms, self.pi_prec, self.t_window) == \
            (other.p, other._terms, other.pi_prec, other.t_window)

    def __hash__(self):
        return hash((self.p, self._terms, self.pi_prec, self.t_window))

    def __repr__(self):
        return (f"BiElement({self.p}, {self.terms}, pi_prec={_fmt_prec(self.pi_prec)}, "
                f"t_window={self.t_window})")

    def __str__(self):
        return self.render()

    def render(self, var: str = "T", pi: str = "pi") -> str:
        parts = []
        for (i, j), c in self._terms:
            factors = []
            if i:
                factors.append(pi if i == 1 else f"{pi}^{i}")
            if j:
                factors.append(var if j == 1 else f"{var}^{j}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}*{mono}")
        if self.pi_prec != EXACT:
            parts.append(f"O({pi}^{self.pi_prec})")
        return " + ".join(parts) if parts else "0"

    def to_dict(self) -> dict:
        return {"p": self.p, "ring": "germ" if self.is_germ else "boundary",
                "pi_prec": _fmt_prec(self.pi_prec), "t_window": self.t_window,
                "terms": [[[i, j], c] for (i, j), c in self._terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_terms(cls, p, terms: Iterable, pi_prec: Prec = EXACT,
                   t_window: int | None = None) -> "BiElement":
        out: dict[tuple[int, int], int] = {}
        try:
            for key, c in terms:
                i, j = key
                if not all(isinstance(x, int) for x in (i, j, c)):
                    raise SchemaError(f"bad term {[key, c]!r}")
                out[(i, j)] = out.get((i, j), 0) + c
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"malformed term list: {exc}") from exc
        return cls(p, out, pi_prec, t_window)

    @classmethod
    def from_dict(cls, data: Mapping) -> "BiElement":
        try:
            ring = data.get("ring", "boundary")
            if ring not in ("boundary", "germ"):
                raise SchemaError(f"unknown ring {ring!r}")
            window = data.get("t_window")
            if ring == "germ" and window is None:
                window = 0
            if ring == "boundary":
                window = None
            return cls.from_terms(data["p"], data.get("terms", []),
                                  _parse_prec(data.get("pi_prec")), window)
        except KeyError as exc:
            raise SchemaError(f"missing field {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "BiElement":
        return cls.from_dict(json.loads(text))


def T(p, j: int = 1, pi_prec: Prec = EXACT, t_window: int | None = None) -> BiElement:
    return BiElement.monomial(p, 0, j, 1, pi_prec, t_window)


def PI(p, i: int = 1, pi_prec: Prec = EXACT, t_window: int | None = None) -> BiElement:
    return BiElement.monomial(p, i, 0, 1, pi_prec, t_window)
