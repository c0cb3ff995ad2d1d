"""Degree-p covers over a boundary annulus: watch the degeneration type (n, m)
and the different delta = n(p-1) as the pi-adic pole of the right-hand side grows.

Run with:  python3 demos/rank_p_degeneration.py
"""

from aswdegen.errors import TotallyRamified
from aswdegen.ffseries import BiElement
from aswdegen.torsor_p import normalize_boundary_p

p = 3
print(f"X^p - X = pi^k T^-1 over the annulus, p = {p}\n")
print(f"{'k':>4}  {'type':>10}  {'delta':>5}  special fibre")
for k in range(2, -10, -1):
    a = BiElement(p, {(k, -1): 1})
    try:
        cover = normalize_boundary_p(a)
    except TotallyRamified:
        print(f"{k:>4}  {'ramified':>10}  {'-':>5}  k is not divisible by p: needs a ramified base change")
        continue
    print(f"{k:>4}  {str(cover.type):>10}  {cover.delta:>5}  {cover.special_fibre_equation().unicode()}")

print("\nAdding an Artin-Schreier coboundary b^p - b never changes the type:")
a = BiElement(p, {(-6, -1): 1})
b = BiElement(p, {(-2, -1): 1, (0, 2): 1})
for label, rhs in (("a", a), ("a + b^p - b", a + b.frobenius() - b)):
    print(f"  {label:<12} -> {normalize_boundary_p(rhs).type}")
