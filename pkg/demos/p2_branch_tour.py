"""Tour of the seven normal-form branches of Z/p^2Z covers over a germ (p = 3).

For each right-hand side (A1, A2) the engine reports the branch, the two
levels (n1, n2), the different and the degeneration datum; the datum is then
lifted back to generic equations and normalized again to show the round trip.

Run with:  python3 demos/p2_branch_tour.py
"""

from aswdegen.ffseries import BiElement
from aswdegen.torsor_p2 import extract_degen_data, lift_degen_data, normalize_germ_p2

p = 3


def germ(terms):
    return BiElement(p, terms, t_window=0)


CASES = [
    ("etale / etale", germ({(0, 1): 1}), germ({(3, 1): 1}), {}),
    ("etale / alpha_p", germ({(0, 1): 1}), germ({(-6, 1): 1}), {}),
    ("radicial, carry only", germ({(-9, 2): 1}), germ({}), {}),
    ("radicial, f-part", germ({(-9, 2): 1}), germ({(-30, 2): 1}), {"variant": 2, "m": 10}),
    ("radicial, g-part", germ({(-9, 2): 1}), germ({(-24, 1): 1}), {"variant": 2, "m": 10}),
    ("radicial, carry + stripping", germ({(-9, 2): 1}), germ({(-24, 3): 1}), {}),
    ("radicial, all three terms", germ({(-9, 2): 1}), germ({(-27, 2): 1, (-21, 1): 1}), {}),
]

for title, A1, A2, lift_args in CASES:
    cover = normalize_germ_p2(A1, A2)
    print(f"{title}: branch {cover.label}, levels ({cover.n1}, {cover.n2}), delta {cover.delta}")
    print(f"    special fibre: {cover.special_fibre_text()}")
    datum = extract_degen_data(cover)
    if datum.kind == "A":
        print("    etale datum; nothing to lift\n")
        continue
    lifted = lift_degen_data(datum, **lift_args)
    again = normalize_germ_p2(lifted.generic.x1, lifted.generic.x2)
    same = extract_degen_data(again).canonical() == datum.canonical()
    print(f"    lift -> branch {again.label}, levels ({again.n1}, {again.n2}), same datum: {same}\n")
