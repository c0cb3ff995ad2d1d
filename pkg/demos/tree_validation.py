"""Build degeneration trees, validate them, realize them by local models, and
see which constraint a deliberately broken tree violates.  DOT files for the
valid trees are written next to this script.

Run with:  python3 demos/tree_validation.py
"""

from pathlib import Path

from aswdegen.degen_tree import (ex_kind_c_vertex, ex_radicial_chain, ex_single_etale_vertex,
                                 ex_two_etale_vertices, realize_degen, validate)

here = Path(__file__).parent
trees = {
    "single_etale_vertex_p3": ex_single_etale_vertex(3),
    "two_etale_vertices_p5": ex_two_etale_vertices(5),
    "radicial_chain_p3": ex_radicial_chain(3),
    "kind_c_vertex_p3": ex_kind_c_vertex(3),
}

for name, tree in trees.items():
    report = validate(tree)
    real = realize_degen(tree)
    matched = sum(c["match"] for c in real.certificate)
    print(f"{name}: valid={report.valid} genus={report.genus} "
          f"boundaries matched {matched}/{len(real.certificate)}")
    for note in dict.fromkeys(report.notes + real.notes):
        print(f"    note: {note}")
    (here / f"{name}.dot").write_text(tree.to_dot())

print("\nBreaking trees on purpose:")
broken = ex_two_etale_vertices(3)
broken.edges[0].m_target = 1
print("  inconsistent edge types ->", validate(broken).failed_labels)
broken = ex_two_etale_vertices(3)
broken.edges[0].e = 4
print("  thickness not divisible by p ->", validate(broken).failed_labels)
broken = ex_radicial_chain(3)
broken.vertices[1].n = broken.vertices[0].n + 1
print("  level grows along an edge ->", validate(broken).failed_labels)
broken = ex_two_etale_vertices(3)
broken.r += 2
print("  wrong base ramification r ->", validate(broken).failed_labels)
