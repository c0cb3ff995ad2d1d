import json

import pytest

from aswdegen import degen_tree
from aswdegen.degen_tree import (DegenTree, ex_kind_c_vertex, ex_radicial_chain, ex_single_etale_vertex,
                                 ex_two_etale_vertices, realize_degen, tree_genus, validate)
from aswdegen.errors import CompatibilityFailure, HypothesisViolated, SchemaError

BUILDERS = [
    lambda: ex_single_etale_vertex(3),
    lambda: ex_two_etale_vertices(2),
    lambda: ex_radicial_chain(5),
    lambda: ex_kind_c_vertex(3),
]


@pytest.mark.parametrize("build", BUILDERS)
def test_json_round_trip(build):
    tree = build()
    again = DegenTree.from_json(tree.to_json())
    assert again.to_dict() == tree.to_dict()
    assert json.loads(tree.to_json()) == tree.to_dict()


def test_dot_rendering_lists_every_vertex_and_edge():
    dot = ex_two_etale_vertices(3).to_dot()
    assert dot.startswith("digraph degeneration {")
    assert '"X1" -> "X2"' in dot and "header -> \"X1\"" in dot


@pytest.mark.parametrize("p", [3, 5])
def test_single_etale_vertex_genus(p):
    tree = ex_single_etale_vertex(p)
    report = validate(tree)
    assert report.valid, report.failed_labels
    assert report.genus == tree_genus(tree) == (p - 1) // 2


@pytest.mark.parametrize("p", [2, 3, 5])
def test_radicial_chain_genus(p):
    c = 1 if p == 2 else 2
    assert validate(ex_radicial_chain(p)).genus == (c - 1) * (p - 1) // 2


def test_n_decrease_violation_cofires_downstream_labels():
    tree = ex_radicial_chain(3)
    tree.vertices[1].n = tree.vertices[0].n + 1
    labels = validate(tree).failed_labels
    assert "Deg.4" in labels
    assert set(labels) <= {"Deg.4", "Deg.7", "Deg.8"}


def test_report_names_the_failing_location():
    tree = ex_two_etale_vertices(3)
    tree.edges[0].m_target = 1
    report = validate(tree)
    assert not report.valid
    bad = [c for c in report.failures() if c.label == "Deg.6"]
    assert bad and "z1" in bad[0].where
    assert report.to_dict()["valid"] is False


def test_irreducible_fibre_assumption_is_reported():
    report = validate(ex_kind_c_vertex(3))
    assert report.valid
    assert any("irreducib" in n for n in report.notes)


def test_dangling_edge_is_a_structure_failure():
    d = ex_two_etale_vertices(3).to_dict()
    d["edges"][0]["target"] = "X9"
    assert validate(DegenTree.from_dict(d)).failed_labels == ["Deg.2"]


def test_schema_errors():
    with pytest.raises(SchemaError):
        DegenTree.from_dict({"rank": "p", "p": 3})
    with pytest.raises(SchemaError):
        DegenTree.from_dict({"rank": "p3", "p": 3})


def test_realization_certificate_and_models():
    real = realize_degen(ex_radicial_chain(3))
    assert real.compatible
    kinds = {m.location for m in real.models}
    assert {"vertex-open", "double-point"} <= kinds
    assert all(c["match"] for c in real.certificate)


def test_realizing_invalid_tree_is_refused():
    tree = ex_two_etale_vertices(3)
    tree.r += 2
    with pytest.raises(HypothesisViolated):
        realize_degen(tree)


def test_compatibility_failure_is_raised_on_mismatch(monkeypatch):
    real_type = degen_tree._type_p
    monkeypatch.setattr(degen_tree, "_type_p", lambda a: (9, 9) if len(a) else real_type(a))
    with pytest.raises(CompatibilityFailure):
        realize_degen(ex_two_etale_vertices(3))


def test_kind_c_builder_requires_prime_to_p_level():
    with pytest.raises(HypothesisViolated):
        ex_kind_c_vertex(3, nt=3)
