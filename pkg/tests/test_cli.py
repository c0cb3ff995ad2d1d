import json
import subprocess
import sys

import pytest

from catalogs import example_single_etale_query
from aswdegen.cli import main, run
from aswdegen.degen_tree import ex_kind_c_vertex, ex_two_etale_vertices


@pytest.fixture
def job(tmp_path):
    def write(obj, name="job.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


def test_normalize_p_reports_type_and_delta(job):
    status, text = run(["normalize-p", job({"p": 3, "rhs": [[[-6, -1], 1]]})])
    out = json.loads(text)
    assert status == 0 and out["status"] == "ok"
    assert out["result"]["type"] == {"n": 2, "m": -1, "split": False}
    assert out["result"]["delta"] == 4


def test_p_override_changes_the_characteristic(job):
    status, text = run(["normalize-p", job({"p": 3, "rhs": [[[-10, -1], 1]]}), "--p", "5"])
    assert status == 0
    assert json.loads(text)["result"]["type"]["n"] == 2


@pytest.mark.parametrize("payload,code,status", [
    ('{"p": 3, "rhs": [[[-1, -1], 1]', 2, "SchemaError"),
    ({"rhs": [[[-6, -1], 1]]}, 2, "SchemaError"),
    ({"p": 3, "pi_prec": -3, "rhs": []}, 3, "IndeterminateAtPrecision"),
    ({"p": 3, "rhs": [[[-1, -1], 1]]}, 4, "TotallyRamified"),
])
def test_exit_codes(job, payload, code, status):
    got, text = run(["normalize-p", job(payload)])
    assert got == code
    assert json.loads(text)["status"] == status


def test_invalid_tree_exits_with_validation_code_and_names_the_label(job):
    tree = ex_two_etale_vertices(3)
    tree.edges[0].m_target = 1
    status, text = run(["validate-tree", job(tree.to_dict())])
    out = json.loads(text)
    assert status == 5
    assert "Deg.6" in out["error"]
    assert out["result"]["valid"] is False


def test_realize_tree_emits_certificate_and_dot(job):
    status, text = run(["realize-tree", job(ex_kind_c_vertex(3).to_dict())])
    out = json.loads(text)
    assert status == 0
    assert out["result"]["compatible"] is True
    assert out["result"]["dot"].startswith("digraph")


def test_genus_job_reports_both_computations(job):
    status, text = run(["genus", job(example_single_etale_query(3, 2).to_dict())])
    res = json.loads(text)["result"]
    assert status == 0
    assert res["result"]["genus"] == res["riemann_hurwitz"]


def test_strict_flag_is_echoed_and_changes_genus(job):
    query = {"p": 5, "germ_kind": "double", "rank": "p", "r": 4,
             "boundaries": [{"kind": "split"}, {"kind": "split"}]}
    path = job(query)
    default = json.loads(run(["genus", path])[1])
    strict = json.loads(run(["genus", path, "--strict-paper"])[1])
    assert default["result"]["result"]["genus"] == 4
    assert strict["strict_paper"] is True and strict["result"]["result"]["genus"] == 3


def test_lift_rank_p(job):
    status, text = run(["lift", job({"p": 3, "n": 2, "abar": [[-1, 1]]})])
    assert status == 0
    assert json.loads(text)["result"]["predicted_delta"] == [4]


def test_output_is_byte_identical_across_runs(job):
    path = job(ex_two_etale_vertices(5).to_dict())
    assert run(["realize-tree", path]) == run(["realize-tree", path])


def test_text_format_and_out_file(job, tmp_path, capsys):
    out = tmp_path / "report.txt"
    code = main(["classify-boundary", job({"p": 3, "rhs": [[[0, -2], 1]]}), "--format", "text",
                 "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    text = out.read_text()
    assert "command: classify-boundary" in text and "status: ok" in text


def test_module_entry_point_reads_stdin():
    proc = subprocess.run([sys.executable, "-m", "aswdegen", "normalize-p", "-"],
                          input=json.dumps({"p": 2, "rhs": [[[-2, -1], 1]]}),
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["type"]["n"] == 1
