import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from conftest import diag
from wickrot import _linalg as la
from wickrot import catalog as cat
from wickrot import io
from wickrot.algebra import check_jacobi, structural_classify
from wickrot.cli import main
from wickrot.metric import Metric

F = Fraction

HEIS_DOC = """{
  "schema_version": "1",
  "name": "heis3",
  "dim": 3,
  "basis": ["e1", "e2", "e3"],
  "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1}}],
  "metric": [[-1, 0, 0], [0, -1, 0], [0, 0, 1]]
}"""


def _doc(**over):
    obj = json.loads(HEIS_DOC)
    obj.update(over)
    return json.dumps(obj)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv, "--json")
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# parsing


def test_parse_heisenberg():
    L, m = io.parse_algebra(HEIS_DOC)
    assert L.exact and L.structure[0, 1, 2] == 1 and L.structure[1, 0, 2] == -1
    assert m.form.tolist() == diag(-1, -1, 1).tolist()
    assert L.basis_labels == ("e1", "e2", "e3")


def test_parse_rational_and_float_literals():
    L, m = io.parse_algebra(_doc(brackets=[{"i": 1, "j": 2, "coeffs": {"3": "3/4"}}]))
    assert L.structure[0, 1, 2] == F(3, 4) and isinstance(L.structure[0, 1, 2], F)
    L, _ = io.parse_algebra(_doc(brackets=[{"i": 1, "j": 2, "coeffs": {"3": 0.75}}]))
    assert not L.exact and L.structure[0, 1, 2] == 0.75


def test_parse_empty_brackets_is_abelian():
    L, _ = io.parse_algebra(_doc(brackets=[]))
    assert structural_classify(L).abelian


@pytest.mark.parametrize("entry, where", [
    ({"i": 2, "j": 2, "coeffs": {"3": 1}}, "brackets[0].i"),
    ({"i": 2, "j": 1, "coeffs": {"3": 1}}, "brackets[0].i"),
    ({"i": 1, "j": 4, "coeffs": {"3": 1}}, "brackets[0].i"),
    ({"i": 1, "j": 2, "coeffs": {"7": 1}}, "brackets[0].coeffs.7"),
    ({"i": 1, "j": 2, "coeffs": {"3": "x/2"}}, "brackets[0].coeffs.3"),
    ({"i": 1, "j": 2}, "brackets[0].coeffs"),
])
def test_schema_errors_name_the_field(entry, where):
    with pytest.raises(io.SchemaError) as exc:
        io.parse_algebra(_doc(brackets=[entry]))
    assert exc.value.where == where


def test_schema_errors_document_level():
    with pytest.raises(io.SchemaError, match="schema_version"):
        io.parse_algebra(_doc(schema_version="2"))
    with pytest.raises(io.SchemaError, match="metric"):
        io.parse_algebra(_doc(metric=[[1, 0, 0], [0, 0, 0], [0, 0, 1]]))
    with pytest.raises(io.SchemaError, match="metric"):
        io.parse_algebra(_doc(metric=[[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
    dup = [{"i": 1, "j": 2, "coeffs": {"3": 1}}] * 2
    with pytest.raises(io.SchemaError, match="duplicate"):
        io.parse_algebra(_doc(brackets=dup))
    with pytest.raises(io.SchemaError) as exc:
        io.parse_algebra('{"schema_version": "1",\n "dim": 3,,}')
    assert exc.value.where.startswith("line 2")


def test_jacobi_failure_reports_triple():
    bad = _doc(brackets=[{"i": 1, "j": 2, "coeffs": {"3": 1}}, {"i": 1, "j": 3, "coeffs": {"1": 1}}])
    with pytest.raises(io.JacobiError) as exc:
        io.parse_algebra(bad)
    assert exc.value.triple == (0, 1, 2) and "(1, 2, 3)" in str(exc.value)
    L, _ = io.parse_algebra(bad, validate=False)
    assert not check_jacobi(L).ok


def test_round_trip_and_hash():
    for name, L, m in cat.entries():
        text = io.emit_algebra(L, m)
        L2, m2 = io.parse_algebra(text)
        assert (L2.structure == L.structure).all() and (m2.form == m.form).all(), name
        assert io.algebra_hash(L2, m2) == io.algebra_hash(L, m)
        assert io.emit_algebra(L2, m2) == text


def test_round_trip_floats():
    L = cat.heisenberg().astype_float()
    m = Metric(np.array([[0.1, 0, 0], [0, -1 / 3, 0], [0, 0, 2.5]]))
    L2, m2 = io.parse_algebra(io.emit_algebra(L, m))
    assert np.array_equal(la.as_float(m2.form), la.as_float(m.form))


def test_hash_is_canonical():
    a = io.load_document(HEIS_DOC)
    b = io.load_document(json.dumps(json.loads(HEIS_DOC), indent=7))
    assert a.hash == b.hash
    assert io.load_document(_doc(name="other")).hash != a.hash


def test_literals():
    assert io.literal(F(-3, 2)) == "-3/2" and io.literal(F(2)) == "2"
    assert io.to_jsonable({"a": [F(1, 2), 3, -0.0]}) == {"a": ["1/2", 3, 0.0]}
    assert io.parse_literal("-3/2", "x") == F(-3, 2)
    with pytest.raises(io.SchemaError):
        io.parse_literal(True, "x")


def test_parse_matrix():
    assert io.parse_matrix('{"theta": [[-1, 0], [0, "1"]]}').tolist() == [[-1, 0], [0, 1]]
    assert io.parse_matrix([[0.5, 0], [0, 1]]).dtype == float
    with pytest.raises(io.SchemaError):
        io.parse_matrix('{"phi": []}')


# ---------------------------------------------------------------------------
# catalog


def test_catalog_examples():
    L, m = cat.catalog("heis3_lorentz")
    assert L.dim == 3 and m.form.tolist() == diag(-1, -1, 1).tolist()
    assert cat.catalog("su2_killing")[1].signature == (0, 3)
    assert cat.catalog("sl2r2_mixed")[1].signature == (3, 3)
    assert cat.catalog("sl2r2_minusk")[1].signature == (2, 4)
    assert cat.catalog("o13_killing")[1].signature == (3, 3)


def test_catalog_unknown_lists_names():
    with pytest.raises(cat.CatalogError) as exc:
        cat.catalog("nope")
    for name in cat.names():
        assert name in str(exc.value)


# ---------------------------------------------------------------------------
# command line


def test_cli_soliton_heisenberg(capsys):
    code, rep = _json(capsys, "soliton", "--catalog", "heis3_lorentz")
    assert code == 0 and rep["status"] == "ok"
    assert rep["outputs"]["lambda"] == "-3/2"
    assert rep["outputs"]["D_eigenvalues"] == [1.0, 1.0, 2.0]
    assert rep["outputs"]["classification"] == "nilsoliton"
    assert rep["inputs"]["catalog"] == "heis3_lorentz" and len(rep["inputs"]["algebra"]) == 64


def test_cli_cartan_find_mixed_exits_2(capsys):
    code, out, _ = _run(capsys, "cartan", "find", "--catalog", "sl2r2_mixed", "--budget", "4x300")
    assert code == 2 and "no_certificate" in out


def test_cli_analyze_su2(capsys):
    code, rep = _json(capsys, "analyze", "--catalog", "su2_killing")
    assert code == 0
    assert rep["outputs"]["signature"] == [0, 3] and rep["outputs"]["bi_invariant"] is True


def test_cli_analyze_catalog_exact(capsys):
    for name in cat.names():
        code, rep = _json(capsys, "analyze", "--catalog", name)
        assert code == 0 and rep["outputs"]["jacobi"]["max_residual"] == 0, name
        code, rep = _json(capsys, "curvature", "--catalog", name)
        assert all(v == 0 for v in rep["outputs"]["residuals"].values()), name


def test_cli_input_file_and_negate(tmp_path, capsys):
    path = tmp_path / "heis.json"
    path.write_text(HEIS_DOC)
    code, rep = _json(capsys, "analyze", "--input", str(path), "--negate-metric")
    assert code == 0 and rep["outputs"]["signature"] == [2, 1] and rep["inputs"]["negate_metric"]


def test_cli_wick_found(tmp_path, capsys):
    out = tmp_path / "wick.json"
    code, rep = _json(capsys, "wick", "--catalog", "heis3_lorentz", "--theta", "found", "--output", str(out))
    assert code == 0 and rep["outputs"]["signature"] == [3, 0]
    L, m = io.parse_algebra(out.read_text())
    assert m.form.tolist() == la.eye(3).tolist()
    doc = json.loads(out.read_text())
    assert doc["provenance"]["parent_hash"] == rep["inputs"]["algebra"]


def test_cli_cartan_verify_and_conjugate(tmp_path, capsys):
    th = tmp_path / "theta.json"
    th.write_text(json.dumps({"theta": [[-1, 0, 0], [0, -1, 0], [0, 0, 1]]}))
    code, rep = _json(capsys, "cartan", "verify", "--catalog", "heis3_lorentz", "--theta", str(th))
    assert code == 0 and rep["outputs"]["is_lie_cartan"] is True
    code, rep = _json(capsys, "cartan", "verify", "--catalog", "heis3_lorentz", "--negate-metric",
                      "--theta", str(th))
    assert code == 2 and rep["outputs"]["is_lie_cartan"] is False
    code, rep = _json(capsys, "cartan", "conjugate", "--catalog", "heis3_lorentz",
                      "--theta", str(th), "--theta2", str(th))
    assert code == 0 and rep["outputs"]["found"] is True


def test_cli_equivariance_and_minvec(tmp_path, capsys):
    code, rep = _json(capsys, "equivariance", "--catalog", "heis3_lorentz", "--theta", "found")
    assert code == 0 and rep["outputs"]["max_residual"] == 0 and rep["outputs"]["rpe"] is True
    log = tmp_path / "flow.jsonl"
    code, rep = _json(capsys, "minvec", "flow", "--catalog", "heis3_lorentz", "--log", str(log))
    assert code == 0 and rep["outputs"]["status"] == "cartan_found"
    recs = [json.loads(line) for line in log.read_text().splitlines()]
    assert recs and set(recs[0]) == {"iteration", "norm", "moment_norm"}
    code, rep = _json(capsys, "minvec", "check", "--catalog", "heis3_lorentz")
    assert code == 0 and rep["outputs"]["is_minimal"] is True


def test_cli_catalog_commands(tmp_path, capsys):
    code, out, _ = _run(capsys, "catalog", "list")
    assert code == 0 and all(n in out for n in cat.names())
    code, out, _ = _run(capsys, "catalog", "show", "heis3_lorentz")
    L, m = io.parse_algebra(out)
    assert L.structure[0, 1, 2] == 1
    code, out, err = _run(capsys, "catalog", "show", "nope")
    assert code == 1 and "available" in err


def test_cli_usage_errors(capsys):
    assert _run(capsys, "frobnicate")[0] == 1
    assert _run(capsys, "analyze")[0] == 1
    assert _run(capsys, "cartan", "find", "--catalog", "heis3_lorentz", "--budget", "x")[0] == 1
    code, _, err = _run(capsys, "analyze", "--input", "/nonexistent/file.json")
    assert code == 1 and err


def test_cli_machine_output_byte_stable(capsys):
    argv = ["cartan", "find", "--catalog", "sl2r_plus_r", "--seed", "7", "--budget", "6x400", "--json"]
    _, first, _ = _run(capsys, *argv)
    _, second, _ = _run(capsys, *argv)
    assert first == second
    # and across processes, through the installed entry point
    proc = subprocess.run([sys.executable, "-m", "wickrot.cli", *argv], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == first
