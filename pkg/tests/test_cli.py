import json

import numpy as np
import pytest

from ksverify.cli import main, parse_complex, UsageError
from ksverify.serialize import dumps, format_float


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "text,value",
    [("0.6", 0.6), ("-1", -1), ("0.6+0.8i", 0.6 + 0.8j), ("1-i", 1 - 1j), ("0+2.5e-1j", 0.25j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("bad", ["x", "0.6+", "i", "1+2", "1e"])
def test_parse_complex_rejects(bad):
    with pytest.raises(UsageError):
        parse_complex(bad)


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1.0"
    assert dumps({"b": [1, 0.5], "a": None, "c": True}) == '{"a": null, "b": [1, 0.5], "c": true}'
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_peres_rays(capsys):
    code, out, _ = run(capsys, "peres", "rays")
    doc = json.loads(out)
    assert code == 0 and doc["count"] == 33 and len(doc["rays"]) == 33


def test_peres_bases(capsys):
    code, out, _ = run(capsys, "peres", "bases")
    doc = json.loads(out)
    assert code == 0 and doc["bases"] == 40 and doc["rays"] == 57
    assert len(doc["basis_list"]) == 40


def test_peres_graph_dot(capsys):
    code, out, _ = run(capsys, "peres", "graph", "--format", "dot")
    assert code == 0 and out.startswith("graph")


def test_peres_graph_json(capsys):
    code, out, _ = run(capsys, "peres", "graph")
    assert json.loads(out)["edge_count"] == 120


def test_peres_rays_text_is_a_ray_file(capsys, tmp_path):
    code, out, _ = run(capsys, "peres", "rays", "--format", "text")
    path = tmp_path / "rays.txt"
    path.write_text(out, encoding="utf-8")
    code, out, _ = run(capsys, "ks", "prove", "--rays-file", str(path))
    assert code == 0 and json.loads(out)["result"] == "UNSAT"


def test_ks_prove_default(capsys):
    code, out, _ = run(capsys, "ks", "prove")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"] == "UNSAT" and doc["rays"] == 57 and doc["bases"] == 40


def test_ks_prove_single_basis(capsys, tmp_path):
    path = tmp_path / "bases.txt"
    path.write_text("# one basis\n0 1 2\n")
    code, out, _ = run(capsys, "ks", "prove", "--bases-file", str(path))
    assert code == 2 and json.loads(out)["result"] == "SAT"


def test_ks_prove_malformed_rays(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 0 0\n1 zero 0\n")
    code, out, err = run(capsys, "ks", "prove", "--rays-file", str(path))
    assert code == 1 and out == "" and "line 2" in err


def test_ks_prove_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "ks", "prove", "--rays-file", str(tmp_path / "nope"))
    assert code == 1 and "error" in err


def test_stairs_verify_all(capsys):
    code, out, _ = run(capsys, "stairs", "verify")
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"]["all_certain"] is True and doc["summary"]["coloring"] == "UNSAT"
    assert len(doc["records"]) == 120


def test_stairs_verify_one(capsys):
    code, out, _ = run(capsys, "stairs", "verify", "--k", "1")
    doc = json.loads(out)
    assert code == 0 and len(doc["records"]) == 3
    assert {r["k"] for r in doc["records"]} == {1}


def test_stairs_verify_out_of_range(capsys):
    code, _, err = run(capsys, "stairs", "verify", "--k", "99")
    assert code == 1 and "1..40" in err


def _matrix(nested):
    return np.array([[complex(*z) for z in row] for row in nested])


def test_prep_demo_a(capsys):
    code, out, _ = run(capsys, "prep", "demo", "--circuit", "a", "--alpha", "0.6", "--beta", "0.8")
    doc = json.loads(out)
    assert code == 0
    assert np.allclose(_matrix(doc["system_out"]), np.diag([1, 0]), atol=1e-12)
    assert doc["outcomes"]["0"] == pytest.approx(0.36, abs=1e-12)
    assert doc["outcomes"]["1"] == pytest.approx(0.64, abs=1e-12)
    assert doc["preparation"]["kind"] == "deterministic"


def test_prep_demo_c(capsys):
    code, out, _ = run(capsys, "prep", "demo", "--circuit", "c", "--alpha", "1", "--beta", "0")
    doc = json.loads(out)
    assert code == 0
    assert np.allclose(_matrix(doc["system_out"]), np.diag([0, 1]), atol=1e-12)


def test_prep_demo_complex_and_apparatus(capsys):
    code, out, _ = run(
        capsys, "prep", "demo", "--circuit", "b", "--alpha", "0.6", "--beta", "0+0.8i", "--apparatus", "1"
    )
    doc = json.loads(out)
    assert code == 0
    assert np.allclose(_matrix(doc["system_out"]), np.diag([0, 1]), atol=1e-12)


def test_prep_demo_normalizes_with_warning(capsys, caplog):
    code, out, _ = run(capsys, "prep", "demo", "--circuit", "a", "--alpha", "3", "--beta", "4")
    assert code == 0 and "normalizing" in caplog.text
    assert json.loads(out)["outcomes"]["1"] == pytest.approx(0.64, abs=1e-12)


def test_prep_demo_non_numeric(capsys):
    code, _, err = run(capsys, "prep", "demo", "--circuit", "a", "--alpha", "abc")
    assert code == 1 and "re[+im i]" in err


def test_tomo_roundtrip(capsys):
    code, out, _ = run(capsys, "tomo", "roundtrip", "--dim", "3", "--trials", "100", "--seed", "0")
    doc = json.loads(out)
    assert code == 0 and doc["max_trace_distance"] < 1e-10 and doc["passed"] is True


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["peres", "rays", "--bogus"])
    assert exc.value.code == 1


def test_output_file(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "ks", "prove", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"] == "UNSAT"


def test_output_io_failure(capsys, tmp_path):
    code, _, err = run(capsys, "ks", "prove", "--output", str(tmp_path / "missing" / "x.json"))
    assert code == 1 and "error" in err
