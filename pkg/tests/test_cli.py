import json

import pydot
import pytest

from fairpool.cli import main

ALG = {"removal-pooling": (["Cvr"], ["Dpt", "Gnd", "Job", "Mrk"]),
       "pooling-removal": (["Cvr", "Dpt", "Mrk"], ["Gnd", "Job"])}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pair(data_dir):
    return data_dir / "alice.json", data_dir / "bob.json"


def test_validate_ok(capsys, pair):
    code, out, _ = run(capsys, "validate", *pair)
    assert code == 0 and json.loads(out)["valid"] is True


def test_validate_vertex_mismatch(capsys, pair, tmp_path):
    obj = json.loads(pair[0].read_text())
    obj["variables"] = [v for v in obj["variables"] if v["name"] != "Age"]
    obj["edges"] = [e for e in obj["edges"] if "Age" not in e]
    small = tmp_path / "small.json"
    small.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "validate", pair[0], small)
    assert code == 1
    assert any("vertex-set mismatch" in e for e in json.loads(out)["errors"])


def test_validate_schema_error(capsys, pair, tmp_path):
    obj = json.loads(pair[0].read_text())
    obj["bogus"] = True
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "validate", bad)
    assert code == 1 and json.loads(out)["valid"] is False


def test_validate_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "validate", bad)
    assert code == 3 and "bad.json" in err


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, _ = run(capsys, "pool", tmp_path / "none.json", "--protected", "Gnd")
    assert code == 3


@pytest.mark.parametrize("algorithm", sorted(ALG))
def test_pool_goldens(capsys, pair, algorithm):
    code, out, _ = run(capsys, "pool", *pair, "--algorithm", algorithm, "--protected", "Gnd")
    assert code == 0
    report = json.loads(out)
    inputs, removed = ALG[algorithm]
    assert report["predictor_inputs"] == inputs
    assert report["removed_vertices"] == removed
    assert report["fairness_certificate"] is True
    assert report["rule"] == "strict-majority"


def test_pool_default_algorithm_and_dot(capsys, pair, tmp_path):
    dot = tmp_path / "out.dot"
    code, out, _ = run(capsys, "pool", *pair, "--protected", "Gnd", "--dot", dot)
    assert code == 0 and json.loads(out)["algorithm"] == "pooling-removal"
    (graph,) = pydot.graph_from_dot_data(dot.read_text())
    edges = {(e.get_source().strip('"'), e.get_destination().strip('"')) for e in graph.get_edges()}
    assert edges == {("Dpt", "Mrk"), ("Cvr", "Y"), ("Dpt", "Y"), ("Mrk", "Y")}


def test_pool_single_file_unanimity(capsys, pair):
    code, out, _ = run(capsys, "pool", pair[1], "--rule", "unanimity", "--protected", "Gnd")
    assert code == 0
    assert json.loads(out)["predictor_inputs"] == ["Age", "Cvr", "Dpt", "Mrk"]


def test_pool_rule_option_errors(capsys, pair):
    assert run(capsys, "pool", *pair, "--protected", "Gnd", "--rule", "quota")[0] == 1
    assert run(capsys, "pool", *pair, "--protected", "Gnd", "--rule", "weighted-majority",
               "--weights", "1")[0] == 1
    assert run(capsys, "pool", *pair, "--protected", "Y")[0] == 1
    assert run(capsys, "pool", *pair, "--protected", "Nope")[0] == 1


def test_usage_error_exits_one(capsys, pair):
    with pytest.raises(SystemExit) as info:
        main(["pool", str(pair[0])])
    assert info.value.code == 1


def test_pool_with_distributions(capsys, data_dir):
    doc = data_dir / "constant_predictor.json"
    code, out, _ = run(capsys, "pool", doc, doc, "--protected", "A", "--with-distributions")
    assert code == 0
    report = json.loads(out)
    # X descends from A, so only Y survives and no exogenous root feeds it
    assert report["predictor_inputs"] == []
    assert report["pooled_distributions"] == {}
    assert report["warnings"]


def test_check_fair_report(capsys, pair, tmp_path):
    _, out, _ = run(capsys, "pool", *pair, "--protected", "Gnd")
    path = tmp_path / "report.json"
    path.write_text(out)
    code, out, _ = run(capsys, "check-fair", path)
    assert code == 0 and json.loads(out)["fair"] is True


def test_check_fair_bob_is_unfair(capsys, pair):
    code, out, _ = run(capsys, "check-fair", pair[1], "--protected", "Gnd")
    result = json.loads(out)
    assert code == 2
    assert result["lemma1"]["offenders"] == ["Job"]


def test_check_fair_brute_force(capsys, data_dir):
    doc = data_dir / "constant_predictor.json"
    code, out, _ = run(capsys, "check-fair", doc, "--protected", "A")
    assert code == 2
    code, out, _ = run(capsys, "check-fair", doc, "--protected", "A", "--brute-force")
    result = json.loads(out)
    assert code == 0 and result["fair"] is True
    assert result["brute_force"]["fair"] is True


def test_check_fair_brute_force_needs_equations(capsys, pair):
    code, _, err = run(capsys, "check-fair", pair[0], "--protected", "Gnd", "--brute-force")
    assert code == 1 and "equations" in err


def test_bench_zero_trials(capsys):
    code, out, _ = run(capsys, "bench", "--trials", 0)
    assert code == 0 and out == "trial,algorithm,edges,predictor_inputs,empty\n"


def test_bench_small(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--trials", 5, "--seed", 3, "-o", path)
    lines = path.read_text().splitlines()
    assert code == 0 and out == ""
    assert len(lines) == 1 + 2 * 5 + 2
    assert lines[-1].startswith("summary,pooling-removal,")


def test_bench_invalid(capsys):
    assert run(capsys, "bench", "--edge-prob", 1.5)[0] == 1


def test_export(capsys, pair, tmp_path):
    code, out, _ = run(capsys, "export", pair[0], "--protected", "Gnd")
    assert code == 0 and out.startswith("digraph")
    _, rep, _ = run(capsys, "pool", *pair, "--protected", "Gnd")
    path = tmp_path / "report.json"
    path.write_text(rep)
    code, out, _ = run(capsys, "export", path)
    (graph,) = pydot.graph_from_dot_data(out)
    assert code == 0 and len(graph.get_edges()) == 4
