import copy
import json

import pydot
import pytest

from fairpool.causal_core import CausalDiagram
from fairpool.documents import (
    DocumentError,
    DocumentIOError,
    check_consistency,
    diagram_from_report,
    dump_document,
    load_document,
    load_json,
    parse_document,
    probability_to_json,
    report_to_json,
    to_dot,
)
from fairpool.fair_pooling import pooling_removal
from fairpool.fairness import check_fair_bruteforce
from fairpool.judgment_aggregation import AggregationRule

from conftest import ALICE_EDGES, BOB_EDGES


def test_alice_and_bob_documents_match_fixtures(data_dir, alice, bob):
    for name, expected in (("alice", alice), ("bob", bob)):
        doc = load_document(data_dir / f"{name}.json")
        assert doc.predictor == "Y"
        assert doc.diagram() == expected
    assert set(load_document(data_dir / "alice.json").edges) == set(ALICE_EDGES)
    assert set(load_document(data_dir / "bob.json").edges) == set(BOB_EDGES)


def test_round_trip_is_byte_identical(data_dir):
    for name in ("alice.json", "bob.json", "constant_predictor.json"):
        doc = load_document(data_dir / name)
        text = dump_document(doc)
        again = dump_document(parse_document(json.loads(text), name))
        assert again == text


def test_thirds_stay_exact(data_dir):
    doc = load_document(data_dir / "constant_predictor.json")
    out = json.loads(dump_document(doc))
    assert out["exogenous_distributions"]["U_X"] == ["1/3", "1/3", "1/3"]
    assert out["exogenous_distributions"]["U_A"] == [0.25, 0.75]


def test_equation_rows_follow_sorted_parents(data_dir):
    doc = load_document(data_dir / "constant_predictor.json")
    rows = json.loads(dump_document(doc))["equations"]["X"]
    assert rows["parents"] == ["A", "U_X"]
    # (A, U_X) = (1, 0) maps to the stored (U_X, A) = (0, 1) entry
    assert rows["table"][3] == [[1, 0], 1]


def test_probability_to_json():
    from fractions import Fraction

    assert probability_to_json(Fraction(1, 4)) == 0.25
    assert probability_to_json(Fraction(2, 3)) == "2/3"


def test_document_model_is_fair_by_enumeration(data_dir):
    from fairpool.fairness import FairnessPartition

    doc = load_document(data_dir / "constant_predictor.json")
    model = doc.to_model()
    p = FairnessPartition.from_protected(model.diagram.endogenous, "Y", ["A"])
    assert check_fair_bruteforce(model, p).fair


def _alice_obj(data_dir):
    return json.loads((data_dir / "alice.json").read_text())


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda o: o.update(extra=1), "Additional properties"),
        (lambda o: o["variables"][0].update(color="red"), "$.variables[0]"),
        (lambda o: o.update(schema_version=2), "$.schema_version"),
        (lambda o: o["edges"].append(["Age", "Nope"]), "unknown vertex 'Nope'"),
        (lambda o: o["edges"].append(["Y", "Cvr"]), "cycle"),
        (lambda o: o.update(predictor="Missing"), "$.predictor"),
        (lambda o: o["edges"].append(list(o["edges"][0])), "duplicate edge"),
    ],
)
def test_invalid_documents(data_dir, mutate, fragment):
    obj = _alice_obj(data_dir)
    mutate(obj)
    with pytest.raises(DocumentError) as info:
        parse_document(obj, "alice.json")
    assert any(fragment in v and v.startswith("alice.json: ") for v in info.value.violations)


def test_distributions_without_equations_rejected(data_dir):
    obj = json.loads((data_dir / "constant_predictor.json").read_text())
    del obj["equations"]
    with pytest.raises(DocumentError, match="without equations"):
        parse_document(obj)


def test_missing_equation_reported(data_dir):
    obj = json.loads((data_dir / "constant_predictor.json").read_text())
    del obj["equations"]["X"]
    with pytest.raises(DocumentError) as info:
        parse_document(obj)
    assert any("X" in v for v in info.value.violations)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"a": 1,\n  oops}')
    with pytest.raises(DocumentIOError, match=r"2:\d+"):
        load_json(path)


def test_missing_file(tmp_path):
    with pytest.raises(DocumentIOError):
        load_json(tmp_path / "nope.json")


def test_consistency_checks(data_dir):
    alice = load_document(data_dir / "alice.json")
    obj = _alice_obj(data_dir)
    assert check_consistency([alice, load_document(data_dir / "bob.json")]) == []
    smaller = copy.deepcopy(obj)
    smaller["variables"] = [v for v in obj["variables"] if v["name"] != "Age"]
    smaller["edges"] = [e for e in obj["edges"] if "Age" not in e]
    problems = check_consistency([alice, parse_document(smaller, "small.json")])
    assert any("vertex-set mismatch" in p for p in problems)


def test_report_round_trip(alice, bob, gender_partition):
    report = pooling_removal([alice, bob], gender_partition, AggregationRule.strict_majority())
    obj = json.loads(json.dumps(report_to_json(report, "strict-majority", "alphabetical", None, ["a", "b"])))
    diagram, predictor = diagram_from_report(obj)
    assert predictor == "Y"
    assert diagram.edges == report.pooled_diagram.edges
    assert diagram.vertices == report.pooled_diagram.vertices | report.removed_vertices
    first = obj["audit_trail"][0]
    assert first["edge"] == ["Age", "Y"] and first["depth"] == 1 and not first["inserted"]


def test_dot_output_parses(alice, gender_partition):
    text = to_dot(alice, "Y", gender_partition.protected, {"Job"}, name="alice")
    (graph,) = pydot.graph_from_dot_data(text)
    names = {n.get_name().strip('"') for n in graph.get_nodes()}
    assert {"Age", "Gnd", "Job", "Y"} <= names
    edges = {(e.get_source().strip('"'), e.get_destination().strip('"')) for e in graph.get_edges()}
    assert edges == set(alice.edges)


def test_dot_quotes_odd_names():
    d = CausalDiagram.from_edges([('a "b"', "c d")])
    (graph,) = pydot.graph_from_dot_data(to_dot(d, "c d", [], []))
    assert len(graph.get_edges()) == 1
