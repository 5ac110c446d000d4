import json

import pytest

from tmk.model import (
    ModelError, error_count, extract_top_level_names, parse_model,
    serialize_documents, state_alias, validate_model,
)
from tmk.skills import SKILLS, fixture_text, load_fixture, registries_for

MINI_MODEL = {
    "Task": [
        {"name": "Check", "description": "d",
         "inputParameters": ["x: BOOLEAN"],
         "outputParameters": ["y: BOOLEAN"],
         "given": "x", "makes": "y = x", "means": []},
    ],
    "Mechanism": [
        {"name": "CheckMechanism", "description": "d",
         "inputParameters": ["x: BOOLEAN"],
         "outputParameters": [],
         "organizer": {
             "startState": "C_S0", "successState": "C_Done",
             "failureState": "C_Fail",
             "states": [
                 {"name": "C_S0", "goalInvocation": {
                     "goalReference": "Probe", "type": "operation",
                     "actualArguments": ["x"]}},
                 {"name": "C_Done", "goalInvocation": {
                     "goalReference": "Probe", "type": "operation",
                     "actualArguments": []}},
                 {"name": "C_Fail", "goalInvocation": {
                     "goalReference": "Probe", "type": "operation",
                     "actualArguments": []}},
             ],
             "transitions": [
                 {"sourceState": "C_S0", "targetState": "C_Done",
                  "dataCondition": "x"},
                 {"sourceState": "C_S0", "targetState": "C_Fail",
                  "dataCondition": "!x"},
             ]}},
    ],
    "Knowledge": [
        {"Concepts": [
            {"name": "thing", "properties": [
                {"name": "label", "type": "string"}]}]},
        {"Instances": [
            {"concept": "thing", "name": "t1",
             "values": {"label": "one"}}]},
        {"Relations": [
            {"name": "near", "domain": "thing", "range": "thing"}]},
    ],
}


class TestParse:
    def test_malformed_json_raises(self):
        with pytest.raises(ModelError):
            parse_model("{not json")

    def test_non_object_raises(self):
        with pytest.raises(ModelError):
            parse_model("[1, 2]")

    def test_missing_fields_become_diagnostics(self):
        model = parse_model(json.dumps(
            {"Mechanism": [{"name": "M", "organizer": {
                "successState": "a", "failureState": "b"}}]}))
        assert error_count(model.parseDiagnostics) >= 1
        assert any("startState" in d.message
                   for d in model.parseDiagnostics)

    def test_guard_parse_failure_becomes_diagnostic(self):
        model = parse_model(json.dumps(
            {"Task": [{"name": "T", "given": "x &&"}]}))
        assert any(d.code == "guard-parse"
                   for d in model.parseDiagnostics)

    def test_goal_and_method_synonyms(self):
        raw = {"Goal": MINI_MODEL["Task"],
               "Method": MINI_MODEL["Mechanism"]}
        model = parse_model(json.dumps(raw))
        assert model.task("Check") is not None
        assert model.mechanism("CheckMechanism") is not None

    def test_unknown_top_level_key_warns(self):
        model = parse_model(json.dumps({"Task": [], "Bogus": 1}))
        assert any(d.code == "unknown-key"
                   for d in model.parseDiagnostics)

    def test_empty_model_parses(self):
        model = parse_model("{}")
        assert model.tasks == () and model.mechanisms == ()
        assert validate_model(model) == []

    def test_fixpoint_parse_serialize_parse(self):
        for skill in SKILLS:
            model = load_fixture(skill)
            round1 = json.dumps(model.to_json())
            model2 = parse_model(round1)
            assert json.dumps(model2.to_json()) == round1

    def test_makes_text_survives_serialization(self):
        model = load_fixture("analogical_reasoning")
        text = json.dumps(model.to_json())
        assert "okOut = okIn" in text


class TestValidate:
    def test_fixtures_are_clean(self):
        for skill in SKILLS:
            model = load_fixture(skill)
            operations, _ = registries_for(skill)
            diags = validate_model(model, set(operations.names()))
            assert error_count(diags) == 0, (skill, diags)

    def test_mini_model_clean(self):
        model = parse_model(json.dumps(MINI_MODEL))
        assert error_count(validate_model(model)) == 0

    def test_dangling_mechanism_reference(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Task"][0]["means"] = [
            {"mechanismReference": "Ghost", "actualArguments": []}]
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "dangling-reference" for d in diags)

    def test_unknown_state_in_transition(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Mechanism"][0]["organizer"]["transitions"][0][
            "targetState"] = "Nowhere"
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "unknown-state" for d in diags)

    def test_terminal_with_outgoing_is_error(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Mechanism"][0]["organizer"]["transitions"].append(
            {"sourceState": "C_Done", "targetState": "C_S0",
             "dataCondition": "true"})
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "terminal-outgoing" for d in diags)

    def test_arity_mismatch_in_means(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Task"][0]["means"] = [
            {"mechanismReference": "CheckMechanism",
             "actualArguments": []}]
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "arity-mismatch" for d in diags)

    def test_given_over_unknown_name(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Task"][0]["given"] = "mystery"
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "unresolvable-identifier" for d in diags)

    def test_unreachable_state_warns(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Mechanism"][0]["organizer"]["states"].append(
            {"name": "C_Island", "goalInvocation": {
                "goalReference": "Probe", "type": "operation",
                "actualArguments": []}})
        diags = validate_model(parse_model(json.dumps(raw)))
        unreachable = [d for d in diags if d.code == "unreachable-state"]
        assert unreachable and unreachable[0].severity == "warning"

    def test_instance_with_undeclared_property(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Knowledge"][1]["Instances"][0]["values"]["bogus"] = 1
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "unknown-property" for d in diags)

    def test_concept_cycle(self):
        raw = {"Knowledge": [{"Concepts": [
            {"name": "a", "superConcept": "b", "properties": []},
            {"name": "b", "superConcept": "a", "properties": []}]}]}
        diags = validate_model(parse_model(json.dumps(raw)))
        assert any(d.code == "concept-cycle" for d in diags)

    def test_diagnostic_string_shape(self):
        raw = json.loads(json.dumps(MINI_MODEL))
        raw["Task"][0]["given"] = "mystery"
        diag = [d for d in validate_model(parse_model(json.dumps(raw)))
                if d.code == "unresolvable-identifier"][0]
        text = str(diag)
        assert text.startswith("error unresolvable-identifier")
        assert "mystery" in text


class TestNamesAndDocuments:
    def test_state_alias(self):
        assert state_alias("RG_S0") == "S0"
        assert state_alias("GS_Check") == "Check"
        assert state_alias("Plain") == "Plain"

    def test_mini_model_name_extraction(self):
        model = parse_model(json.dumps(MINI_MODEL))
        names = extract_top_level_names(model)
        assert [(n.name, n.component) for n in names] == [
            ("Check", "Task"), ("CheckMechanism", "Mechanism"),
            ("thing", "Knowledge"), ("t1", "Knowledge"),
            ("near", "Knowledge")]

    def test_document_count_and_text(self):
        model = parse_model(json.dumps(MINI_MODEL))
        docs = serialize_documents(model)
        assert len(docs) == 5
        task_doc = next(d for d in docs if d.entryName == "Check")
        assert task_doc.source == "Task"
        assert "y = x" in task_doc.text
        # each document's text is the JSON of exactly one entry
        for doc in docs:
            entry = json.loads(doc.text)
            assert entry.get("name", doc.entryName) == doc.entryName \
                or doc.entryName == entry.get("name")

    def test_fixture_documents_unique(self):
        for skill in SKILLS:
            docs = serialize_documents(load_fixture(skill))
            keys = [(d.source, d.entryName) for d in docs]
            assert len(keys) == len(set(keys))

    def test_fixture_text_is_valid_json(self):
        for skill in SKILLS:
            json.loads(fixture_text(skill))
