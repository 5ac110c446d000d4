import json
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from tmk import gpp
from tmk.cli import main
from tmk.service import ServiceConfig, ServiceError, create_app, \
    load_config
from tmk.skills import SKILLS, fixture_path

DATA = Path(__file__).parent / "data"

RETURN_STATE = {"leftBank": {"guardCount": 1, "prisonerCount": 1},
                "rightBank": {"guardCount": 1, "prisonerCount": 1},
                "boatSide": "left"}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestService:
    def test_health(self, client):
        raw = client.get("/health").json()
        assert raw["schemaVersion"] == 1
        assert raw["status"] == "ok"
        assert set(raw["models"]) == set(SKILLS)

    def test_models_listing(self, client):
        raw = client.get("/models").json()
        by_id = {m["modelId"]: m for m in raw["models"]}
        assert by_id["gpp"]["mechanisms"] >= 2

    def test_get_model(self, client):
        raw = client.get("/models/gpp").json()
        assert raw["modelId"] == "gpp"
        assert any(m["name"] == "ReturnGuardMechanism"
                   for m in raw["model"]["Mechanism"])

    def test_unknown_model_is_404(self, client):
        response = client.get("/models/nope")
        assert response.status_code == 404
        raw = response.json()
        assert raw["code"] == "model-not-found"
        assert set(raw) == {"schemaVersion", "code", "message", "stage"}

    def test_validate_clean_model(self, client):
        model_text = Path(fixture_path("gpp")).read_text()
        raw = client.post("/models/validate",
                          json={"model": model_text}).json()
        assert raw["errorCount"] == 0

    def test_validate_broken_model(self, client):
        raw = client.post("/models/validate", json={"model": {
            "Mechanism": [{"name": "M", "inputParameters": [],
                           "outputParameters": [],
                           "organizer": {"states": [],
                                         "transitions": []}}]}}).json()
        assert raw["errorCount"] >= 1
        assert any(d["code"] == "missing-field"
                   and "startState" in d["message"]
                   for d in raw["diagnostics"])

    def test_execute_return_guard(self, client):
        raw = client.post("/models/gpp/execute", json={
            "mechanism": "ReturnGuardMechanism",
            "args": ["b", "g", RETURN_STATE]}).json()
        assert raw["outcome"] == "Success"
        assert raw["terminalState"] == "RG_S3"

    def test_execute_with_bindings(self, client):
        raw = client.post("/models/gpp/execute", json={
            "mechanism": "ReturnGuardMechanism",
            "bindings": {"b": "b", "g": "g", "c": RETURN_STATE}}).json()
        assert raw["outcome"] == "Success"

    def test_execute_missing_binding(self, client):
        response = client.post("/models/gpp/execute", json={
            "mechanism": "ReturnGuardMechanism", "bindings": {}})
        assert response.status_code == 400
        assert response.json()["code"] == "missing-binding"

    def test_execute_unknown_mechanism_is_404(self, client):
        response = client.post("/models/gpp/execute",
                               json={"mechanism": "Nope", "args": []})
        assert response.status_code == 404

    def test_ask_in_scope(self, client):
        raw = client.post("/ask", json={
            "modelId": "version_spaces",
            "question": "Under what condition should version spaces "
                        "generalize the specific model?"}).json()
        assert raw["route"] == "tmk"
        assert len(raw["retrieved"]) == raw["verbosity"] == 3

    def test_ask_deterministic(self, client):
        body = {"modelId": "gpp",
                "question": "How do we safely return the guard across "
                            "the river?"}
        first = client.post("/ask", json=body).text
        assert all(client.post("/ask", json=body).text == first
                   for _ in range(3))

    def test_ask_missing_fields(self, client):
        response = client.post("/ask", json={"modelId": "gpp"})
        assert response.status_code == 400
        assert response.json()["stage"] == "ask"


class TestConfig:
    def test_defaults(self):
        config = load_config(env={})
        assert config.providerKind == "stub"
        assert config.listenAddress == "127.0.0.1:8080"

    def test_precedence_flags_over_env_over_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"tau": 0.1,
                                    "listenAddress": "0.0.0.0:1"}))
        env = {"TMK_TAU": "0.2"}
        config = load_config(str(path), env=env)
        assert config.tau == 0.2  # env beats file
        assert config.listenAddress == "0.0.0.0:1"  # file beats default
        config = load_config(str(path), env=env, overrides={"tau": 0.3})
        assert config.tau == 0.3  # flag beats env

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"mystery": 1}))
        with pytest.raises(ServiceError, match="unknown config keys"):
            load_config(str(path), env={})

    def test_http_provider_requires_endpoint(self):
        with pytest.raises(ServiceError, match="providerEndpoint"):
            ServiceConfig(providerKind="http").validate()

    def test_model_directory_loading(self, tmp_path):
        model_dir = tmp_path / "models"
        model_dir.mkdir()
        (model_dir / "gpp.json").write_text(
            Path(fixture_path("gpp")).read_text())
        (model_dir / "broken.json").write_text("{not json")
        app = create_app(ServiceConfig(modelDirectory=str(model_dir)))
        raw = TestClient(app).get("/health").json()
        assert raw["models"] == ["gpp"]  # broken file skipped

    def test_empty_model_directory_fails_startup(self, tmp_path):
        with pytest.raises(ServiceError, match="no valid model"):
            create_app(ServiceConfig(modelDirectory=str(tmp_path)))


class TestCli:
    def run(self, *args, expect=0):
        result = CliRunner().invoke(main, list(args))
        assert result.exit_code == expect, result.output
        return result.output

    def test_validate_bundled_model(self):
        out = self.run("validate", fixture_path("gpp"))
        assert "0 errors" in out

    def test_validate_missing_file(self):
        out = self.run("validate", "/nowhere/model.json", expect=1)
        assert "file not found" in out

    def test_solve_return_guard(self):
        out = self.run("solve", "--mechanism", "ReturnGuardMechanism",
                       "--state", json.dumps(RETURN_STATE))
        assert "Success at RG_S3" in out

    def test_solve_full_plan(self):
        out = self.run("solve", "--mechanism", "GPPsolution")
        assert "Success at GS_S47" in out

    def test_solve_json_output_parses(self):
        out = self.run("solve", "--mechanism", "GPPsolution", "--json")
        raw = json.loads(out)
        assert raw["outcome"] == "Success"

    def test_oracle_canonical(self):
        out = self.run("oracle")
        assert "11 crossings" in out

    def test_oracle_unsolvable_exits_1(self):
        out = self.run("oracle", "--guards", "4", "--prisoners", "4",
                       expect=1)
        assert "unsolvable" in out

    def test_guard_atoms_and_branch(self):
        out = self.run("guard", "safe(S0) && safe(S1)", "--atoms",
                       "--check-branch", "!(safe(S0) && safe(S1))")
        assert "atoms: safe(S0), safe(S1)" in out
        assert "exhaustive: True, disjoint: True" in out

    def test_guard_parse_error(self):
        self.run("guard", "a &&", expect=1)

    def test_index_and_ask(self, tmp_path):
        index_path = tmp_path / "gpp.index.json"
        out = self.run("index", "--skill", "gpp", "--out",
                       str(index_path))
        assert "entries" in out and index_path.exists()
        out = self.run("ask", "How do we safely return the guard "
                       "across the river?", "--skill", "gpp",
                       "--index", str(index_path))
        assert "route: tmk" in out
        assert "ReturnGuardMechanism" in out

    def test_ask_off_topic(self):
        out = self.run("ask", "When does the library close on Sundays?",
                       "--skill", "gpp")
        assert "route: ragFallback" in out

    def test_eval_markdown(self):
        out = self.run("eval", "--ratings",
                       str(DATA / "ratings_study.csv"))
        assert "0.65 (13)" in out and "1.45" in out

    def test_eval_writes_json_file(self, tmp_path):
        out_path = tmp_path / "report.json"
        self.run("eval", "--ratings", str(DATA / "ratings_study.csv"),
                 "--out", str(out_path))
        raw = json.loads(out_path.read_text())
        assert raw["schemaVersion"] == 1

    def test_eval_missing_file(self):
        out = self.run("eval", "--ratings", "/nowhere.csv", expect=1)
        assert "file not found" in out

    def test_unknown_subcommand_is_usage_error(self):
        self.run("frobnicate", expect=2)
