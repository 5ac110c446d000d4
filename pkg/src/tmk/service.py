"""HTTP front door: model registry, validation, execution, and asking.

The registry is read-only after startup; every request works on its own
pipeline and execution state, so concurrent handling is safe.  No
authentication: this is a desk-scale teaching artifact.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

from . import gpp
from .evalharness import EvalError
from .executor import ExecLimits, ExecutionError, OperationRegistry, \
    execute_mechanism
from .guards import PredicateRegistry
from .model import ModelError, TmkModel, error_count, load_model, \
    parse_model, serialize_documents, validate_model
from .pipeline import HttpChatProvider, PipelineConfig, RagCorpus, \
    StubProvider, answer
from .retrieval import DEFAULT_TAU, VectorIndex, build_index, \
    http_provider, local_provider
from .skills import SKILLS, load_fixture, registries_for


class ServiceError(Exception):
    def __init__(self, code: str, message: str, stage: str,
                 status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.stage = stage
        self.status = status

    def to_json(self) -> Dict[str, Any]:
        return {"schemaVersion": 1, "code": self.code,
                "message": self.message, "stage": self.stage}


@dataclass
class ServiceConfig:
    modelDirectory: Optional[str] = None
    providerKind: str = "stub"  # "stub" | "http"
    providerEndpoint: Optional[str] = None
    providerTimeout: float = 30.0
    providerRetries: int = 1
    embeddingKind: str = "local"  # "local" | "http"
    embeddingEndpoint: Optional[str] = None
    embeddingDimension: int = 256
    tau: float = DEFAULT_TAU
    scopeStrategy: str = "similarityThreshold"
    listenAddress: str = "127.0.0.1:8080"
    corpusPath: Optional[str] = None

    def validate(self) -> None:
        if self.providerKind == "http" and not self.providerEndpoint:
            raise ServiceError("config-invalid",
                               "providerKind=http requires "
                               "providerEndpoint", "config")
        if self.providerKind not in ("stub", "http"):
            raise ServiceError("config-invalid",
                               f"unknown providerKind "
                               f"{self.providerKind!r}", "config")
        if not (-1.0 <= self.tau <= 1.01):
            raise ServiceError("config-invalid",
                               f"tau {self.tau} outside [-1, 1.01]",
                               "config")


_FLOAT_FIELDS = {"providerTimeout", "tau"}
_INT_FIELDS = {"providerRetries", "embeddingDimension"}


def _coerce(name: str, value: Any) -> Any:
    if value is None or not isinstance(value, str):
        return value
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _INT_FIELDS:
        return int(value)
    return value


def load_config(path: Optional[str] = None,
                env: Optional[Dict[str, str]] = None,
                overrides: Optional[Dict[str, Any]] = None
                ) -> ServiceConfig:
    """Config precedence: overrides (flags) > TMK_* environment >
    config file > defaults."""
    config = ServiceConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ServiceError("config-invalid",
                               f"unknown config keys {sorted(unknown)}",
                               "config")
        config = replace(config, **{k: _coerce(k, v)
                                    for k, v in raw.items()})
    env = os.environ if env is None else env
    for f in fields(ServiceConfig):
        snake = "".join("_" + c if c.isupper() else c.upper()
                        for c in f.name).upper()
        value = env.get(f"TMK_{snake}")
        if value is not None:
            config = replace(config, **{f.name: _coerce(f.name, value)})
    for key, value in (overrides or {}).items():
        if value is not None:
            config = replace(config, **{key: _coerce(key, value)})
    config.validate()
    return config


@dataclass
class LoadedModel:
    modelId: str
    model: TmkModel
    diagnostics: List
    index: VectorIndex
    operations: OperationRegistry
    predicates: PredicateRegistry


@dataclass
class ModelRegistry:
    models: Dict[str, LoadedModel] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "ModelRegistry":
        embedder = make_embedder(config)
        registry = cls()

        def add(model_id: str, model: TmkModel) -> None:
            diags = validate_model(model)
            if error_count(diags):
                return
            if model_id in SKILLS:
                operations, predicates = registries_for(model_id)
            else:
                operations, predicates = OperationRegistry(), \
                    PredicateRegistry()
            registry.models[model_id] = LoadedModel(
                model_id, model, diags,
                build_index(serialize_documents(model), embedder),
                operations, predicates)

        if config.modelDirectory:
            for name in sorted(os.listdir(config.modelDirectory)):
                if not name.endswith(".json"):
                    continue
                try:
                    model = load_model(
                        os.path.join(config.modelDirectory, name))
                except ModelError:
                    continue
                add(os.path.splitext(name)[0], model)
        else:
            for skill in SKILLS:
                add(skill, load_fixture(skill))
        if not registry.models:
            raise ServiceError("no-valid-models",
                               "no valid model could be loaded",
                               "startup", status=500)
        return registry

    def get(self, model_id: str) -> LoadedModel:
        loaded = self.models.get(model_id)
        if loaded is None:
            raise ServiceError("model-not-found",
                               f"unknown model {model_id!r}",
                               "registry", status=404)
        return loaded


def make_embedder(config: ServiceConfig):
    if config.embeddingKind == "http":
        if not config.embeddingEndpoint:
            raise ServiceError("config-invalid",
                               "embeddingKind=http requires "
                               "embeddingEndpoint", "config")
        return http_provider(config.embeddingEndpoint,
                             config.embeddingDimension)
    return local_provider()


def make_provider(config: ServiceConfig):
    if config.providerKind == "http":
        return HttpChatProvider(config.providerEndpoint,
                                config.providerTimeout)
    return StubProvider()


def _decode_args(loaded: LoadedModel, mechanism_name: str,
                 body: Dict[str, Any]) -> List[Any]:
    mech = loaded.model.mechanism(mechanism_name)
    if mech is None:
        raise ServiceError("mechanism-not-found",
                           f"unknown mechanism {mechanism_name!r}",
                           "execute", status=404)
    params = mech.inputParameters
    if "args" in body:
        values = list(body["args"])
    else:
        bindings = body.get("bindings") or {}
        missing = [p.name for p in params if p.name not in bindings]
        if missing:
            raise ServiceError("missing-binding",
                               f"no binding for {missing}", "execute")
        values = [bindings[p.name] for p in params]
    if len(values) != len(params):
        raise ServiceError("arity-mismatch",
                           f"{mechanism_name} takes {len(params)} "
                           f"inputs, got {len(values)}", "execute")
    # configuration-typed parameters arrive as plain JSON objects
    return [gpp.config_from_json(v)
            if p.conceptType == "configuration" and isinstance(v, dict)
            else v
            for p, v in zip(params, values)]


def create_app(config: Optional[ServiceConfig] = None,
               registry: Optional[ModelRegistry] = None):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    config = config or ServiceConfig()
    config.validate()
    registry = registry or ModelRegistry.from_config(config)
    embedder = make_embedder(config)
    corpus: Optional[RagCorpus] = None
    if config.corpusPath:
        corpus = RagCorpus.from_files([config.corpusPath], embedder)

    app = FastAPI(title="tmk-engine", version="1")
    app.state.config = config
    app.state.registry = registry

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content=exc.to_json())

    @app.get("/health")
    async def health():
        return {"schemaVersion": 1, "status": "ok",
                "models": sorted(registry.models)}

    @app.get("/models")
    async def list_models():
        return {"schemaVersion": 1, "models": [
            {"modelId": m.modelId,
             "skillName": m.model.skillName,
             "tasks": len(m.model.tasks),
             "mechanisms": len(m.model.mechanisms),
             "warnings": len(m.diagnostics)}
            for m in registry.models.values()]}

    @app.get("/models/{model_id}")
    async def get_model(model_id: str):
        loaded = registry.get(model_id)
        return {"schemaVersion": 1, "modelId": model_id,
                "model": loaded.model.to_json(),
                "diagnostics": [str(d) for d in loaded.diagnostics]}

    @app.post("/models/validate")
    async def validate(body: Dict[str, Any]):
        raw = body.get("model")
        if raw is None:
            raise ServiceError("bad-request", "body needs a 'model' "
                               "field", "validate")
        try:
            model = parse_model(raw if isinstance(raw, str)
                                else json.dumps(raw))
        except ModelError as exc:
            raise ServiceError("malformed-model", str(exc), "validate")
        diags = validate_model(model)
        return {"schemaVersion": 1,
                "diagnostics": [{"severity": d.severity, "code": d.code,
                                 "location": d.location,
                                 "message": d.message} for d in diags],
                "errorCount": error_count(diags)}

    @app.post("/models/{model_id}/execute")
    async def execute(model_id: str, body: Dict[str, Any]):
        loaded = registry.get(model_id)
        mechanism_name = body.get("mechanism")
        if not mechanism_name:
            raise ServiceError("bad-request", "body needs a 'mechanism' "
                               "field", "execute")
        args = _decode_args(loaded, mechanism_name, body)
        limits = ExecLimits()
        if "maxSteps" in body:
            limits = ExecLimits(maxSteps=int(body["maxSteps"]),
                                maxDepth=limits.maxDepth)
        try:
            trace = execute_mechanism(loaded.model, mechanism_name, args,
                                      loaded.operations,
                                      loaded.predicates, limits)
        except ExecutionError as exc:
            raise ServiceError("execution-error", str(exc), "execute")
        return trace.to_json()

    @app.post("/ask")
    async def ask(body: Dict[str, Any]):
        model_id = body.get("modelId")
        question = body.get("question")
        if not model_id or not question:
            raise ServiceError("bad-request", "body needs 'modelId' and "
                               "'question'", "ask")
        loaded = registry.get(model_id)
        pipeline_config = PipelineConfig(
            scopeStrategy=body.get("strategy", config.scopeStrategy),
            tau=float(body.get("tau", config.tau)))
        result = answer(question, loaded.model,
                        provider=make_provider(config),
                        index=loaded.index, corpus=corpus,
                        embedder=embedder, config=pipeline_config)
        return result.to_json()

    _mount_ui(app)
    return app


def _mount_ui(app) -> None:
    ui_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                          "..", "..", "frontend", "dist")
    ui_dir = os.path.abspath(ui_dir)
    if os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True),
                  name="ui")


def serve(config: ServiceConfig) -> None:
    import uvicorn
    host, _, port = config.listenAddress.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1",
                port=int(port or 8080))
