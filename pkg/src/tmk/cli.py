"""Command-line front door.

Exit codes: 0 success, 1 domain error (invalid model, failed run,
missing file), 2 usage error.  Every subcommand takes --json to switch
the human-readable output to machine output.
"""

from __future__ import annotations

import json
import sys
from typing import Any, Dict, List, Optional

import click

from . import gpp
from .evalharness import EvalError, compute_report, load_ratings, \
    render_report
from .executor import ExecutionError, execute_mechanism
from .guards import GuardParseError, atoms_of, check_branch_logic, \
    parse_guard, pretty
from .model import ModelError, error_count, load_model, \
    serialize_documents, validate_model
from .pipeline import PipelineConfig, RagCorpus, answer
from .retrieval import build_index, load_index, save_index
from .service import ServiceConfig, ServiceError, load_config, serve
from .skills import SKILLS, load_fixture, registries_for


def _fail(message: str) -> "click.exceptions.ClickException":
    exc = click.ClickException(message)
    exc.exit_code = 1
    return exc


def _emit(as_json: bool, payload: Dict[str, Any],
          human: List[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in human:
            click.echo(line)


def _load(model_path: Optional[str], skill: Optional[str]):
    """(model, operations, predicates) from a path or a bundled skill."""
    if model_path:
        try:
            model = load_model(model_path)
        except FileNotFoundError:
            raise _fail(f"file not found: {model_path}")
        except ModelError as exc:
            raise _fail(str(exc))
        stem = model_path.rsplit("/", 1)[-1].removesuffix(".json")
        if stem in SKILLS:
            return model, *registries_for(stem)
        from .executor import OperationRegistry
        from .guards import PredicateRegistry
        return model, OperationRegistry(), PredicateRegistry()
    skill = skill or "gpp"
    if skill not in SKILLS:
        raise _fail(f"unknown skill {skill!r}; have {sorted(SKILLS)}")
    return load_fixture(skill), *registries_for(skill)


@click.group()
def main() -> None:
    """Task-Method-Knowledge skill model engine."""


@main.command()
@click.argument("model_path", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def validate(model_path: str, as_json: bool) -> None:
    """Parse and statically check a model file."""
    model, operations, _ = _load(model_path, None)
    diags = validate_model(model, set(operations.names())
                           if operations.names() else None)
    errors = error_count(diags)
    warnings = len(diags) - errors
    _emit(as_json,
          {"schemaVersion": 1, "errorCount": errors,
           "warningCount": warnings,
           "diagnostics": [{"severity": d.severity, "code": d.code,
                            "location": d.location,
                            "message": d.message} for d in diags]},
          [str(d) for d in diags]
          + [f"{errors} errors, {warnings} warnings"])
    if errors:
        sys.exit(1)


@main.command()
@click.argument("expression")
@click.option("--atoms", "show_atoms", is_flag=True,
              help="List the canonical atoms.")
@click.option("--check-branch", "branch", multiple=True,
              help="Check exhaustiveness/disjointness over these "
                   "guards (repeatable; the positional expression is "
                   "included).")
@click.option("--json", "as_json", is_flag=True)
def guard(expression: str, show_atoms: bool, branch, as_json: bool
          ) -> None:
    """Parse a guard expression and pretty-print it."""
    try:
        expr = parse_guard(expression)
        extra = [parse_guard(b) for b in branch]
    except GuardParseError as exc:
        raise _fail(f"parse error: {exc}")
    payload: Dict[str, Any] = {"schemaVersion": 1,
                               "pretty": pretty(expr)}
    human = [pretty(expr)]
    if show_atoms:
        payload["atoms"] = atoms_of(expr)
        human.append("atoms: " + ", ".join(atoms_of(expr)))
    if extra:
        result = check_branch_logic([expr] + extra)
        payload["branchLogic"] = {
            "exhaustive": result.exhaustive,
            "disjoint": result.disjoint,
            "atoms": result.atoms,
            "witnesses": result.witnesses}
        human.append(f"exhaustive: {result.exhaustive}, "
                     f"disjoint: {result.disjoint}")
    _emit(as_json, payload, human)


@main.command()
@click.option("--skill", default="gpp", show_default=True)
@click.option("--model", "model_path", type=click.Path())
@click.option("--mechanism", required=True)
@click.option("--guards", "n_guards", default=3, show_default=True)
@click.option("--prisoners", default=3, show_default=True)
@click.option("--capacity", default=2, show_default=True)
@click.option("--state", "state_json", default=None,
              help="Initial configuration as JSON (defaults to the "
                   "canonical instance).")
@click.option("--json", "as_json", is_flag=True)
def solve(skill: str, model_path: Optional[str], mechanism: str,
          n_guards: int, prisoners: int, capacity: int,
          state_json: Optional[str], as_json: bool) -> None:
    """Execute a mechanism from an initial configuration.

    Configuration-typed parameters get the initial configuration; other
    parameters are bound to their own names as opaque tokens.
    """
    model, operations, predicates = _load(model_path, skill)
    mech = model.mechanism(mechanism)
    if mech is None:
        raise _fail(f"unknown mechanism {mechanism!r}")
    if state_json:
        try:
            initial = gpp.config_from_json(json.loads(state_json))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise _fail(f"bad --state: {exc}")
    else:
        initial = gpp.canonical_initial(n_guards, prisoners, capacity)
    args: List[Any] = [initial if p.conceptType == "configuration"
                       else p.name for p in mech.inputParameters]
    try:
        trace = execute_mechanism(model, mechanism, args, operations,
                                  predicates)
    except ExecutionError as exc:
        raise _fail(str(exc))
    human = [f"{s.stateName}: {s.invocation}" for s in trace.steps]
    terminal = f" at {trace.terminalState}" if trace.terminalState else ""
    reason = f" ({trace.reason})" if trace.reason else ""
    human.append(f"{trace.outcome}{terminal}{reason}")
    _emit(as_json, trace.to_json(), human)
    if trace.outcome != "Success":
        sys.exit(1)


@main.command()
@click.option("--guards", "n_guards", default=3, show_default=True)
@click.option("--prisoners", default=3, show_default=True)
@click.option("--capacity", default=2, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def oracle(n_guards: int, prisoners: int, capacity: int,
           as_json: bool) -> None:
    """BFS-solve the guards-and-prisoners instance."""
    initial = gpp.canonical_initial(n_guards, prisoners, capacity)
    plan = gpp.gpp_oracle_solve(initial)
    if plan is None:
        _emit(as_json, {"schemaVersion": 1, "solvable": False,
                        "plan": None},
              ["unsolvable"])
        sys.exit(1)
    _emit(as_json,
          {"schemaVersion": 1, "solvable": True,
           "plan": [m.to_json() for m in plan],
           "crossings": len(plan)},
          [f"{i + 1}. {m.guards} guard(s), {m.prisoners} "
           f"prisoner(s) {m.direction}" for i, m in enumerate(plan)]
          + [f"{len(plan)} crossings"])


@main.command()
@click.option("--skill", default=None)
@click.option("--model", "model_path", type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def index(skill: Optional[str], model_path: Optional[str],
          out_path: str, as_json: bool) -> None:
    """Embed a model's entries and write the vector index."""
    model, _, _ = _load(model_path, skill)
    idx = build_index(serialize_documents(model))
    save_index(idx, out_path)
    _emit(as_json,
          {"schemaVersion": 1, "entries": len(idx.entries),
           "dimension": idx.dimension, "path": out_path},
          [f"indexed {len(idx.entries)} entries -> {out_path}"])


@main.command()
@click.argument("question")
@click.option("--skill", default=None)
@click.option("--model", "model_path", type=click.Path())
@click.option("--index", "index_path", type=click.Path())
@click.option("--corpus", "corpus_path", type=click.Path())
@click.option("--tau", type=float, default=None)
@click.option("--strategy", default="similarityThreshold",
              show_default=True)
@click.option("--json", "as_json", is_flag=True)
def ask(question: str, skill: Optional[str],
        model_path: Optional[str], index_path: Optional[str],
        corpus_path: Optional[str], tau: Optional[float],
        strategy: str, as_json: bool) -> None:
    """Answer a question against a skill model (stub provider)."""
    model, _, _ = _load(model_path, skill)
    config = PipelineConfig(scopeStrategy=strategy)
    if tau is not None:
        config.tau = tau
    idx = load_index(index_path) if index_path else None
    corpus = RagCorpus.from_files([corpus_path]) if corpus_path else None
    result = answer(question, model, index=idx, corpus=corpus,
                    config=config)
    human = [f"route: {result.route}"]
    if result.verbosity is not None:
        human.append(f"verbosity: {result.verbosity}")
    for doc, score in result.retrieved:
        human.append(f"  {score:.4f} {doc.source}/{doc.entryName}")
    human += ["", result.answerText]
    _emit(as_json, result.to_json(), human)


@main.command(name="eval")
@click.option("--ratings", "ratings_path", required=True,
              type=click.Path())
@click.option("--out", "out_path", type=click.Path())
@click.option("--format", "fmt", default=None,
              type=click.Choice(["markdown", "csv", "json"]))
@click.option("--threshold", default=1, show_default=True,
              help="Presence threshold for agreement metrics.")
@click.option("--per-response", is_flag=True,
              help="Aggregate agreement per response instead of per "
                   "rating.")
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(ratings_path: str, out_path: Optional[str],
             fmt: Optional[str], threshold: int, per_response: bool,
             as_json: bool) -> None:
    """Compute study metrics from a ratings CSV."""
    try:
        records = load_ratings(ratings_path)
        report = compute_report(records, threshold, per_response)
    except FileNotFoundError:
        raise _fail(f"file not found: {ratings_path}")
    except EvalError as exc:
        raise _fail(str(exc))
    if fmt is None:
        fmt = "json" if as_json else "markdown"
        if out_path and out_path.endswith(".csv"):
            fmt = "csv"
        if out_path and out_path.endswith(".json"):
            fmt = "json"
    rendered = render_report(report, fmt)
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(rendered)
        _emit(as_json, {"schemaVersion": 1, "out": out_path,
                        "format": fmt},
              [f"wrote {fmt} report to {out_path}"])
    else:
        click.echo(rendered.decode("utf-8"), nl=False)


@main.command(name="serve")
@click.option("--config", "config_path", type=click.Path())
@click.option("--listen", "listen_address", default=None,
              help="host:port to bind.")
@click.option("--model-dir", "model_directory", type=click.Path())
@click.option("--corpus", "corpus_path", type=click.Path())
@click.option("--tau", type=float, default=None)
@click.option("--provider", "provider_kind", default=None,
              type=click.Choice(["stub", "http"]))
@click.option("--provider-endpoint", default=None)
def serve_cmd(config_path: Optional[str], listen_address: Optional[str],
              model_directory: Optional[str],
              corpus_path: Optional[str], tau: Optional[float],
              provider_kind: Optional[str],
              provider_endpoint: Optional[str]) -> None:
    """Run the HTTP service."""
    try:
        config = load_config(config_path, overrides={
            "listenAddress": listen_address,
            "modelDirectory": model_directory,
            "corpusPath": corpus_path,
            "tau": tau,
            "providerKind": provider_kind,
            "providerEndpoint": provider_endpoint,
        })
        serve(config)
    except FileNotFoundError as exc:
        raise _fail(str(exc))
    except ServiceError as exc:
        raise _fail(exc.message)


if __name__ == "__main__":
    main()
