"""Bundled skill model fixtures and their execution registries."""

from __future__ import annotations

from importlib import resources
from typing import Dict, Optional

from .executor import OperationRegistry
from .guards import PredicateRegistry
from .model import TmkModel, parse_model
from . import gpp

SKILLS = {
    "gpp": "gpp.json",
    "version_spaces": "version_spaces.json",
    "analogical_reasoning": "analogical_reasoning.json",
}


def fixture_text(skill: str) -> str:
    try:
        filename = SKILLS[skill]
    except KeyError:
        raise KeyError(f"unknown bundled skill {skill!r}; "
                       f"have {sorted(SKILLS)}") from None
    return (resources.files("tmk") / "fixtures" / filename
            ).read_text("utf-8")


def fixture_path(skill: str) -> str:
    try:
        filename = SKILLS[skill]
    except KeyError:
        raise KeyError(f"unknown bundled skill {skill!r}; "
                       f"have {sorted(SKILLS)}") from None
    return str(resources.files("tmk") / "fixtures" / filename)


def load_fixture(skill: str) -> TmkModel:
    return parse_model(fixture_text(skill))


def gpp_operations() -> OperationRegistry:
    """The five primitive boat operations, acting on the designated
    world-state (configuration) binding."""
    reg = OperationRegistry()

    def make(op_name: str):
        def run(env, args):
            world = env.world_name
            if world is None or world not in env.bindings:
                raise gpp.GppError("no configuration bound")
            return {world: gpp.apply_operation(op_name,
                                               env.bindings[world])}
        return run

    for name in gpp.OPERATIONS:
        reg.register(name, make(name))
    return reg


def gpp_predicates() -> PredicateRegistry:
    reg = PredicateRegistry()
    reg.register_predicate("safe", gpp.safe)
    return reg


def version_spaces_operations() -> OperationRegistry:
    """Stub operations: enough to run the fixture FSMs over record-valued
    models and examples."""
    reg = OperationRegistry()
    reg.register("ClassifyExample", lambda env, args: {})
    reg.register("CheckExample", lambda env, args: {})
    reg.register("ModelReady", lambda env, args: {})
    reg.register("AbandonUpdate", lambda env, args: {})
    reg.register("CreateSpecificModel", lambda env, args: {
        args[1]: {"features": env.bindings[args[0]].get("features", "")}})
    reg.register("ExpandSpecificModel", lambda env, args: {
        args[2]: {"features": env.bindings[args[1]].get("features", "")
                  + "|" + env.bindings[args[0]].get("features", "")}})
    reg.register("RestrictGeneralModel", lambda env, args: {
        args[2]: dict(env.bindings[args[1]])})
    reg.register("KeepSpecificModel", lambda env, args: {
        args[1]: env.bindings[args[0]]})
    return reg


def version_spaces_predicates() -> PredicateRegistry:
    reg = PredicateRegistry()

    def includes(model: Optional[Dict], example: Dict) -> bool:
        if model is None:
            return False
        return example.get("features", "") in model.get("features", "")

    reg.register_method("includes", includes)
    return reg


def analogical_operations(mapping_ok: bool = True) -> OperationRegistry:
    reg = OperationRegistry()
    reg.register("ValidateMapping",
                 lambda env, args: {args[2]: mapping_ok})
    return reg


def analogical_predicates() -> PredicateRegistry:
    return PredicateRegistry()


def registries_for(skill: str):
    """(operations, predicates) for a bundled skill."""
    if skill == "gpp":
        return gpp_operations(), gpp_predicates()
    if skill == "version_spaces":
        return version_spaces_operations(), version_spaces_predicates()
    if skill == "analogical_reasoning":
        return analogical_operations(), analogical_predicates()
    raise KeyError(f"unknown bundled skill {skill!r}")
