"""Typed in-memory skill models parsed from their JSON file format.

A skill file is a single JSON object with up to three top-level keys:
``Task``, ``Mechanism`` and ``Knowledge``, each holding an array of
entries.  Mechanisms keep their FSM under an ``organizer`` sub-object;
Knowledge entries group ``Concepts``, ``Instances`` and ``Relations``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

from . import guards
from .guards import GuardExpr, parse_guard

BUILTIN_TYPES = {"BOOLEAN", "pair", "configuration", "string", "integer"}

KNOWN_TASK_KEYS = {"name", "description", "inputParameters",
                   "outputParameters", "given", "makes", "means"}
KNOWN_MECH_KEYS = {"name", "description", "inputParameters",
                   "outputParameters", "organizer"}
KNOWN_ORGANIZER_KEYS = {"startState", "successState", "failureState",
                        "states", "transitions"}


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.code} {self.location}: {self.message}"


@dataclass(frozen=True)
class TypedParam:
    name: str
    conceptType: str

    def to_json(self) -> str:
        return f"{self.name}: {self.conceptType}"


@dataclass(frozen=True)
class MechanismBinding:
    mechanismReference: str
    actualArguments: Tuple[str, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"mechanismReference": self.mechanismReference,
                "actualArguments": list(self.actualArguments)}


@dataclass(frozen=True)
class Task:
    name: str
    description: str
    inputParameters: Tuple[TypedParam, ...]
    outputParameters: Tuple[TypedParam, ...]
    given: Optional[GuardExpr]
    makes: Optional[GuardExpr]
    means: Tuple[MechanismBinding, ...]
    givenText: Optional[str] = None
    makesText: Optional[str] = None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "description": self.description,
            "inputParameters": [p.to_json() for p in self.inputParameters],
            "outputParameters": [p.to_json() for p in self.outputParameters],
        }
        if self.givenText is not None:
            out["given"] = self.givenText
        if self.makesText is not None:
            out["makes"] = self.makesText
        out["means"] = [m.to_json() for m in self.means]
        return out


@dataclass(frozen=True)
class GoalInvocation:
    goalReference: str
    kind: str  # "operation" | "goal"
    actualArguments: Tuple[str, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"goalReference": self.goalReference,
                "type": self.kind,
                "actualArguments": list(self.actualArguments)}


@dataclass(frozen=True)
class StateDef:
    name: str
    invocation: GoalInvocation

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name,
                "goalInvocation": self.invocation.to_json()}


@dataclass(frozen=True)
class Transition:
    sourceState: str
    targetState: str
    dataCondition: Optional[GuardExpr]
    dataConditionText: str

    def to_json(self) -> Dict[str, Any]:
        return {"sourceState": self.sourceState,
                "targetState": self.targetState,
                "dataCondition": self.dataConditionText}


@dataclass(frozen=True)
class Mechanism:
    name: str
    description: str
    inputParameters: Tuple[TypedParam, ...]
    outputParameters: Tuple[TypedParam, ...]
    startState: str
    successState: str
    failureState: str
    states: Tuple[StateDef, ...]
    transitions: Tuple[Transition, ...]

    def state(self, name: str) -> Optional[StateDef]:
        for s in self.states:
            if s.name == name:
                return s
        return None

    def outgoing(self, state_name: str) -> List[Transition]:
        return [t for t in self.transitions if t.sourceState == state_name]

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "inputParameters": [p.to_json() for p in self.inputParameters],
            "outputParameters": [p.to_json() for p in self.outputParameters],
            "organizer": {
                "startState": self.startState,
                "successState": self.successState,
                "failureState": self.failureState,
                "states": [s.to_json() for s in self.states],
                "transitions": [t.to_json() for t in self.transitions],
            },
        }


@dataclass(frozen=True)
class Concept:
    name: str
    superConcept: Optional[str]
    properties: Tuple[Tuple[str, str], ...]  # (name, type)

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name}
        if self.superConcept is not None:
            out["superConcept"] = self.superConcept
        out["properties"] = [{"name": n, "type": t}
                             for n, t in self.properties]
        return out


@dataclass(frozen=True)
class Instance:
    concept: str
    name: str
    values: Dict[str, Any]

    def to_json(self) -> Dict[str, Any]:
        return {"concept": self.concept, "name": self.name,
                "values": self.values}


@dataclass(frozen=True)
class Relation:
    name: str
    domain: str
    range: str

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "domain": self.domain,
                "range": self.range}


@dataclass(frozen=True)
class Knowledge:
    concepts: Tuple[Concept, ...] = ()
    instances: Tuple[Instance, ...] = ()
    relations: Tuple[Relation, ...] = ()

    def to_json(self) -> List[Dict[str, Any]]:
        out: List[Dict[str, Any]] = []
        if self.concepts:
            out.append({"Concepts": [c.to_json() for c in self.concepts]})
        if self.instances:
            out.append({"Instances": [i.to_json() for i in self.instances]})
        if self.relations:
            out.append({"Relations": [r.to_json() for r in self.relations]})
        return out


@dataclass(frozen=True)
class TmkModel:
    skillName: str
    tasks: Tuple[Task, ...]
    mechanisms: Tuple[Mechanism, ...]
    knowledge: Knowledge
    parseDiagnostics: Tuple[Diagnostic, ...] = ()

    def task(self, name: str) -> Optional[Task]:
        for t in self.tasks:
            if t.name == name:
                return t
        return None

    def mechanism(self, name: str) -> Optional[Mechanism]:
        for m in self.mechanisms:
            if m.name == name:
                return m
        return None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        if self.skillName:
            out["skillName"] = self.skillName
        out["Task"] = [t.to_json() for t in self.tasks]
        out["Mechanism"] = [m.to_json() for m in self.mechanisms]
        out["Knowledge"] = self.knowledge.to_json()
        return out


# --- Parsing ---------------------------------------------------------------

def _parse_params(raw: Any, loc: str,
                  diags: List[Diagnostic]) -> Tuple[TypedParam, ...]:
    params: List[TypedParam] = []
    for item in raw or []:
        if isinstance(item, str):
            name, _, ctype = item.partition(":")
            params.append(TypedParam(name.strip(), ctype.strip()))
        elif isinstance(item, dict) and "name" in item:
            params.append(TypedParam(item["name"],
                                     item.get("type", item.get("conceptType", ""))))
        else:
            diags.append(Diagnostic("error", "bad-parameter", loc,
                                    f"unparseable parameter {item!r}"))
    return tuple(params)


def _parse_guard_field(text: Any, loc: str,
                       diags: List[Diagnostic]) -> Tuple[Optional[GuardExpr],
                                                         Optional[str]]:
    if text is None:
        return None, None
    if not isinstance(text, str):
        diags.append(Diagnostic("error", "bad-guard", loc,
                                f"guard must be a string, got {text!r}"))
        return None, None
    try:
        return parse_guard(text), text
    except guards.GuardParseError as exc:
        diags.append(Diagnostic("error", "guard-parse", loc,
                                f"cannot parse {text!r}: {exc}"))
        return None, text


def _warn_unknown_keys(raw: Dict[str, Any], known: Set[str], loc: str,
                       diags: List[Diagnostic]) -> None:
    for key in raw:
        if key not in known:
            diags.append(Diagnostic("warning", "unknown-key", loc,
                                    f"unknown key {key!r} ignored"))


def _parse_task(raw: Dict[str, Any], idx: int,
                diags: List[Diagnostic]) -> Optional[Task]:
    loc = f"Task[{idx}]"
    name = raw.get("name")
    if not name:
        diags.append(Diagnostic("error", "missing-field", loc,
                                "task has no name"))
        return None
    loc = f"Task[{name}]"
    _warn_unknown_keys(raw, KNOWN_TASK_KEYS, loc, diags)
    given, given_text = _parse_guard_field(raw.get("given"),
                                           f"{loc}.given", diags)
    makes, makes_text = _parse_guard_field(raw.get("makes"),
                                           f"{loc}.makes", diags)
    means: List[MechanismBinding] = []
    for j, m in enumerate(raw.get("means") or []):
        if not isinstance(m, dict) or "mechanismReference" not in m:
            diags.append(Diagnostic("error", "bad-means",
                                    f"{loc}.means[{j}]",
                                    f"unparseable mechanism binding {m!r}"))
            continue
        means.append(MechanismBinding(m["mechanismReference"],
                                      tuple(m.get("actualArguments") or [])))
    return Task(
        name=name,
        description=raw.get("description", ""),
        inputParameters=_parse_params(raw.get("inputParameters"),
                                      f"{loc}.inputParameters", diags),
        outputParameters=_parse_params(raw.get("outputParameters"),
                                       f"{loc}.outputParameters", diags),
        given=given, makes=makes, means=tuple(means),
        givenText=given_text, makesText=makes_text,
    )


def _parse_mechanism(raw: Dict[str, Any], idx: int,
                     diags: List[Diagnostic]) -> Optional[Mechanism]:
    loc = f"Mechanism[{idx}]"
    name = raw.get("name")
    if not name:
        diags.append(Diagnostic("error", "missing-field", loc,
                                "mechanism has no name"))
        return None
    loc = f"Mechanism[{name}]"
    _warn_unknown_keys(raw, KNOWN_MECH_KEYS, loc, diags)
    organizer = raw.get("organizer")
    if not isinstance(organizer, dict):
        diags.append(Diagnostic("error", "missing-field", loc,
                                f"mechanism {name!r} has no organizer"))
        return None
    _warn_unknown_keys(organizer, KNOWN_ORGANIZER_KEYS,
                       f"{loc}.organizer", diags)
    ok = True
    for key in ("startState", "successState", "failureState"):
        if not organizer.get(key):
            diags.append(Diagnostic("error", "missing-field",
                                    f"{loc}.organizer",
                                    f"mechanism {name!r} missing {key}"))
            ok = False
    states: List[StateDef] = []
    for j, s in enumerate(raw.get("organizer", {}).get("states") or []):
        sloc = f"{loc}.states[{j}]"
        sname = s.get("name") if isinstance(s, dict) else None
        inv = s.get("goalInvocation") if isinstance(s, dict) else None
        if not sname or not isinstance(inv, dict):
            diags.append(Diagnostic("error", "bad-state", sloc,
                                    f"unparseable state {s!r}"))
            continue
        kind = inv.get("type")
        if kind not in ("operation", "goal"):
            diags.append(Diagnostic("error", "bad-invocation-kind", sloc,
                                    f"unknown invocation type {kind!r}"))
            continue
        states.append(StateDef(sname, GoalInvocation(
            inv.get("goalReference", ""), kind,
            tuple(inv.get("actualArguments") or []))))
    transitions: List[Transition] = []
    for j, t in enumerate(organizer.get("transitions") or []):
        tloc = f"{loc}.transitions[{j}]"
        if not isinstance(t, dict) or "sourceState" not in t:
            diags.append(Diagnostic("error", "bad-transition", tloc,
                                    f"unparseable transition {t!r}"))
            continue
        cond_text = t.get("dataCondition", "true")
        cond, _ = _parse_guard_field(cond_text, tloc, diags)
        transitions.append(Transition(t["sourceState"], t.get("targetState", ""),
                                      cond, cond_text))
    if not ok:
        return None
    return Mechanism(
        name=name,
        description=raw.get("description", ""),
        inputParameters=_parse_params(raw.get("inputParameters"),
                                      f"{loc}.inputParameters", diags),
        outputParameters=_parse_params(raw.get("outputParameters"),
                                       f"{loc}.outputParameters", diags),
        startState=organizer["startState"],
        successState=organizer["successState"],
        failureState=organizer["failureState"],
        states=tuple(states),
        transitions=tuple(transitions),
    )


def _parse_knowledge(raw: Any, diags: List[Diagnostic]) -> Knowledge:
    concepts: List[Concept] = []
    instances: List[Instance] = []
    relations: List[Relation] = []
    for idx, group in enumerate(raw or []):
        loc = f"Knowledge[{idx}]"
        if not isinstance(group, dict):
            diags.append(Diagnostic("error", "bad-knowledge", loc,
                                    f"unparseable knowledge entry {group!r}"))
            continue
        for c in group.get("Concepts") or []:
            props = tuple((p.get("name", ""), p.get("type", ""))
                          for p in c.get("properties") or [])
            concepts.append(Concept(c.get("name", ""),
                                    c.get("superConcept"), props))
        for i in group.get("Instances") or []:
            instances.append(Instance(i.get("concept", ""),
                                      i.get("name", ""),
                                      i.get("values") or {}))
        for r in group.get("Relations") or []:
            relations.append(Relation(r.get("name", ""),
                                      r.get("domain", ""),
                                      r.get("range", "")))
        for key in group:
            if key not in ("Concepts", "Instances", "Relations"):
                diags.append(Diagnostic("warning", "unknown-key", loc,
                                        f"unknown key {key!r} ignored"))
    return Knowledge(tuple(concepts), tuple(instances), tuple(relations))


def parse_model(data: bytes | str) -> TmkModel:
    """Parse a skill model from its JSON document.

    Structural problems become diagnostics on the returned model rather
    than exceptions; only malformed JSON raises ModelError.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ModelError("model document must be a JSON object")
    diags: List[Diagnostic] = []
    for key in raw:
        if key not in ("skillName", "Task", "Goal", "Mechanism", "Method",
                       "Knowledge"):
            diags.append(Diagnostic("warning", "unknown-key", "$",
                                    f"unknown key {key!r} ignored"))
    # "Goal"/"Task" and "Method"/"Mechanism" are synonyms in source files;
    # canonical keys are Task and Mechanism
    raw_tasks = raw.get("Task", raw.get("Goal")) or []
    raw_mechs = raw.get("Mechanism", raw.get("Method")) or []
    tasks = [t for i, r in enumerate(raw_tasks)
             if (t := _parse_task(r, i, diags)) is not None]
    mechanisms = [m for i, r in enumerate(raw_mechs)
                  if (m := _parse_mechanism(r, i, diags)) is not None]
    knowledge = _parse_knowledge(raw.get("Knowledge"), diags)
    return TmkModel(
        skillName=raw.get("skillName", ""),
        tasks=tuple(tasks),
        mechanisms=tuple(mechanisms),
        knowledge=knowledge,
        parseDiagnostics=tuple(diags),
    )


def load_model(path: str) -> TmkModel:
    with open(path, "rb") as fh:
        return parse_model(fh.read())


# --- Validation ------------------------------------------------------------

def _check_unique(names: Iterable[str], what: str,
                  diags: List[Diagnostic]) -> None:
    seen: Set[str] = set()
    for n in names:
        if n in seen:
            diags.append(Diagnostic("error", "duplicate-name", what,
                                    f"duplicate {what} name {n!r}"))
        seen.add(n)


def validate_model(model: TmkModel,
                   operations: Optional[Set[str]] = None) -> List[Diagnostic]:
    """Static checks: referential integrity, arity, FSM shape, reachability.

    `operations` optionally names the registered primitive operations; when
    given, operation-kind invocations must resolve into it.
    """
    diags: List[Diagnostic] = list(model.parseDiagnostics)
    task_names = {t.name for t in model.tasks}
    mech_by_name = {m.name: m for m in model.mechanisms}
    concept_names = {c.name for c in model.knowledge.concepts}

    _check_unique((t.name for t in model.tasks), "Task", diags)
    _check_unique((m.name for m in model.mechanisms), "Mechanism", diags)
    _check_unique((c.name for c in model.knowledge.concepts), "Concept", diags)
    _check_unique((i.name for i in model.knowledge.instances), "Instance",
                  diags)
    _check_unique((r.name for r in model.knowledge.relations), "Relation",
                  diags)

    for task in model.tasks:
        loc = f"Task[{task.name}]"
        _check_unique((p.name for p in
                       task.inputParameters + task.outputParameters),
                      f"{loc}.parameter", diags)
        for p in task.inputParameters + task.outputParameters:
            if p.conceptType and p.conceptType not in concept_names \
                    and p.conceptType not in BUILTIN_TYPES:
                diags.append(Diagnostic("warning", "unknown-type", loc,
                                        f"parameter {p.name!r} has "
                                        f"undeclared type {p.conceptType!r}"))
        input_names = {p.name for p in task.inputParameters}
        all_names = input_names | {p.name for p in task.outputParameters}
        for label, expr, allowed in (("given", task.given, input_names),
                                     ("makes", task.makes, all_names)):
            if expr is None:
                continue
            for ident in _free_identifiers(expr):
                if ident.split(".")[0] not in allowed:
                    diags.append(Diagnostic(
                        "error", "unresolvable-identifier",
                        f"{loc}.{label}",
                        f"{label} references unknown name {ident!r}"))
        for binding in task.means:
            mech = mech_by_name.get(binding.mechanismReference)
            if mech is None:
                diags.append(Diagnostic(
                    "error", "dangling-reference", loc,
                    f"mechanismReference "
                    f"{binding.mechanismReference!r} does not resolve"))
            else:
                want = len(mech.inputParameters) + len(mech.outputParameters)
                if len(binding.actualArguments) != want:
                    diags.append(Diagnostic(
                        "error", "arity-mismatch", loc,
                        f"binding to {mech.name!r} passes "
                        f"{len(binding.actualArguments)} arguments, "
                        f"mechanism declares {want}"))

    for mech in model.mechanisms:
        loc = f"Mechanism[{mech.name}]"
        state_names = [s.name for s in mech.states]
        _check_unique(state_names, f"{loc}.state", diags)
        state_set = set(state_names)
        for role, sname in (("startState", mech.startState),
                            ("successState", mech.successState),
                            ("failureState", mech.failureState)):
            if sname not in state_set:
                diags.append(Diagnostic("error", "unknown-state", loc,
                                        f"{role} {sname!r} is not a "
                                        f"declared state"))
        for t in mech.transitions:
            for end, sname in (("sourceState", t.sourceState),
                               ("targetState", t.targetState)):
                if sname not in state_set:
                    diags.append(Diagnostic(
                        "error", "unknown-state", loc,
                        f"transition {end} {sname!r} is not a "
                        f"declared state"))
        for terminal in (mech.successState, mech.failureState):
            if mech.outgoing(terminal):
                diags.append(Diagnostic(
                    "error", "terminal-outgoing", loc,
                    f"terminal state {terminal!r} has outgoing "
                    f"transitions"))
        for s in mech.states:
            inv = s.invocation
            sloc = f"{loc}.{s.name}"
            if inv.kind == "goal" and inv.goalReference not in task_names:
                diags.append(Diagnostic(
                    "error", "dangling-reference", sloc,
                    f"goal {inv.goalReference!r} names no Task"))
            if inv.kind == "operation" and operations is not None \
                    and inv.goalReference not in operations:
                diags.append(Diagnostic(
                    "error", "unknown-operation", sloc,
                    f"operation {inv.goalReference!r} is not registered"))
            if inv.kind == "goal" and inv.goalReference in task_names:
                task = model.task(inv.goalReference)
                want = len(task.inputParameters) + len(task.outputParameters)
                if len(inv.actualArguments) != want:
                    diags.append(Diagnostic(
                        "error", "arity-mismatch", sloc,
                        f"goal {inv.goalReference!r} takes {want} "
                        f"arguments, {len(inv.actualArguments)} passed"))
        # reachability from startState over declared transitions
        if mech.startState in state_set:
            reachable = {mech.startState}
            frontier = [mech.startState]
            while frontier:
                cur = frontier.pop()
                for t in mech.outgoing(cur):
                    if t.targetState in state_set \
                            and t.targetState not in reachable:
                        reachable.add(t.targetState)
                        frontier.append(t.targetState)
            for s in mech.states:
                if s.name not in reachable:
                    diags.append(Diagnostic(
                        "warning", "unreachable-state", loc,
                        f"state {s.name!r} is unreachable from "
                        f"{mech.startState!r}"))
        for s in mech.states:
            if s.name in (mech.successState, mech.failureState):
                continue
            if not mech.outgoing(s.name):
                diags.append(Diagnostic(
                    "warning", "dead-end-state", loc,
                    f"non-terminal state {s.name!r} has no outgoing "
                    f"transitions"))
        # guard atoms must resolve against parameters, locals bound by
        # invocation arguments, state names/aliases, or predicate calls
        resolvable = {p.name for p in
                      mech.inputParameters + mech.outputParameters}
        for s in mech.states:
            resolvable.update(s.invocation.actualArguments)
            resolvable.add(s.name)
            resolvable.add(state_alias(s.name))
        for t in mech.transitions:
            if t.dataCondition is None:
                continue
            for ident in _free_identifiers(t.dataCondition):
                if ident.split(".")[0] not in resolvable:
                    diags.append(Diagnostic(
                        "error", "unresolvable-identifier", loc,
                        f"guard {t.dataConditionText!r} references "
                        f"unknown name {ident!r}"))

    # knowledge-level checks
    concept_by_name = {c.name: c for c in model.knowledge.concepts}
    for c in model.knowledge.concepts:
        seen = {c.name}
        cur = c.superConcept
        while cur is not None:
            if cur in seen:
                diags.append(Diagnostic(
                    "error", "concept-cycle", f"Concept[{c.name}]",
                    f"superConcept chain through {cur!r} is cyclic"))
                break
            seen.add(cur)
            parent = concept_by_name.get(cur)
            cur = parent.superConcept if parent else None
    for inst in model.knowledge.instances:
        loc = f"Instance[{inst.name}]"
        concept = concept_by_name.get(inst.concept)
        if concept is None:
            diags.append(Diagnostic("error", "dangling-reference", loc,
                                    f"concept {inst.concept!r} not declared"))
            continue
        declared = _inherited_properties(concept, concept_by_name)
        for key in inst.values:
            if key not in declared:
                diags.append(Diagnostic(
                    "error", "unknown-property", loc,
                    f"value key {key!r} not declared on concept "
                    f"{inst.concept!r}"))
    for rel in model.knowledge.relations:
        loc = f"Relation[{rel.name}]"
        for end, cname in (("domain", rel.domain), ("range", rel.range)):
            if cname not in concept_by_name:
                diags.append(Diagnostic(
                    "error", "dangling-reference", loc,
                    f"{end} {cname!r} names no declared concept"))
    return diags


def _inherited_properties(concept: Concept,
                          by_name: Dict[str, Concept]) -> Set[str]:
    props: Set[str] = set()
    seen: Set[str] = set()
    cur: Optional[Concept] = concept
    while cur is not None and cur.name not in seen:
        seen.add(cur.name)
        props.update(n for n, _ in cur.properties)
        cur = by_name.get(cur.superConcept) if cur.superConcept else None
    return props


def _free_identifiers(expr: GuardExpr) -> List[str]:
    out: List[str] = []

    def walk(e: GuardExpr) -> None:
        if isinstance(e, guards.Identifier):
            out.append(".".join(e.path))
        elif isinstance(e, guards.PredicateCall):
            for a in e.args:
                walk(a)
        elif isinstance(e, guards.MethodCall):
            out.append(".".join(e.receiver))
            for a in e.args:
                walk(a)
        elif isinstance(e, guards.Not):
            walk(e.expr)
        elif isinstance(e, (guards.And, guards.Or)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, guards.Compare):
            walk(e.left)
            walk(e.right)

    walk(expr)
    return out


def state_alias(state_name: str) -> str:
    """Short alias used in guards: the part after the first underscore
    (`RG_S0` -> `S0`); the full name if there is none."""
    _, sep, rest = state_name.partition("_")
    return rest if sep and rest else state_name


def error_count(diags: Iterable[Diagnostic]) -> int:
    return sum(1 for d in diags if d.severity == "error")


# --- Name extraction and document serialization ----------------------------

@dataclass(frozen=True)
class TopLevelName:
    name: str
    component: str  # "Task" | "Mechanism" | "Knowledge"


def extract_top_level_names(model: TmkModel) -> List[TopLevelName]:
    """Every task, mechanism, concept, instance and relation name once, in
    model order."""
    out: List[TopLevelName] = []
    for t in model.tasks:
        out.append(TopLevelName(t.name, "Task"))
    for m in model.mechanisms:
        out.append(TopLevelName(m.name, "Mechanism"))
    for c in model.knowledge.concepts:
        out.append(TopLevelName(c.name, "Knowledge"))
    for i in model.knowledge.instances:
        out.append(TopLevelName(i.name, "Knowledge"))
    for r in model.knowledge.relations:
        out.append(TopLevelName(r.name, "Knowledge"))
    return out


@dataclass
class TmkDocument:
    source: str  # "Task" | "Mechanism" | "Knowledge"
    entryName: str
    text: str
    vector: Optional[List[float]] = None


def _canonical(entry: Dict[str, Any]) -> str:
    return json.dumps(entry, ensure_ascii=False)


def serialize_documents(model: TmkModel) -> List[TmkDocument]:
    """One retrievable document per task, mechanism and knowledge entry."""
    docs: List[TmkDocument] = []
    for t in model.tasks:
        docs.append(TmkDocument("Task", t.name, _canonical(t.to_json())))
    for m in model.mechanisms:
        docs.append(TmkDocument("Mechanism", m.name, _canonical(m.to_json())))
    for c in model.knowledge.concepts:
        docs.append(TmkDocument("Knowledge", c.name, _canonical(c.to_json())))
    for i in model.knowledge.instances:
        docs.append(TmkDocument("Knowledge", i.name, _canonical(i.to_json())))
    for r in model.knowledge.relations:
        docs.append(TmkDocument("Knowledge", r.name, _canonical(r.to_json())))
    return docs
