"""Mechanism FSM execution with guarded transitions and full tracing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from .guards import (Environment, GuardEvalError, PredicateRegistry,
                     eval_guard)
from .model import (Mechanism, StateDef, Task, TmkModel, Transition,
                    state_alias)


class ExecutionError(Exception):
    pass


class OperationRegistry:
    """Host functions backing operation-kind state invocations.

    Each function takes (env, argNames) and returns a bindings delta; it
    may rebind its argument names and the designated world-state binding.
    """

    def __init__(self):
        self._ops: Dict[str, Callable[[Environment, List[str]],
                                      Dict[str, Any]]] = {}

    def register(self, name: str, fn) -> "OperationRegistry":
        if name in self._ops:
            raise ValueError(f"duplicate operation {name!r}")
        self._ops[name] = fn
        return self

    def get(self, name: str):
        return self._ops.get(name)

    def names(self) -> List[str]:
        return sorted(self._ops)


@dataclass(frozen=True)
class ExecLimits:
    maxSteps: int = 256
    maxDepth: int = 16


@dataclass
class GuardEvaluation:
    sourceState: str
    targetState: str
    exprText: str
    value: Optional[bool]
    error: Optional[str] = None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"sourceState": self.sourceState,
                               "targetState": self.targetState,
                               "exprText": self.exprText,
                               "value": self.value}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class Step:
    stateName: str
    invocation: str
    guardEvaluations: List[GuardEvaluation] = field(default_factory=list)
    envSnapshot: Dict[str, Any] = field(default_factory=dict)
    nestedTraces: List["ExecutionTrace"] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {"stateName": self.stateName,
                "invocation": self.invocation,
                "guardEvaluations": [g.to_json()
                                     for g in self.guardEvaluations],
                "envSnapshot": self.envSnapshot,
                "nestedTraces": [t.to_json() for t in self.nestedTraces],
                "warnings": list(self.warnings)}


@dataclass
class ExecutionTrace:
    mechanism: str
    steps: List[Step] = field(default_factory=list)
    outcome: str = "Stuck"  # Success | Failure | Stuck | LimitExceeded
    terminalState: Optional[str] = None
    reason: Optional[str] = None
    outputs: Dict[str, Any] = field(default_factory=dict)

    @property
    def state_sequence(self) -> List[str]:
        return [s.stateName for s in self.steps]

    def to_json(self) -> Dict[str, Any]:
        return {"schemaVersion": 1,
                "mechanism": self.mechanism,
                "steps": [s.to_json() for s in self.steps],
                "outcome": self.outcome,
                "terminalState": self.terminalState,
                "reason": self.reason,
                "outputs": self.outputs}

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)


def value_tree(value: Any) -> Any:
    """Serializable snapshot of a bound value."""
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, dict):
        return {k: value_tree(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [value_tree(v) for v in value]
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return repr(value)


@dataclass
class GoalResult:
    ok: bool
    outputs: Dict[str, Any] = field(default_factory=dict)
    nestedTraces: List[ExecutionTrace] = field(default_factory=list)
    reason: Optional[str] = None


def _world_name(params: Sequence) -> Optional[str]:
    for p in params:
        if p.conceptType == "configuration":
            return p.name
    return None


def invoke_goal(model: TmkModel, task_name: str, args: Sequence[Any],
                operations: OperationRegistry,
                predicates: PredicateRegistry,
                limits: ExecLimits = ExecLimits(),
                depth: int = 0,
                assert_makes: bool = True) -> GoalResult:
    """Invoke a task: check `given`, run its mechanisms (or, for a
    declarative task, its `makes` assertion), return output bindings."""
    task = model.task(task_name)
    if task is None:
        return GoalResult(False, reason=f"unknown-task: {task_name!r}")
    if depth > limits.maxDepth:
        return GoalResult(False, reason="depth-limit-exceeded")
    if len(args) != len(task.inputParameters):
        return GoalResult(False, reason=(
            f"arity-mismatch: {task_name} takes "
            f"{len(task.inputParameters)} inputs, got {len(args)}"))
    env = Environment(
        {p.name: v for p, v in zip(task.inputParameters, args)},
        world_name=_world_name(task.inputParameters))
    if task.given is not None:
        try:
            ok = eval_guard(task.given, env, predicates)
        except GuardEvalError as exc:
            return GoalResult(False, reason=f"given-error: {exc}")
        if ok is not True:
            return GoalResult(False, reason=(
                f"given-violated: {task.givenText!r} on {task_name}"))
    nested: List[ExecutionTrace] = []
    for binding in task.means:
        mech = model.mechanism(binding.mechanismReference)
        if mech is None:
            return GoalResult(False, nestedTraces=nested, reason=(
                f"dangling-reference: {binding.mechanismReference!r}"))
        n_in = len(mech.inputParameters)
        in_names = binding.actualArguments[:n_in]
        out_names = binding.actualArguments[n_in:]
        try:
            in_values = [env.lookup([n]) for n in in_names]
        except GuardEvalError as exc:
            return GoalResult(False, nestedTraces=nested,
                              reason=f"unbound-argument: {exc}")
        trace = execute_mechanism(model, mech.name, in_values, operations,
                                  predicates, limits, depth=depth + 1,
                                  assert_makes=assert_makes)
        nested.append(trace)
        if trace.outcome != "Success":
            return GoalResult(False, nestedTraces=nested, reason=(
                f"mechanism-failed: {mech.name} ({trace.outcome})"))
        for out_name, param in zip(out_names, mech.outputParameters):
            env.bind(out_name, trace.outputs[param.name])
    if task.makes is not None:
        from . import guards as g
        expr = task.makes
        # `out = expr` on a not-yet-bound output parameter binds it; the
        # assertion then holds by construction
        if isinstance(expr, g.Compare) and expr.op in ("=", "==") \
                and isinstance(expr.left, g.Identifier) \
                and len(expr.left.path) == 1 \
                and expr.left.path[0] in {p.name
                                          for p in task.outputParameters} \
                and not env.has(expr.left.path):
            try:
                env.bind(expr.left.path[0],
                         eval_guard(expr.right, env, predicates))
            except GuardEvalError as exc:
                return GoalResult(False, nestedTraces=nested,
                                  reason=f"makes-error: {exc}")
        try:
            holds = eval_guard(expr, env, predicates)
        except GuardEvalError as exc:
            return GoalResult(False, nestedTraces=nested,
                              reason=f"makes-error: {exc}")
        if holds is not True and assert_makes:
            return GoalResult(False, nestedTraces=nested, reason=(
                f"makes-violated: {task.makesText!r} on {task_name}"))
    outputs: Dict[str, Any] = {}
    for p in task.outputParameters:
        if not env.has([p.name]):
            return GoalResult(False, nestedTraces=nested,
                              reason=f"unbound-output: {p.name!r}")
        outputs[p.name] = env.lookup([p.name])
    return GoalResult(True, outputs=outputs, nestedTraces=nested)


def _snapshot_value(env: Environment) -> Any:
    if env.world_name is not None and env.world_name in env.bindings:
        return env.bindings[env.world_name]
    return dict(env.bindings)


def _run_invocation(model: TmkModel, state: StateDef, env: Environment,
                    operations: OperationRegistry,
                    predicates: PredicateRegistry, limits: ExecLimits,
                    depth: int, assert_makes: bool,
                    ) -> "tuple[bool, Optional[str], List[ExecutionTrace]]":
    """Run one state's invocation in-place.  Returns (ok, reason, nested)."""
    inv = state.invocation
    if inv.kind == "operation":
        fn = operations.get(inv.goalReference)
        if fn is None:
            return False, f"unknown-operation: {inv.goalReference!r}", []
        try:
            delta = fn(env, list(inv.actualArguments))
        except Exception as exc:
            return False, f"operation-failed: {inv.goalReference}: {exc}", []
        for name, value in (delta or {}).items():
            env.bind(name, value)
        return True, None, []
    # goal invocation: leading names are inputs, the rest receive outputs
    task = model.task(inv.goalReference)
    if task is None:
        return False, f"unknown-task: {inv.goalReference!r}", []
    n_in = len(task.inputParameters)
    in_names = inv.actualArguments[:n_in]
    out_names = inv.actualArguments[n_in:]
    try:
        in_values = [env.lookup([n]) for n in in_names]
    except GuardEvalError as exc:
        return False, f"unbound-argument: {exc}", []
    result = invoke_goal(model, inv.goalReference, in_values, operations,
                         predicates, limits, depth=depth + 1,
                         assert_makes=assert_makes)
    if not result.ok:
        return False, result.reason, result.nestedTraces
    for out_name, param in zip(out_names, task.outputParameters):
        env.bind(out_name, result.outputs[param.name])
    return True, None, result.nestedTraces


def execute_mechanism(model: TmkModel, mechanism_name: str,
                      args: Sequence[Any],
                      operations: OperationRegistry,
                      predicates: PredicateRegistry,
                      limits: ExecLimits = ExecLimits(),
                      depth: int = 0,
                      assert_makes: bool = True) -> ExecutionTrace:
    """Run a mechanism FSM from its start state to an outcome.

    At each state: run the invocation, snapshot the world, evaluate every
    outgoing transition guard in declaration order, follow the first true
    one.  Guards may reference state names (or their short aliases); a
    reference to a not-yet-visited state is resolved by simulating that
    state's operation on a copy of the environment.
    """
    mech = model.mechanism(mechanism_name)
    if mech is None:
        raise ExecutionError(f"unknown mechanism {mechanism_name!r}")
    if len(args) != len(mech.inputParameters):
        raise ExecutionError(
            f"arity mismatch: {mechanism_name} takes "
            f"{len(mech.inputParameters)} inputs, got {len(args)}")
    if depth > limits.maxDepth:
        return ExecutionTrace(mechanism_name, outcome="LimitExceeded",
                              reason="depth-limit-exceeded")

    env = Environment(
        {p.name: v for p, v in zip(mech.inputParameters, args)},
        world_name=_world_name(mech.inputParameters))
    param_names = {p.name for p in
                   mech.inputParameters + mech.outputParameters}
    alias_of = {s.name: state_alias(s.name) for s in mech.states}
    snapshots: Dict[str, Any] = {}

    trace = ExecutionTrace(mechanism_name)
    current = mech.startState
    steps = 0

    def finish(outcome: str, reason: Optional[str] = None) -> ExecutionTrace:
        trace.outcome = outcome
        trace.terminalState = (trace.steps[-1].stateName
                               if trace.steps and outcome in ("Success",
                                                              "Failure")
                               else None)
        trace.reason = reason
        if outcome == "Success":
            for p in mech.outputParameters:
                if not env.has([p.name]):
                    trace.outcome = "Stuck"
                    trace.terminalState = None
                    trace.reason = f"unbound-output: {p.name!r}"
                    return trace
                trace.outputs[p.name] = value_tree(env.lookup([p.name]))
        return trace

    def bind_snapshot(state_name: str, value: Any,
                      eval_env: Environment) -> None:
        snapshots[state_name] = value
        eval_env.bind(state_name, value)
        alias = alias_of.get(state_name, state_name)
        if alias not in param_names:
            eval_env.bind(alias, value)

    while True:
        steps += 1
        if steps > limits.maxSteps:
            return finish("LimitExceeded", "step-limit-exceeded")
        state = mech.state(current)
        if state is None:
            return finish("Stuck", f"unknown-state: {current!r}")
        step = Step(stateName=current,
                    invocation=_invocation_text(state))
        trace.steps.append(step)

        ok, reason, nested = _run_invocation(
            model, state, env, operations, predicates, limits, depth,
            assert_makes)
        step.nestedTraces.extend(nested)
        bind_snapshot(current, _snapshot_value(env), env)
        step.envSnapshot = {
            k: value_tree(v) for k, v in env.bindings.items()
            if k not in snapshots and k not in
            {alias_of.get(s) for s in snapshots}}

        if not ok:
            if current == mech.failureState:
                return finish("Failure", reason)
            contract_failure = reason is not None and reason.startswith(
                ("given-violated", "makes-violated", "mechanism-failed"))
            if current == mech.successState or contract_failure:
                # contract-style subgoal failures (including one at the
                # success state) route to the failure state
                step.warnings.append(f"subgoal failed: {reason}")
                current = mech.failureState
                continue
            return finish("Stuck", reason)

        if current == mech.successState:
            return finish("Success")
        if current == mech.failureState:
            return finish("Failure")

        outgoing = mech.outgoing(current)
        if not outgoing:
            return finish("Stuck", "no-outgoing-transitions")

        eval_env = _lookahead_env(model, mech, env, snapshots, alias_of,
                                  param_names, outgoing, operations,
                                  predicates, limits, depth, assert_makes)
        chosen: Optional[Transition] = None
        for t in outgoing:
            if t.dataCondition is None:
                step.guardEvaluations.append(GuardEvaluation(
                    t.sourceState, t.targetState, t.dataConditionText,
                    None, error="guard did not parse"))
                continue
            try:
                value = eval_guard(t.dataCondition, eval_env, predicates)
                if not isinstance(value, bool):
                    raise GuardEvalError(
                        f"guard value is not boolean: {value!r}")
                step.guardEvaluations.append(GuardEvaluation(
                    t.sourceState, t.targetState, t.dataConditionText,
                    value))
            except GuardEvalError as exc:
                step.guardEvaluations.append(GuardEvaluation(
                    t.sourceState, t.targetState, t.dataConditionText,
                    None, error=str(exc)))
                continue
            if value and chosen is None:
                chosen = t
            elif value:
                step.warnings.append(
                    f"multiple guards true at {current!r}; following "
                    f"declaration order")
        if chosen is None:
            errors = [g.error for g in step.guardEvaluations if g.error]
            if errors:
                return finish("Stuck", f"guard-error: {errors[0]}")
            return finish("Stuck", f"no-true-transition at {current!r}")
        current = chosen.targetState


def operation_sequence(model: TmkModel, trace: ExecutionTrace) -> List[str]:
    """Names of the operation-kind invocations along a trace, in order."""
    mech = model.mechanism(trace.mechanism)
    out: List[str] = []
    for step in trace.steps:
        state = mech.state(step.stateName) if mech else None
        if state is not None and state.invocation.kind == "operation":
            out.append(state.invocation.goalReference)
    return out


def _invocation_text(state: StateDef) -> str:
    inv = state.invocation
    args = ", ".join(inv.actualArguments)
    return f"{inv.goalReference}({args}) [{inv.kind}]"


def _lookahead_env(model, mech: Mechanism, env: Environment,
                   snapshots: Dict[str, Any], alias_of: Dict[str, str],
                   param_names, outgoing, operations, predicates, limits,
                   depth, assert_makes) -> Environment:
    """Guard-evaluation environment: current bindings plus snapshots for any
    state a guard mentions that has not run yet.

    Operation-kind invocations are simulated on a copy; goal-kind
    invocations are treated as world-preserving (subgoals check, they do
    not move the world), so their snapshot is the current world.
    """
    from .model import _free_identifiers

    eval_env = env.copy()
    for name, value in snapshots.items():
        eval_env.bind(name, value)
        alias = alias_of.get(name, name)
        if alias not in param_names:
            eval_env.bind(alias, value)
    wanted: List[str] = []
    for t in outgoing:
        if t.dataCondition is None:
            continue
        for ident in _free_identifiers(t.dataCondition):
            head = ident.split(".")[0]
            if head in eval_env.bindings:
                continue
            for s in mech.states:
                if head in (s.name, alias_of.get(s.name)):
                    if s.name not in wanted:
                        wanted.append(s.name)
    for state_name in wanted:
        state = mech.state(state_name)
        if state.invocation.kind == "operation":
            sim = env.copy()
            try:
                _run_invocation(model, state, sim, operations, predicates,
                                limits, depth, assert_makes)
            except Exception:
                pass
            value = _snapshot_value(sim)
        else:
            value = _snapshot_value(env)
        eval_env.bind(state_name, value)
        alias = alias_of.get(state_name, state_name)
        if alias not in param_names:
            eval_env.bind(alias, value)
    return eval_env
