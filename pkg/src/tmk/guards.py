"""Condition DSL used in transition guards and task pre/postconditions.

Grammar (EBNF, precedence low to high):

    expr       = or_expr ;
    or_expr    = and_expr { "||" and_expr } ;
    and_expr   = cmp_expr { "&&" cmp_expr } ;
    cmp_expr   = unary [ ("==" | "!=" | "=") unary ] ;
    unary      = ("!" | "NOT") unary | primary ;
    primary    = "true" | "false" | "null"
               | "(" expr ")"
               | path [ "(" [ expr { "," expr } ] ")" ] ;
    path       = IDENT { "." IDENT } ;

`NOT` and `!` are synonyms.  `=` is an equality assertion that only
belongs in a task's postcondition; the evaluator treats it like `==`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple


class GuardError(Exception):
    """Base class for guard parse/eval failures."""


class GuardParseError(GuardError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class GuardEvalError(GuardError):
    pass


class UnboundIdentifier(GuardEvalError):
    pass


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class BoolLiteral:
    value: bool


@dataclass(frozen=True)
class NullLiteral:
    pass


@dataclass(frozen=True)
class Identifier:
    path: Tuple[str, ...]


@dataclass(frozen=True)
class PredicateCall:
    name: str
    args: Tuple["GuardExpr", ...]


@dataclass(frozen=True)
class MethodCall:
    receiver: Tuple[str, ...]
    method: str
    args: Tuple["GuardExpr", ...]


@dataclass(frozen=True)
class Not:
    expr: "GuardExpr"
    keyword: bool = False  # spelled `NOT` rather than `!`


@dataclass(frozen=True)
class And:
    left: "GuardExpr"
    right: "GuardExpr"


@dataclass(frozen=True)
class Or:
    left: "GuardExpr"
    right: "GuardExpr"


@dataclass(frozen=True)
class Compare:
    left: "GuardExpr"
    op: str  # "==", "!=" or "="
    right: "GuardExpr"


GuardExpr = Any  # union of the node classes above


# --- Lexer -----------------------------------------------------------------

_SYMBOLS = ["&&", "||", "==", "!=", "!", "=", "(", ")", ",", "."]


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "sym", "end"
    text: str
    offset: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        matched = False
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(_Token("sym", sym, i))
                i += len(sym)
                matched = True
                break
        if matched:
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        raise GuardParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# --- Parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def accept_sym(self, sym: str) -> bool:
        if self.cur.kind == "sym" and self.cur.text == sym:
            self.pos += 1
            return True
        return False

    def expect_sym(self, sym: str) -> None:
        if not self.accept_sym(sym):
            raise GuardParseError(
                f"expected {sym!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.offset)

    def parse(self) -> GuardExpr:
        if self.cur.kind == "end":
            raise GuardParseError("empty guard expression", 0)
        expr = self.or_expr()
        if self.cur.kind != "end":
            raise GuardParseError(
                f"unexpected token {self.cur.text!r}", self.cur.offset)
        return expr

    def or_expr(self) -> GuardExpr:
        left = self.and_expr()
        while self.accept_sym("||"):
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> GuardExpr:
        left = self.cmp_expr()
        while self.accept_sym("&&"):
            left = And(left, self.cmp_expr())
        return left

    def cmp_expr(self) -> GuardExpr:
        left = self.unary()
        for op in ("==", "!=", "="):
            if self.cur.kind == "sym" and self.cur.text == op:
                self.advance()
                return Compare(left, op, self.unary())
        return left

    def unary(self) -> GuardExpr:
        if self.accept_sym("!"):
            return Not(self.unary(), keyword=False)
        if self.cur.kind == "ident" and self.cur.text in ("NOT", "not"):
            self.advance()
            return Not(self.unary(), keyword=True)
        return self.primary()

    def primary(self) -> GuardExpr:
        tok = self.cur
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            inner = self.or_expr()
            self.expect_sym(")")
            return inner
        if tok.kind != "ident":
            raise GuardParseError(
                f"expected expression, found {tok.text or 'end of input'!r}",
                tok.offset)
        if tok.text == "true":
            self.advance()
            return BoolLiteral(True)
        if tok.text == "false":
            self.advance()
            return BoolLiteral(False)
        if tok.text == "null":
            self.advance()
            return NullLiteral()
        segments = [self.advance().text]
        while self.accept_sym("."):
            if self.cur.kind != "ident":
                raise GuardParseError("expected identifier after '.'",
                                      self.cur.offset)
            segments.append(self.advance().text)
        if self.accept_sym("("):
            args: List[GuardExpr] = []
            if not self.accept_sym(")"):
                args.append(self.or_expr())
                while self.accept_sym(","):
                    args.append(self.or_expr())
                self.expect_sym(")")
            if len(segments) == 1:
                return PredicateCall(segments[0], tuple(args))
            return MethodCall(tuple(segments[:-1]), segments[-1], tuple(args))
        return Identifier(tuple(segments))


def parse_guard(text: str) -> GuardExpr:
    """Parse a condition string into a GuardExpr AST."""
    return _Parser(text).parse()


# --- Pretty printer --------------------------------------------------------

def _prec(expr: GuardExpr) -> int:
    if isinstance(expr, Or):
        return 1
    if isinstance(expr, And):
        return 2
    if isinstance(expr, Compare):
        return 3
    if isinstance(expr, Not):
        return 4
    return 5


def pretty(expr: GuardExpr) -> str:
    """Render an AST back to source text; parse(pretty(e)) == e."""
    def render(e: GuardExpr, parent_prec: int) -> str:
        p = _prec(e)
        if isinstance(e, BoolLiteral):
            s = "true" if e.value else "false"
        elif isinstance(e, NullLiteral):
            s = "null"
        elif isinstance(e, Identifier):
            s = ".".join(e.path)
        elif isinstance(e, PredicateCall):
            s = f"{e.name}({', '.join(render(a, 0) for a in e.args)})"
        elif isinstance(e, MethodCall):
            recv = ".".join(e.receiver)
            s = f"{recv}.{e.method}({', '.join(render(a, 0) for a in e.args)})"
        elif isinstance(e, Not):
            inner = render(e.expr, p)
            s = f"NOT {inner}" if e.keyword else f"!{inner}"
        elif isinstance(e, And):
            s = f"{render(e.left, p)} && {render(e.right, p + 1)}"
        elif isinstance(e, Or):
            s = f"{render(e.left, p)} || {render(e.right, p + 1)}"
        elif isinstance(e, Compare):
            s = f"{render(e.left, p + 1)} {e.op} {render(e.right, p + 1)}"
        else:
            raise TypeError(f"not a guard expression: {e!r}")
        if p < parent_prec:
            return f"({s})"
        return s

    return render(expr, 0)


# --- Environment and registry ----------------------------------------------

_MISSING = object()


class Environment:
    """Per-execution variable bindings; dotted paths traverse records."""

    def __init__(self, bindings: Optional[Dict[str, Any]] = None,
                 world_name: Optional[str] = None):
        self.bindings: Dict[str, Any] = dict(bindings or {})
        # name of the designated world-state binding (may be None)
        self.world_name = world_name

    def bind(self, name: str, value: Any) -> None:
        self.bindings[name] = value

    def has(self, path: Sequence[str]) -> bool:
        return self._lookup(path, strict=False) is not _MISSING

    def lookup(self, path: Sequence[str]) -> Any:
        value = self._lookup(path, strict=True)
        return value

    def _lookup(self, path: Sequence[str], strict: bool) -> Any:
        if path[0] not in self.bindings:
            if strict:
                raise UnboundIdentifier(
                    f"unbound identifier {'.'.join(path)!r}")
            return _MISSING
        value = self.bindings[path[0]]
        for seg in path[1:]:
            if isinstance(value, dict):
                if seg not in value:
                    if strict:
                        raise GuardEvalError(
                            f"no field {seg!r} in {'.'.join(path)!r}")
                    return _MISSING
                value = value[seg]
            elif hasattr(value, seg):
                value = getattr(value, seg)
            else:
                if strict:
                    raise GuardEvalError(
                        f"no field {seg!r} in {'.'.join(path)!r}")
                return _MISSING
        return value

    def copy(self) -> "Environment":
        import copy as _copy
        return Environment(_copy.deepcopy(self.bindings), self.world_name)


class PredicateRegistry:
    """Host predicates and methods callable from guard expressions."""

    def __init__(self):
        self._predicates: Dict[str, Callable[..., Any]] = {}
        self._methods: Dict[str, Callable[..., Any]] = {}

    def register_predicate(self, name: str, fn: Callable[..., Any]) -> None:
        if name in self._predicates:
            raise ValueError(f"duplicate predicate {name!r}")
        self._predicates[name] = fn

    def register_method(self, name: str, fn: Callable[..., Any]) -> None:
        if name in self._methods:
            raise ValueError(f"duplicate method {name!r}")
        self._methods[name] = fn

    def predicate(self, name: str) -> Callable[..., Any]:
        try:
            return self._predicates[name]
        except KeyError:
            raise GuardEvalError(f"unknown predicate {name!r}") from None

    def method(self, name: str) -> Callable[..., Any]:
        try:
            return self._methods[name]
        except KeyError:
            raise GuardEvalError(f"unknown method {name!r}") from None


# --- Evaluator -------------------------------------------------------------

def _require_bool(value: Any, context: str) -> bool:
    if not isinstance(value, bool):
        raise GuardEvalError(f"{context} requires a boolean, got {value!r}")
    return value


def eval_guard(expr: GuardExpr, env: Environment,
               registry: PredicateRegistry) -> Any:
    """Evaluate a guard expression against an environment."""
    if isinstance(expr, BoolLiteral):
        return expr.value
    if isinstance(expr, NullLiteral):
        return None
    if isinstance(expr, Identifier):
        return env.lookup(expr.path)
    if isinstance(expr, PredicateCall):
        args = [eval_guard(a, env, registry) for a in expr.args]
        return registry.predicate(expr.name)(*args)
    if isinstance(expr, MethodCall):
        receiver = env.lookup(expr.receiver)
        args = [eval_guard(a, env, registry) for a in expr.args]
        return registry.method(expr.method)(receiver, *args)
    if isinstance(expr, Not):
        return not _require_bool(eval_guard(expr.expr, env, registry), "'!'")
    if isinstance(expr, And):
        if not _require_bool(eval_guard(expr.left, env, registry), "'&&'"):
            return False
        return _require_bool(eval_guard(expr.right, env, registry), "'&&'")
    if isinstance(expr, Or):
        if _require_bool(eval_guard(expr.left, env, registry), "'||'"):
            return True
        return _require_bool(eval_guard(expr.right, env, registry), "'||'")
    if isinstance(expr, Compare):
        # comparisons against `null` tolerate unbound identifiers:
        # `x != null` is false when x has no binding at all
        if isinstance(expr.right, NullLiteral):
            left = _lenient(expr.left, env, registry)
            right = None
        elif isinstance(expr.left, NullLiteral):
            left = None
            right = _lenient(expr.right, env, registry)
        else:
            left = eval_guard(expr.left, env, registry)
            right = eval_guard(expr.right, env, registry)
        equal = left == right
        return not equal if expr.op == "!=" else equal
    raise TypeError(f"not a guard expression: {expr!r}")


def _lenient(expr: GuardExpr, env: Environment,
             registry: PredicateRegistry) -> Any:
    if isinstance(expr, Identifier) and not env.has(expr.path):
        return None
    return eval_guard(expr, env, registry)


# --- Atoms and branch-logic analysis ---------------------------------------

def atoms_of(expr: GuardExpr) -> List[str]:
    """Distinct atomic boolean sub-expressions, canonical, in first-occurrence
    order.  Not/And/Or are decomposed; calls and comparisons are atomic."""
    out: List[str] = []
    seen = set()

    def walk(e: GuardExpr) -> None:
        if isinstance(e, Not):
            walk(e.expr)
        elif isinstance(e, (And, Or)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, (BoolLiteral, NullLiteral)):
            pass
        else:
            key = pretty(e)
            if key not in seen:
                seen.add(key)
                out.append(key)

    walk(expr)
    return out


@dataclass
class BranchLogicResult:
    exhaustive: bool
    disjoint: bool
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    atoms: List[str] = field(default_factory=list)


def eval_under_assignment(expr: GuardExpr,
                          assignment: Dict[str, bool]) -> bool:
    """Evaluate treating each atom as an opaque boolean variable."""
    if isinstance(expr, BoolLiteral):
        return expr.value
    if isinstance(expr, Not):
        return not eval_under_assignment(expr.expr, assignment)
    if isinstance(expr, And):
        return (eval_under_assignment(expr.left, assignment)
                and eval_under_assignment(expr.right, assignment))
    if isinstance(expr, Or):
        return (eval_under_assignment(expr.left, assignment)
                or eval_under_assignment(expr.right, assignment))
    key = pretty(expr)
    if key not in assignment:
        raise GuardEvalError(f"no truth assignment for atom {key!r}")
    return assignment[key]


def check_branch_logic(guards: Sequence[GuardExpr],
                       max_atoms: int = 16) -> BranchLogicResult:
    """Truth-table analysis of a guard set for exhaustiveness/exclusivity."""
    atoms: List[str] = []
    seen = set()
    for g in guards:
        for a in atoms_of(g):
            if a not in seen:
                seen.add(a)
                atoms.append(a)
    if len(atoms) > max_atoms:
        raise GuardEvalError(
            f"atom budget exceeded: {len(atoms)} atoms > {max_atoms}")
    exhaustive = True
    disjoint = True
    witnesses: List[Dict[str, Any]] = []
    for values in itertools.product([False, True], repeat=len(atoms)):
        assignment = dict(zip(atoms, values))
        hits = sum(1 for g in guards
                   if eval_under_assignment(g, assignment))
        if hits == 0:
            exhaustive = False
            witnesses.append({"assignment": assignment, "kind": "uncovered"})
        elif hits > 1:
            disjoint = False
            witnesses.append({"assignment": assignment, "kind": "overlap"})
    return BranchLogicResult(exhaustive, disjoint, witnesses, atoms)
