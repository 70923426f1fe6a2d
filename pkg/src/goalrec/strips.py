"""STRIPS-subset model language: parsing, grounding, and state semantics.

Model files are UTF-8 s-expression text; `;` starts a comment that runs to
the end of the line.  The grammar:

    domain   := (define (domain NAME)
                  (:types NAME+)
                  (:predicates (NAME typed-vars)*)
                  action*)
    action   := (:action NAME
                  :parameters (typed-vars)
                  :precondition (and pre*)      ; or a single pre
                  :effect (and literal*))       ; or a single literal
    pre      := atom | (neq VAR VAR)
    literal  := atom | (not atom)
    problem  := (define (problem NAME)
                  (:domain NAME)
                  (:objects typed-names)
                  (:init atom*)
                  hypothesis+
                  (:true-goal INT)?)
    hypothesis := (:hypothesis PRIOR atom+)

Typed lists follow the usual convention: `?x ?y - block ?k - key`.  Every
parameter and object must carry a declared type.  Preconditions are positive
conjunctions of atoms; `(neq ?x ?y)` is a static inequality resolved during
grounding (bindings mapping ?x and ?y to the same constant are dropped).
Effects split into an add set and a delete set; an atom may not appear in
both.  Problems carry a list of goal hypotheses, each with a prior weight;
priors are normalized to sum to one at grounding time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Union

from .errors import (
    ArityMismatchError,
    EmptyHypothesisSetError,
    NotApplicableError,
    ParseError,
    TypeMismatchError,
    UndeclaredConstantError,
    UnknownPredicateError,
    UnknownTypeError,
)

# An atom is (predicate, args); args are variables (?x) in schemas and
# constants in problems and ground structures.
Atom = tuple[str, tuple[str, ...]]

# States are immutable sets of fact ids.
State = frozenset[int]


# ── Ground structures ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class Fact:
    """A ground atom with its dense id inside one task."""

    predicate: str
    args: tuple[str, ...]
    id: int

    @property
    def signature(self) -> str:
        return " ".join((self.predicate,) + self.args)


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    id: int

    @property
    def signature(self) -> str:
        return " ".join((self.name,) + self.args)


@dataclass(frozen=True)
class GoalHypothesis:
    facts: frozenset[int]
    prior: float

    def __post_init__(self):
        if not self.facts:
            raise ValueError("hypothesis goal set must be nonempty")
        if self.prior < 0:
            raise ValueError(f"negative prior {self.prior}")


@dataclass(frozen=True)
class GroundTask:
    """A fully grounded recognition task.  Immutable after construction.

    Fact ids index `facts`, action ids index `actions`; both are dense and
    assigned lexicographically.  Hypothesis priors are normalized here so
    they always sum to one.
    """

    facts: tuple[Fact, ...]
    actions: tuple[GroundAction, ...]
    init: State
    hypotheses: tuple[GoalHypothesis, ...]
    true_goal: Optional[int] = None

    def __post_init__(self):
        nf = len(self.facts)
        for i, f in enumerate(self.facts):
            if f.id != i:
                raise ValueError(f"fact id {f.id} at position {i}")
        for i, a in enumerate(self.actions):
            if a.id != i:
                raise ValueError(f"action id {a.id} at position {i}")
            if a.add & a.delete:
                raise ValueError(f"action {a.signature} adds and deletes {sorted(a.add & a.delete)}")
            for fid in a.pre | a.add | a.delete:
                if not 0 <= fid < nf:
                    raise ValueError(f"action {a.signature} references fact id {fid}")
        if any(not 0 <= fid < nf for fid in self.init):
            raise ValueError("init references an unknown fact id")
        if not self.hypotheses:
            raise EmptyHypothesisSetError("task has no goal hypotheses")
        for h in self.hypotheses:
            if any(not 0 <= fid < nf for fid in h.facts):
                raise ValueError("hypothesis references an unknown fact id")
        total = sum(h.prior for h in self.hypotheses)
        if total <= 0:
            raise ValueError("hypothesis priors must have positive sum")
        if abs(total - 1.0) > 1e-9:
            normalized = tuple(GoalHypothesis(h.facts, h.prior / total) for h in self.hypotheses)
            object.__setattr__(self, "hypotheses", normalized)
        if self.true_goal is not None and not 0 <= self.true_goal < len(self.hypotheses):
            raise ValueError(f"true goal index {self.true_goal} out of range")

    @cached_property
    def fact_ids(self) -> dict[Atom, int]:
        return {(f.predicate, f.args): f.id for f in self.facts}

    @cached_property
    def action_ids(self) -> dict[str, int]:
        return {a.signature: a.id for a in self.actions}

    def fact_id(self, predicate: str, *args: str) -> int:
        return self.fact_ids[(predicate, tuple(args))]

    def action_id(self, signature: str) -> int:
        return self.action_ids[signature]


@dataclass(frozen=True)
class ObservationTrace:
    """An ordered, nonempty sequence of action ids with an optional label."""

    actions: tuple[int, ...]
    label: Optional[int] = None

    def __post_init__(self):
        if not self.actions:
            raise ValueError("observation trace must be nonempty")


def apply(task: GroundTask, state: State, action_id: int) -> State:
    """Apply one ground action; raises NotApplicableError on unmet preconditions."""
    a = task.actions[action_id]
    if not a.pre <= state:
        raise NotApplicableError(action_id, a.pre - state)
    return (state - a.delete) | a.add


def holds(state: State, goal: Union[GoalHypothesis, frozenset[int], set[int]]) -> bool:
    facts = goal.facts if isinstance(goal, GoalHypothesis) else goal
    return frozenset(facts) <= state


# ── Schema structures ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    param_types: tuple[str, ...]


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[str, ...]
    param_types: tuple[str, ...]
    pre: tuple[Atom, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]
    neq: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class DomainSchema:
    name: str
    types: tuple[str, ...]
    predicates: tuple[PredicateSchema, ...]
    actions: tuple[ActionSchema, ...]

    @cached_property
    def predicate_map(self) -> dict[str, PredicateSchema]:
        return {p.name: p for p in self.predicates}


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain: str
    objects: tuple[tuple[str, str], ...]  # (constant, type)
    init: tuple[Atom, ...]
    hypotheses: tuple[tuple[float, tuple[Atom, ...]], ...]
    true_goal: Optional[int] = None


# ── Tokenizer / reader ─────────────────────────────────────────────────────


class _Tok(NamedTuple):
    text: str
    line: int
    col: int


class _SList(list):
    """Parenthesized expression; remembers where its '(' sat."""

    __slots__ = ("line", "col")


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            toks.append(_Tok(ch, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            toks.append(_Tok(text[i:j], line, col))
            col += j - i
            i = j
    return toks


def _read_exprs(text: str) -> list:
    toks = _tokenize(text)
    pos = 0

    def read():
        nonlocal pos
        t = toks[pos]
        if t.text == "(":
            pos += 1
            lst = _SList()
            lst.line, lst.col = t.line, t.col
            while True:
                if pos >= len(toks):
                    raise ParseError("unterminated expression", t.line, t.col, expected="')'")
                if toks[pos].text == ")":
                    pos += 1
                    return lst
                lst.append(read())
        if t.text == ")":
            raise ParseError("unbalanced ')'", t.line, t.col, expected="expression")
        pos += 1
        return t

    out = []
    while pos < len(toks):
        out.append(read())
    if not out:
        raise ParseError("empty input", 1, 1, expected="(define ...)")
    return out


def _where(expr) -> tuple[int, int]:
    return (expr.line, expr.col)


def _expect_atom(expr, what: str) -> _Tok:
    if not isinstance(expr, _Tok):
        raise ParseError(f"expected {what}, found a list", *_where(expr), expected=what)
    return expr


def _expect_list(expr, what: str) -> _SList:
    if not isinstance(expr, _SList):
        raise ParseError(f"expected {what}, found '{expr.text}'", expr.line, expr.col, expected=what)
    return expr


def _parse_typed_list(items: list, known_types: Iterable[str], owner: _SList) -> list[tuple[str, str]]:
    """Parse `name+ - type` groups; every name must end up typed."""
    known = set(known_types)
    out: list[tuple[str, str]] = []
    pending: list[_Tok] = []
    i = 0
    while i < len(items):
        tok = _expect_atom(items[i], "a name or '-'")
        if tok.text == "-":
            if i + 1 >= len(items):
                raise ParseError("dangling '-'", tok.line, tok.col, expected="a type name")
            ty = _expect_atom(items[i + 1], "a type name")
            if ty.text not in known:
                raise UnknownTypeError(f"unknown type '{ty.text}'", ty.line, ty.col)
            if not pending:
                raise ParseError("type with no names before it", tok.line, tok.col, expected="a name")
            out.extend((p.text, ty.text) for p in pending)
            pending = []
            i += 2
        else:
            pending.append(tok)
            i += 1
    if pending:
        t = pending[0]
        raise ParseError(f"'{t.text}' has no type", t.line, t.col, expected="'- <type>'")
    return out


# ── Domain parsing ─────────────────────────────────────────────────────────


def _parse_header(expr, kind: str) -> str:
    lst = _expect_list(expr, f"({kind} <name>)")
    if len(lst) != 2 or not isinstance(lst[0], _Tok) or lst[0].text != kind:
        raise ParseError(f"malformed header", *_where(lst), expected=f"({kind} <name>)")
    return _expect_atom(lst[1], "a name").text


def _parse_schema_atom(expr, schema_preds: dict[str, PredicateSchema],
                       param_types: dict[str, str]) -> Atom:
    lst = _expect_list(expr, "an atom")
    if not lst:
        raise ParseError("empty atom", *_where(lst), expected="(predicate args...)")
    head = _expect_atom(lst[0], "a predicate name")
    pred = schema_preds.get(head.text)
    if pred is None:
        raise UnknownPredicateError(f"unknown predicate '{head.text}'", head.line, head.col)
    args = [_expect_atom(e, "a parameter") for e in lst[1:]]
    if len(args) != len(pred.param_types):
        raise ArityMismatchError(
            f"'{pred.name}' takes {len(pred.param_types)} arguments, got {len(args)}",
            head.line, head.col)
    for tok, want in zip(args, pred.param_types):
        got = param_types.get(tok.text)
        if got is None:
            raise ParseError(f"'{tok.text}' is not a declared parameter", tok.line, tok.col,
                             expected="a ?parameter")
        if got != want:
            raise TypeMismatchError(
                f"'{tok.text}' has type {got}, '{pred.name}' wants {want}", tok.line, tok.col)
    return (head.text, tuple(t.text for t in args))


def _parse_conjunction(expr) -> list:
    """Return the conjuncts of (and ...), or the single expression itself."""
    lst = _expect_list(expr, "a condition")
    if lst and isinstance(lst[0], _Tok) and lst[0].text == "and":
        return list(lst[1:])
    return [lst]


def _parse_action(expr: _SList, types: tuple[str, ...],
                  schema_preds: dict[str, PredicateSchema]) -> ActionSchema:
    body = list(expr[1:])
    name = _expect_atom(body.pop(0), "an action name").text
    fields: dict[str, object] = {}
    while body:
        key = _expect_atom(body.pop(0), "a field keyword")
        if key.text not in (":parameters", ":precondition", ":effect"):
            raise ParseError(f"unknown field '{key.text}'", key.line, key.col,
                             expected=":parameters, :precondition or :effect")
        if not body:
            raise ParseError(f"'{key.text}' has no value", key.line, key.col, expected="a value")
        fields[key.text] = body.pop(0)
    for needed in (":parameters", ":precondition", ":effect"):
        if needed not in fields:
            raise ParseError(f"action '{name}' lacks {needed}", *_where(expr), expected=needed)

    plist = _parse_typed_list(list(_expect_list(fields[":parameters"], "a parameter list")),
                              types, expr)
    params = tuple(p for p, _ in plist)
    param_types = {p: t for p, t in plist}
    if len(params) != len(param_types):
        raise ParseError(f"duplicate parameter in action '{name}'", *_where(expr),
                         expected="distinct parameters")

    pre: list[Atom] = []
    neq: list[tuple[str, str]] = []
    for conj in _parse_conjunction(fields[":precondition"]):
        lst = _expect_list(conj, "an atom")
        if lst and isinstance(lst[0], _Tok) and lst[0].text == "neq":
            args = [_expect_atom(e, "a parameter") for e in lst[1:]]
            if len(args) != 2:
                raise ArityMismatchError("'neq' takes 2 arguments", lst[0].line, lst[0].col)
            for a in args:
                if a.text not in param_types:
                    raise ParseError(f"'{a.text}' is not a declared parameter", a.line, a.col,
                                     expected="a ?parameter")
            neq.append((args[0].text, args[1].text))
        else:
            pre.append(_parse_schema_atom(conj, schema_preds, param_types))

    add: list[Atom] = []
    delete: list[Atom] = []
    for conj in _parse_conjunction(fields[":effect"]):
        lst = _expect_list(conj, "a literal")
        if lst and isinstance(lst[0], _Tok) and lst[0].text == "not":
            if len(lst) != 2:
                raise ParseError("'not' takes one atom", lst[0].line, lst[0].col,
                                 expected="(not (atom ...))")
            delete.append(_parse_schema_atom(lst[1], schema_preds, param_types))
        else:
            add.append(_parse_schema_atom(conj, schema_preds, param_types))
    both = set(add) & set(delete)
    if both:
        raise ParseError(f"action '{name}' adds and deletes {sorted(both)}", *_where(expr),
                         expected="disjoint add and delete sets")
    return ActionSchema(name, params, tuple(param_types[p] for p in params),
                        tuple(pre), tuple(add), tuple(delete), tuple(neq))


def parse_domain(text: str) -> DomainSchema:
    """Parse a domain file into a schema; errors carry line and column."""
    exprs = _read_exprs(text)
    top = _expect_list(exprs[0], "(define ...)")
    if not top or not isinstance(top[0], _Tok) or top[0].text != "define":
        raise ParseError("not a define form", *_where(top), expected="(define (domain ...) ...)")
    name = _parse_header(top[1], "domain")
    body = list(top[2:])

    types: tuple[str, ...] = ()
    predicates: list[PredicateSchema] = []
    actions: list[ActionSchema] = []
    seen_types = False
    for section in body:
        lst = _expect_list(section, "a domain section")
        if not lst:
            raise ParseError("empty section", *_where(lst), expected="(:types ...) etc.")
        head = _expect_atom(lst[0], "a section keyword")
        if head.text == ":types":
            types = tuple(_expect_atom(e, "a type name").text for e in lst[1:])
            if len(set(types)) != len(types):
                raise ParseError("duplicate type", head.line, head.col, expected="distinct types")
            seen_types = True
        elif head.text == ":predicates":
            if not seen_types:
                raise ParseError("(:predicates ...) before (:types ...)", head.line, head.col,
                                 expected="(:types ...) first")
            for p in lst[1:]:
                plst = _expect_list(p, "a predicate declaration")
                pname = _expect_atom(plst[0], "a predicate name")
                typed = _parse_typed_list(list(plst[1:]), types, plst)
                if pname.text in {q.name for q in predicates}:
                    raise ParseError(f"duplicate predicate '{pname.text}'", pname.line, pname.col,
                                     expected="distinct predicates")
                predicates.append(PredicateSchema(pname.text, tuple(t for _, t in typed)))
        elif head.text == ":action":
            pred_map = {p.name: p for p in predicates}
            actions.append(_parse_action(lst, types, pred_map))
        else:
            raise ParseError(f"unknown section '{head.text}'", head.line, head.col,
                             expected=":types, :predicates or :action")
    return DomainSchema(name, types, tuple(predicates), tuple(actions))


# ── Problem parsing ────────────────────────────────────────────────────────


def _parse_ground_atom(expr, schema: DomainSchema, objects: dict[str, str]) -> Atom:
    lst = _expect_list(expr, "an atom")
    if not lst:
        raise ParseError("empty atom", *_where(lst), expected="(predicate args...)")
    head = _expect_atom(lst[0], "a predicate name")
    pred = schema.predicate_map.get(head.text)
    if pred is None:
        raise UnknownPredicateError(f"unknown predicate '{head.text}'", head.line, head.col)
    args = [_expect_atom(e, "a constant") for e in lst[1:]]
    if len(args) != len(pred.param_types):
        raise ArityMismatchError(
            f"'{pred.name}' takes {len(pred.param_types)} arguments, got {len(args)}",
            head.line, head.col)
    for tok, want in zip(args, pred.param_types):
        got = objects.get(tok.text)
        if got is None:
            raise UndeclaredConstantError(f"undeclared constant '{tok.text}'", tok.line, tok.col)
        if got != want:
            raise TypeMismatchError(
                f"'{tok.text}' has type {got}, '{pred.name}' wants {want}", tok.line, tok.col)
    return (head.text, tuple(t.text for t in args))


def parse_problem(text: str, schema: DomainSchema) -> ProblemSpec:
    """Parse a problem-instance file against an already-parsed domain."""
    exprs = _read_exprs(text)
    top = _expect_list(exprs[0], "(define ...)")
    if not top or not isinstance(top[0], _Tok) or top[0].text != "define":
        raise ParseError("not a define form", *_where(top), expected="(define (problem ...) ...)")
    name = _parse_header(top[1], "problem")

    domain_name: str | None = None
    objects: dict[str, str] = {}
    init: list[Atom] = []
    hypotheses: list[tuple[float, tuple[Atom, ...]]] = []
    true_goal: Optional[int] = None

    for section in top[2:]:
        lst = _expect_list(section, "a problem section")
        head = _expect_atom(lst[0], "a section keyword")
        if head.text == ":domain":
            domain_name = _expect_atom(lst[1], "a domain name").text
            if domain_name != schema.name:
                raise ParseError(f"problem is for domain '{domain_name}', not '{schema.name}'",
                                 head.line, head.col, expected=f"'{schema.name}'")
        elif head.text == ":objects":
            for const, ty in _parse_typed_list(list(lst[1:]), schema.types, lst):
                if const in objects:
                    raise ParseError(f"duplicate object '{const}'", head.line, head.col,
                                     expected="distinct objects")
                objects[const] = ty
        elif head.text == ":init":
            init = [_parse_ground_atom(e, schema, objects) for e in lst[1:]]
        elif head.text == ":hypothesis":
            if len(lst) < 3:
                raise ParseError("hypothesis needs a prior and at least one atom",
                                 head.line, head.col, expected="(:hypothesis PRIOR atom+)")
            prior_tok = _expect_atom(lst[1], "a prior weight")
            try:
                prior = float(prior_tok.text)
            except ValueError:
                raise ParseError(f"bad prior '{prior_tok.text}'", prior_tok.line, prior_tok.col,
                                 expected="a number") from None
            facts = tuple(_parse_ground_atom(e, schema, objects) for e in lst[2:])
            hypotheses.append((prior, facts))
        elif head.text == ":true-goal":
            tok = _expect_atom(lst[1], "an index")
            try:
                true_goal = int(tok.text)
            except ValueError:
                raise ParseError(f"bad index '{tok.text}'", tok.line, tok.col,
                                 expected="an integer") from None
        else:
            raise ParseError(f"unknown section '{head.text}'", head.line, head.col,
                             expected=":domain, :objects, :init, :hypothesis or :true-goal")
    if domain_name is None:
        raise ParseError("problem lacks (:domain ...)", *_where(top), expected="(:domain <name>)")
    return ProblemSpec(name, domain_name, tuple(sorted(objects.items())), tuple(init),
                       tuple(hypotheses), true_goal)


# ── Pretty-printing ────────────────────────────────────────────────────────


def _fmt_typed(names: Iterable[str], types: Iterable[str]) -> str:
    return " ".join(f"{n} - {t}" for n, t in zip(names, types))


def _fmt_atom(atom: Atom) -> str:
    pred, args = atom
    return "(" + " ".join((pred,) + args) + ")"


def format_domain(schema: DomainSchema) -> str:
    """Render a schema back to canonical model-language text."""
    lines = [f"(define (domain {schema.name})"]
    lines.append(f"  (:types {' '.join(schema.types)})")
    lines.append("  (:predicates")
    for p in schema.predicates:
        vars_ = tuple(f"?v{i}" for i in range(len(p.param_types)))
        inner = (" " + _fmt_typed(vars_, p.param_types)) if vars_ else ""
        lines.append(f"    ({p.name}{inner})")
    lines.append("  )")
    for a in schema.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_fmt_typed(a.params, a.param_types)})")
        pre = [_fmt_atom(x) for x in a.pre] + [f"(neq {x} {y})" for x, y in a.neq]
        lines.append(f"    :precondition (and {' '.join(pre)})")
        eff = [_fmt_atom(x) for x in a.add] + [f"(not {_fmt_atom(x)})" for x in a.delete]
        lines.append(f"    :effect (and {' '.join(eff)}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def format_problem(problem: ProblemSpec) -> str:
    lines = [f"(define (problem {problem.name})", f"  (:domain {problem.domain})"]
    lines.append(f"  (:objects {' '.join(f'{c} - {t}' for c, t in problem.objects)})")
    lines.append("  (:init " + " ".join(_fmt_atom(a) for a in problem.init) + ")")
    for prior, facts in problem.hypotheses:
        lines.append(f"  (:hypothesis {prior!r} " + " ".join(_fmt_atom(a) for a in facts) + ")")
    if problem.true_goal is not None:
        lines.append(f"  (:true-goal {problem.true_goal})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# ── Grounding ──────────────────────────────────────────────────────────────


def _instantiate(atom: Atom, binding: dict[str, str]) -> Atom:
    pred, args = atom
    return (pred, tuple(binding.get(a, a) for a in args))


def _relaxed_fixpoint(init_atoms: set[Atom], actions: list[tuple]) -> list[bool]:
    """Delete-relaxed forward reachability over not-yet-numbered atoms.

    `actions` rows are (name, args, pre, add, delete); returns per-row
    applicability under the relaxation.
    """
    reached = set(init_atoms)
    consumers: dict[Atom, list[int]] = {}
    unsat = []
    applicable = [False] * len(actions)
    queue: list[Atom] = []
    for idx, (_, _, pre, add, _) in enumerate(actions):
        missing = [p for p in pre if p not in reached]
        unsat.append(len(missing))
        for p in set(missing):
            consumers.setdefault(p, []).append(idx)
        if not missing:
            applicable[idx] = True
            for g in add:
                if g not in reached:
                    reached.add(g)
                    queue.append(g)
    # Duplicate preconditions cannot occur (pre is a set by construction),
    # so one decrement per consumer entry is safe.
    while queue:
        f = queue.pop()
        for idx in consumers.get(f, ()):
            unsat[idx] -= 1
            if unsat[idx] == 0:
                applicable[idx] = True
                for g in actions[idx][3]:
                    if g not in reached:
                        reached.add(g)
                        queue.append(g)
    return applicable


def ground(schema: DomainSchema, problem: ProblemSpec, *,
           prune_unreachable: bool = True) -> GroundTask:
    """Ground a schema against a problem instance.

    Produces every type-consistent ground action, drops those whose static
    preconditions fail in the initial state, and (by default) prunes actions
    unreachable under delete relaxation.  Fact and action ids are assigned
    lexicographically, so grounding is deterministic.
    """
    if problem.domain != schema.name:
        raise ValueError(f"problem targets domain '{problem.domain}', schema is '{schema.name}'")
    if not problem.hypotheses:
        raise EmptyHypothesisSetError(f"problem '{problem.name}' declares no hypotheses")

    by_type: dict[str, list[str]] = {}
    for const, ty in problem.objects:
        by_type.setdefault(ty, []).append(const)
    for consts in by_type.values():
        consts.sort()

    # Predicates never added or deleted are static: their ground atoms are
    # decided by init alone, so failed static preconditions kill a binding.
    dynamic = {p for a in schema.actions for p, _ in a.add + a.delete}
    init_atoms = set(problem.init)

    rows: list[tuple] = []  # (name, args, pre, add, delete) with atom sets
    for act in schema.actions:
        pools = [by_type.get(t, []) for t in act.param_types]
        for combo in itertools.product(*pools):
            binding = dict(zip(act.params, combo))
            if any(binding[x] == binding[y] for x, y in act.neq):
                continue
            pre = {_instantiate(a, binding) for a in act.pre}
            if any(a[0] not in dynamic and a not in init_atoms for a in pre):
                continue
            add = {_instantiate(a, binding) for a in act.add}
            delete = {_instantiate(a, binding) for a in act.delete}
            overlap = add & delete
            if overlap:
                raise ValueError(f"ground action {act.name}{combo} adds and deletes {sorted(overlap)}")
            rows.append((act.name, combo, pre, add, delete))

    if prune_unreachable:
        keep = _relaxed_fixpoint(init_atoms, rows)
        rows = [r for r, k in zip(rows, keep) if k]

    atoms: set[Atom] = set(init_atoms)
    for _, _, pre, add, delete in rows:
        atoms |= pre | add | delete
    for _, facts in problem.hypotheses:
        atoms.update(facts)

    facts = tuple(Fact(p, args, i) for i, (p, args) in enumerate(sorted(atoms)))
    fid = {(f.predicate, f.args): f.id for f in facts}

    rows.sort(key=lambda r: (r[0], r[1]))
    actions = tuple(
        GroundAction(name, args,
                     frozenset(fid[a] for a in pre),
                     frozenset(fid[a] for a in add),
                     frozenset(fid[a] for a in delete), i)
        for i, (name, args, pre, add, delete) in enumerate(rows))

    hypotheses = tuple(GoalHypothesis(frozenset(fid[a] for a in hfacts), prior)
                       for prior, hfacts in problem.hypotheses)
    init = frozenset(fid[a] for a in init_atoms)
    return GroundTask(facts, actions, init, hypotheses, problem.true_goal)
