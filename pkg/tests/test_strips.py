"""Model-language parsing, grounding, and state-transition semantics."""

from __future__ import annotations

import pytest

from goalrec import (
    GoalHypothesis,
    ProblemSpec,
    apply,
    format_domain,
    format_problem,
    ground,
    holds,
    parse_domain,
    parse_problem,
)
from goalrec.errors import (
    ArityMismatchError,
    EmptyHypothesisSetError,
    ModelError,
    NotApplicableError,
    ParseError,
    TypeMismatchError,
    UndeclaredConstantError,
    UnknownPredicateError,
    UnknownTypeError,
)

from conftest import BLOCKS3_PROBLEM, BLOCKS_DOMAIN, build_task, make_task

EXPECTED_FACTS = [
    "clear a", "clear b", "clear c", "handempty",
    "holding a", "holding b", "holding c",
    "on a b", "on a c", "on b a", "on b c", "on c a", "on c b",
    "ontable a", "ontable b", "ontable c",
]

EXPECTED_ACTIONS = [
    "pick-up a", "pick-up b", "pick-up c",
    "put-down a", "put-down b", "put-down c",
    "stack a b", "stack a c", "stack b a", "stack b c", "stack c a", "stack c b",
    "unstack a b", "unstack a c", "unstack b a", "unstack b c", "unstack c a", "unstack c b",
]

# Statics exercise: `link` is never added or deleted, so only bindings whose
# link atom sits in init survive grounding; `spread n4 n1` additionally needs
# the unreachable fact `lit n4` and is dropped by relaxed-reachability pruning.
WIRES_DOMAIN = """\
(define (domain wires)
  (:types node)
  (:predicates (link ?x - node ?y - node) (lit ?x - node))
  (:action spread
    :parameters (?x - node ?y - node)
    :precondition (and (lit ?x) (link ?x ?y))
    :effect (and (lit ?y)))
)
"""

WIRES_PROBLEM = """\
(define (problem wires-1)
  (:domain wires)
  (:objects n1 - node n2 - node n3 - node n4 - node)
  (:init (lit n1) (link n1 n2) (link n2 n3) (link n4 n1))
  (:hypothesis 1.0 (lit n3))
  (:true-goal 0)
)
"""


# ── Parsing ────────────────────────────────────────────────────────────────


def test_parse_domain_shapes():
    schema = parse_domain(BLOCKS_DOMAIN)
    assert schema.name == "stacking"
    assert schema.types == ("block",)
    assert len(schema.actions) == 4
    assert [a.name for a in schema.actions] == ["pick-up", "put-down", "stack", "unstack"]
    assert {p.name for p in schema.predicates} == {"on", "ontable", "clear", "holding", "handempty"}
    stack = next(a for a in schema.actions if a.name == "stack")
    assert stack.neq == (("?x", "?y"),)


def test_parse_reports_position_on_syntax_error():
    with pytest.raises(ParseError) as err:
        parse_domain("(define (domain broken)\n  (:types block\n")
    assert err.value.line >= 1 and err.value.col >= 1


def test_parse_rejects_undeclared_predicate():
    bad = BLOCKS_DOMAIN.replace("(clear ?x) (ontable ?x)", "(levitating ?x) (ontable ?x)", 1)
    with pytest.raises(UnknownPredicateError):
        parse_domain(bad)


def test_parse_rejects_arity_mismatch():
    bad = BLOCKS_DOMAIN.replace("(:action pick-up", "(:action nonsense\n"
                                "    :parameters (?x - block)\n"
                                "    :precondition (and (on ?x))\n"
                                "    :effect (and (holding ?x)))\n"
                                "  (:action pick-up", 1)
    with pytest.raises(ArityMismatchError):
        parse_domain(bad)


def test_parse_rejects_unknown_type():
    bad = BLOCKS3_PROBLEM.replace("a - block", "a - widget", 1)
    with pytest.raises(UnknownTypeError):
        parse_problem(bad, parse_domain(BLOCKS_DOMAIN))


def test_parse_rejects_undeclared_constant():
    bad = BLOCKS3_PROBLEM.replace("(ontable c)", "(ontable zz)", 1)
    with pytest.raises(UndeclaredConstantError):
        parse_problem(bad, parse_domain(BLOCKS_DOMAIN))


def test_model_errors_carry_positions():
    cases = [
        "(define (domain broken)\n  (:types block\n",
        BLOCKS_DOMAIN.replace("(holding ?x))", "(hovering ?x))", 1),
    ]
    for text in cases:
        with pytest.raises(ModelError) as err:
            parse_domain(text)
        assert isinstance(err.value.line, int) and isinstance(err.value.col, int)
        assert f"{err.value.line}:{err.value.col}:" in str(err.value)


def test_domain_round_trip():
    schema = parse_domain(BLOCKS_DOMAIN)
    assert parse_domain(format_domain(schema)) == schema


def test_problem_round_trip():
    schema = parse_domain(BLOCKS_DOMAIN)
    problem = parse_problem(BLOCKS3_PROBLEM, schema)
    assert parse_problem(format_problem(problem), schema) == problem


# ── Grounding ──────────────────────────────────────────────────────────────


def test_ground_three_blocks_enumerates_18_actions(blocks3):
    unpruned = build_task(BLOCKS_DOMAIN, BLOCKS3_PROBLEM, prune_unreachable=False)
    assert [a.signature for a in unpruned.actions] == EXPECTED_ACTIONS
    # From all-on-table every instantiation stays relaxed-reachable.
    assert [a.signature for a in blocks3.actions] == EXPECTED_ACTIONS


def test_ground_fact_ids_are_lexicographic(blocks3):
    assert [f.signature for f in blocks3.facts] == EXPECTED_FACTS
    assert [f.id for f in blocks3.facts] == list(range(16))
    assert [a.id for a in blocks3.actions] == list(range(18))


def test_grounding_is_deterministic():
    first = build_task(BLOCKS_DOMAIN, BLOCKS3_PROBLEM)
    second = build_task(BLOCKS_DOMAIN, BLOCKS3_PROBLEM)
    assert first == second


def test_neq_excludes_self_pairs(blocks3):
    signatures = {a.signature for a in blocks3.actions}
    for x in "abc":
        assert f"stack {x} {x}" not in signatures
        assert f"unstack {x} {x}" not in signatures


def test_static_preconditions_filter_bindings():
    pruned = build_task(WIRES_DOMAIN, WIRES_PROBLEM)
    assert [a.signature for a in pruned.actions] == ["spread n1 n2", "spread n2 n3"]
    unpruned = build_task(WIRES_DOMAIN, WIRES_PROBLEM, prune_unreachable=False)
    assert [a.signature for a in unpruned.actions] == \
        ["spread n1 n2", "spread n2 n3", "spread n4 n1"]
    # The static atoms stay in the fact universe (they are part of init).
    statics = {f.signature for f in pruned.facts if f.predicate == "link"}
    assert statics == {"link n1 n2", "link n2 n3", "link n4 n1"}


def test_ground_rejects_empty_hypothesis_set():
    schema = parse_domain(WIRES_DOMAIN)
    problem = parse_problem(WIRES_PROBLEM, schema)
    stripped = ProblemSpec(problem.name, problem.domain, problem.objects,
                           problem.init, hypotheses=())
    with pytest.raises(EmptyHypothesisSetError):
        ground(schema, stripped)


def test_priors_normalize_to_one(blocks3):
    task = make_task(["p x", "q x"], [("a x", (), (0,), ())], init=(),
                     hyps=[((0,), 3.0), ((1,), 1.0)])
    assert abs(sum(h.prior for h in task.hypotheses) - 1.0) < 1e-9
    assert task.hypotheses[0].prior == pytest.approx(0.75)
    assert abs(sum(h.prior for h in blocks3.hypotheses) - 1.0) < 1e-9


def test_overlapping_hypotheses_share_facts():
    task = make_task(
        ["p1 x", "p2 x", "p3 x"],
        [("a x", (), (0, 1, 2), ())],
        init=(),
        hyps=[((0, 2), 0.5), ((0, 1), 0.5)],
    )
    shared = task.hypotheses[0].facts & task.hypotheses[1].facts
    assert shared == {0}


def test_task_invariants_reject_bad_structure():
    with pytest.raises(ValueError):
        make_task(["p x"], [("a x", (), (0,), (0,))], init=(), hyps=[((0,), 1.0)])
    with pytest.raises(ValueError):
        make_task(["p x"], [("a x", (), (5,), ())], init=(), hyps=[((0,), 1.0)])
    with pytest.raises(ValueError):
        GoalHypothesis(frozenset(), 1.0)
    with pytest.raises(ValueError):
        GoalHypothesis(frozenset({0}), -0.2)


# ── Semantics ──────────────────────────────────────────────────────────────


def test_apply_pick_up(blocks3):
    s = blocks3.init
    after = apply(blocks3, s, blocks3.action_id("pick-up a"))
    assert blocks3.fact_id("holding", "a") in after
    for gone in ("clear", "ontable"):
        assert blocks3.fact_id(gone, "a") not in after
    assert blocks3.fact_id("handempty") not in after
    # Untouched facts survive; the input state is unchanged.
    assert blocks3.fact_id("clear", "b") in after
    assert s == blocks3.init


def test_apply_empty_effects_is_identity():
    task = make_task(["p x"], [("noop x", (0,), (), ())], init=(0,), hyps=[((0,), 1.0)])
    assert apply(task, task.init, 0) == task.init


def test_apply_rejects_missing_preconditions(blocks3):
    holding = apply(blocks3, blocks3.init, blocks3.action_id("pick-up a"))
    with pytest.raises(NotApplicableError) as err:
        apply(blocks3, holding, blocks3.action_id("pick-up a"))
    missing = {blocks3.facts[f].signature for f in err.value.missing}
    assert missing == {"clear a", "ontable a", "handempty"}


def test_add_effects_hold_after_apply(blocks3):
    state = blocks3.init
    for signature in ("pick-up a", "stack a b", "unstack a b", "put-down a"):
        aid = blocks3.action_id(signature)
        state = apply(blocks3, state, aid)
        for f in blocks3.actions[aid].add:
            assert holds(state, {f})


def test_holds_is_subset_semantics(blocks3):
    s = blocks3.init
    assert holds(s, {blocks3.fact_id("clear", "a")})
    assert holds(s, blocks3.init)
    assert not holds(s, {blocks3.fact_id("holding", "a")})
    assert not holds(s, {blocks3.fact_id("clear", "a"), blocks3.fact_id("holding", "a")})
    assert not holds(s, blocks3.hypotheses[0])
