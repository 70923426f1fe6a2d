"""Shared fixtures: hand-written model text and hand-assembled tiny tasks."""

from __future__ import annotations

import pytest

from goalrec import (
    Fact,
    GoalHypothesis,
    GroundAction,
    GroundTask,
    ground,
    parse_domain,
    parse_problem,
)

# A three-block stacking world written out by hand for the parser and the
# planners; deliberately not imported from the package's generators.
BLOCKS_DOMAIN = """\
(define (domain stacking)
  (:types block)
  (:predicates
    (on ?x - block ?y - block)
    (ontable ?x - block)
    (clear ?x - block)
    (holding ?x - block)
    (handempty))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (clear ?x)) (not (ontable ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x - block)
    :precondition (and (holding ?x))
    :effect (and (clear ?x) (ontable ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y) (neq ?x ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty) (neq ?x ?y))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty))))
)
"""

BLOCKS3_PROBLEM = """\
(define (problem three-on-table)
  (:domain stacking)
  (:objects a - block b - block c - block)
  (:init (handempty) (clear a) (clear b) (clear c) (ontable a) (ontable b) (ontable c))
  (:hypothesis 0.5 (on a b))
  (:hypothesis 0.5 (on b a))
  (:true-goal 0)
)
"""


def build_task(domain_text: str, problem_text: str, **kwargs) -> GroundTask:
    schema = parse_domain(domain_text)
    return ground(schema, parse_problem(problem_text, schema), **kwargs)


def make_task(fact_sigs, action_rows, init, hyps, true_goal=None) -> GroundTask:
    """Assemble a GroundTask from signature strings and id-index sets.

    `fact_sigs` are "pred arg1 arg2" strings whose position fixes the id;
    `action_rows` are (signature, pre_ids, add_ids, del_ids); `hyps` are
    (fact_ids, prior) pairs.
    """
    facts = []
    for i, sig in enumerate(fact_sigs):
        parts = sig.split()
        facts.append(Fact(parts[0], tuple(parts[1:]), i))
    actions = []
    for i, (sig, pre, add, dele) in enumerate(action_rows):
        parts = sig.split()
        actions.append(GroundAction(parts[0], tuple(parts[1:]), frozenset(pre),
                                    frozenset(add), frozenset(dele), i))
    hypotheses = tuple(GoalHypothesis(frozenset(f), p) for f, p in hyps)
    return GroundTask(tuple(facts), tuple(actions), frozenset(init), hypotheses, true_goal)


@pytest.fixture(scope="session")
def blocks3() -> GroundTask:
    """Three blocks on the table; hypotheses on-a-b vs on-b-a."""
    return build_task(BLOCKS_DOMAIN, BLOCKS3_PROBLEM)


@pytest.fixture(scope="session")
def chain_task() -> GroundTask:
    """Two-action chain from an empty state: a1 adds f1, a2 needs f1, adds f2."""
    return make_task(
        ["f1 x", "f2 x"],
        [("a1 x", (), (0,), ()), ("a2 x", (0,), (1,), ())],
        init=(),
        hyps=[((1,), 1.0)],
        true_goal=0,
    )
