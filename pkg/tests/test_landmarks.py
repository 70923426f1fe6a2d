"""Landmark extraction, prefix replay, and the soundness oracle."""

from __future__ import annotations

import random

import pytest

from goalrec import (
    GeneratorConfig,
    ObservationTrace,
    achieved_landmarks,
    dump_landmark_graph,
    extract_landmarks,
    gbfs_plan,
    replay_prefix,
)
from goalrec.domains import gen_grid
from goalrec.errors import BrokenPrefixError, UnreachableGoalError

from conftest import BLOCKS_DOMAIN, build_task, make_task
from oracles import enumerate_plans, exists_plan_avoiding, shortest_plan_len

TWO_BLOCK_INITS = {
    "table": "(handempty) (clear a) (clear b) (ontable a) (ontable b)",
    "a-on-b": "(handempty) (clear a) (on a b) (ontable b)",
    "b-on-a": "(handempty) (clear b) (on b a) (ontable a)",
}

TWO_BLOCK_ATOMS = [
    "(clear a)", "(clear b)", "(handempty)", "(holding a)", "(holding b)",
    "(on a b)", "(on b a)", "(ontable a)", "(ontable b)",
]


def two_block_task(init_key: str, goal_atoms) -> "GroundTask":
    problem = (
        "(define (problem two-blocks)\n"
        "  (:domain stacking)\n"
        "  (:objects a - block b - block)\n"
        f"  (:init {TWO_BLOCK_INITS[init_key]})\n"
        f"  (:hypothesis 1.0 {' '.join(goal_atoms)})\n"
        "  (:true-goal 0)\n)\n"
    )
    return build_task(BLOCKS_DOMAIN, problem, prune_unreachable=False)


def soundness_sweep(n_instances: int, seed: int, plan_bound: int = 8):
    """Extract landmarks on random small tasks and cross-check each non-trivial
    one against exhaustive avoiding-plan search.  Returns (checked, violations).
    """
    rng = random.Random(seed)
    checked = 0
    violations = []
    produced = 0
    while produced < n_instances:
        init_key = rng.choice(list(TWO_BLOCK_INITS))
        goal_atoms = rng.sample(TWO_BLOCK_ATOMS, rng.randint(1, 2))
        task = two_block_task(init_key, goal_atoms)
        assert len(task.facts) <= 12
        goal = task.hypotheses[0].facts
        if shortest_plan_len(task, goal, cap=plan_bound) is None:
            continue  # keep the exhaustive check non-vacuous
        produced += 1
        graph = extract_landmarks(task, 0)
        for fact in graph.landmarks - graph.trivial:
            checked += 1
            if exists_plan_avoiding(task, goal, fact, plan_bound):
                violations.append((init_key, goal_atoms, task.facts[fact].signature))
    return checked, violations


# ── Extraction ─────────────────────────────────────────────────────────────


def test_goal_inside_init_is_all_trivial():
    task = two_block_task("table", ["(ontable a)", "(clear b)"])
    graph = extract_landmarks(task, 0)
    assert graph.landmarks == task.hypotheses[0].facts
    assert graph.trivial == graph.landmarks


def test_holding_a_is_a_landmark_of_on_a_b(blocks3):
    graph = extract_landmarks(blocks3, 0)
    holding_a = blocks3.fact_id("holding", "a")
    on_a_b = blocks3.fact_id("on", "a", "b")
    nontrivial = graph.landmarks - graph.trivial
    assert holding_a in nontrivial
    assert on_a_b in nontrivial
    # Exhaustive confirmation: every plan up to length 6 passes through it.
    goal = blocks3.hypotheses[0].facts
    plans = enumerate_plans(blocks3, goal, 6)
    assert plans
    for actions in plans:
        state = blocks3.init
        seen = holding_a in state
        for aid in actions:
            a = blocks3.actions[aid]
            state = (state - a.delete) | a.add
            seen = seen or holding_a in state
        assert seen


def test_goal_facts_are_always_landmarks(blocks3):
    for h in range(2):
        graph = extract_landmarks(blocks3, h)
        assert blocks3.hypotheses[h].facts <= graph.landmarks
        for g in blocks3.hypotheses[h].facts:
            assert g in graph.per_subgoal[g]
        assert frozenset().union(*graph.per_subgoal.values()) == graph.landmarks
        assert graph.trivial == graph.landmarks & blocks3.init


def test_orderings_are_acyclic(blocks3):
    for h in range(2):
        graph = extract_landmarks(blocks3, h)
        outgoing = {}
        for a, b in graph.orderings:
            outgoing.setdefault(a, set()).add(b)
        # Kahn-style peeling; a leftover edge means a cycle.
        nodes = set(outgoing) | {b for bs in outgoing.values() for b in bs}
        indeg = {n: 0 for n in nodes}
        for bs in outgoing.values():
            for b in bs:
                indeg[b] += 1
        queue = [n for n in nodes if indeg[n] == 0]
        seen = 0
        while queue:
            n = queue.pop()
            seen += 1
            for b in outgoing.get(n, ()):
                indeg[b] -= 1
                if indeg[b] == 0:
                    queue.append(b)
        assert seen == len(nodes)


def test_extraction_is_deterministic(blocks3):
    assert extract_landmarks(blocks3, 0) == extract_landmarks(blocks3, 0)


def test_unreachable_hypothesis_is_rejected():
    task = make_task(["p x", "orphan x"], [("a x", (), (0,), ())],
                     init=(), hyps=[((0,), 0.5), ((1,), 0.5)])
    assert extract_landmarks(task, 0).landmarks == frozenset({0})
    with pytest.raises(UnreachableGoalError):
        extract_landmarks(task, 1)


def test_soundness_on_random_small_instances():
    checked, violations = soundness_sweep(12, seed=5)
    assert checked > 0
    assert violations == []


def test_grid_set1_landmarks_are_uninformative():
    # Both far-corner goals reduce to a single non-trivial landmark — the
    # goal cell itself — so completion scores cannot separate them early.
    task = gen_grid(GeneratorConfig("grid", 1, 0, 0.3), n_locks=0, n_keys=1)
    nontrivial = [extract_landmarks(task, h).landmarks - extract_landmarks(task, h).trivial
                  for h in range(2)]
    assert nontrivial[0] == task.hypotheses[0].facts
    assert nontrivial[1] == task.hypotheses[1].facts


# ── Replay and achievement ─────────────────────────────────────────────────


def test_replay_returns_every_visited_state(blocks3):
    pick_a = blocks3.action_id("pick-up a")
    stack_a_b = blocks3.action_id("stack a b")
    states = replay_prefix(blocks3, ObservationTrace((pick_a, stack_a_b), 0))
    assert len(states) == 3
    assert states[0] == blocks3.init
    assert blocks3.fact_id("holding", "a") in states[1]
    assert blocks3.fact_id("on", "a", "b") in states[2]


def test_replay_rejects_broken_prefixes(blocks3):
    stack_a_b = blocks3.action_id("stack a b")
    pick_a = blocks3.action_id("pick-up a")
    with pytest.raises(BrokenPrefixError) as err:
        replay_prefix(blocks3, ObservationTrace((stack_a_b,), 0))
    assert err.value.step == 0
    with pytest.raises(BrokenPrefixError) as err:
        replay_prefix(blocks3, ObservationTrace((pick_a, pick_a), 0))
    assert err.value.step == 1
    with pytest.raises(BrokenPrefixError):
        achieved_landmarks(blocks3, extract_landmarks(blocks3, 0),
                           ObservationTrace((stack_a_b,), 0))


def test_single_pickup_achieves_exactly_holding_a(blocks3):
    graph = extract_landmarks(blocks3, 0)
    trace = ObservationTrace((blocks3.action_id("pick-up a"),), 0)
    achieved = achieved_landmarks(blocks3, graph, trace)
    assert achieved == frozenset({blocks3.fact_id("holding", "a")})


def test_untouched_landmarks_stay_unachieved(blocks3):
    graph = extract_landmarks(blocks3, 0)
    trace = ObservationTrace((blocks3.action_id("pick-up c"),), 0)
    assert achieved_landmarks(blocks3, graph, trace) == frozenset()


def test_full_plan_achieves_every_nontrivial_landmark(blocks3):
    for h in range(2):
        graph = extract_landmarks(blocks3, h)
        plan = gbfs_plan(blocks3, blocks3.hypotheses[h], seed=1, noise=1.0)
        trace = ObservationTrace(plan.actions, h)
        assert achieved_landmarks(blocks3, graph, trace) == graph.landmarks - graph.trivial


def test_achievement_grows_monotonically_with_prefix_length(blocks3):
    graph = extract_landmarks(blocks3, 0)
    plan = gbfs_plan(blocks3, blocks3.hypotheses[0], seed=2, noise=1.0)
    previous = frozenset()
    for k in range(1, len(plan.actions) + 1):
        current = achieved_landmarks(blocks3, graph, ObservationTrace(plan.actions[:k], 0))
        assert previous <= current
        previous = current


def test_dump_lists_every_landmark_and_ordering(blocks3):
    graph = extract_landmarks(blocks3, 0)
    text = dump_landmark_graph(blocks3, graph)
    assert text.startswith("goal 0\n")
    for f in graph.landmarks:
        assert blocks3.facts[f].signature in text
    assert text.count("\norder ") == len(graph.orderings)
    assert text.count("subgoal ") == len(graph.per_subgoal)
