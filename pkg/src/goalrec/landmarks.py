"""Fact-landmark extraction by relaxed-planning-graph back-chaining.

Starting from each goal fact, candidates are grown as the shared
preconditions of all earliest achievers of an already-known landmark, and
each candidate is kept only if it passes a necessity check: with every
action that adds the candidate removed, the goal must become unreachable
even under delete relaxation.  Landmarks already true in the initial state
are flagged trivial; recognition scoring ignores them.  Every ordering
edge points from a strictly earlier relaxed level to a later one, so the
ordering relation is acyclic by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BrokenPrefixError, UnreachableGoalError
from .planner import _RelaxedExplorer
from .strips import GroundTask, ObservationTrace

INF = math.inf


@dataclass(frozen=True)
class LandmarkGraph:
    """Landmarks of one goal hypothesis inside one task.

    `per_subgoal` maps each goal fact to the landmarks supporting it (the
    goal fact itself included); `landmarks` is their union; `trivial` marks
    the members already true at init; `orderings` holds (earlier, later)
    edges discovered during back-chaining.
    """

    goal_index: int
    landmarks: frozenset[int]
    trivial: frozenset[int]
    orderings: frozenset[tuple[int, int]]
    per_subgoal: dict[int, frozenset[int]]


def _unreachable_without(explorer: _RelaxedExplorer, task: GroundTask, banned_fact: int,
                         goal_facts: frozenset[int]) -> bool:
    """True if removing every achiever of `banned_fact` breaks the goal (relaxed)."""
    reached = set(task.init)
    achievers = {a.id for a in task.actions if banned_fact in a.add}
    unsat = explorer.npre[:]
    frontier = list(reached)
    for aid in range(explorer.na):
        if unsat[aid] == 0 and aid not in achievers:
            for g in explorer.add[aid]:
                if g not in reached:
                    reached.add(g)
                    frontier.append(g)
    while frontier:
        f = frontier.pop()
        for aid in explorer.consumers[f]:
            unsat[aid] -= 1
            if unsat[aid] == 0 and aid not in achievers:
                for g in explorer.add[aid]:
                    if g not in reached:
                        reached.add(g)
                        frontier.append(g)
    return not goal_facts <= reached


def extract_landmarks(task: GroundTask, hypothesis_index: int) -> LandmarkGraph:
    """Extract the landmark graph of one hypothesis.

    Raises UnreachableGoalError when the hypothesis is not even
    delete-relaxed reachable from the initial state.
    """
    goal = task.hypotheses[hypothesis_index].facts
    explorer = _RelaxedExplorer(task)
    flevel, alevel, _, _ = explorer.run(task.init)
    if any(flevel[g] == INF for g in goal):
        raise UnreachableGoalError(
            f"hypothesis {hypothesis_index} unreachable under delete relaxation")

    achievers_of: dict[int, list[int]] = {}
    for a in task.actions:
        for f in a.add:
            achievers_of.setdefault(f, []).append(a.id)

    init = task.init
    verified: dict[int, bool] = {}

    def is_landmark(fact: int) -> bool:
        if fact in init:
            return True  # trivially true at step 0
        cached = verified.get(fact)
        if cached is None:
            cached = _unreachable_without(explorer, task, fact, goal)
            verified[fact] = cached
        return cached

    orderings: set[tuple[int, int]] = set()
    per_subgoal: dict[int, frozenset[int]] = {}
    for g in sorted(goal):
        support: set[int] = set()
        queue = [g]
        while queue:
            f = queue.pop()
            if f in support:
                continue
            support.add(f)
            if flevel[f] == 0:
                continue  # true at init: nothing earlier to chain through
            earliest = [a for a in achievers_of.get(f, ()) if alevel[a] == flevel[f] - 1]
            shared = None
            for a in earliest:
                pre = task.actions[a].pre
                shared = set(pre) if shared is None else shared & pre
                if not shared:
                    break
            for c in sorted(shared or ()):
                if c != f and is_landmark(c):
                    orderings.add((c, f))
                    if c not in support:
                        queue.append(c)
        per_subgoal[g] = frozenset(support)

    landmarks = frozenset().union(*per_subgoal.values()) if per_subgoal else frozenset()
    trivial = frozenset(f for f in landmarks if f in init)
    return LandmarkGraph(hypothesis_index, landmarks, trivial, frozenset(orderings), per_subgoal)


def replay_prefix(task: GroundTask, trace: ObservationTrace) -> list[frozenset[int]]:
    """States visited while replaying a trace from init, the start state included.

    Raises BrokenPrefixError at the first inapplicable observation.
    """
    state = task.init
    states = [state]
    for step, aid in enumerate(trace.actions):
        a = task.actions[aid]
        if not a.pre <= state:
            raise BrokenPrefixError(step)
        state = (state - a.delete) | a.add
        states.append(state)
    return states


def observed_facts(task: GroundTask, trace: ObservationTrace) -> frozenset[int]:
    """Facts true in some replayed state, or used/added by an observed action."""
    seen: set[int] = set()
    for s in replay_prefix(task, trace):
        seen |= s
    for aid in trace.actions:
        a = task.actions[aid]
        seen |= a.pre | a.add
    return frozenset(seen)


def achieved_landmarks(task: GroundTask, graph: LandmarkGraph,
                       trace: ObservationTrace) -> frozenset[int]:
    """Non-trivial landmarks witnessed by the observation prefix.

    A landmark counts as achieved when it appears in some state along the
    replayed prefix or in the preconditions or add effects of an observed
    action.  Longer prefixes can only grow this set.
    """
    nontrivial = graph.landmarks - graph.trivial
    return nontrivial & observed_facts(task, trace)


def dump_landmark_graph(task: GroundTask, graph: LandmarkGraph) -> str:
    """Line-oriented debug dump of one landmark graph."""
    lines = [f"goal {graph.goal_index}"]
    for f in sorted(graph.landmarks):
        tag = "trivial" if f in graph.trivial else "landmark"
        lines.append(f"{tag} {task.facts[f].signature}")
    for a, b in sorted(graph.orderings):
        lines.append(f"order {task.facts[a].signature} -> {task.facts[b].signature}")
    for g in sorted(graph.per_subgoal):
        members = " | ".join(task.facts[f].signature for f in sorted(graph.per_subgoal[g]))
        lines.append(f"subgoal {task.facts[g].signature}: {members}")
    return "\n".join(lines) + "\n"
