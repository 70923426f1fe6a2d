"""Delete-relaxation heuristics and greedy best-first search.

The search is deliberately noisy: ties (and, with a positive temperature,
near-ties) are broken by a seeded random draw, so repeated calls with
different seeds produce diverse valid-but-suboptimal plans for the same
goal.  That diversity is what makes generated trace corpora non-degenerate.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import NodeBudgetExceededError, UnsolvableError
from .strips import GoalHypothesis, GroundTask, State

INF = math.inf


@dataclass(frozen=True)
class RelaxedPlanningGraph:
    """Levels, earliest supporters and additive costs of one relaxed exploration.

    `fact_levels[f]` is the first relaxed level at which fact f appears
    (seed facts sit at level 0, facts added by level-L actions at L+1) and
    is `inf` for unreachable facts.  `best_supporter[f]` is the earliest
    achiever of f, chosen among same-level achievers by the smaller sum of
    precondition costs, then by the lower action id; it is None for seed
    and unreachable facts.  `fact_costs[f]` is the additive cost implied by
    that supporter chain: 0 at the seed, else 1 + the cost-sum of the
    supporter's preconditions.
    """

    fact_levels: tuple[float, ...]
    action_levels: tuple[float, ...]
    best_supporter: tuple[Optional[int], ...]
    fact_costs: tuple[float, ...]


class _RelaxedExplorer:
    """Reusable relaxed-exploration buffers for one task."""

    def __init__(self, task: GroundTask):
        self.task = task
        self.nf = len(task.facts)
        self.na = len(task.actions)
        self.pre = [tuple(sorted(a.pre)) for a in task.actions]
        self.add = [tuple(sorted(a.add)) for a in task.actions]
        self.npre = [len(p) for p in self.pre]
        self.consumers: list[list[int]] = [[] for _ in range(self.nf)]
        for aid, pre in enumerate(self.pre):
            for f in pre:
                self.consumers[f].append(aid)

    def run(self, seed_facts, until: frozenset[int] | None = None):
        """Explore from `seed_facts`; optionally stop once `until` is covered.

        Returns (fact_levels, action_levels, supporters, fact_costs) as lists.
        """
        flevel = [INF] * self.nf
        fcost = [INF] * self.nf
        fsup: list[Optional[int]] = [None] * self.nf
        alevel = [INF] * self.na
        unsat = self.npre[:]
        remaining = set(until) if until is not None else None

        frontier: list[int] = []
        for f in seed_facts:
            if flevel[f] == INF:
                flevel[f] = 0
                fcost[f] = 0.0
                frontier.append(f)
        if remaining is not None:
            remaining -= set(seed_facts)

        level = 0
        pending = [a for a in range(self.na) if unsat[a] == 0]
        while True:
            triggered = pending
            pending = []
            for f in frontier:
                for a in self.consumers[f]:
                    unsat[a] -= 1
                    if unsat[a] == 0:
                        triggered.append(a)
            if remaining is not None and not remaining:
                break
            if not triggered:
                break
            newly: dict[int, tuple[float, int]] = {}
            for a in triggered:
                alevel[a] = level
                pcost = 1.0
                for p in self.pre[a]:
                    pcost += fcost[p]
                for g in self.add[a]:
                    if flevel[g] == INF:
                        cand = (pcost, a)
                        if g not in newly or cand < newly[g]:
                            newly[g] = cand
            frontier = []
            for g, (cost, a) in newly.items():
                flevel[g] = level + 1
                fcost[g] = cost
                fsup[g] = a
                frontier.append(g)
                if remaining is not None:
                    remaining.discard(g)
            level += 1
            if not frontier:
                break
        return flevel, alevel, fsup, fcost

    def h_add(self, state, goal_facts: frozenset[int]) -> float:
        _, _, _, fcost = self.run(state, until=goal_facts)
        total = 0.0
        for g in goal_facts:
            c = fcost[g]
            if c == INF:
                return INF
            total += c
        return total


def build_rpg(task: GroundTask, seed_facts: State | None = None) -> RelaxedPlanningGraph:
    """Build the relaxed planning graph from `seed_facts` (default: init)."""
    seed = task.init if seed_facts is None else seed_facts
    flevel, alevel, fsup, fcost = _RelaxedExplorer(task).run(seed)
    return RelaxedPlanningGraph(tuple(flevel), tuple(alevel), tuple(fsup), tuple(fcost))


def h_add(rpg: RelaxedPlanningGraph, goal_facts) -> float:
    """Additive heuristic: sum of per-fact supporter-chain costs, inf if unreachable."""
    total = 0.0
    for g in goal_facts:
        c = rpg.fact_costs[g]
        if c == INF:
            return INF
        total += c
    return total


@dataclass(frozen=True)
class Plan:
    actions: tuple[int, ...]
    cost: int


@dataclass(frozen=True)
class ValidationResult:
    """Truthy iff the plan replays and achieves the goal.

    On failure `failed_at` is the offending step index, or the plan length
    when every step applies but the goal does not hold at the end.
    """

    ok: bool
    failed_at: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def validate(task: GroundTask, plan: Plan, goal: GoalHypothesis) -> ValidationResult:
    state = task.init
    for step, aid in enumerate(plan.actions):
        a = task.actions[aid]
        if not a.pre <= state:
            return ValidationResult(False, step)
        state = (state - a.delete) | a.add
    if not goal.facts <= state:
        return ValidationResult(False, len(plan.actions))
    return ValidationResult(True)


def gbfs_plan(task: GroundTask, goal: GoalHypothesis, seed: int = 0, noise: float = 0.0,
              max_expansions: int = 1_000_000) -> Plan:
    """Greedy best-first search under the additive heuristic.

    `noise` is a tie-break temperature: each generated node's priority is
    h + noise * u with u ~ U[0,1) from a generator seeded by `seed`, and
    exact ties fall back to a second seeded draw.  noise=0 still breaks
    ties randomly but never reorders distinct heuristic values.  Raises
    UnsolvableError when the goal is out of reach and
    NodeBudgetExceededError past `max_expansions` expansions.
    """
    goal_facts = goal.facts
    if goal_facts <= task.init:
        return Plan((), 0)
    explorer = _RelaxedExplorer(task)
    rng = random.Random(seed)
    h0 = explorer.h_add(task.init, goal_facts)
    if h0 == INF:
        raise UnsolvableError("goal unreachable even under delete relaxation")

    counter = 0
    open_heap: list[tuple[float, float, int, State]] = [(h0 + noise * rng.random(), rng.random(), counter, task.init)]
    parent: dict[State, tuple[State, int]] = {}
    h_cache: dict[State, float] = {task.init: h0}
    expanded: set[State] = set()
    actions = task.actions
    expansions = 0

    while open_heap:
        _, _, _, state = heapq.heappop(open_heap)
        if state in expanded:
            continue
        if goal_facts <= state:
            steps: list[int] = []
            cur = state
            while cur in parent:
                cur, aid = parent[cur]
                steps.append(aid)
            steps.reverse()
            plan = Plan(tuple(steps), len(steps))
            check = validate(task, plan, goal)
            if not check:
                raise AssertionError(f"search produced an invalid plan (step {check.failed_at})")
            return plan
        expanded.add(state)
        expansions += 1
        if expansions > max_expansions:
            raise NodeBudgetExceededError(f"exceeded {max_expansions} expansions")
        for a in actions:
            if not a.pre <= state:
                continue
            succ = (state - a.delete) | a.add
            if succ in expanded:
                continue
            h = h_cache.get(succ)
            if h is None:
                h = explorer.h_add(succ, goal_facts)
                h_cache[succ] = h
            if h == INF:
                continue
            if succ not in parent and succ != task.init:
                parent[succ] = (state, a.id)
            counter += 1
            heapq.heappush(open_heap, (h + noise * rng.random(), rng.random(), counter, succ))
    raise UnsolvableError("search space exhausted without reaching the goal")
