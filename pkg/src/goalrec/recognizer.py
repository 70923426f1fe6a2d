"""Landmark-completion goal recognition with optional prior weighting.

Each hypothesis is scored by how complete its landmark evidence looks
after the observed prefix: the mean, over the hypothesis's goal facts, of
the fraction of that subgoal's non-trivial landmarks already witnessed.
Hypotheses within a threshold of the best score form the candidate set;
the prior variant re-ranks that set by score times prior.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyScoresError, UnsupportedDomainError
from .landmarks import LandmarkGraph, extract_landmarks, observed_facts
from .strips import GroundTask, ObservationTrace

DEFAULT_THRESHOLD = 0.1


@dataclass(frozen=True)
class RecognitionResult:
    scores: tuple[float, ...]
    candidate_set: tuple[int, ...]
    predicted: int
    posterior: Optional[tuple[float, ...]] = None
    elapsed: float = 0.0


def extract_all(task: GroundTask) -> list[LandmarkGraph]:
    """Landmark graphs for every hypothesis of a task."""
    return [extract_landmarks(task, i) for i in range(len(task.hypotheses))]


def goal_completion(task: GroundTask, graphs: Sequence[LandmarkGraph],
                    trace: ObservationTrace) -> list[float]:
    """Per-hypothesis completion scores in [0, 1] for one observed prefix.

    A subgoal with no non-trivial landmarks contributes 1 when the goal
    fact itself has been observed achieved and 0 otherwise.
    """
    seen = observed_facts(task, trace)
    scores = []
    for graph in graphs:
        goal = task.hypotheses[graph.goal_index].facts
        total = 0.0
        for g in goal:
            sub = graph.per_subgoal[g] - graph.trivial
            if sub:
                total += len(sub & seen) / len(sub)
            else:
                total += 1.0 if g in seen else 0.0
        scores.append(total / len(goal))
    return scores


def recognize(scores: Sequence[float], threshold: float = DEFAULT_THRESHOLD,
              priors: Sequence[float] | None = None) -> RecognitionResult:
    """Pick a goal from completion scores.

    The candidate set keeps every hypothesis scoring within `threshold` of
    the maximum.  Without priors the prediction is the lowest-index
    candidate with the maximal score.  With priors the candidates are
    re-ranked by score times prior (uniformly when all candidate scores
    are zero), normalized into a posterior over all hypotheses.
    """
    if not scores:
        raise EmptyScoresError("no hypothesis scores")
    best = max(scores)
    candidates = tuple(i for i, s in enumerate(scores) if s >= best - threshold)
    if priors is None:
        predicted = min(i for i in candidates if scores[i] == best)
        return RecognitionResult(tuple(scores), candidates, predicted)
    if len(priors) != len(scores):
        raise ValueError(f"{len(priors)} priors for {len(scores)} scores")
    weights = {i: scores[i] * priors[i] for i in candidates}
    if all(w == 0.0 for w in weights.values()):
        weights = {i: 1.0 for i in candidates}
    z = sum(weights.values())
    posterior = tuple(weights.get(i, 0.0) / z for i in range(len(scores)))
    top = max(posterior[i] for i in candidates)
    predicted = min(i for i in candidates if posterior[i] == top)
    return RecognitionResult(tuple(scores), candidates, predicted, posterior)


def recognize_trace(task: GroundTask | None, graphs: Sequence[LandmarkGraph] | None,
                    trace: ObservationTrace, threshold: float = DEFAULT_THRESHOLD,
                    use_priors: bool = False) -> RecognitionResult:
    """Score a trace against a task's hypotheses and pick one.

    `elapsed` covers scoring and the decision only; landmark extraction is
    expected to be done once per task (pass `graphs`) and its cost
    amortized by the caller across a test set.  Raises
    UnsupportedDomainError for traces with no planning model, such as the
    numeric shopping simulator's.
    """
    if task is None:
        raise UnsupportedDomainError("trace has no planning model to score landmarks against")
    if graphs is None:
        graphs = extract_all(task)
    t0 = time.perf_counter()
    scores = goal_completion(task, graphs, trace)
    priors = tuple(h.prior for h in task.hypotheses) if use_priors else None
    result = recognize(scores, threshold, priors)
    elapsed = time.perf_counter() - t0
    return RecognitionResult(result.scores, result.candidate_set, result.predicted,
                             result.posterior, elapsed)
