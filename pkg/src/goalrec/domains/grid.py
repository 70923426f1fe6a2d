"""Grid generator: a robot navigating a keyed-lock grid.

Cells form a 4-connected ``side x side`` board (side = round(10*scale),
floored at 3).  Moving requires the destination to be open; locked cells
are opened by an unlock action that needs an adjacent robot holding any
key.  Keys can be picked up and put down, one at a time.

Setting 1 fixes the robot start at the origin corner and poses two goal
cells adjacent to each other in the far corner (priors 80/20), so plan
prefixes are shared for a long time and early observations are
uninformative.  Setting 2 draws the goal uniformly from a fixed pool of
pre-defined goal cells (default 10) and randomizes the robot start.  Locks
and keys are randomly placed per instance in both settings; the generator
re-rolls a layout until every hypothesis is relaxed-reachable, and raises
after 100 failed attempts.
"""

from __future__ import annotations

from ..errors import ScaleTooSmallError, UnsolvableLayoutError
from ..strips import Atom, GroundTask, ProblemSpec, format_problem, ground, parse_domain, parse_problem
from .config import (GeneratorConfig, all_hypotheses_reachable, draw_label,
                     hypothesis_rng, init_satisfies_some_hypothesis, instance_rng,
                     priors_for)

DOMAIN_TEXT = """\
(define (domain grid)
  (:types cell key)
  (:predicates
    (robot-at ?c - cell)
    (open ?c - cell)
    (locked ?c - cell)
    (key-at ?k - key ?c - cell)
    (holding ?k - key)
    (arm-free)
    (adj ?a - cell ?b - cell))
  (:action move
    :parameters (?from - cell ?to - cell)
    :precondition (and (robot-at ?from) (adj ?from ?to) (open ?to))
    :effect (and (robot-at ?to) (not (robot-at ?from))))
  (:action pickup-key
    :parameters (?k - key ?c - cell)
    :precondition (and (robot-at ?c) (key-at ?k ?c) (arm-free))
    :effect (and (holding ?k) (not (key-at ?k ?c)) (not (arm-free))))
  (:action putdown-key
    :parameters (?k - key ?c - cell)
    :precondition (and (robot-at ?c) (holding ?k))
    :effect (and (key-at ?k ?c) (arm-free) (not (holding ?k))))
  (:action unlock
    :parameters (?at - cell ?target - cell ?k - key)
    :precondition (and (robot-at ?at) (adj ?at ?target) (locked ?target) (holding ?k))
    :effect (and (open ?target) (not (locked ?target))))
)
"""

SCHEMA = parse_domain(DOMAIN_TEXT)

DEFAULT_POOL_SIZE = 10
_MAX_LAYOUT_TRIES = 100


def side_for(cfg: GeneratorConfig) -> int:
    return max(3, int(round(cfg.scale * 10)))


def _default_locks(cfg: GeneratorConfig) -> int:
    return int(round(cfg.scale * 5))


def _default_keys(cfg: GeneratorConfig) -> int:
    return max(1, int(round(cfg.scale * 3)))


def _cell(x: int, y: int) -> str:
    return f"c{x}-{y}"


def _cells(side: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(side) for y in range(side)]


def _adjacency(side: int) -> list[Atom]:
    atoms: list[Atom] = []
    for x, y in _cells(side):
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < side and 0 <= ny < side:
                atoms.append(("adj", (_cell(x, y), _cell(nx, ny))))
    return atoms


def goal_cells(cfg: GeneratorConfig, pool_size: int = DEFAULT_POOL_SIZE) -> tuple[str, ...]:
    """The dataset's fixed goal cells (2 for setting 1, the pool for setting 2)."""
    side = side_for(cfg)
    if cfg.setting == 1:
        return (_cell(side - 1, side - 1), _cell(side - 2, side - 1))
    if pool_size < 1:
        raise ValueError(f"pool_size must be positive, got {pool_size}")
    if pool_size >= side * side:
        raise ScaleTooSmallError(
            f"grid set2: a {side}x{side} board cannot host a pool of {pool_size} "
            f"goal cells plus a start cell")
    rng = hypothesis_rng(cfg)
    picks = rng.choice(side * side, size=pool_size, replace=False)
    return tuple(_cell(int(i) // side, int(i) % side) for i in picks)


def build_instance(cfg: GeneratorConfig, *, pool_size: int = DEFAULT_POOL_SIZE,
                   n_locks: int | None = None, n_keys: int | None = None,
                   ) -> tuple[str, GroundTask]:
    """Emit one instance as model-language text plus its grounded task."""
    side = side_for(cfg)
    n_locks = _default_locks(cfg) if n_locks is None else n_locks
    n_keys = _default_keys(cfg) if n_keys is None else n_keys
    goals = goal_cells(cfg, pool_size)
    priors = priors_for(cfg.setting, len(goals))
    hypotheses = tuple((p, (("robot-at", (g,)),)) for p, g in zip(priors, goals))
    key_names = tuple(f"k{i}" for i in range(n_keys))
    objects = tuple((_cell(x, y), "cell") for x, y in _cells(side)) + \
        tuple((k, "key") for k in key_names)
    all_cells = [_cell(x, y) for x, y in _cells(side)]
    adjacency = _adjacency(side)
    rng = instance_rng(cfg)
    label = draw_label(rng, priors)
    for _ in range(_MAX_LAYOUT_TRIES):
        if cfg.setting == 1:
            start = _cell(0, 0)
        else:
            candidates = [c for c in all_cells if c not in goals]
            start = candidates[int(rng.integers(len(candidates)))]
        # Locks never land on the start or on a goal cell, so every
        # hypothesis stays a live target and only paths get obstructed.
        lockable = [c for c in all_cells if c != start and c not in goals]
        lock_idx = rng.choice(len(lockable), size=min(n_locks, len(lockable)),
                              replace=False) if lockable and n_locks else []
        locked = {lockable[int(i)] for i in lock_idx}
        open_cells = [c for c in all_cells if c not in locked]
        init: list[Atom] = list(adjacency)
        init.append(("robot-at", (start,)))
        init.append(("arm-free", ()))
        for c in open_cells:
            init.append(("open", (c,)))
        for c in sorted(locked):
            init.append(("locked", (c,)))
        for k in key_names:
            init.append(("key-at", (k, open_cells[int(rng.integers(len(open_cells)))])))
        spec = ProblemSpec(
            name=f"grid-set{cfg.setting}-s{cfg.seed}",
            domain="grid",
            objects=objects,
            init=tuple(init),
            hypotheses=hypotheses,
            true_goal=label,
        )
        text = format_problem(spec)
        task = ground(SCHEMA, parse_problem(text, SCHEMA))
        if init_satisfies_some_hypothesis(task):
            continue
        if not all_hypotheses_reachable(task):
            continue
        return text, task
    raise UnsolvableLayoutError(
        f"grid set{cfg.setting} seed {cfg.seed}: no layout with all goals reachable "
        f"in {_MAX_LAYOUT_TRIES} tries")


def gen_grid(cfg: GeneratorConfig, *, pool_size: int = DEFAULT_POOL_SIZE,
             n_locks: int | None = None, n_keys: int | None = None) -> GroundTask:
    """Grounded grid task with drawn true goal; see module docstring."""
    return build_instance(cfg, pool_size=pool_size, n_locks=n_locks, n_keys=n_keys)[1]
