"""Procedural generators for the four benchmark families.

Block-words, Logistics and Grid emit grounded tasks through the model
language (text is built, parsed and grounded for every instance); Buy is a
direct trace simulator.  ``generate_task`` dispatches on the config's
family, and ``family_vocab`` returns the family-wide action vocabulary that
stays fixed across instance seeds, which the learners use as their one-hot
index space.
"""

from __future__ import annotations

from dataclasses import replace

from ..errors import UnsupportedDomainError
from ..strips import GroundTask, ground, parse_problem
from . import blockwords, buy, grid, logistics
from .blockwords import gen_blockwords
from .buy import gen_buy
from .config import FAMILIES, SET1_PRIORS, GeneratorConfig
from .grid import gen_grid
from .logistics import gen_logistics

_STRIPS_MODULES = {
    "blockwords": blockwords,
    "logistics": logistics,
    "grid": grid,
}


def generate_task(cfg: GeneratorConfig, **kwargs) -> GroundTask:
    """Build one grounded instance for a STRIPS family.

    Keyword arguments are forwarded to the family generator (the grid
    family accepts ``pool_size``, ``n_locks`` and ``n_keys``).
    """
    if cfg.family == "buy":
        raise UnsupportedDomainError(
            "buy has no grounded task; use gen_buy to simulate traces")
    return _STRIPS_MODULES[cfg.family].build_instance(cfg, **kwargs)[1]


def instance_source(cfg: GeneratorConfig, **kwargs) -> str:
    """The model-language text of one generated instance."""
    if cfg.family == "buy":
        raise UnsupportedDomainError(
            "buy has no grounded task; use gen_buy to simulate traces")
    return _STRIPS_MODULES[cfg.family].build_instance(cfg, **kwargs)[0]


def domain_source(cfg: GeneratorConfig) -> str:
    """The model-language domain text for a STRIPS family."""
    if cfg.family == "buy":
        raise UnsupportedDomainError("buy is simulated and has no domain text")
    return _STRIPS_MODULES[cfg.family].DOMAIN_TEXT


def family_vocab(cfg: GeneratorConfig, **kwargs) -> tuple[str, ...]:
    """Action signatures shared by every instance of (family, setting, scale).

    For STRIPS families this is the unpruned grounding of the canonical
    seed-0 instance: enumeration plus static filtering does not depend on
    the movable part of the initial state, so the same signature list
    covers every instance's (reachability-pruned) action table.
    """
    if cfg.family == "buy":
        return buy.vocab(cfg.setting)
    mod = _STRIPS_MODULES[cfg.family]
    text = mod.build_instance(replace(cfg, seed=0), **kwargs)[0]
    problem = parse_problem(text, mod.SCHEMA)
    task = ground(mod.SCHEMA, problem, prune_unreachable=False)
    return tuple(a.signature for a in task.actions)


__all__ = [
    "FAMILIES",
    "GeneratorConfig",
    "SET1_PRIORS",
    "domain_source",
    "family_vocab",
    "gen_blockwords",
    "gen_buy",
    "gen_grid",
    "gen_logistics",
    "generate_task",
    "instance_source",
]
