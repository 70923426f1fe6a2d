"""Block-words generator: tower goals spelling letter words.

Blocks are lettered; every goal hypothesis is one tower that spells a word
top-to-bottom.  Setting 1 poses two towers over the same letters that differ
only in their top two positions, with an 80/20 prior.  Setting 2 poses five
full-length anagram words over a shared letter set with uniform priors, so
goals overlap heavily.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import UnsolvableLayoutError
from ..strips import Atom, GroundTask, ProblemSpec, format_problem, ground, parse_domain, parse_problem
from .config import (GeneratorConfig, all_hypotheses_reachable, draw_label,
                     hypothesis_rng, init_satisfies_some_hypothesis, instance_rng,
                     priors_for, require_scale)

DOMAIN_TEXT = """\
(define (domain blockwords)
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

SCHEMA = parse_domain(DOMAIN_TEXT)

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
SET1_BASE_BLOCKS = 24
SET2_BASE_LETTERS = 8
SET2_WORDS = 5
_MAX_INIT_TRIES = 100


def _block_names(n: int) -> tuple[str, ...]:
    if n <= len(_ALPHABET):
        return tuple(_ALPHABET[:n])
    return tuple(f"b{i:03d}" for i in range(n))


def _permute(rng: np.random.Generator, names) -> tuple[str, ...]:
    return tuple(names[int(i)] for i in rng.permutation(len(names)))


def hypothesis_words(cfg: GeneratorConfig) -> tuple[tuple[str, ...], ...]:
    """The dataset's fixed words, each spelled top-to-bottom."""
    rng = hypothesis_rng(cfg)
    if cfg.setting == 1:
        require_scale(cfg, cfg.scale * SET1_BASE_BLOCKS, 3, "blocks")
        n = math.ceil(cfg.scale * SET1_BASE_BLOCKS)
        word = _permute(rng, _block_names(n))
        swapped = (word[1], word[0]) + word[2:]
        return (word, swapped)
    n = max(3, int(round(cfg.scale * SET2_BASE_LETTERS)))
    names = _block_names(n)
    words: list[tuple[str, ...]] = []
    while len(words) < SET2_WORDS:
        w = _permute(rng, names)
        if w not in words:
            words.append(w)
    return tuple(words)


def _word_facts(word: tuple[str, ...]) -> tuple[Atom, ...]:
    facts = [("on", (upper, lower)) for upper, lower in zip(word, word[1:])]
    facts.append(("ontable", (word[-1],)))
    return tuple(facts)


def _random_init(rng: np.random.Generator, names) -> tuple[Atom, ...]:
    """A uniformly scrambled stack layout covering all blocks."""
    stacks: list[list[str]] = []
    for b in _permute(rng, names):
        if stacks and rng.random() < 0.5:
            stacks[int(rng.integers(len(stacks)))].append(b)
        else:
            stacks.append([b])
    atoms: list[Atom] = [("handempty", ())]
    for st in stacks:
        atoms.append(("ontable", (st[0],)))
        for lower, upper in zip(st, st[1:]):
            atoms.append(("on", (upper, lower)))
        atoms.append(("clear", (st[-1],)))
    return tuple(atoms)


def build_instance(cfg: GeneratorConfig) -> tuple[str, GroundTask]:
    """Emit one instance as model-language text plus its grounded task."""
    words = hypothesis_words(cfg)
    names = tuple(sorted(words[0]))
    priors = priors_for(cfg.setting, len(words))
    rng = instance_rng(cfg)
    label = draw_label(rng, priors)
    hypotheses = tuple((p, _word_facts(w)) for p, w in zip(priors, words))
    for _ in range(_MAX_INIT_TRIES):
        spec = ProblemSpec(
            name=f"blockwords-set{cfg.setting}-s{cfg.seed}",
            domain="blockwords",
            objects=tuple((n, "block") for n in names),
            init=_random_init(rng, names),
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
        f"blockwords set{cfg.setting} seed {cfg.seed}: no acceptable layout in {_MAX_INIT_TRIES} tries")


def gen_blockwords(cfg: GeneratorConfig) -> GroundTask:
    """Grounded block-words task with drawn true goal; see module docstring."""
    return build_instance(cfg)[1]
