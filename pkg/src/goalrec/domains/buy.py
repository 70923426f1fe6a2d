"""Buy generator: a direct trace simulator over banking actions.

Buy episodes track an integer balance, which is outside the propositional
model language, so this family emits observation traces directly instead of
a grounded task; the landmark recognizer reports it as unsupported.

Every trace opens an account, earns until the drawn goal's price is covered
(one unit per earning action), moves the funds, and ends with the purchase
action of the goal.  Setting 1 has two goals, house (prior 0.8, label 0)
and college (0.2); when the goal is the house the trace is prefixed with an
``open-savings-account`` marker action, so the label is readable from the
very first observation.  Setting 2 has ten goals with distinct base prices
(37 + 56*i, scaled), each jittered per trace by a factor in [0.85, 1], so
the longest traces run to about 541*scale actions.
"""

from __future__ import annotations

import numpy as np

from ..strips import ObservationTrace
from .config import GeneratorConfig, SET1_PRIORS, draw_label, instance_rng

SET1_VOCAB = (
    "open-account",
    "open-savings-account",
    "payroll",
    "move-funds",
    "buy-house",
    "pay-college",
)

SET2_PURCHASES = (
    "buy-car", "buy-house", "pay-college", "buy-boat", "buy-shop",
    "pay-masters", "buy-apartment", "buy-land", "buy-yacht", "pay-retirement",
)

SET2_VOCAB = (
    "open-account",
    "open-savings-account",
    "payroll",
    "work-overtime",
    "move-funds",
) + SET2_PURCHASES

SET1_PRICE_RANGE = (8, 38)  # scaled then drawn uniformly, floor 2
SET2_BASE_PRICE = 37
SET2_PRICE_STEP = 56
_OVERTIME_SHARE = 0.3


def vocab(setting: int) -> tuple[str, ...]:
    return SET1_VOCAB if setting == 1 else SET2_VOCAB


def priors(setting: int) -> tuple[float, ...]:
    return SET1_PRIORS if setting == 1 else tuple(0.1 for _ in range(10))


def _set1_trace(rng: np.random.Generator, scale: float, ids: dict[str, int]) -> ObservationTrace:
    label = draw_label(rng, SET1_PRIORS)
    lo = max(2, int(round(SET1_PRICE_RANGE[0] * scale)))
    hi = max(lo + 1, int(round(SET1_PRICE_RANGE[1] * scale)))
    price = int(rng.integers(lo, hi + 1))
    steps: list[int] = []
    if label == 0:
        steps.append(ids["open-savings-account"])
    steps.append(ids["open-account"])
    steps.extend([ids["payroll"]] * price)
    steps.append(ids["move-funds"])
    steps.append(ids["buy-house"] if label == 0 else ids["pay-college"])
    return ObservationTrace(tuple(steps), label)


def _set2_trace(rng: np.random.Generator, scale: float, ids: dict[str, int]) -> ObservationTrace:
    label = int(rng.integers(10))
    base = (SET2_BASE_PRICE + SET2_PRICE_STEP * label) * scale
    price = max(2, int(round(base * rng.uniform(0.85, 1.0))))
    steps = [ids["open-account"], ids["open-savings-account"]]
    for _ in range(price):
        earn = "work-overtime" if rng.random() < _OVERTIME_SHARE else "payroll"
        steps.append(ids[earn])
    steps.append(ids["move-funds"])
    steps.append(ids[SET2_PURCHASES[label]])
    return ObservationTrace(tuple(steps), label)


def gen_buy(cfg: GeneratorConfig, n_traces: int) -> tuple[list[ObservationTrace], tuple[str, ...]]:
    """Simulate labeled traces; returns (traces, action vocabulary)."""
    if cfg.family != "buy":
        raise ValueError(f"gen_buy called with family '{cfg.family}'")
    if n_traces < 1:
        raise ValueError(f"n_traces must be positive, got {n_traces}")
    names = vocab(cfg.setting)
    ids = {name: i for i, name in enumerate(names)}
    rng = instance_rng(cfg)
    make = _set1_trace if cfg.setting == 1 else _set2_trace
    traces = [make(rng, cfg.scale, ids) for _ in range(n_traces)]
    return traces, names
