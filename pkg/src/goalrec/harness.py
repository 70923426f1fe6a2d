"""Dataset construction, observation truncation and method evaluation.

A dataset bundles labeled traces in two id spaces: the family-wide action
vocabulary (the learners' one-hot index space, stable across instances) and
each instance's own grounded action table (what the landmark recognizer
replays).  Splits reserve 100 held-out test traces when the trace count
allows, then divide the remainder 80/20 into train/validation.

Evaluation reports accuracy over the held-out traces at each observation
ratio, plus mean wall seconds per prediction.  For the landmark methods the
per-instance landmark extraction cost is amortized: total extraction wall
time is spread over all held-out predictions and added to the mean scoring
time, so the reported figure covers everything that must happen at
inference time for a fresh instance.  Learned methods time the forward pass
(training is a separate, offline step).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from math import ceil
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .domains import GeneratorConfig, buy, family_vocab, gen_buy, generate_task
from .errors import (InsufficientTracesError, IoError, NodeBudgetExceededError,
                     UnsolvableError)
from .gbt import (GbtConfig, GbtEnsemble, featurize, predict_gbt,
                  predict_gbt_batch, train_gbt)
from .landmarks import extract_landmarks
from .planner import gbfs_plan
from .recognizer import DEFAULT_THRESHOLD, recognize_trace
from .seq import SeqHyper, SeqModel, predict_seq, train_seq
from .strips import GroundTask, ObservationTrace

HELDOUT_SIZE = 100
TRAIN_SHARE = 0.8
DEFAULT_RATIOS = (0.1, 0.3, 0.5, 0.7)
DEFAULT_PLAN_NOISE = 1.0
_SPLIT_STREAM = 13
_PLAN_STREAM = 17
_INSTANCE_SPACING = 1_000_000


@dataclass(frozen=True)
class Episode:
    """One labeled trace; grounded task attached for STRIPS families."""

    trace: ObservationTrace                       # ids in the family vocabulary
    task: Optional[GroundTask] = None             # None for simulated families
    task_trace: Optional[ObservationTrace] = None  # ids in the task's own table


@dataclass(frozen=True)
class Dataset:
    cfg: GeneratorConfig
    vocab: tuple[str, ...]
    episodes: tuple[Episode, ...]
    train_idx: tuple[int, ...]
    val_idx: tuple[int, ...]
    heldout_idx: tuple[int, ...]
    n_classes: int
    seed: int = 0
    plan_noise: float = DEFAULT_PLAN_NOISE
    gen_kwargs: tuple[tuple[str, int], ...] = ()

    def labels(self, indices: Sequence[int]) -> list[int]:
        return [self.episodes[i].trace.label for i in indices]


def _split_indices(n: int, cfg: GeneratorConfig, seed: int) -> tuple[tuple[int, ...], ...]:
    """Seeded shuffle, then heldout / train / validation in draw order."""
    rng = np.random.default_rng(np.random.SeedSequence([_SPLIT_STREAM, cfg.setting, seed, n]))
    perm = [int(i) for i in rng.permutation(n)]
    heldout = tuple(perm[:HELDOUT_SIZE])
    rest = perm[HELDOUT_SIZE:]
    n_train = len(rest) * 8 // 10
    return tuple(rest[:n_train]), tuple(rest[n_train:]), heldout


def build_dataset(cfg: GeneratorConfig, n: int, seed: int = 0, *,
                  plan_noise: float = DEFAULT_PLAN_NOISE, **gen_kwargs) -> Dataset:
    """Generate, solve and split `n` labeled traces.

    STRIPS families draw one fresh instance per trace (instance seeds are
    spaced off `seed`) and solve it with the noisy greedy planner; Buy
    episodes come straight from the simulator.  Requires n >= 130 so the
    100-trace heldout block leaves a nonempty train/validation pool.
    """
    if n < HELDOUT_SIZE + 30:
        raise InsufficientTracesError(
            f"need at least {HELDOUT_SIZE + 30} traces (100 heldout plus a "
            f"usable 80/20 pool), got {n}")
    vocab = family_vocab(cfg, **gen_kwargs)
    episodes: list[Episode] = []
    if cfg.family == "buy":
        traces, vocab_names = gen_buy(replace(cfg, seed=seed), n)
        if vocab_names != vocab:
            raise IoError("buy vocabulary drifted between calls")
        episodes = [Episode(t) for t in traces]
        n_classes = len(buy.priors(cfg.setting))
    else:
        index = {sig: i for i, sig in enumerate(vocab)}
        plan_rng = np.random.default_rng(
            np.random.SeedSequence([_PLAN_STREAM, cfg.setting, seed]))
        attempts = 0
        instance = 0
        while len(episodes) < n:
            if attempts >= 20 * n:
                raise InsufficientTracesError(
                    f"{cfg.family} set{cfg.setting}: only {len(episodes)} of {n} "
                    f"instances were solvable after {attempts} attempts")
            attempts += 1
            inst_cfg = replace(cfg, seed=seed * _INSTANCE_SPACING + instance)
            instance += 1
            task = generate_task(inst_cfg, **gen_kwargs)
            goal = task.hypotheses[task.true_goal]
            try:
                plan = gbfs_plan(task, goal, seed=int(plan_rng.integers(2**31)),
                                 noise=plan_noise)
            except (UnsolvableError, NodeBudgetExceededError):
                continue
            task_trace = ObservationTrace(plan.actions, task.true_goal)
            vocab_ids = tuple(index[task.actions[a].signature] for a in plan.actions)
            episodes.append(Episode(ObservationTrace(vocab_ids, task.true_goal),
                                    task, task_trace))
        n_classes = len(episodes[0].task.hypotheses)
    train, val, heldout = _split_indices(n, cfg, seed)
    return Dataset(cfg, vocab, tuple(episodes), train, val, heldout, n_classes, seed,
                   plan_noise, tuple(sorted(gen_kwargs.items())))


def truncate(trace: ObservationTrace, ratio: float) -> ObservationTrace:
    """First ceil(ratio * len) observations; never empty, label preserved.

    The ratio is routed through an exact decimal fraction so ratios such as
    0.1 of 70 observations truncate to 7, not to 8 via a floating-point
    residue.
    """
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must lie in (0, 1], got {ratio}")
    k = ceil(Fraction(str(ratio)) * len(trace.actions))
    return ObservationTrace(trace.actions[:max(1, k)], trace.label)


# ── Methods ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TrainedModel:
    """A trained learner plus the metadata needed to use it on prefixes."""

    kind: str  # "gbt" or "seq"
    model: Union[GbtEnsemble, SeqModel]
    vocab_size: int

    def predict(self, actions: Sequence[int]) -> int:
        if self.kind == "gbt":
            return predict_gbt(self.model, featurize(actions, self.vocab_size))[1]
        return predict_seq(self.model, actions)[1]

    def predict_batch(self, traces: Sequence[Sequence[int]]) -> list[int]:
        if self.kind == "gbt":
            X = np.stack([featurize(t, self.vocab_size) for t in traces])
            return [int(p) for p in predict_gbt_batch(self.model, X)[1]]
        return [predict_seq(self.model, t)[1] for t in traces]


def train_method(ds: Dataset, kind: str, *, indices: Sequence[int] | None = None,
                 gbt_config: GbtConfig = GbtConfig(), seq_hyper: SeqHyper = SeqHyper(),
                 seed: int = 0,
                 augment_ratios: Sequence[float] | None = DEFAULT_RATIOS) -> TrainedModel:
    """Fit a learner of the given kind on the dataset's train split.

    Training sequences include each trace plus its prefix at every ratio in
    `augment_ratios` (pass None to train on full traces only).  Without the
    prefix views a learner can pin its decision on trace endings, which the
    truncated inputs seen at recognition time never contain.
    """
    idx = ds.train_idx if indices is None else tuple(indices)
    views: list[ObservationTrace] = []
    for i in idx:
        trace = ds.episodes[i].trace
        views.append(trace)
        for r in augment_ratios or ():
            prefix = truncate(trace, r)
            if len(prefix.actions) < len(trace.actions):
                views.append(prefix)
    if kind == "gbt":
        data = [(featurize(v.actions, len(ds.vocab)), v.label) for v in views]
        model = train_gbt(data, gbt_config, n_classes=ds.n_classes)
        return TrainedModel("gbt", model, len(ds.vocab))
    if kind == "seq":
        data = [(v.actions, v.label) for v in views]
        model = train_seq(data, seq_hyper, seed=seed,
                          vocab_size=len(ds.vocab), n_classes=ds.n_classes)
        return TrainedModel("seq", model, len(ds.vocab))
    raise ValueError(f"unknown learner kind '{kind}'")


MethodSpec = Union[str, TrainedModel]


def _method_name(method: MethodSpec) -> str:
    return method if isinstance(method, str) else method.kind


# ── Evaluation ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EvalRow:
    method: str
    domain: str
    setting: int
    ratio: float
    accuracy: Optional[float]  # percent, None when unsupported
    seconds: Optional[float]   # mean seconds per prediction


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def __post_init__(self):
        for r in self.rows:
            if r.accuracy is not None and not 0 <= r.accuracy <= 100:
                raise ValueError(f"accuracy {r.accuracy} outside [0, 100]")


def _eval_lgr(method: str, ds: Dataset, ratios: Sequence[float],
              threshold: float) -> list[EvalRow]:
    name = ds.cfg.family
    if any(ds.episodes[i].task is None for i in ds.heldout_idx):
        return [EvalRow(method, name, ds.cfg.setting, r, None, None) for r in ratios]
    use_priors = method.endswith("+prior")
    extract_wall = 0.0
    hits = {r: 0 for r in ratios}
    score_time = {r: 0.0 for r in ratios}
    for i in ds.heldout_idx:
        ep = ds.episodes[i]
        t0 = time.perf_counter()
        graphs = [extract_landmarks(ep.task, h) for h in range(len(ep.task.hypotheses))]
        extract_wall += time.perf_counter() - t0
        for r in ratios:
            prefix = truncate(ep.task_trace, r)
            res = recognize_trace(ep.task, graphs, prefix, threshold=threshold,
                                  use_priors=use_priors)
            score_time[r] += res.elapsed
            if res.predicted == ep.trace.label:
                hits[r] += 1
    n = len(ds.heldout_idx)
    shared = extract_wall / (n * len(ratios))
    return [EvalRow(method, name, ds.cfg.setting, r,
                    100.0 * hits[r] / n, score_time[r] / n + shared)
            for r in ratios]


def _eval_model(model: TrainedModel, ds: Dataset, ratios: Sequence[float]) -> list[EvalRow]:
    rows = []
    n = len(ds.heldout_idx)
    for r in ratios:
        prefixes = [truncate(ds.episodes[i].trace, r) for i in ds.heldout_idx]
        t0 = time.perf_counter()
        predicted = model.predict_batch([p.actions for p in prefixes])
        elapsed = time.perf_counter() - t0
        hits = sum(1 for p, got in zip(prefixes, predicted) if got == p.label)
        rows.append(EvalRow(model.kind, ds.cfg.family, ds.cfg.setting, r,
                            100.0 * hits / n, elapsed / n))
    return rows


def evaluate(method: MethodSpec, ds: Dataset, ratios: Sequence[float] = DEFAULT_RATIOS,
             threshold: float = DEFAULT_THRESHOLD) -> EvalReport:
    """Heldout accuracy (percent) and mean seconds per prediction, per ratio.

    `method` is "lgr", "lgr+prior", or a TrainedModel.  Landmark methods on
    a simulated family (no grounded task) yield unsupported rows with blank
    accuracy and timing.
    """
    for r in ratios:
        if not 0 < r <= 1:
            raise ValueError(f"ratio {r} outside (0, 1]")
    if isinstance(method, str):
        if method not in ("lgr", "lgr+prior"):
            raise ValueError(f"unknown method '{method}'")
        rows = _eval_lgr(method, ds, ratios, threshold)
    else:
        rows = _eval_model(method, ds, ratios)
    return EvalReport(tuple(rows))


def merge_reports(*reports: EvalReport) -> EvalReport:
    return EvalReport(tuple(row for rep in reports for row in rep.rows))


def learning_curve_eval(cfg: GeneratorConfig, sizes: Sequence[int], kind: str,
                        seed: int = 0, *, ratio: float = 1.0,
                        gbt_config: GbtConfig = GbtConfig(),
                        seq_hyper: SeqHyper = SeqHyper()) -> list[tuple[int, float]]:
    """Heldout accuracy after training on growing prefixes of one train pool.

    Sizes must be strictly increasing.  One dataset is built, sized so its
    train split covers the largest request; each point trains on the first
    `size` train indices (a seeded-shuffle prefix, so subsets are unbiased)
    and scores the shared heldout block at the given observation ratio.
    """
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must be strictly increasing, got {list(sizes)}")
    n = HELDOUT_SIZE + ceil(max(sizes) / TRAIN_SHARE) + 2
    ds = build_dataset(cfg, max(n, HELDOUT_SIZE + 30), seed)
    if len(ds.train_idx) < max(sizes):
        raise InsufficientTracesError(
            f"train split holds {len(ds.train_idx)} traces, need {max(sizes)}")
    points = []
    for size in sizes:
        model = train_method(ds, kind, indices=ds.train_idx[:size],
                             gbt_config=gbt_config, seq_hyper=seq_hyper, seed=seed)
        hits = 0
        for i in ds.heldout_idx:
            prefix = truncate(ds.episodes[i].trace, ratio)
            if model.predict(prefix.actions) == prefix.label:
                hits += 1
        points.append((size, 100.0 * hits / len(ds.heldout_idx)))
    return points


# ── Reports ────────────────────────────────────────────────────────────────

CSV_HEADER = "method,domain,setting,ratio,accuracy,seconds"


def _fmt_cell(value: Optional[float], spec: str) -> str:
    return "-" if value is None else format(value, spec)


def _sorted_rows(report: EvalReport) -> list[EvalRow]:
    return sorted(report.rows, key=lambda r: (r.method, r.setting, r.ratio))


def emit_report(report: EvalReport, fmt: str = "csv", *,
                include_seconds: bool = True) -> str:
    """Render a report as CSV or an aligned text table.

    Rows are ordered by (method, setting, ratio).  `include_seconds=False`
    blanks the timing column, which wall-clock noise would otherwise keep
    from ever being reproducible byte-for-byte.
    """
    rows = _sorted_rows(report)
    if fmt == "csv":
        # Numeric CSV cells use shortest-repr formatting so a parse of the
        # emitted text reproduces the report values exactly.
        lines = [CSV_HEADER]
        for r in rows:
            secs = _fmt_cell(r.seconds, "") if include_seconds else "-"
            lines.append(",".join([r.method, r.domain, str(r.setting),
                                   format(r.ratio, "g"), _fmt_cell(r.accuracy, ""), secs]))
        return "\n".join(lines) + "\n"
    if fmt == "table":
        header = ("method", "domain", "set", "ratio", "acc%", "sec/pred")
        body = [(r.method, r.domain, str(r.setting), format(r.ratio, "g"),
                 _fmt_cell(r.accuracy, ".2f"),
                 _fmt_cell(r.seconds, ".6f") if include_seconds else "-")
                for r in rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
                  for i, h in enumerate(header)]
        fmt_line = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt_line.format(*header)]
        out += [fmt_line.format(*b) for b in body]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown report format '{fmt}'")


def write_report(report: EvalReport, path: str, fmt: str = "csv", *,
                 include_seconds: bool = True) -> None:
    try:
        Path(path).write_text(emit_report(report, fmt, include_seconds=include_seconds),
                              encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc


def parse_report(text: str) -> EvalReport:
    """Inverse of the CSV emitter (modulo float formatting)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise IoError("report text lacks the expected CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise IoError(f"malformed report row: {ln!r}")
        method, domain, setting, ratio, acc, secs = parts
        rows.append(EvalRow(method, domain, int(setting), float(ratio),
                            None if acc == "-" else float(acc),
                            None if secs == "-" else float(secs)))
    return EvalReport(tuple(rows))


# ── Dataset directories ────────────────────────────────────────────────────


def save_dataset(ds: Dataset, path: str) -> None:
    """Write traces, vocabulary and regeneration metadata to a directory."""
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
        lines = [f"{ep.trace.label}\t{' '.join(map(str, ep.trace.actions))}"
                 for ep in ds.episodes]
        (root / "traces.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (root / "vocab.txt").write_text(
            "".join(f"{i}\t{name}\n" for i, name in enumerate(ds.vocab)), encoding="utf-8")
        meta = {
            "format": "goalrec-dataset", "version": 1,
            "family": ds.cfg.family, "setting": ds.cfg.setting,
            "cfg_seed": ds.cfg.seed, "scale": ds.cfg.scale,
            "n": len(ds.episodes), "seed": ds.seed, "n_classes": ds.n_classes,
            "plan_noise": ds.plan_noise, "gen_kwargs": dict(ds.gen_kwargs),
            "train_idx": list(ds.train_idx), "val_idx": list(ds.val_idx),
            "heldout_idx": list(ds.heldout_idx),
        }
        (root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write dataset to {path}: {exc}") from exc


def load_dataset(path: str, *, with_tasks: bool = False) -> Dataset:
    """Rebuild a saved dataset.

    The light path (default) reads traces and vocabulary only, which every
    learner needs.  `with_tasks=True` regenerates the grounded instances
    from the stored config (generation is deterministic) and verifies the
    regenerated traces match the stored ones.
    """
    root = Path(path)
    try:
        meta = json.loads((root / "meta.json").read_text(encoding="utf-8"))
        trace_lines = (root / "traces.tsv").read_text(encoding="utf-8").splitlines()
        vocab_lines = (root / "vocab.txt").read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read dataset at {path}: {exc}") from exc
    if meta.get("format") != "goalrec-dataset" or meta.get("version") != 1:
        raise IoError(f"not a goalrec dataset directory: {path}")
    cfg = GeneratorConfig(meta["family"], meta["setting"], meta["cfg_seed"], meta["scale"])
    vocab = tuple(ln.split("\t", 1)[1] for ln in vocab_lines if ln)
    episodes = []
    for ln in trace_lines:
        if not ln:
            continue
        label, ids = ln.split("\t", 1)
        episodes.append(Episode(ObservationTrace(tuple(int(x) for x in ids.split()),
                                                 int(label))))
    gen_kwargs = {k: int(v) for k, v in meta.get("gen_kwargs", {}).items()}
    ds = Dataset(cfg, vocab, tuple(episodes), tuple(meta["train_idx"]),
                 tuple(meta["val_idx"]), tuple(meta["heldout_idx"]),
                 meta["n_classes"], meta["seed"],
                 meta.get("plan_noise", DEFAULT_PLAN_NOISE),
                 tuple(sorted(gen_kwargs.items())))
    if not with_tasks or cfg.family == "buy":
        return ds
    rebuilt = build_dataset(cfg, meta["n"], meta["seed"],
                            plan_noise=ds.plan_noise, **gen_kwargs)
    for saved, fresh in zip(ds.episodes, rebuilt.episodes):
        if saved.trace != fresh.trace:
            raise IoError(f"stored traces at {path} do not match regeneration; "
                          f"the directory may be stale or edited")
    return rebuilt
