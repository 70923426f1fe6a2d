"""Command-line front end.

Subcommands:

* ``generate``  build a labeled trace dataset and write it to a directory
* ``plan``      solve one generated instance and print its plan
* ``train``     fit a boosted-trees or sequence model on a dataset directory
* ``recognize`` predict the goal of one (truncated) trace
* ``eval``      score methods over a dataset at the standard ratios
* ``curve``     training-set-size learning curve for a learner

Hyperparameters come from an optional key=value config file; see
``parse_config_file`` for the accepted keys.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .domains import FAMILIES, GeneratorConfig, generate_task, instance_source
from .errors import GoalrecError, IoError
from .gbt import GbtConfig, load_gbt, save_gbt
from .harness import (DEFAULT_PLAN_NOISE, DEFAULT_RATIOS, TrainedModel, build_dataset,
                      emit_report, evaluate, learning_curve_eval, load_dataset,
                      merge_reports, save_dataset, train_method, truncate, write_report)
from .planner import gbfs_plan
from .recognizer import DEFAULT_THRESHOLD, recognize_trace
from .seq import SeqHyper, load_seq, save_seq

_CONFIG_KEYS = {
    "gbt.n_rounds": int, "gbt.max_depth": int, "gbt.shrinkage": float, "gbt.l2": float,
    "seq.d_embed": int, "seq.d_hidden": int, "seq.lr": float, "seq.batch": int,
    "seq.epochs": int, "seq.clip": float,
}


def parse_config_file(path: str) -> dict:
    """Read `key = value` lines; blank lines and `#` comments are ignored."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IoError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_KEYS:
            raise IoError(f"{path}:{lineno}: unknown key '{key}' "
                          f"(known: {', '.join(sorted(_CONFIG_KEYS))})")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise IoError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _gbt_config(values: dict) -> GbtConfig:
    base = GbtConfig()
    return GbtConfig(
        n_rounds=values.get("gbt.n_rounds", base.n_rounds),
        max_depth=values.get("gbt.max_depth", base.max_depth),
        shrinkage=values.get("gbt.shrinkage", base.shrinkage),
        l2=values.get("gbt.l2", base.l2),
    )


def _seq_hyper(values: dict) -> SeqHyper:
    base = SeqHyper()
    return SeqHyper(
        d_embed=values.get("seq.d_embed", base.d_embed),
        d_hidden=values.get("seq.d_hidden", base.d_hidden),
        lr=values.get("seq.lr", base.lr),
        batch=values.get("seq.batch", base.batch),
        epochs=values.get("seq.epochs", base.epochs),
        clip=values.get("seq.clip", base.clip),
    )


def _load_values(args) -> dict:
    return parse_config_file(args.config) if getattr(args, "config", None) else {}


def _cfg_from(args) -> GeneratorConfig:
    return GeneratorConfig(args.family, args.setting, args.seed, args.scale)


def _gen_kwargs(args) -> dict:
    kwargs = {}
    if getattr(args, "grid_pool_size", None) is not None:
        kwargs["pool_size"] = args.grid_pool_size
    if getattr(args, "grid_locks", None) is not None:
        kwargs["n_locks"] = args.grid_locks
    if getattr(args, "grid_keys", None) is not None:
        kwargs["n_keys"] = args.grid_keys
    return kwargs


def _load_trained(path: str) -> TrainedModel:
    if not Path(path).is_file():
        raise IoError(f"model file {path} does not exist")
    try:
        model = load_gbt(path)
        return TrainedModel("gbt", model, model.vocab_size)
    except (ValueError, UnicodeDecodeError):
        pass
    try:
        model = load_seq(path)
        return TrainedModel("seq", model, model.vocab_size)
    except ValueError as exc:
        raise IoError(f"{path} is neither a boosted-trees nor a sequence model file") from exc


# ── Subcommands ────────────────────────────────────────────────────────────


def _cmd_generate(args) -> int:
    cfg = _cfg_from(args)
    ds = build_dataset(cfg, args.n, args.split_seed, plan_noise=args.plan_noise,
                       **_gen_kwargs(args))
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.episodes)} traces ({cfg.family} set{cfg.setting}, "
          f"vocab {len(ds.vocab)}) to {args.out}")
    return 0


def _cmd_plan(args) -> int:
    cfg = _cfg_from(args)
    task = generate_task(cfg, **_gen_kwargs(args))
    if args.show_instance:
        print(instance_source(cfg, **_gen_kwargs(args)), end="")
    plan = gbfs_plan(task, task.hypotheses[task.true_goal], seed=args.plan_seed,
                     noise=args.plan_noise)
    print(f"; goal {task.true_goal}, {len(plan.actions)} steps")
    for a in plan.actions:
        print(task.actions[a].signature)
    return 0


def _cmd_train(args) -> int:
    values = _load_values(args)
    ds = load_dataset(args.dataset)
    model = train_method(ds, args.method, gbt_config=_gbt_config(values),
                         seq_hyper=_seq_hyper(values), seed=args.train_seed)
    if model.kind == "gbt":
        save_gbt(model.model, args.out)
    else:
        save_seq(model.model, args.out)
    print(f"trained {model.kind} on {len(ds.train_idx)} traces -> {args.out}")
    return 0


def _cmd_recognize(args) -> int:
    if args.method in ("lgr", "lgr+prior"):
        ds = load_dataset(args.dataset, with_tasks=True)
        ep = ds.episodes[args.index]
        if ep.task is None:
            print("unsupported: this family has no grounded task for the "
                  "landmark recognizer", file=sys.stderr)
            return 2
        prefix = truncate(ep.task_trace, args.ratio)
        res = recognize_trace(ep.task, None, prefix, threshold=args.theta,
                              use_priors=args.method == "lgr+prior")
        print(f"predicted {res.predicted} (label {ep.trace.label})")
        print("scores " + " ".join(f"{s:.4f}" for s in res.scores))
        if res.posterior is not None:
            print("posterior " + " ".join(f"{p:.4f}" for p in res.posterior))
        return 0
    ds = load_dataset(args.dataset)
    model = _load_trained(args.method)
    prefix = truncate(ds.episodes[args.index].trace, args.ratio)
    print(f"predicted {model.predict(prefix.actions)} "
          f"(label {ds.episodes[args.index].trace.label})")
    return 0


def _cmd_eval(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in ("lgr", "lgr+prior", "gbt", "seq")]
    if unknown:
        raise IoError(f"unknown methods: {', '.join(unknown)}")
    values = _load_values(args)
    needs_tasks = any(m.startswith("lgr") for m in methods)
    ds = load_dataset(args.dataset, with_tasks=needs_tasks)
    reports = []
    for m in methods:
        if m in ("lgr", "lgr+prior"):
            reports.append(evaluate(m, ds, args.ratios, threshold=args.theta))
        else:
            model = train_method(ds, m, gbt_config=_gbt_config(values),
                                 seq_hyper=_seq_hyper(values), seed=args.train_seed)
            reports.append(evaluate(model, ds, args.ratios))
    report = merge_reports(*reports)
    include_seconds = not args.no_seconds
    print(emit_report(report, "table", include_seconds=include_seconds), end="")
    if args.out:
        write_report(report, args.out, include_seconds=include_seconds)
        print(f"wrote {args.out}")
    return 0


def _cmd_curve(args) -> int:
    cfg = _cfg_from(args)
    values = _load_values(args)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    points = learning_curve_eval(cfg, sizes, args.method, args.split_seed,
                                 ratio=args.ratio, gbt_config=_gbt_config(values),
                                 seq_hyper=_seq_hyper(values))
    lines = ["size,accuracy"] + [f"{n},{acc}" for n, acc in points]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {args.out}: {exc}") from exc
    return 0


# ── Argument parsing ───────────────────────────────────────────────────────


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("setting", type=int, choices=(1, 2))
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--grid-pool-size", type=int, default=None)
    p.add_argument("--grid-locks", type=int, default=None)
    p.add_argument("--grid-keys", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="goalrec", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build and save a trace dataset")
    _add_family_args(p)
    p.add_argument("--n", type=int, required=True, help="trace count (>= 130)")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--plan-noise", type=float, default=DEFAULT_PLAN_NOISE)
    p.add_argument("--out", required=True, help="dataset directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("plan", help="solve one instance and print the plan")
    _add_family_args(p)
    p.add_argument("--plan-seed", type=int, default=0)
    p.add_argument("--plan-noise", type=float, default=0.0)
    p.add_argument("--show-instance", action="store_true")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("train", help="fit a learner on a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=("gbt", "seq"), required=True)
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--config", help="key=value hyperparameter file")
    p.add_argument("--train-seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("recognize", help="predict the goal of one trace prefix")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", required=True,
                   help="'lgr', 'lgr+prior', or a model file path")
    p.add_argument("--index", type=int, default=0, help="episode index")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_recognize)

    p = sub.add_parser("eval", help="score methods over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--methods", default="lgr,lgr+prior,gbt,seq",
                   help="comma-separated subset of lgr,lgr+prior,gbt,seq")
    p.add_argument("--ratios", type=lambda s: tuple(float(x) for x in s.split(",")),
                   default=DEFAULT_RATIOS)
    p.add_argument("--theta", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--config", help="key=value hyperparameter file")
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--no-seconds", action="store_true",
                   help="blank the timing column (reproducible output)")
    p.add_argument("--out", help="write the CSV report here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("curve", help="learning curve over training-set sizes")
    _add_family_args(p)
    p.add_argument("--sizes", required=True, help="comma-separated, increasing")
    p.add_argument("--method", choices=("gbt", "seq"), required=True)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--config", help="key=value hyperparameter file")
    p.add_argument("--out", help="write the curve CSV here")
    p.set_defaults(func=_cmd_curve)
    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GoalrecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
