"""Dataset building, truncation, evaluation, reports, persistence."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import pytest

from goalrec import (
    Dataset,
    Episode,
    EvalReport,
    EvalRow,
    GbtConfig,
    GeneratorConfig,
    ObservationTrace,
    Plan,
    SeqHyper,
    build_dataset,
    emit_report,
    evaluate,
    learning_curve_eval,
    merge_reports,
    parse_report,
    train_method,
    truncate,
    validate,
    write_report,
)
from goalrec.errors import InsufficientTracesError, IoError
from goalrec.harness import load_dataset, save_dataset


@pytest.fixture(scope="module")
def buy_ds():
    return build_dataset(GeneratorConfig("buy", 1, 0, 1.0), 200, seed=0)


@pytest.fixture(scope="module")
def words_ds():
    return build_dataset(GeneratorConfig("blockwords", 1, 0, 0.25), 130, seed=0)


@dataclass(frozen=True)
class FirstTokenModel:
    """Reads the label straight off a trace's first action id."""

    kind: str = "first-token"

    def predict_batch(self, traces):
        return [t[0] for t in traces]


@dataclass(frozen=True)
class ConstantModel:
    kind: str = "constant"

    def predict_batch(self, traces):
        return [0] * len(traces)


def synthetic_dataset(n=12):
    episodes = []
    for i in range(n):
        label = i % 2
        episodes.append(Episode(ObservationTrace((label, 2, 3, 2), label)))
    idx = tuple(range(n))
    return Dataset(GeneratorConfig("buy", 2, 0, 1.0), ("a", "b", "c", "d"),
                   tuple(episodes), idx, (), idx, n_classes=2)


# ── Splits ─────────────────────────────────────────────────────────────────


def test_split_reserves_heldout_then_80_20(buy_ds):
    assert len(buy_ds.heldout_idx) == 100
    assert len(buy_ds.train_idx) == 80
    assert len(buy_ds.val_idx) == 20
    blocks = [set(buy_ds.train_idx), set(buy_ds.val_idx), set(buy_ds.heldout_idx)]
    assert blocks[0] | blocks[1] | blocks[2] == set(range(200))
    assert not (blocks[0] & blocks[1] or blocks[0] & blocks[2] or blocks[1] & blocks[2])


def test_minimum_dataset_splits_100_24_6():
    ds = build_dataset(GeneratorConfig("buy", 1, 0, 1.0), 130, seed=0)
    assert (len(ds.heldout_idx), len(ds.train_idx), len(ds.val_idx)) == (100, 24, 6)


def test_too_few_traces_are_rejected():
    with pytest.raises(InsufficientTracesError):
        build_dataset(GeneratorConfig("buy", 1, 0, 1.0), 129)


def test_split_is_seed_sensitive_but_reproducible(buy_ds):
    again = build_dataset(GeneratorConfig("buy", 1, 0, 1.0), 200, seed=0)
    assert again.heldout_idx == buy_ds.heldout_idx
    other = build_dataset(GeneratorConfig("buy", 1, 0, 1.0), 200, seed=1)
    assert other.heldout_idx != buy_ds.heldout_idx


# ── Truncation ─────────────────────────────────────────────────────────────


def test_truncate_takes_the_ceiling():
    t = ObservationTrace(tuple(range(10)), 3)
    assert truncate(t, 0.3).actions == (0, 1, 2)
    assert truncate(t, 0.3).label == 3
    assert truncate(ObservationTrace(tuple(range(7)), 0), 0.5).actions == (0, 1, 2, 3)
    assert truncate(ObservationTrace(tuple(range(70)), 0), 0.1).actions == tuple(range(7))


def test_truncate_never_returns_an_empty_prefix():
    t = ObservationTrace((9,), 0)
    assert truncate(t, 0.1).actions == (9,)


def test_truncate_at_full_ratio_is_identity():
    t = ObservationTrace(tuple(range(13)), 1)
    assert truncate(t, 1.0) == t


def test_truncations_nest():
    t = ObservationTrace(tuple(range(23)), 0)
    ratios = (0.1, 0.3, 0.5, 0.7, 1.0)
    prefixes = [truncate(t, r).actions for r in ratios]
    for shorter, longer in zip(prefixes, prefixes[1:]):
        assert longer[:len(shorter)] == shorter


def test_truncate_rejects_bad_ratios():
    t = ObservationTrace((1, 2), 0)
    with pytest.raises(ValueError):
        truncate(t, 0.0)
    with pytest.raises(ValueError):
        truncate(t, 1.2)


# ── Dataset content ────────────────────────────────────────────────────────


def test_every_generated_trace_solves_its_instance(words_ds):
    for ep in words_ds.episodes:
        goal = ep.task.hypotheses[ep.trace.label]
        result = validate(ep.task, Plan(ep.task_trace.actions, 0), goal)
        assert result.ok, result
        for vocab_id, task_id in zip(ep.trace.actions, ep.task_trace.actions):
            assert words_ds.vocab[vocab_id] == ep.task.actions[task_id].signature


def test_simulated_families_carry_no_tasks(buy_ds):
    assert all(ep.task is None and ep.task_trace is None for ep in buy_ds.episodes)
    assert buy_ds.n_classes == 2
    assert len(buy_ds.vocab) == 6


# ── Evaluation ─────────────────────────────────────────────────────────────


def test_landmark_methods_blank_out_on_simulated_traces(buy_ds):
    for method in ("lgr", "lgr+prior"):
        report = evaluate(method, buy_ds, ratios=(0.3, 0.7))
        assert [r.accuracy for r in report.rows] == [None, None]
        assert [r.seconds for r in report.rows] == [None, None]
        assert {r.method for r in report.rows} == {method}


def test_a_label_revealing_model_scores_100_everywhere():
    ds = synthetic_dataset()
    report = evaluate(FirstTokenModel(), ds, ratios=(0.1, 0.5, 1.0))
    assert [r.accuracy for r in report.rows] == [100.0, 100.0, 100.0]
    assert all(r.method == "first-token" for r in report.rows)
    assert all(r.seconds is not None for r in report.rows)


def test_a_constant_guess_matches_the_label_marginals(buy_ds):
    report = evaluate(ConstantModel(), buy_ds, ratios=(0.1, 0.7))
    accs = {r.accuracy for r in report.rows}
    assert len(accs) == 1
    assert accs == {80.0}  # the heldout block's label-0 share


def test_landmark_recognition_works_late_in_a_trace(words_ds):
    report = evaluate("lgr", words_ds, ratios=(0.7,))
    assert report.rows[0].accuracy >= 80.0
    assert report.rows[0].seconds > 0.0


def test_evaluate_leaves_the_dataset_untouched(words_ds):
    snapshot = copy.deepcopy(words_ds)
    evaluate("lgr", words_ds, ratios=(0.1,))
    evaluate(ConstantModel(), words_ds, ratios=(0.1,))
    assert words_ds == snapshot


def test_evaluate_validates_its_inputs(buy_ds):
    with pytest.raises(ValueError):
        evaluate("nearest-neighbor", buy_ds)
    with pytest.raises(ValueError):
        evaluate("lgr", buy_ds, ratios=(0.5, 1.3))
    with pytest.raises(ValueError):
        EvalReport((EvalRow("m", "buy", 1, 0.5, 120.0, None),))


# ── Trained methods ────────────────────────────────────────────────────────


def test_train_method_is_deterministic(buy_ds):
    small = buy_ds.train_idx[:20]
    a = train_method(buy_ds, "gbt", indices=small, gbt_config=GbtConfig(n_rounds=5))
    b = train_method(buy_ds, "gbt", indices=small, gbt_config=GbtConfig(n_rounds=5))
    assert a.model == b.model
    hyper = SeqHyper(d_embed=8, d_hidden=8, epochs=1)
    s1 = train_method(buy_ds, "seq", indices=small, seq_hyper=hyper, seed=3)
    s2 = train_method(buy_ds, "seq", indices=small, seq_hyper=hyper, seed=3)
    for name in s1.model.params:
        assert np.array_equal(s1.model.params[name], s2.model.params[name])


def test_batch_predictions_match_single_calls(buy_ds):
    prefixes = [truncate(buy_ds.episodes[i].trace, 0.5).actions
                for i in buy_ds.heldout_idx[:10]]
    for kind, kwargs in (("gbt", {"gbt_config": GbtConfig(n_rounds=5)}),
                         ("seq", {"seq_hyper": SeqHyper(d_embed=8, d_hidden=8, epochs=1)})):
        model = train_method(buy_ds, kind, indices=buy_ds.train_idx[:20], **kwargs)
        assert model.predict_batch(prefixes) == [model.predict(p) for p in prefixes]


def test_prefix_augmentation_changes_what_is_learned(buy_ds):
    small = buy_ds.train_idx[:20]
    plain = train_method(buy_ds, "gbt", indices=small,
                         gbt_config=GbtConfig(n_rounds=5), augment_ratios=None)
    augmented = train_method(buy_ds, "gbt", indices=small,
                             gbt_config=GbtConfig(n_rounds=5))
    assert plain.model != augmented.model


def test_unknown_learner_kind_is_rejected(buy_ds):
    with pytest.raises(ValueError):
        train_method(buy_ds, "transformer")


# ── Learning curve ─────────────────────────────────────────────────────────


def test_learning_curve_eval_checks_sizes():
    with pytest.raises(ValueError):
        learning_curve_eval(GeneratorConfig("buy", 1, 0, 1.0), [], "gbt")
    with pytest.raises(ValueError):
        learning_curve_eval(GeneratorConfig("buy", 1, 0, 1.0), [16, 8], "gbt")


def test_learning_curve_eval_scores_growing_pools():
    points = learning_curve_eval(GeneratorConfig("buy", 1, 0, 1.0), [8, 16], "gbt",
                                 gbt_config=GbtConfig(n_rounds=5))
    assert [n for n, _ in points] == [8, 16]
    assert all(0.0 <= acc <= 100.0 for _, acc in points)


# ── Reports ────────────────────────────────────────────────────────────────


def sample_report():
    return EvalReport((
        EvalRow("lgr", "buy", 1, 0.3, None, None),
        EvalRow("gbt", "buy", 1, 0.1, 97.5, 0.000125),
        EvalRow("gbt", "buy", 1, 0.3, 100.0, 2.5e-05),
    ))


def test_csv_round_trip_preserves_every_value():
    report = sample_report()
    parsed = parse_report(emit_report(report))
    assert parsed.rows == (report.rows[1], report.rows[2], report.rows[0])


def test_csv_rows_are_sorted_and_blanks_are_dashes():
    lines = emit_report(sample_report()).splitlines()
    assert lines[0] == "method,domain,setting,ratio,accuracy,seconds"
    assert len(lines) == 4
    assert lines[1].startswith("gbt,buy,1,0.1,")
    assert lines[3] == "lgr,buy,1,0.3,-,-"


def test_empty_report_is_header_only():
    text = emit_report(EvalReport(()))
    assert text == "method,domain,setting,ratio,accuracy,seconds\n"
    assert parse_report(text).rows == ()


def test_seconds_can_be_suppressed_for_reproducibility():
    text = emit_report(sample_report(), include_seconds=False)
    for line in text.splitlines()[1:]:
        assert line.endswith(",-")


def test_table_format_aligns_and_dashes():
    text = emit_report(sample_report(), fmt="table")
    lines = text.splitlines()
    assert lines[0].split() == ["method", "domain", "set", "ratio", "acc%", "sec/pred"]
    assert "100.00" in text
    assert " - " in lines[-1] or lines[-1].endswith("-")
    with pytest.raises(ValueError):
        emit_report(sample_report(), fmt="yaml")


def test_parse_rejects_malformed_text():
    with pytest.raises(IoError):
        parse_report("not,a,header\n")
    with pytest.raises(IoError):
        parse_report("method,domain,setting,ratio,accuracy,seconds\nonly,three,cells\n")


def test_write_report_wraps_os_errors(tmp_path):
    with pytest.raises(IoError):
        write_report(sample_report(), str(tmp_path / "missing" / "out.csv"))
    target = tmp_path / "out.csv"
    write_report(sample_report(), str(target))
    assert parse_report(target.read_text())


def test_merge_concatenates_rows():
    a, b = sample_report(), EvalReport((EvalRow("seq", "grid", 2, 0.5, 50.0, 0.001),))
    merged = merge_reports(a, b)
    assert merged.rows == a.rows + b.rows


# ── Dataset persistence ────────────────────────────────────────────────────


def test_save_load_round_trip_for_simulated_traces(tmp_path, buy_ds):
    path = str(tmp_path / "buyds")
    save_dataset(buy_ds, path)
    loaded = load_dataset(path)
    assert loaded == buy_ds


def test_light_load_drops_tasks_but_keeps_traces(tmp_path, words_ds):
    path = str(tmp_path / "wordsds")
    save_dataset(words_ds, path)
    loaded = load_dataset(path)
    assert loaded.vocab == words_ds.vocab
    assert all(ep.task is None for ep in loaded.episodes)
    assert [ep.trace for ep in loaded.episodes] == [ep.trace for ep in words_ds.episodes]
    assert loaded.train_idx == words_ds.train_idx


def test_full_load_regenerates_and_verifies_tasks(tmp_path, words_ds):
    path = str(tmp_path / "wordsds")
    save_dataset(words_ds, path)
    rebuilt = load_dataset(path, with_tasks=True)
    assert rebuilt == words_ds


def test_tampered_traces_fail_verification(tmp_path, words_ds):
    path = tmp_path / "wordsds"
    save_dataset(words_ds, str(path))
    traces = path / "traces.tsv"
    first = traces.read_text().splitlines()
    label, ids = first[0].split("\t")
    first[0] = f"{label}\t{ids} 0"
    traces.write_text("\n".join(first) + "\n")
    with pytest.raises(IoError):
        load_dataset(str(path), with_tasks=True)
    light = load_dataset(str(path))  # the light path takes the file at face value
    assert len(light.episodes) == len(words_ds.episodes)


def test_loading_junk_directories_is_rejected(tmp_path):
    with pytest.raises(IoError):
        load_dataset(str(tmp_path / "nowhere"))
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "meta.json").write_text('{"format": "other"}')
    (bad / "traces.tsv").write_text("")
    (bad / "vocab.txt").write_text("")
    with pytest.raises(IoError):
        load_dataset(str(bad))
