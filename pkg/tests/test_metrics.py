from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedscore import (
    ClassCounts,
    EvalConfig,
    StrongAnnotationSet,
    TimedEvent,
    accumulate,
    evaluate,
    event_matches,
    f1_class,
    macro_f1,
    match_clip,
)

from strategies import strong_sets, timed_events


def ev(onset, offset, label="Dog"):
    return TimedEvent(onset, offset, label)


def strong(entries):
    return StrongAnnotationSet(
        {clip: tuple(TimedEvent(*e) for e in events) for clip, events in entries.items()}
    )


def _best_for(refs, syss, cfg):
    """Exhaustive maximum one-to-one assignment count over all injections."""

    def best(i, used):
        if i == len(refs):
            return 0
        score = best(i + 1, used)
        for j, candidate in enumerate(syss):
            if j not in used and event_matches(refs[i], candidate, cfg):
                score = max(score, 1 + best(i + 1, used | {j}))
        return score

    return best(0, frozenset())


class TestEventMatches:
    def test_within_both_collars(self):
        assert event_matches(ev(0.0, 1.0), ev(0.15, 1.10))

    def test_long_event_gets_proportional_offset_slack(self):
        assert event_matches(ev(0.0, 10.0, "Frying"), ev(0.0, 8.5, "Frying"))

    def test_label_mismatch(self):
        assert not event_matches(ev(0.0, 1.0, "Dog"), ev(0.0, 1.0, "Cat"))

    def test_onset_beyond_collar(self):
        assert not event_matches(ev(0.0, 1.0), ev(0.21, 1.0))

    def test_collars_are_inclusive(self):
        assert event_matches(ev(0.0, 1.0), ev(0.2, 1.2))

    def test_offset_slack_uses_reference_length(self):
        # System event is long, reference short: slack stays at the fixed collar.
        assert not event_matches(ev(0.0, 1.0), ev(0.0, 2.0))

    def test_custom_config(self):
        cfg = EvalConfig(onset_collar=0.5, offset_collar=0.5, offset_length_pct=0.0)
        assert event_matches(ev(0.0, 1.0), ev(0.4, 1.4), cfg)


class TestMatchClip:
    def test_single_pair(self):
        detail = match_clip([ev(0, 1)], [ev(0.1, 1.05)])
        assert len(detail.pairs) == 1
        assert detail.unmatched_ref == () and detail.unmatched_sys == ()

    def test_missing_system(self):
        detail = match_clip([ev(0, 1)], [])
        assert detail.pairs == () and len(detail.unmatched_ref) == 1

    def test_two_refs_one_sys(self):
        detail = match_clip([ev(0, 1), ev(0.1, 1.1)], [ev(0.05, 1.0)])
        assert len(detail.pairs) == 1
        assert len(detail.unmatched_ref) == 1 and detail.unmatched_sys == ()

    def test_counts(self):
        detail = match_clip(
            [ev(0, 1, "Dog"), ev(0, 1, "Cat")], [ev(0, 1, "Dog"), ev(5, 6, "Dog")]
        )
        counts = detail.counts()
        assert counts["Dog"] == ClassCounts(tp=1, fp=1, fn=0)
        assert counts["Cat"] == ClassCounts(tp=0, fp=0, fn=1)

    def test_augmenting_beats_greedy_order(self):
        # The first reference could grab the only candidate of the second;
        # an augmenting path must recover both pairs.
        refs = [ev(0.0, 1.0), ev(0.1, 1.1)]
        syss = [ev(0.1, 1.05), ev(0.25, 1.2)]
        assert not event_matches(refs[0], syss[1])
        detail = match_clip(refs, syss)
        assert len(detail.pairs) == 2

    @given(
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
        st.randoms(),
    )
    def test_input_order_irrelevant(self, refs, syss, rng):
        before = match_clip(refs, syss)
        rng.shuffle(refs)
        rng.shuffle(syss)
        assert match_clip(refs, syss) == before

    @given(
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
    )
    def test_detail_partitions_both_sides(self, refs, syss):
        # Every event lands in exactly one of: a pair or the unmatched list.
        detail = match_clip(refs, syss)
        paired_refs = [r for r, _ in detail.pairs]
        paired_syss = [s for _, s in detail.pairs]
        assert sorted(paired_refs + list(detail.unmatched_ref)) == sorted(refs)
        assert sorted(paired_syss + list(detail.unmatched_sys)) == sorted(syss)
        assert all(event_matches(r, s) for r, s in detail.pairs)

    @settings(max_examples=60)
    @given(
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
        st.lists(timed_events(st.sampled_from(["Dog", "Cat"])), max_size=5),
    )
    def test_matches_exhaustive_maximum(self, refs, syss):
        cfg = EvalConfig()
        counts = match_clip(refs, syss, cfg).counts()
        for label in {e.label for e in refs} | {e.label for e in syss}:
            expected = _best_for(
                [e for e in refs if e.label == label],
                [e for e in syss if e.label == label],
                cfg,
            )
            assert counts[label].tp == expected


class TestAccumulate:
    def test_sums_class_wise(self):
        details = [
            match_clip([ev(0, 1)], [ev(0, 1)]),
            match_clip([ev(0, 1)], [ev(0, 1)]),
        ]
        assert accumulate(details) == {"Dog": ClassCounts(tp=2)}

    def test_reference_only_clip(self):
        detail = match_clip([ev(0, 1), ev(2, 3), ev(4, 5)], [])
        assert accumulate([detail]) == {"Dog": ClassCounts(fn=3)}

    def test_empty(self):
        assert accumulate([]) == {}


class TestF1:
    def test_perfect(self):
        assert f1_class(ClassCounts(1, 0, 0)) == 1.0

    def test_direct_arithmetic(self):
        assert f1_class(ClassCounts(2, 1, 1)) == pytest.approx(2 / 3, abs=1e-15)

    def test_degenerate_class(self):
        assert f1_class(ClassCounts(0, 0, 0)) == 0.0

    def test_macro_mean(self):
        assert macro_f1({"Dog": 1.0, "Cat": 0.0}) == 0.5

    def test_macro_single_class(self):
        assert macro_f1({"Dog": 0.62}) == 0.62

    def test_macro_empty_raises(self):
        with pytest.raises(ValueError):
            macro_f1({})

    def test_macro_invariant_to_insertion_order(self):
        scores = {"A": 0.1, "B": 0.7, "C": 0.3}
        reversed_scores = dict(reversed(list(scores.items())))
        assert macro_f1(scores) == macro_f1(reversed_scores)

    def test_counts_must_be_non_negative(self):
        with pytest.raises(ValueError):
            ClassCounts(-1, 0, 0)


class TestEvalConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"onset_collar": -0.1},
            {"offset_collar": float("inf")},
            {"offset_length_pct": 1.5},
            {"offset_length_pct": float("nan")},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            EvalConfig(**kwargs)


class TestEvaluate:
    def test_self_evaluation_is_perfect(self):
        corpus = strong({"a.wav": [(0, 1, "Dog"), (0.5, 2, "Cat")], "b.wav": [(1, 2, "Dog")]})
        report = evaluate(corpus, corpus)
        assert report.macro_f1 == 1.0
        assert all(r.f1 == 1.0 for r in report.per_class.values())

    def test_empty_system(self):
        report = evaluate(strong({"a.wav": [(0, 1, "Dog")]}), strong({}))
        assert report.macro_f1 == 0.0
        assert report.per_class["Dog"].counts == ClassCounts(fn=1)

    def test_empty_reference_without_class_list_raises(self):
        with pytest.raises(ValueError):
            evaluate(strong({}), strong({"a.wav": [(0, 1, "Dog")]}))

    def test_clip_only_in_system_is_all_fp(self):
        report = evaluate(
            strong({"a.wav": [(0, 1, "Dog")]}),
            strong({"a.wav": [(0, 1, "Dog")], "b.wav": [(0, 1, "Dog")]}),
        )
        assert report.per_class["Dog"].counts == ClassCounts(tp=1, fp=1)
        assert report.clip_count == 2

    def test_events_never_match_across_clips(self):
        report = evaluate(
            strong({"a.wav": [(0, 1, "Dog")]}),
            strong({"b.wav": [(0, 1, "Dog")]}),
        )
        assert report.per_class["Dog"].counts == ClassCounts(tp=0, fp=1, fn=1)

    def test_pinned_class_list(self):
        report = evaluate(
            strong({"a.wav": [(0, 1, "Dog")]}),
            strong({"a.wav": [(0, 1, "Dog")]}),
            class_list=["Dog", "Cat"],
        )
        assert report.macro_f1 == 0.5
        assert report.per_class["Cat"].absent
        assert report.per_class["Cat"].scored

    def test_system_only_class_reported_but_not_averaged(self):
        report = evaluate(
            strong({"a.wav": [(0, 1, "Dog")]}),
            strong({"a.wav": [(0, 1, "Dog"), (2, 3, "Cat")]}),
        )
        assert report.macro_f1 == 1.0
        assert report.class_list == ("Dog",)
        assert report.per_class["Cat"].counts == ClassCounts(fp=1)
        assert not report.per_class["Cat"].scored

    def test_collar_override_flips_fp_to_tp(self):
        ref = strong({"a.wav": [(1.0, 3.0, "Dog")]})
        sys = strong({"a.wav": [(1.3, 3.0, "Dog")]})
        assert evaluate(ref, sys).per_class["Dog"].counts == ClassCounts(fp=1, fn=1)
        wide = EvalConfig(onset_collar=0.5)
        assert evaluate(ref, sys, wide).per_class["Dog"].counts == ClassCounts(tp=1)

    @settings(max_examples=60)
    @given(strong_sets(max_clips=4), strong_sets(max_clips=4))
    def test_count_identities(self, ref, sys):
        report = evaluate(ref, sys, class_list=["Dog"])  # keep the average well-defined
        ref_events = [e for events in ref.entries.values() for e in events]
        sys_events = [e for events in sys.entries.values() for e in events]
        for label, result in report.per_class.items():
            c = result.counts
            assert c.tp + c.fn == sum(1 for e in ref_events if e.label == label)
            assert c.tp + c.fp == sum(1 for e in sys_events if e.label == label)

    @settings(max_examples=60)
    @given(strong_sets(max_clips=3), strong_sets(max_clips=3))
    def test_collar_monotonicity(self, ref, sys):
        tight = evaluate(ref, sys, EvalConfig(0.1, 0.1, 0.1), class_list=["Dog"])
        loose = evaluate(ref, sys, EvalConfig(0.4, 0.5, 0.2), class_list=["Dog"])
        for label, result in tight.per_class.items():
            assert loose.per_class[label].counts.tp >= result.counts.tp

    def test_macro_equals_mean_over_class_list(self):
        ref = strong({"a.wav": [(0, 1, "Dog"), (2, 3, "Cat")]})
        sys = strong({"a.wav": [(0, 1, "Dog")]})
        report = evaluate(ref, sys)
        mean = math.fsum(report.per_class[c].f1 for c in report.class_list) / len(report.class_list)
        assert abs(report.macro_f1 - mean) <= 1e-12

    def test_report_config_echo(self):
        cfg = EvalConfig(0.3, 0.4, 0.1)
        report = evaluate(strong({"a.wav": [(0, 1, "Dog")]}), strong({}), cfg)
        assert report.config == cfg


class TestEvalReportRendering:
    @pytest.fixture
    def report(self):
        return evaluate(
            strong({"a.wav": [(0, 1, "Dog"), (2, 3, "Cat")]}),
            strong({"a.wav": [(0, 1, "Dog"), (5, 6, "Speech")]}),
        )

    def test_table(self, report):
        table = report.format_table()
        assert "Macro average" in table
        assert "Dog" in table and "Cat" in table
        assert "not averaged" in table  # Speech is outside the class list

    def test_json_document(self, report):
        doc = json.loads(json.dumps(report.to_dict()))
        assert doc["per_class"]["Dog"]["tp"] == 1
        assert doc["macro_f1"] == 0.5
        assert doc["class_list"] == ["Cat", "Dog"]

    def test_records(self, report):
        records = report.to_records()
        assert records[-1]["record"] == "macro"
        assert {r["class"] for r in records[:-1]} == {"Cat", "Dog", "Speech"}
