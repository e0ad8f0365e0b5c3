"""Heat map construction and ranking identities."""

from __future__ import annotations

import random
from dataclasses import replace

import pytest

from carve.ranking import COMBINED, HEAT, POPULARITY, build_heatmap, score, top_n
from helpers import make_flat_method, suggestion


def test_single_suggestion_heatmap():
    method = make_flat_method(12)
    lo = method.body_start
    heatmap = build_heatmap(method, [suggestion(lo + 1, lo + 3)])
    assert heatmap.frequency(lo) == 0
    assert all(heatmap.frequency(line) == 1 for line in range(lo + 1, lo + 4))
    assert heatmap.frequency(lo + 4) == 0


def test_overlapping_suggestions_sum_by_brute_force():
    method = make_flat_method(12)
    lo = method.body_start
    spans = [(lo, lo + 4), (lo + 2, lo + 6), (lo + 2, lo + 2)]
    applicable = [suggestion(*span) for span in spans]
    heatmap = build_heatmap(method, applicable)
    for line in range(method.body_start, method.body_end + 1):
        expected = sum(1 for a, b in spans if a <= line <= b)
        assert heatmap.frequency(line) == expected


def test_empty_applicable_list_is_all_zero():
    method = make_flat_method(6)
    heatmap = build_heatmap(method, [])
    assert all(
        heatmap.frequency(line) == 0
        for line in range(method.body_start, method.body_end + 1)
    )


def test_score_arithmetic():
    # Two lines with frequencies 3 and 2 give heat 5; popularity 4 makes the
    # combined score 20.
    method = make_flat_method(8)
    lo = method.body_start
    a = suggestion(lo, lo + 1, name="a", count=4)
    fillers = [
        suggestion(lo, lo, name="f1", count=1),
        suggestion(lo, lo, name="f2", count=1),
        suggestion(lo + 1, lo + 2, name="f3", count=1),
    ]
    heatmap = build_heatmap(method, [a, *fillers])
    assert heatmap.frequency(lo) == 3
    assert heatmap.frequency(lo + 1) == 2
    ranked = dict(score([a], heatmap, COMBINED))
    assert ranked[a].heat == 5
    assert ranked[a].popularity == 4
    assert ranked[a].combined == 20


def test_single_suggestion_ranks_first_under_every_strategy():
    method = make_flat_method(8)
    only = suggestion(method.body_start, method.body_start + 2, count=2)
    heatmap = build_heatmap(method, [only])
    for strategy in (HEAT, POPULARITY, COMBINED):
        assert score([only], heatmap, strategy)[0][0] is only


def test_tie_break_is_deterministic():
    method = make_flat_method(12)
    lo = method.body_start
    # Disjoint, same length, same popularity: same heat and combined score.
    a = suggestion(lo, lo + 1, name="a", count=2)
    b = suggestion(lo + 4, lo + 5, name="b", count=2)
    heatmap = build_heatmap(method, [a, b])
    first = score([a, b], heatmap, COMBINED)
    second = score([b, a], heatmap, COMBINED)
    assert [s.span for s, _ in first] == [s.span for s, _ in second]
    assert first[0][0].start_line < first[1][0].start_line  # smaller start wins


def test_unknown_strategy_rejected():
    method = make_flat_method(6)
    with pytest.raises(ValueError):
        score([], build_heatmap(method, []), "magic")


def test_double_counting_identity_on_random_sets():
    rng = random.Random(31337)
    for _ in range(300):
        method = make_flat_method(rng.randint(4, 40))
        lo, hi = method.body_start, method.body_end
        applicable = []
        for _ in range(rng.randint(0, 10)):
            a = rng.randint(lo, hi)
            b = rng.randint(a, hi)
            applicable.append(suggestion(a, b, count=rng.randint(1, 5)))
        heatmap = build_heatmap(method, applicable)
        total_frequency = sum(heatmap.frequency(line) for line in range(lo, hi + 1))
        total_lines = sum(s.line_count for s in applicable)
        assert total_frequency == total_lines


def test_combined_order_invariant_under_popularity_scaling():
    rng = random.Random(9001)
    for _ in range(300):
        method = make_flat_method(rng.randint(6, 30))
        lo, hi = method.body_start, method.body_end
        applicable = []
        for i in range(rng.randint(1, 9)):
            a = rng.randint(lo, hi)
            b = rng.randint(a, hi)
            applicable.append(suggestion(a, b, name=f"s{i}", count=rng.randint(1, 6)))
        heatmap = build_heatmap(method, applicable)
        base = [s.span for s, _ in score(applicable, heatmap, COMBINED)]
        factor = rng.choice((2, 3, 7))
        scaled = [
            replace(s, occurrence_count=s.occurrence_count * factor)
            for s in applicable
        ]
        scaled_order = [s.span for s, _ in score(scaled, heatmap, COMBINED)]
        assert scaled_order == base


def test_score_output_is_permutation_of_input():
    rng = random.Random(55)
    for _ in range(100):
        method = make_flat_method(rng.randint(4, 20))
        lo, hi = method.body_start, method.body_end
        applicable = []
        for i in range(rng.randint(0, 8)):
            a = rng.randint(lo, hi)
            b = rng.randint(a, hi)
            applicable.append(suggestion(a, b, name=f"s{i}", count=rng.randint(1, 4)))
        ranked = score(applicable, build_heatmap(method, applicable))
        assert sorted(id(s) for s, _ in ranked) == sorted(id(s) for s in applicable)


def test_heat_monotone_under_fragment_extension():
    rng = random.Random(606)
    for _ in range(100):
        method = make_flat_method(rng.randint(6, 30))
        lo, hi = method.body_start, method.body_end
        applicable = [
            suggestion(rng.randint(lo, hi), hi, count=1) for _ in range(rng.randint(1, 6))
        ]
        heatmap = build_heatmap(method, applicable)
        a = rng.randint(lo + 1, hi)
        b = rng.randint(a, hi)
        inner = suggestion(a, b)
        outer = suggestion(a - 1, b)
        inner_heat = dict(score([inner], heatmap))[inner].heat
        outer_heat = dict(score([outer], heatmap))[outer].heat
        assert outer_heat >= inner_heat


def test_top_n_cuts_and_validates():
    items = list(range(9))
    assert top_n(items, 5) == [0, 1, 2, 3, 4]
    assert top_n(items[:3], 5) == [0, 1, 2]
    with pytest.raises(ValueError):
        top_n(items, 0)


def test_reference_ranked_order(reference_method):
    # Hand-scored ordering of the three applicable reference fragments.
    applicable = [
        suggestion(157, 158, name="emptyPropertyArray", count=3),
        suggestion(157, 163, name="buildPropertyArray", count=2),
        suggestion(159, 163, name="readPropertyLoop", count=1),
    ]
    heatmap = build_heatmap(reference_method, applicable)
    ranked = score(applicable, heatmap, COMBINED)
    spans = [s.span for s, _ in ranked]
    scores = [r.combined for _, r in ranked]
    assert spans == [(157, 163), (157, 158), (159, 163)]
    assert scores == [28, 12, 10]
