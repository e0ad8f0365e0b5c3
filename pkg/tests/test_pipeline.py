"""End-to-end pipeline wiring."""

from __future__ import annotations

from carve.filtering import FilterConfig
from carve.gateway import LlmGateway, LlmParams
from carve.pipeline import run_pipeline
from carve.ranking import HEAT, POPULARITY
from conftest import REFERENCE_DIR


def _gateway(**params) -> LlmGateway:
    return LlmGateway(
        LlmParams(**params), cache_mode="replay", cache_dir=REFERENCE_DIR / "cache"
    )


def test_enhancement_can_be_disabled(reference_method):
    enhanced = run_pipeline(reference_method, _gateway(), FilterConfig())
    plain = run_pipeline(reference_method, _gateway(), FilterConfig(), enhance=False)
    assert {s.span for s in enhanced.applicable} == {(157, 158), (157, 163), (159, 163)}
    assert {s.span for s in plain.applicable} == {(157, 158), (157, 163), (160, 163)}


def test_rank_strategies_reorder_applicable(reference_method):
    by_popularity = run_pipeline(
        reference_method, _gateway(), FilterConfig(), rank_strategy=POPULARITY
    )
    assert [s.span for s, _ in by_popularity.ranked][0] == (157, 158)
    by_heat = run_pipeline(
        reference_method, _gateway(), FilterConfig(), rank_strategy=HEAT
    )
    assert [s.span for s, _ in by_heat.ranked][0] == (157, 163)


def test_fewer_iterations_shrink_the_raw_set(reference_method):
    all_ten = run_pipeline(reference_method, _gateway(), FilterConfig())
    only_two = run_pipeline(reference_method, _gateway(iterations=2), FilterConfig())
    assert len(only_two.raw) < len(all_ten.raw)


def test_top_truncates(reference_method):
    result = run_pipeline(reference_method, _gateway(), FilterConfig())
    assert len(result.top(2)) == 2
    assert len(result.top(50)) == len(result.applicable)
