"""End-to-end wiring: generate, triage, enhance, rank for one host method."""

from __future__ import annotations

from dataclasses import dataclass

from carve.enhancement import enhance_all
from carve.filtering import FilterConfig, TriagedSet, triage
from carve.gateway import LlmGateway
from carve.method_model import LongMethod
from carve.ranking import COMBINED, RankScore, build_heatmap, score, top_n
from carve.suggestions import ExtractSuggestion, SuggestionSet


@dataclass
class PipelineResult:
    method: LongMethod
    raw: SuggestionSet
    triaged: TriagedSet
    applicable: list[ExtractSuggestion]
    ranked: list[tuple[ExtractSuggestion, RankScore]]

    def top(self, n: int) -> list[tuple[ExtractSuggestion, RankScore]]:
        return top_n(self.ranked, n)


def run_pipeline(
    method: LongMethod,
    gateway: LlmGateway,
    cfg: FilterConfig | None = None,
    enhance: bool = True,
    rank_strategy: str = COMBINED,
    fixpoint: bool = False,
) -> PipelineResult:
    """Run the full suggestion pipeline for one parsed method."""
    cfg = cfg or FilterConfig()
    raw = gateway.generate(method, fixpoint=fixpoint)
    triaged = triage(method, raw, cfg)
    useful = [v.suggestion for v in triaged.useful]
    applicable = enhance_all(method, useful, cfg) if enhance else list(useful)
    heatmap = build_heatmap(method, applicable)
    ranked = score(applicable, heatmap, rank_strategy)
    return PipelineResult(
        method=method,
        raw=raw,
        triaged=triaged,
        applicable=applicable,
        ranked=ranked,
    )
