"""Rank applicable suggestions by heat, popularity, or their product.

The heat map counts, per body line, how many applicable suggestions cover
that line; a suggestion's heat is the sum over its lines.  Popularity is how
often the model proposed the range.  The combined score multiplies the two.
"""

from __future__ import annotations

from dataclasses import dataclass

from carve.method_model import LongMethod
from carve.suggestions import ExtractSuggestion

HEAT = "heat"
POPULARITY = "popularity"
COMBINED = "combined"
STRATEGIES = (HEAT, POPULARITY, COMBINED)


@dataclass(frozen=True)
class HeatMap:
    """Per-line coverage frequency over the host method body."""

    start_line: int
    end_line: int
    counts: tuple[int, ...]

    def frequency(self, line: int) -> int:
        if line < self.start_line or line > self.end_line:
            return 0
        return self.counts[line - self.start_line]


@dataclass(frozen=True)
class RankScore:
    heat: int
    popularity: int

    @property
    def combined(self) -> int:
        return self.heat * self.popularity

    def value(self, strategy: str) -> int:
        if strategy == HEAT:
            return self.heat
        if strategy == POPULARITY:
            return self.popularity
        if strategy == COMBINED:
            return self.combined
        raise ValueError(f"unknown ranking strategy: {strategy}")

    def to_json(self) -> dict:
        return {"heat": self.heat, "popularity": self.popularity, "combined": self.combined}


def build_heatmap(host: LongMethod, applicable: list[ExtractSuggestion]) -> HeatMap:
    """Tally, for every body line, how many applicable suggestions cover it."""
    lo, hi = host.body_start, host.body_end
    counts = [0] * (hi - lo + 1)
    for s in applicable:
        for line in range(max(s.start_line, lo), min(s.end_line, hi) + 1):
            counts[line - lo] += 1
    return HeatMap(start_line=lo, end_line=hi, counts=tuple(counts))


def score(
    applicable: list[ExtractSuggestion],
    heatmap: HeatMap,
    strategy: str = COMBINED,
) -> list[tuple[ExtractSuggestion, RankScore]]:
    """Order suggestions best-first under the chosen strategy.

    Ties break deterministically: higher popularity, then longer fragment,
    then smaller start line.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown ranking strategy: {strategy}")
    scored = []
    for s in applicable:
        heat = sum(heatmap.frequency(line) for line in range(s.start_line, s.end_line + 1))
        scored.append((s, RankScore(heat=heat, popularity=s.occurrence_count)))
    scored.sort(
        key=lambda pair: (
            -pair[1].value(strategy),
            -pair[1].popularity,
            -(pair[0].end_line - pair[0].start_line),
            pair[0].start_line,
        )
    )
    return scored


def top_n(ordered: list, n: int) -> list:
    if n < 1:
        raise ValueError("n must be at least 1")
    return ordered[:n]
