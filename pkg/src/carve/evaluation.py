"""Recall benchmarking against oracle corpora.

An oracle corpus is a JSON-lines file of developer-performed extractions
plus a directory of the source files they came from.  A suggestion matches
an oracle entry when its combined start/end deviation stays within m% of
the host method's length; Recall@n is the fraction of oracle methods with a
match in the top n.  Experiments repeat N times and report mean and
standard deviation, since a live model is a noisy generator.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from carve.errors import CorpusMismatch
from carve.filtering import FilterConfig
from carve.gateway import LlmGateway, LlmParams
from carve.method_model import parse_method
from carve.pipeline import run_pipeline
from carve.ranking import COMBINED
from carve.suggestions import ExtractSuggestion

SWEEP_TEMPERATURES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2)
SWEEP_ITERATIONS = tuple(range(1, 11))

ABLATION_RAW = "raw"
ABLATION_RANDOM5 = "enhanced-random5"
ABLATION_RANKED = "enhanced-ranked"
ABLATION_MODES = (ABLATION_RAW, ABLATION_RANDOM5, ABLATION_RANKED)


@dataclass(frozen=True)
class OracleEntry:
    """One ground-truth extraction: host method plus the extracted range."""

    file: str
    host_start: int
    host_end: int
    oracle_start: int
    oracle_end: int
    oracle_name: str = ""

    def __post_init__(self) -> None:
        if not (
            self.host_start < self.oracle_start <= self.oracle_end < self.host_end
        ):
            raise ValueError(
                f"oracle range {self.oracle_start}..{self.oracle_end} does not sit "
                f"inside host {self.host_start}..{self.host_end}"
            )

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.file, self.host_start, self.host_end)

    @property
    def host_length(self) -> int:
        return self.host_end - self.host_start


def load_oracle(path: Path | str) -> list[OracleEntry]:
    """Read a JSON-lines oracle file; blank lines are skipped."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        raw = json.loads(line)
        entries.append(OracleEntry(**raw))
    return entries


@dataclass
class RecallReport:
    """Per-run recall values with their mean and standard deviation."""

    n: int
    tolerance: float
    runs: list[float]
    detail: dict[tuple[str, int, int], bool] = field(default_factory=dict)
    label: str = ""

    @property
    def mean(self) -> float:
        return statistics.fmean(self.runs) if self.runs else 0.0

    @property
    def stddev(self) -> float:
        return statistics.stdev(self.runs) if len(self.runs) > 1 else 0.0

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "tolerance_percent": self.tolerance,
            "repetitions": len(self.runs),
            "runs": self.runs,
            "mean": self.mean,
            "stddev": self.stddev,
            "methods": {
                f"{file}:{start}-{end}": hit
                for (file, start, end), hit in sorted(self.detail.items())
            },
        }

    def render_table(self) -> str:
        lines = [
            f"Recall@{self.n} at {self.tolerance:g}% tolerance"
            + (f" [{self.label}]" if self.label else ""),
            f"  runs: {len(self.runs)}",
            f"  mean: {self.mean:.4f}",
            f"  stddev: {self.stddev:.4f}",
        ]
        return "\n".join(lines)


def within_tolerance(
    suggestion: ExtractSuggestion,
    oracle: OracleEntry,
    tolerance_percent: float,
    host_length: int | None = None,
) -> bool:
    """Closed-threshold line-deviation test against one oracle entry."""
    length = host_length if host_length is not None else oracle.host_length
    deviation = abs(suggestion.start_line - oracle.oracle_start) + abs(
        suggestion.end_line - oracle.oracle_end
    )
    return deviation <= tolerance_percent / 100.0 * length


def recall_at_n(
    results: dict[tuple[str, int, int], list[ExtractSuggestion]],
    oracle: list[OracleEntry],
    n: int,
    tolerance_percent: float,
) -> float:
    """Fraction of oracle methods with a tolerant match in their top n.

    Methods with no surviving suggestions count as misses; a result keyed to
    a method absent from the oracle raises CorpusMismatch.
    """
    known = {entry.key for entry in oracle}
    for key in results:
        if key not in known:
            raise CorpusMismatch(f"results reference unknown method {key}")
    if not oracle:
        return 0.0
    hits = 0
    for entry in oracle:
        suggestions = results.get(entry.key, [])[:n]
        if any(within_tolerance(s, entry, tolerance_percent) for s in suggestions):
            hits += 1
    return hits / len(oracle)


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


@dataclass
class CorpusRun:
    """Shared context for running the pipeline across an oracle corpus."""

    oracle: list[OracleEntry]
    sources_root: Path
    params: LlmParams
    cfg: FilterConfig
    cache_mode: str
    cache_dir: Path | None
    enhance: bool = True
    rank_strategy: str = COMBINED

    def gateway(self, params: LlmParams | None = None) -> LlmGateway:
        return LlmGateway(
            params or self.params, cache_mode=self.cache_mode, cache_dir=self.cache_dir
        )

    def pipeline_results(self, params: LlmParams | None = None):
        gateway = self.gateway(params)
        for entry in self.oracle:
            source = (self.sources_root / entry.file).read_text(encoding="utf-8")
            method = parse_method(
                source, (entry.host_start, entry.host_end), self.sources_root / entry.file
            )
            yield entry, run_pipeline(
                method,
                gateway,
                self.cfg,
                enhance=self.enhance,
                rank_strategy=self.rank_strategy,
            )


def run_experiment(
    run: CorpusRun,
    n: int = 5,
    tolerance_percent: float = 3.0,
    repetitions: int = 30,
) -> RecallReport:
    """Repeat the full pipeline over the corpus and aggregate recall."""
    values: list[float] = []
    detail: dict[tuple[str, int, int], bool] = {}
    for _ in range(repetitions):
        results: dict[tuple[str, int, int], list[ExtractSuggestion]] = {}
        for entry, outcome in run.pipeline_results():
            results[entry.key] = [s for s, _ in outcome.top(n)]
        values.append(recall_at_n(results, run.oracle, n, tolerance_percent))
        for entry in run.oracle:
            hit = any(
                within_tolerance(s, entry, tolerance_percent)
                for s in results.get(entry.key, [])[:n]
            )
            detail[entry.key] = hit
    return RecallReport(n=n, tolerance=tolerance_percent, runs=values, detail=detail)


def sweep(
    run: CorpusRun,
    n: int = 5,
    tolerance_percent: float = 3.0,
    temperatures: tuple[float, ...] = SWEEP_TEMPERATURES,
    iterations: tuple[int, ...] = SWEEP_ITERATIONS,
) -> list[list[float]]:
    """Recall grid over a temperature x iteration-count parameter sweep."""
    grid: list[list[float]] = []
    for t in temperatures:
        row = []
        for i in iterations:
            params = LlmParams(
                temperature=t,
                iterations=i,
                model_name=run.params.model_name,
                endpoint_url=run.params.endpoint_url,
                request_timeout=run.params.request_timeout,
            )
            results: dict[tuple[str, int, int], list[ExtractSuggestion]] = {}
            for entry, outcome in run.pipeline_results(params):
                results[entry.key] = [s for s, _ in outcome.top(n)]
            row.append(recall_at_n(results, run.oracle, n, tolerance_percent))
        grid.append(row)
    return grid


def write_sweep_csv(
    grid: list[list[float]],
    path: Path | str,
    temperatures: tuple[float, ...] = SWEEP_TEMPERATURES,
    iterations: tuple[int, ...] = SWEEP_ITERATIONS,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["temperature"] + [f"i={i}" for i in iterations])
        for t, row in zip(temperatures, grid):
            writer.writerow([f"{t:g}"] + [f"{value:.4f}" for value in row])


def ablation(
    run: CorpusRun,
    mode: str,
    n: int = 5,
    tolerance_percent: float = 3.0,
    repetitions: int = 30,
    seed: int = 0,
) -> RecallReport:
    """Recall for one pipeline variant.

    ``raw`` samples n of the model's deduplicated output untouched,
    ``enhanced-random5`` samples n applicable suggestions after filtering and
    enhancement, ``enhanced-ranked`` is the full pipeline.  Random picks come
    from one seeded generator, drawn fresh each repetition.
    """
    if mode not in ABLATION_MODES:
        raise ValueError(f"unknown ablation mode: {mode}")
    rng = random.Random(seed)
    values: list[float] = []
    detail: dict[tuple[str, int, int], bool] = {}
    for _ in range(repetitions):
        results: dict[tuple[str, int, int], list[ExtractSuggestion]] = {}
        for entry, outcome in run.pipeline_results():
            if mode == ABLATION_RANKED:
                chosen = [s for s, _ in outcome.top(n)]
            elif mode == ABLATION_RANDOM5:
                pool = list(outcome.applicable)
                chosen = rng.sample(pool, min(n, len(pool)))
            else:
                pool = list(outcome.raw.entries())
                chosen = rng.sample(pool, min(n, len(pool)))
            results[entry.key] = chosen
        values.append(recall_at_n(results, run.oracle, n, tolerance_percent))
        for entry in run.oracle:
            detail[entry.key] = any(
                within_tolerance(s, entry, tolerance_percent)
                for s in results.get(entry.key, [])[:n]
            )
    return RecallReport(
        n=n, tolerance=tolerance_percent, runs=values, detail=detail, label=mode
    )
