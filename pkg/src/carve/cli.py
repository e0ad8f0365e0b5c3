"""Command surface: suggest, apply, evaluate, sweep."""

from __future__ import annotations

import hashlib
import json
import re
import sys
from pathlib import Path

import click

from carve.errors import CarveError
from carve.evaluation import (
    ABLATION_MODES,
    SWEEP_ITERATIONS,
    SWEEP_TEMPERATURES,
    CorpusRun,
    ablation,
    load_oracle,
    run_experiment,
    sweep as run_sweep,
    write_sweep_csv,
)
from carve.extraction import apply as apply_plan, attach_source, plan_extraction
from carve.filtering import FilterConfig
from carve.gateway import CACHE_MODES, LlmGateway, LlmParams, REPLAY
from carve.method_model import parse_method
from carve.pipeline import run_pipeline
from carve.ranking import COMBINED, HEAT, POPULARITY

_STRATEGY_FLAGS = {"heat": HEAT, "popularity": POPULARITY, "combined": COMBINED}


def _llm_options(fn):
    fn = click.option("--endpoint", default="", help="Model endpoint URL (live/record).")(fn)
    fn = click.option("--model", default="gpt-3.5-turbo", show_default=True)(fn)
    fn = click.option("--temperature", type=float, default=1.2, show_default=True)(fn)
    fn = click.option("--iterations", type=int, default=10, show_default=True)(fn)
    fn = click.option(
        "--cache",
        "cache_mode",
        type=click.Choice(CACHE_MODES),
        default=REPLAY,
        show_default=True,
    )(fn)
    fn = click.option("--cache-dir", type=click.Path(path_type=Path), default=None)(fn)
    return fn


def _filter_options(fn):
    fn = click.option("--max-coverage", type=float, default=0.88, show_default=True)(fn)
    fn = click.option("--min-statements", type=int, default=2, show_default=True)(fn)
    fn = click.option("--no-enhance", is_flag=True, default=False)(fn)
    return fn


def _build_params(endpoint, model, temperature, iterations) -> LlmParams:
    return LlmParams(
        temperature=temperature,
        iterations=iterations,
        model_name=model,
        endpoint_url=endpoint,
    )


def _build_gateway(params, cache_mode, cache_dir) -> LlmGateway:
    if cache_mode in ("record", "replay") and cache_dir is None:
        raise click.UsageError(f"--cache {cache_mode} requires --cache-dir")
    if cache_mode in ("record", "live") and not params.endpoint_url:
        raise click.UsageError(f"--cache {cache_mode} requires --endpoint")
    try:
        return LlmGateway(params, cache_mode=cache_mode, cache_dir=cache_dir)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Suggest, apply, and evaluate extract-method refactorings."""


def _locate_method(source: str, name: str) -> tuple[int, int]:
    """Find a method by name: its signature line and matching close line."""
    lines = source.splitlines()
    sig_re = re.compile(r"\b" + re.escape(name) + r"\s*\(")
    for idx, line in enumerate(lines):
        if not sig_re.search(line):
            continue
        stripped = line.strip()
        if stripped.startswith(("if", "while", "for", "switch", "return", "//", "*")):
            continue
        depth = 0
        opened = False
        for j in range(idx, len(lines)):
            for ch in lines[j]:
                if ch == "{":
                    depth += 1
                    opened = True
                elif ch == "}":
                    depth -= 1
                    if opened and depth == 0:
                        return (idx + 1, j + 1)
            if not opened and ";" in lines[j]:
                break  # abstract declaration or a call site, not a definition
    raise CarveError(f"no method named '{name}' found")


@main.command()
@click.option("--file", "file_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--lines", "line_range", default=None, help="Method range START:END.")
@click.option("--method", "method_name", default=None, help="Method name to search for.")
@_llm_options
@_filter_options
@click.option(
    "--rank-strategy",
    type=click.Choice(sorted(_STRATEGY_FLAGS)),
    default="combined",
    show_default=True,
)
@click.option("--top", "top_count", type=int, default=5, show_default=True)
@click.option("--fixpoint", is_flag=True, default=False, help="Prompt until no new ranges appear.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def suggest(
    file_path,
    line_range,
    method_name,
    endpoint,
    model,
    temperature,
    iterations,
    cache_mode,
    cache_dir,
    max_coverage,
    min_statements,
    no_enhance,
    rank_strategy,
    top_count,
    fixpoint,
    out_path,
) -> None:
    """Rank extraction suggestions for one method."""
    if (line_range is None) == (method_name is None):
        raise click.UsageError("give exactly one of --lines or --method")
    source = file_path.read_text(encoding="utf-8")
    try:
        if line_range is not None:
            try:
                start, end = (int(part) for part in line_range.split(":"))
            except ValueError:
                raise click.UsageError("--lines must look like START:END")
            method_range = (start, end)
        else:
            method_range = _locate_method(source, method_name)

        params = _build_params(endpoint, model, temperature, iterations)
        gateway = _build_gateway(params, cache_mode, cache_dir)
        cfg = FilterConfig(max_coverage_fraction=max_coverage, min_statements=min_statements)
        method = parse_method(source, method_range, file_path)
        result = run_pipeline(
            method,
            gateway,
            cfg,
            enhance=not no_enhance,
            rank_strategy=_STRATEGY_FLAGS[rank_strategy],
            fixpoint=fixpoint,
        )
    except click.UsageError:
        raise
    except CarveError as exc:
        _fail(str(exc))

    report = _suggest_report(file_path, source, method_range, result, top_count)
    if out_path is not None:
        out_path.write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    click.echo(_render_suggest_table(report))


def _signature_preview(result, suggestion) -> str:
    try:
        plan = plan_extraction(result.method, suggestion)
    except CarveError:
        return "(signature unavailable)"
    params = ", ".join(f"{t} {n}" for t, n in plan.parameters)
    ret = plan.return_type if plan.return_variable else "void"
    return f"{ret} {plan.new_method_name}({params})"


def _suggest_report(file_path, source, method_range, result, top_count) -> dict:
    counts = result.triaged.counts()
    ranked = result.top(top_count)
    entries = []
    for rank, (suggestion, rank_score) in enumerate(ranked, start=1):
        payload = suggestion.to_json()
        payload["rank"] = rank
        payload["score"] = rank_score.to_json()
        payload["signature_preview"] = _signature_preview(result, suggestion)
        entries.append(payload)
    return {
        "file": str(file_path),
        "source_sha": hashlib.sha256(source.encode("utf-8")).hexdigest(),
        "method": {
            "start_line": method_range[0],
            "end_line": method_range[1],
            "signature": result.method.signature_text,
        },
        "verdict_counts": counts,
        "verdicts": [v.to_json() for v in result.triaged.all_verdicts()],
        "suggestions": entries,
    }


def _render_suggest_table(report: dict) -> str:
    counts = report["verdict_counts"]
    lines = [
        f"{report['file']} "
        f"{report['method']['start_line']}..{report['method']['end_line']}",
        f"suggestions: {counts['total']} total, {counts['invalid']} invalid, "
        f"{counts['not_useful']} not useful, {counts['useful']} useful",
    ]
    if not report["suggestions"]:
        lines.append("no applicable suggestions")
        return "\n".join(lines)
    lines.append(f"{'#':>2}  {'lines':<12}{'score':>8}  {'count':>5}  signature")
    for entry in report["suggestions"]:
        span = f"{entry['start_line']}-{entry['end_line']}"
        lines.append(
            f"{entry['rank']:>2}  {span:<12}{entry['score']['combined']:>8}"
            f"  {entry['count']:>5}  {entry['signature_preview']}"
        )
    return "\n".join(lines)


@main.command("apply")
@click.option(
    "--report",
    "report_path",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="JSON report produced by `suggest --out`.",
)
@click.option("--index", type=int, required=True, help="1-based rank in the report.")
def apply_command(report_path, index) -> None:
    """Apply one ranked suggestion from a suggest report, keeping a .bak copy."""
    report = json.loads(report_path.read_text(encoding="utf-8"))
    suggestions = report.get("suggestions", [])
    if not 1 <= index <= len(suggestions):
        _fail(f"index {index} is out of range (report has {len(suggestions)} suggestions)")
    entry = suggestions[index - 1]

    file_path = Path(report["file"])
    source = file_path.read_text(encoding="utf-8")
    if hashlib.sha256(source.encode("utf-8")).hexdigest() != report["source_sha"]:
        _fail("source file changed since the report was generated")

    try:
        method = parse_method(
            source,
            (report["method"]["start_line"], report["method"]["end_line"]),
            file_path,
        )
        from carve.suggestions import ExtractSuggestion

        suggestion = ExtractSuggestion(
            name=entry["name"],
            start_line=entry["start_line"],
            end_line=entry["end_line"],
            occurrence_count=entry["count"],
        )
        plan = attach_source(plan_extraction(method, suggestion), source)
        rewritten = apply_plan(source, plan)
    except CarveError as exc:
        _fail(str(exc))

    backup = file_path.with_suffix(file_path.suffix + ".bak")
    backup.write_text(source, encoding="utf-8")
    file_path.write_text(rewritten, encoding="utf-8")
    click.echo(f"extracted {entry['name']} ({entry['start_line']}-{entry['end_line']})")
    click.echo(f"backup written to {backup}")


def _corpus_run(
    corpus_path, endpoint, model, temperature, iterations, cache_mode, cache_dir,
    max_coverage, min_statements, no_enhance,
) -> CorpusRun:
    params = _build_params(endpoint, model, temperature, iterations)
    _build_gateway(params, cache_mode, cache_dir)  # validate flag combination
    return CorpusRun(
        oracle=load_oracle(corpus_path),
        sources_root=Path(corpus_path).parent,
        params=params,
        cfg=FilterConfig(max_coverage_fraction=max_coverage, min_statements=min_statements),
        cache_mode=cache_mode,
        cache_dir=cache_dir,
        enhance=not no_enhance,
    )


@main.command()
@click.option("--corpus", type=click.Path(exists=True, path_type=Path), required=True)
@_llm_options
@_filter_options
@click.option("--recall-n", type=int, default=5, show_default=True)
@click.option("--tolerance", type=float, default=3.0, show_default=True)
@click.option("--repetitions", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ablation", "with_ablation", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def evaluate(
    corpus,
    endpoint,
    model,
    temperature,
    iterations,
    cache_mode,
    cache_dir,
    max_coverage,
    min_statements,
    no_enhance,
    recall_n,
    tolerance,
    repetitions,
    seed,
    with_ablation,
    out_path,
) -> None:
    """Recall@n over an oracle corpus, optionally across ablation variants."""
    try:
        run = _corpus_run(
            corpus, endpoint, model, temperature, iterations, cache_mode, cache_dir,
            max_coverage, min_statements, no_enhance,
        )
        if with_ablation:
            reports = [
                ablation(run, mode, n=recall_n, tolerance_percent=tolerance,
                         repetitions=repetitions, seed=seed)
                for mode in ABLATION_MODES
            ]
        else:
            reports = [
                run_experiment(run, n=recall_n, tolerance_percent=tolerance,
                               repetitions=repetitions)
            ]
    except click.UsageError:
        raise
    except CarveError as exc:
        _fail(str(exc))

    payload = {"reports": [r.to_json() for r in reports]}
    if out_path is not None:
        out_path.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    for report in reports:
        click.echo(report.render_table())


@main.command("sweep")
@click.option("--corpus", type=click.Path(exists=True, path_type=Path), required=True)
@_llm_options
@_filter_options
@click.option("--recall-n", type=int, default=5, show_default=True)
@click.option("--tolerance", type=float, default=3.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def sweep_command(
    corpus,
    endpoint,
    model,
    temperature,
    iterations,
    cache_mode,
    cache_dir,
    max_coverage,
    min_statements,
    no_enhance,
    recall_n,
    tolerance,
    out_path,
) -> None:
    """Recall grid over the temperature x iterations sweep, written as CSV."""
    try:
        run = _corpus_run(
            corpus, endpoint, model, temperature, iterations, cache_mode, cache_dir,
            max_coverage, min_statements, no_enhance,
        )
        grid = run_sweep(run, n=recall_n, tolerance_percent=tolerance)
    except click.UsageError:
        raise
    except CarveError as exc:
        _fail(str(exc))
    write_sweep_csv(grid, out_path)
    click.echo(
        f"wrote {len(SWEEP_TEMPERATURES)}x{len(SWEEP_ITERATIONS)} recall grid to {out_path}"
    )


if __name__ == "__main__":
    main()
