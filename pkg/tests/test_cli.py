"""Command-line surface: suggest, apply, evaluate, sweep."""

from __future__ import annotations

import csv
import json
import shutil

import pytest
from click.testing import CliRunner

from carve.cli import main
from carve.gateway import ResponseCache, fixture_key
from conftest import CORPUS_DIR, REFERENCE_DIR, REFERENCE_SOURCE


@pytest.fixture()
def runner():
    return CliRunner()


def _suggest_args(file_path, extra=()):
    return [
        "suggest",
        "--file",
        str(file_path),
        "--lines",
        "150:166",
        "--cache",
        "replay",
        "--cache-dir",
        str(REFERENCE_DIR / "cache"),
        *extra,
    ]


def test_suggest_reference_table(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main, _suggest_args(REFERENCE_SOURCE, ("--out", str(out)))
    )
    assert result.exit_code == 0, result.output
    assert "9 total, 3 invalid, 3 not useful, 3 useful" in result.output
    assert "157-158" in result.output
    assert "emptyPropertyArray" in result.output
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["verdict_counts"] == {
        "total": 9,
        "invalid": 3,
        "not_useful": 3,
        "useful": 3,
    }
    spans = [(s["start_line"], s["end_line"]) for s in report["suggestions"]]
    assert (157, 158) in spans[:3]


def test_suggest_by_method_name(runner):
    result = runner.invoke(
        main,
        [
            "suggest",
            "--file",
            str(REFERENCE_SOURCE),
            "--method",
            "entityGetProperties",
            "--cache",
            "replay",
            "--cache-dir",
            str(REFERENCE_DIR / "cache"),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "157-158" in result.output


def test_suggest_reports_are_byte_identical(runner, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        result = runner.invoke(main, _suggest_args(REFERENCE_SOURCE, ("--out", str(out))))
        assert result.exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_suggest_with_no_applicable_suggestions(runner, tmp_path):
    source = "class A {\n    void f() {\n        a();\n        b();\n    }\n}\n"
    file_path = tmp_path / "Tiny.java"
    file_path.write_text(source, encoding="utf-8")
    from carve.gateway import build_prompt
    from carve.method_model import parse_method

    prompt = build_prompt(parse_method(source, (2, 5))).render()
    cache = ResponseCache(tmp_path / "cache")
    for iteration in range(2):
        cache.store(
            fixture_key(prompt, 1.2, iteration),
            json.dumps([{"function_name": "whole", "start_line": 3, "end_line": 4}]),
            model="fixture",
            temperature=1.2,
            iteration=iteration,
            prompt_sha="",
        )
    result = runner.invoke(
        main,
        [
            "suggest",
            "--file",
            str(file_path),
            "--lines",
            "2:5",
            "--iterations",
            "2",
            "--cache",
            "replay",
            "--cache-dir",
            str(tmp_path / "cache"),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "no applicable suggestions" in result.output


def test_suggest_selector_usage_errors(runner):
    both = runner.invoke(
        main,
        [
            "suggest",
            "--file",
            str(REFERENCE_SOURCE),
            "--lines",
            "150:166",
            "--method",
            "entityGetProperties",
        ],
    )
    assert both.exit_code == 2
    neither = runner.invoke(main, ["suggest", "--file", str(REFERENCE_SOURCE)])
    assert neither.exit_code == 2
    bad_range = runner.invoke(
        main, ["suggest", "--file", str(REFERENCE_SOURCE), "--lines", "abc"]
    )
    assert bad_range.exit_code == 2


def test_suggest_incomplete_method_range_is_pipeline_error(runner):
    result = runner.invoke(
        main,
        [
            "suggest",
            "--file",
            str(REFERENCE_SOURCE),
            "--lines",
            "150:160",
            "--cache",
            "replay",
            "--cache-dir",
            str(REFERENCE_DIR / "cache"),
        ],
    )
    assert result.exit_code == 1
    assert "error:" in result.output


def test_replay_without_cache_dir_is_usage_error(runner):
    result = runner.invoke(
        main,
        ["suggest", "--file", str(REFERENCE_SOURCE), "--lines", "150:166"],
    )
    assert result.exit_code == 2
    assert "--cache-dir" in result.output


def _prepare_workdir(tmp_path):
    workdir = tmp_path / "src"
    workdir.mkdir()
    target = workdir / "PropertyAccess.java"
    shutil.copy(REFERENCE_SOURCE, target)
    return target


def test_apply_rewrites_with_backup(runner, tmp_path):
    target = _prepare_workdir(tmp_path)
    report_path = tmp_path / "report.json"
    suggest = runner.invoke(main, _suggest_args(target, ("--out", str(report_path))))
    assert suggest.exit_code == 0

    report = json.loads(report_path.read_text(encoding="utf-8"))
    index = next(
        s["rank"]
        for s in report["suggestions"]
        if (s["start_line"], s["end_line"]) == (157, 158)
    )
    applied = runner.invoke(
        main, ["apply", "--report", str(report_path), "--index", str(index)]
    )
    assert applied.exit_code == 0, applied.output
    backup = target.with_suffix(".java.bak")
    assert backup.exists()
    assert backup.read_text(encoding="utf-8") == REFERENCE_SOURCE.read_text(
        encoding="utf-8"
    )
    rewritten = target.read_text(encoding="utf-8")
    assert "Value[] values = emptyPropertyArray(itemsToReturn);" in rewritten

    # Round trip: the rewritten host still parses and can be analyzed again.
    from carve.method_model import parse_method

    parse_method(rewritten, (150, 165))


def test_apply_out_of_range_index_leaves_file_alone(runner, tmp_path):
    target = _prepare_workdir(tmp_path)
    report_path = tmp_path / "report.json"
    runner.invoke(main, _suggest_args(target, ("--out", str(report_path))))
    before = target.read_text(encoding="utf-8")
    result = runner.invoke(
        main, ["apply", "--report", str(report_path), "--index", "99"]
    )
    assert result.exit_code == 1
    assert "out of range" in result.output
    assert target.read_text(encoding="utf-8") == before


def test_apply_detects_changed_source(runner, tmp_path):
    target = _prepare_workdir(tmp_path)
    report_path = tmp_path / "report.json"
    runner.invoke(main, _suggest_args(target, ("--out", str(report_path))))
    target.write_text(
        target.read_text(encoding="utf-8").replace("int index = 0;", "int index = 1;"),
        encoding="utf-8",
    )
    result = runner.invoke(
        main, ["apply", "--report", str(report_path), "--index", "1"]
    )
    assert result.exit_code == 1
    assert "changed" in result.output


def test_evaluate_corpus_pinned_value(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        [
            "evaluate",
            "--corpus",
            str(CORPUS_DIR / "oracle.jsonl"),
            "--cache",
            "replay",
            "--cache-dir",
            str(CORPUS_DIR / "cache"),
            "--repetitions",
            "2",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "mean: 0.8500" in result.output
    assert "stddev: 0.0000" in result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["reports"][0]["mean"] == pytest.approx(0.85)


def test_evaluate_ablation_table(runner):
    result = runner.invoke(
        main,
        [
            "evaluate",
            "--corpus",
            str(CORPUS_DIR / "oracle.jsonl"),
            "--cache",
            "replay",
            "--cache-dir",
            str(CORPUS_DIR / "cache"),
            "--repetitions",
            "3",
            "--seed",
            "0",
            "--ablation",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "[raw]" in result.output
    assert "[enhanced-random5]" in result.output
    assert "[enhanced-ranked]" in result.output


def test_evaluate_requires_existing_corpus(runner, tmp_path):
    result = runner.invoke(
        main, ["evaluate", "--corpus", str(tmp_path / "missing.jsonl")]
    )
    assert result.exit_code == 2


def test_sweep_writes_grid_csv(runner, tmp_path):
    out = tmp_path / "grid.csv"
    args = [
        "sweep",
        "--corpus",
        str(REFERENCE_DIR / "oracle.jsonl"),
        "--cache",
        "replay",
        "--cache-dir",
        str(REFERENCE_DIR / "cache"),
        "--out",
        str(out),
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["temperature"] + [f"i={i}" for i in range(1, 11)]
    assert len(rows) == 8  # header + 7 temperatures
    assert rows[1][1:] == ["0.0000"] * 10
    assert rows[7][10] == "1.0000"
    first = out.read_bytes()
    runner.invoke(main, args)
    assert out.read_bytes() == first
