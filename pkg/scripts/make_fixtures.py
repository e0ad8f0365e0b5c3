#!/usr/bin/env python3
"""Regenerate the bundled test data under tests/data/.

Produces, deterministically:
  - reference/: a host method at lines 150..166 with a recorded response
    cache across the whole temperature ladder, plus its oracle file
  - corpus/: twenty methods over seven source files, their oracle file, and
    a recorded response cache at the default sampling settings
  - golden/: frozen prompt rendering and a frozen post-extraction file

Every design goal of the corpus (which pipeline stage recovers which oracle,
pool sizes for the ablation gaps) is asserted here, so a regeneration that
breaks an expectation fails loudly instead of silently pinning garbage.

Run from the repository root:  python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import random
import shutil
import sys
import zlib
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "scripts"))

from corpus_sources import FILES, RECIPES  # noqa: E402

from carve.enhancement import enhance  # noqa: E402
from carve.evaluation import (  # noqa: E402
    ABLATION_MODES,
    CorpusRun,
    OracleEntry,
    ablation,
    run_experiment,
    within_tolerance,
)
from carve.extraction import apply as apply_plan, attach_source, plan_extraction  # noqa: E402
from carve.filtering import FilterConfig, triage  # noqa: E402
from carve.gateway import LlmParams, ResponseCache, build_prompt, fixture_key  # noqa: E402
from carve.method_model import parse_method  # noqa: E402
from carve.suggestions import ExtractSuggestion, SuggestionSet  # noqa: E402

DATA = REPO / "tests" / "data"
TEMPERATURES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2)
ITERATIONS = 10
TOLERANCE = 3.0

DECOY_NAMES = (
    "extractBlock", "handleChunk", "processSection", "computePart",
    "prepareState", "applyStep", "collectItems", "updateTotals",
    "refreshView", "buildPayload", "initSection", "mergeResults",
    "walkEntries", "foldValues", "advanceCursor", "drainQueue",
)


# ---------------------------------------------------------------------------
# Reference method (host at 150..166)
# ---------------------------------------------------------------------------

REFERENCE_METHOD = """\
    /**
     * Reads the requested property values for one node entity, in the
     * order the caller asked for them.
     */
    private Value[] entityGetProperties(VirtualNodeValue node, String[] itemsToReturn) {
        NodeCursor cursor = cursors.allocateNodeCursor();
        TokenRead token = tokenRead();
        singleNode(node, cursor);
        if (!cursor.next()) {
            return Values.EMPTY_VALUE_ARRAY;
        }
        Value[] values = new Value[itemsToReturn.length];
        Arrays.fill(values, Values.NO_VALUE);
        int index = 0;
        while (index < itemsToReturn.length) {
            values[index] = readProperty(cursor, token, itemsToReturn[index]);
            index = index + 1;
        }
        int hits = countDefined(values);
        return summarize(values, hits);
    }
"""

REFERENCE_PREAMBLE = """\
package app.graph;

import java.util.Arrays;

/**
 * Read-side helpers over the node and relationship stores.
 *
 * <p>All lookups run against the transaction-local cursors owned by this
 * instance; nothing here escapes the current transaction.
 */
class PropertyAccess {

    private static final int LOOKUP_BATCH = 64;

    private final CursorPool cursors;
    private final Counters counters;

    PropertyAccess(CursorPool cursors, Counters counters) {
        this.cursors = cursors;
        this.counters = counters;
    }

    /** Borrowed token-read view for the active transaction. */
    private TokenRead tokenRead() {
        return cursors.transaction().tokenRead();
    }

    /** Positions the shared cursor on the given node. */
    private void singleNode(VirtualNodeValue node, NodeCursor cursor) {
        cursors.transaction().dataRead().singleNode(node.id(), cursor);
    }

    /** Positions the shared cursor on the given relationship. */
    private void singleRelationship(VirtualRelationshipValue rel, RelationshipCursor cursor) {
        cursors.transaction().dataRead().singleRelationship(rel.id(), cursor);
    }

    /**
     * Resolves one named property against the row under the cursor.
     * Unknown names resolve to {@code Values.NO_VALUE}.
     */
    private Value readProperty(NodeCursor cursor, TokenRead token, String name) {
        int propertyKey = token.propertyKey(name);
        if (propertyKey == TokenRead.NO_TOKEN) {
            return Values.NO_VALUE;
        }
        counters.recordRead();
        return cursor.propertyValue(propertyKey);
    }

    /**
     * Relationship-side twin of the node property read. Kept separate so
     * the two cursor types never mix in one code path.
     */
    private Value readRelationshipProperty(RelationshipCursor cursor, TokenRead token, String name) {
        int propertyKey = token.propertyKey(name);
        if (propertyKey == TokenRead.NO_TOKEN) {
            return Values.NO_VALUE;
        }
        counters.recordRead();
        return cursor.propertyValue(propertyKey);
    }

    /** Count of slots that resolved to a real value. */
    private int countDefined(Value[] values) {
        int defined = 0;
        for (Value value : values) {
            if (value != Values.NO_VALUE) {
                defined = defined + 1;
            }
        }
        return defined;
    }

    /** Books the read statistics and hands the array back. */
    private Value[] summarize(Value[] values, int hits) {
        counters.recordHits(hits);
        return values;
    }

    /**
     * Reads every property of the relationship under the cursor into a
     * fresh map, skipping tombstones left by concurrent deletes.
     */
    private MapValue relationshipAsMap(RelationshipCursor cursor, TokenRead token) {
        MapValueBuilder builder = new MapValueBuilder();
        PropertyCursor props = cursors.allocatePropertyCursor();
        cursor.properties(props);
        while (props.next()) {
            String key = token.propertyKeyName(props.propertyKey());
            Value value = props.propertyValue();
            if (value != Values.NO_VALUE) {
                builder.add(key, value);
            }
        }
        cursors.release(props);
        return builder.build();
    }

    /** True when the node under the cursor carries the given label token. */
    private boolean hasLabel(NodeCursor cursor, int labelToken) {
        return cursor.labels().contains(labelToken);
    }

    /**
     * Resolves a batch of nodes in lookup order. Null slots mark nodes
     * that vanished between the id scan and this read.
     */
    private Value[] batchNodeLookup(long[] ids, String name) {
        Value[] out = new Value[ids.length];
        TokenRead token = tokenRead();
        NodeCursor cursor = cursors.allocateNodeCursor();
        int cursorBudget = LOOKUP_BATCH;
        for (int i = 0; i < ids.length; i++) {
            cursors.transaction().dataRead().singleNode(ids[i], cursor);
            if (!cursor.next()) {
                out[i] = null;
                continue;
            }
            out[i] = readProperty(cursor, token, name);
            cursorBudget = cursorBudget - 1;
            if (cursorBudget == 0) {
                cursors.recycle(cursor);
                cursorBudget = LOOKUP_BATCH;
            }
        }
        cursors.release(cursor);
        return out;
    }

    /** Flushes pending read statistics into the shared counters. */
    private void flushCounters() {
        counters.flush();
    }
"""

REFERENCE_TRAILER = """\

    /** Releases the shared cursor back to the pool. */
    private void release(NodeCursor cursor) {
        cursors.release(cursor);
    }
}
"""

REFERENCE_SIGNATURE_LINE = 150
REFERENCE_RANGE = (150, 166)
REFERENCE_ORACLE = (157, 158)

# Distinct reference suggestions and the names the model tends to give them.
REF_SPANS = {
    (157, 158): "emptyPropertyArray",
    (157, 163): "buildPropertyArray",
    (160, 163): "readPropertyLoop",
    (162, 164): "processProperties",
    (153, 155): "checkNodeExists",
    (153, 153): "singleNodeLookup",
    (151, 165): "entityGetPropertiesBody",
    (152, 165): "getAllProperties",
    (150, 158): "readEntity",
}

# Per-temperature iteration scripts for the reference method; each entry is
# a list of spans (the model's reply for that iteration).  Diversity widens
# with temperature; the developer-performed range only shows up from 0.8 up.
REFERENCE_LADDER = {
    0.0: [[(157, 163)]] * 10,
    0.2: [
        [(157, 163)], [(157, 163)], [(157, 163), (153, 153)], [(157, 163)],
        [(153, 153)], [(157, 163)], [(157, 163)], [(157, 163), (153, 153)],
        [(157, 163)], [(157, 163)],
    ],
    0.4: [
        [(157, 163)], [(160, 163)], [(157, 163), (153, 153)], [(157, 163)],
        [(160, 163)], [(153, 153)], [(157, 163)], [(160, 163)],
        [(157, 163)], [(160, 163), (153, 153)],
    ],
    0.6: [
        [(157, 163)], [(160, 163), (151, 165)], [(153, 153)], [(157, 163)],
        [(151, 165)], [(160, 163)], [(152, 165)], [(157, 163), (153, 153)],
        [(160, 163)], [(151, 165)],
    ],
    0.8: [
        [(157, 163)], [(160, 163)], [(151, 165), (153, 153)], [(162, 164)],
        [(157, 158), (157, 163)], [(160, 163)], [(157, 158)], [(152, 165)],
        [(153, 155)], [(157, 158), (162, 164)],
    ],
    1.0: [
        [(157, 163), (153, 153)], [(162, 164)], [(157, 158)], [(151, 165)],
        [(157, 158), (160, 163)], [(153, 155)], [(152, 165)], [(157, 158)],
        [(162, 164), (153, 153)], [(157, 163)],
    ],
    1.2: [
        [(157, 163), (153, 153)],
        [(157, 158), (162, 164)],
        [(151, 165)],
        [(153, 155), (157, 163)],
        [(160, 163)],
        [(157, 158), (150, 158)],
        [(162, 164)],
        [(152, 165)],
        [(157, 158)],
        [(153, 153)],
    ],
}


def build_reference_source() -> str:
    preamble = REFERENCE_PREAMBLE.splitlines()
    doc_and_method = REFERENCE_METHOD.splitlines()
    # The method's javadoc is 4 lines; the signature must land on line 150.
    pad_count = (REFERENCE_SIGNATURE_LINE - 1) - len(preamble) - 4
    if pad_count < 0:
        raise SystemExit("reference preamble grew past line 150")
    lines = preamble + [""] * pad_count + doc_and_method + REFERENCE_TRAILER.splitlines()
    return "\n".join(lines) + "\n"


def render_reply(rng: random.Random, entries: list[dict]) -> str:
    """One model reply: plain JSON, pretty JSON, or fenced-with-prose."""
    style = rng.random()
    if style < 0.5:
        return json.dumps(entries)
    if style < 0.8:
        return json.dumps(entries, indent=1)
    return (
        "Here are the extraction opportunities I found in this method:\n"
        "```json\n" + json.dumps(entries, indent=1) + "\n```\n"
        "Each block keeps the host method compilable."
    )


def entry(name: str, span: tuple[int, int]) -> dict:
    return {"function_name": name, "start_line": span[0], "end_line": span[1]}


def write_reference(data_dir: Path) -> None:
    ref_dir = data_dir / "reference"
    sources = ref_dir / "sources"
    cache_dir = ref_dir / "cache"
    sources.mkdir(parents=True, exist_ok=True)
    cache_dir.mkdir(parents=True, exist_ok=True)

    source = build_reference_source()
    (sources / "PropertyAccess.java").write_text(source, encoding="utf-8")
    method = parse_method(source, REFERENCE_RANGE)
    assert method.length == 16, f"reference method length {method.length} != 16"
    assert method.doc_comment is not None

    prompt_text = build_prompt(method).render()
    cache = ResponseCache(cache_dir)
    for temp, script in REFERENCE_LADDER.items():
        rng = random.Random(int(temp * 10) + 7)
        for iteration, spans in enumerate(script):
            entries = [entry(REF_SPANS[span], span) for span in spans]
            # Occasionally vary the name for the developer-performed range so
            # the most-frequent-name merge rule is exercised end to end.
            if spans == [(157, 158)] and iteration == 8:
                entries = [entry("makeEmptyValues", (157, 158))]
            raw = render_reply(rng, entries)
            key = fixture_key(prompt_text, temp, iteration)
            cache.store(
                key,
                raw,
                model="fixture",
                temperature=temp,
                iteration=iteration,
                prompt_sha="",
            )

    oracle_entry = {
        "file": "sources/PropertyAccess.java",
        "host_start": REFERENCE_RANGE[0],
        "host_end": REFERENCE_RANGE[1],
        "oracle_start": REFERENCE_ORACLE[0],
        "oracle_end": REFERENCE_ORACLE[1],
        "oracle_name": "emptyPropertyArray",
    }
    (ref_dir / "oracle.jsonl").write_text(
        json.dumps(oracle_entry) + "\n", encoding="utf-8"
    )
    (ref_dir / "golden_prompt.txt").write_text(prompt_text + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


def locate_method(source: str, name: str) -> tuple[int, int]:
    lines = source.splitlines()
    for idx, line in enumerate(lines):
        if f" {name}(" in line and line.rstrip().endswith("{"):
            depth = 0
            for j in range(idx, len(lines)):
                depth += lines[j].count("{") - lines[j].count("}")
                if depth == 0:
                    return (idx + 1, j + 1)
    raise SystemExit(f"method {name} not found")


def balanced_spans(method) -> list[tuple[int, int]]:
    """All statement-aligned, block-balanced line spans of the method."""
    stmts = method.statements
    spans = []
    for i in range(len(stmts)):
        for j in range(i, len(stmts)):
            inside = set(range(i, j + 1))
            ok = True
            for st in stmts[i : j + 1]:
                if st.closes_block and (
                    st.closes_header is None or st.closes_header not in inside
                ):
                    ok = False
                    break
                if st.opens_block and (st.closed_by is None or st.closed_by not in inside):
                    ok = False
                    break
            if ok:
                spans.append((stmts[i].start_line, stmts[j].end_line))
    return sorted(set(spans))


def classify_spans(method, cfg: FilterConfig):
    buckets = {"applicable": [], "not_useful": [], "invalid": []}
    for span in balanced_spans(method):
        one = SuggestionSet(method)
        one.add("probe", span[0], span[1])
        result = triage(method, one, cfg)
        if result.useful:
            buckets["applicable"].append(span)
        elif result.not_useful:
            buckets["not_useful"].append(span)
        else:
            buckets["invalid"].append(span)
    return buckets


def near_oracle(method, span, oracle_span) -> bool:
    probe = ExtractSuggestion("probe", span[0], span[1])
    fake = OracleEntry(
        file="x",
        host_start=method.start_line,
        host_end=method.end_line,
        oracle_start=oracle_span[0],
        oracle_end=oracle_span[1],
    )
    return within_tolerance(probe, fake, TOLERANCE)


def build_corpus_responses(method, recipe, cfg: FilterConfig, rng: random.Random):
    """Ten iteration scripts for one corpus method.

    Decoys are deduplicated by their post-enhancement range (so counts never
    merge into each other), kept mostly short (heat scales with length, and
    the target has to stay inside the top five), and capped at two
    occurrences each while the target appears four or five times.
    """
    _, name, mode, oracle_off, emitted_off, oracle_name = recipe
    sig = method.start_line
    oracle_span = (sig + oracle_off[0], sig + oracle_off[1])
    target_span = (
        (sig + emitted_off[0], sig + emitted_off[1]) if emitted_off else None
    )

    buckets = classify_spans(method, cfg)
    seen_enhanced = {oracle_span}
    if target_span is not None:
        seen_enhanced.add(target_span)
    candidates = []
    for span in buckets["applicable"]:
        if span in (oracle_span, target_span):
            continue
        if near_oracle(method, span, oracle_span):
            continue
        enhanced = enhance(method, ExtractSuggestion("probe", span[0], span[1]), cfg)
        if near_oracle(method, enhanced.span, oracle_span):
            continue
        if enhanced.span in seen_enhanced:
            continue
        seen_enhanced.add(enhanced.span)
        candidates.append(span)

    oracle_len = oracle_span[1] - oracle_span[0] + 1
    short = [s for s in candidates if s[1] - s[0] + 1 <= max(5, oracle_len)]
    long_ = [s for s in candidates if s not in short]
    rng.shuffle(short)
    rng.shuffle(long_)
    want_decoys = {"direct": 8, "ranked": 9, "extend": 6, "shrink": 6, "miss": 5}[mode]
    chosen_decoys = (long_[:2] + short + long_[2:])[:want_decoys]

    junk = buckets["not_useful"] + buckets["invalid"]
    rng.shuffle(junk)
    junk = junk[:4] + [
        (method.start_line - 2, method.start_line + 1),
        (method.end_line - 1, method.end_line + 3),
    ]

    target_times = {"direct": 4, "ranked": 5, "extend": 4, "shrink": 4, "miss": 0}[mode]
    occurrences: list[tuple[str, tuple[int, int]]] = []
    if target_span is not None:
        occurrences += [(oracle_name, target_span)] * target_times
    names = {}
    for i, span in enumerate(chosen_decoys + junk):
        names.setdefault(span, DECOY_NAMES[i % len(DECOY_NAMES)])
    for i, span in enumerate(chosen_decoys):
        times = 2 if i < 3 else 1
        occurrences += [(names[span], span)] * times
    occurrences += [(names[span], span) for span in junk]
    rng.shuffle(occurrences)

    script: list[list[dict]] = [[] for _ in range(ITERATIONS)]
    for i, (entry_name, span) in enumerate(occurrences):
        script[i % ITERATIONS].append(entry(entry_name, span))
    for reply in script:
        rng.shuffle(reply)
    return oracle_span, target_span, script, len(chosen_decoys)


def write_corpus(data_dir: Path) -> list[OracleEntry]:
    corpus_dir = data_dir / "corpus"
    sources_dir = corpus_dir / "sources"
    cache_dir = corpus_dir / "cache"
    sources_dir.mkdir(parents=True, exist_ok=True)
    cache_dir.mkdir(parents=True, exist_ok=True)

    for file_name, text in FILES.items():
        (sources_dir / file_name).write_text(text, encoding="utf-8")

    cfg = FilterConfig()
    cache = ResponseCache(cache_dir)
    oracle_entries = []
    malformed_done = False

    for recipe in RECIPES:
        file_name, method_name, mode, *_ = recipe
        source = (sources_dir / file_name).read_text(encoding="utf-8")
        method_range = locate_method(source, method_name)
        method = parse_method(source, method_range)
        rng = random.Random(zlib.crc32(f"{file_name}:{method_name}".encode()))

        oracle_span, target_span, script, decoy_count = build_corpus_responses(
            method, recipe, cfg, rng
        )
        oracle_entries.append(
            OracleEntry(
                file=f"sources/{file_name}",
                host_start=method_range[0],
                host_end=method_range[1],
                oracle_start=oracle_span[0],
                oracle_end=oracle_span[1],
                oracle_name=recipe[5],
            )
        )

        prompt_text = build_prompt(method).render()
        for iteration, reply in enumerate(script):
            if mode == "miss" and not malformed_done and iteration == 7:
                raw = "The method is already quite small; I would leave it as is."
                malformed_done = True
            else:
                raw = render_reply(rng, reply)
            key = fixture_key(prompt_text, 1.2, iteration)
            cache.store(
                key,
                raw,
                model="fixture",
                temperature=1.2,
                iteration=iteration,
                prompt_sha="",
            )
        print(f"  {method_name:<18} {mode:<7} oracle={oracle_span} decoys={decoy_count}")

    lines = [
        json.dumps(
            {
                "file": e.file,
                "host_start": e.host_start,
                "host_end": e.host_end,
                "oracle_start": e.oracle_start,
                "oracle_end": e.oracle_end,
                "oracle_name": e.oracle_name,
            }
        )
        for e in oracle_entries
    ]
    (corpus_dir / "oracle.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return oracle_entries


# ---------------------------------------------------------------------------
# Verification and pinned values
# ---------------------------------------------------------------------------


def verify_corpus(data_dir: Path, oracle_entries: list[OracleEntry]) -> None:
    corpus_dir = data_dir / "corpus"
    run = CorpusRun(
        oracle=oracle_entries,
        sources_root=corpus_dir,
        params=LlmParams(),
        cfg=FilterConfig(),
        cache_mode="replay",
        cache_dir=corpus_dir / "cache",
    )
    by_key = {e.key: e for e in oracle_entries}
    modes = {(f"sources/{r[0]}", r[1]): r[2] for r in RECIPES}
    mode_of = {}
    for recipe in RECIPES:
        file_name, method_name, mode, *_ = recipe
        source = (corpus_dir / "sources" / file_name).read_text(encoding="utf-8")
        method_range = locate_method(source, method_name)
        mode_of[(f"sources/{file_name}", *method_range)] = (method_name, mode)

    for entry_, outcome in run.pipeline_results():
        method_name, mode = mode_of[entry_.key]
        top5 = [s for s, _ in outcome.top(5)]
        hit = any(within_tolerance(s, entry_, TOLERANCE) for s in top5)
        if mode == "miss":
            assert not hit, f"{method_name}: miss recipe unexpectedly hits"
        else:
            assert hit, f"{method_name} ({mode}): oracle not in ranked top-5"
        if mode in ("direct", "ranked"):
            assert len(outcome.applicable) >= 8, (
                f"{method_name}: applicable pool too small "
                f"({len(outcome.applicable)}) for the ablation gap"
            )
        if mode in ("extend", "shrink", "miss"):
            raw_hit = any(
                within_tolerance(s, entry_, TOLERANCE) for s in outcome.raw.entries()
            )
            assert not raw_hit, f"{method_name} ({mode}): raw output already matches"


def compute_pinned(data_dir: Path, oracle_entries: list[OracleEntry]) -> None:
    corpus_dir = data_dir / "corpus"
    run = CorpusRun(
        oracle=oracle_entries,
        sources_root=corpus_dir,
        params=LlmParams(),
        cfg=FilterConfig(),
        cache_mode="replay",
        cache_dir=corpus_dir / "cache",
    )
    report = run_experiment(run, n=5, tolerance_percent=TOLERANCE, repetitions=1)
    print(f"pinned corpus Recall@5 @3%: {report.mean:.4f}")
    means = {}
    for mode in ABLATION_MODES:
        rep = ablation(run, mode, n=5, tolerance_percent=TOLERANCE, repetitions=30, seed=0)
        means[mode] = rep.mean
        print(f"ablation {mode:<18} mean={rep.mean:.4f} stddev={rep.stddev:.4f}")
    assert means["enhanced-ranked"] >= means["enhanced-random5"] + 0.05
    assert means["enhanced-random5"] >= means["raw"] + 0.05


def write_golden_apply(data_dir: Path) -> None:
    ref_dir = data_dir / "reference"
    golden = data_dir / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    source = (ref_dir / "sources" / "PropertyAccess.java").read_text(encoding="utf-8")
    method = parse_method(source, REFERENCE_RANGE)
    s = ExtractSuggestion(
        name="emptyPropertyArray",
        start_line=REFERENCE_ORACLE[0],
        end_line=REFERENCE_ORACLE[1],
        occurrence_count=3,
    )
    plan = attach_source(plan_extraction(method, s), source)
    rewritten = apply_plan(source, plan)
    (golden / "applied_reference.java").write_text(rewritten, encoding="utf-8")


def main() -> None:
    if DATA.exists():
        shutil.rmtree(DATA)
    DATA.mkdir(parents=True)
    print("writing reference fixtures...")
    write_reference(DATA)
    print("writing corpus fixtures...")
    oracle_entries = write_corpus(DATA)
    print("verifying corpus design goals...")
    verify_corpus(DATA, oracle_entries)
    print("computing pinned values...")
    compute_pinned(DATA, oracle_entries)
    write_golden_apply(DATA)
    print("done.")


if __name__ == "__main__":
    main()
