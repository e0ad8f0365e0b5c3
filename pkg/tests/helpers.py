"""Shared test utilities: a random method generator and brute-force oracles.

The oracles deliberately re-derive each predicate with the dumbest possible
logic (exhaustive scans, double loops) so they stay independent of the code
paths they check.
"""

from __future__ import annotations

import random
import re

from carve.filtering import FilterConfig
from carve.method_model import LongMethod, parse_method
from carve.suggestions import ExtractSuggestion

# ---------------------------------------------------------------------------
# Random method generation
# ---------------------------------------------------------------------------

_CALLS = ("emit", "record", "push", "publish", "store")


class _Gen:
    def __init__(self, rng: random.Random) -> None:
        self.rng = rng
        self.counter = 0
        self.lines: list[str] = []

    def fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def expr(self, in_scope: list[str]) -> str:
        if in_scope and self.rng.random() < 0.7:
            name = self.rng.choice(in_scope)
            if self.rng.random() < 0.4:
                other = self.rng.choice(in_scope)
                return f"{name} + {other}"
            return f"{name} * {self.rng.randint(1, 9)}"
        return str(self.rng.randint(0, 99))


def random_method(
    rng: random.Random,
    max_statements: int = 18,
    allow_jumps: bool = True,
) -> tuple[str, tuple[int, int], LongMethod]:
    """Emit a parseable random method inside a class wrapper.

    Variable names are unique (no shadowing) so naive name matching is a
    valid liveness oracle over these methods.  Returns (source, range,
    parsed model).
    """
    gen = _Gen(rng)
    body: list[str] = []

    def block(depth: int, budget: int, in_scope: list[str], in_loop: bool) -> int:
        indent = "    " * (depth + 2)
        used = 0
        local_scope = list(in_scope)
        while used < budget:
            roll = rng.random()
            remaining = budget - used
            if roll < 0.35:
                name = gen.fresh()
                body.append(f"{indent}int {name} = {gen.expr(local_scope)};")
                local_scope.append(name)
                used += 1
            elif roll < 0.55 and local_scope:
                target = rng.choice(local_scope)
                body.append(f"{indent}{target} = {gen.expr(local_scope)};")
                used += 1
            elif roll < 0.7:
                call = rng.choice(_CALLS)
                args = ", ".join(
                    rng.sample(local_scope, min(len(local_scope), rng.randint(1, 2)))
                )
                body.append(f"{indent}{call}({args or '0'});")
                used += 1
            elif roll < 0.78 and allow_jumps and in_loop and depth > 0:
                body.append(f"{indent}{rng.choice(['break', 'continue'])};")
                used += 1
            elif roll < 0.8 and allow_jumps:
                body.append(f"{indent}return;")
                used += 1
            elif remaining >= 3 and depth < 3:
                loop = rng.random() < 0.5
                if loop:
                    guard = gen.fresh()
                    body.append(f"{indent}int {guard} = {rng.randint(1, 5)};")
                    body.append(f"{indent}while ({guard} > 0) {{")
                    local_scope.append(guard)
                    inner_budget = rng.randint(1, min(4, remaining - 2))
                    used += 2 + block(depth + 1, inner_budget, local_scope, True)
                    body.append("    " * (depth + 3) + f"{guard} = {guard} - 1;")
                    body.append(f"{indent}}}")
                    used += 1
                else:
                    cond = (
                        f"{rng.choice(local_scope)} > {rng.randint(0, 9)}"
                        if local_scope
                        else "ready()"
                    )
                    body.append(f"{indent}if ({cond}) {{")
                    inner_budget = rng.randint(1, min(4, remaining - 1))
                    used += 1 + block(depth + 1, inner_budget, local_scope, in_loop)
                    body.append(f"{indent}}}")
            else:
                call = rng.choice(_CALLS)
                body.append(f"{indent}{call}({gen.expr(local_scope)});")
                used += 1
        return used

    total = rng.randint(4, max_statements)
    block(0, total, ["seed"], False)

    offset = rng.randint(0, 6)
    prefix = ["class Generated {"] + ["    // filler"] * offset
    sig_line = len(prefix) + 1
    lines = prefix + ["    void run(int seed) {"] + body + ["    }", "}"]
    source = "\n".join(lines) + "\n"
    method_range = (sig_line, sig_line + len(body) + 1)
    method = parse_method(source, method_range)
    return source, method_range, method


def random_fragment(rng: random.Random, method: LongMethod) -> tuple[int, int]:
    """A random line range within the body (not necessarily balanced)."""
    lo, hi = method.body_start, method.body_end
    a = rng.randint(lo, hi)
    b = rng.randint(a, hi)
    return (a, b)


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------


def brute_balanced_enclosure(
    method: LongMethod, span: tuple[int, int]
) -> tuple[int, int] | None:
    """Smallest statement range containing ``span`` whose blocks all pair up.

    Exhaustive search over every (first, last) statement pair; None when the
    span covers no statements.
    """
    stmts = method.statements_in(*span)
    if not stmts:
        return None
    all_stmts = method.statements
    f, l = stmts[0].index, stmts[-1].index

    def balanced(i: int, j: int) -> bool:
        inside = set(range(i, j + 1))
        for st in all_stmts[i : j + 1]:
            if st.closes_block and st.closes_header is not None:
                if st.closes_header not in inside:
                    return False
            if st.closes_block and st.closes_header is None:
                return False
            if st.opens_block:
                if st.closed_by is None or st.closed_by not in inside:
                    return False
        return True

    best: tuple[int, int] | None = None
    for i in range(f, -1, -1):
        for j in range(l, len(all_stmts)):
            if balanced(i, j):
                if best is None or (j - i) < (best[1] - best[0]):
                    best = (i, j)
    if best is None:
        return None
    return (all_stmts[best[0]].start_line, all_stmts[best[1]].end_line)


def brute_live_out(method: LongMethod, span: tuple[int, int]) -> set[str]:
    """Name-matching liveness: only valid for shadow-free methods."""
    frag = method.statements_in(*span)
    if not frag:
        return set()
    last = max(st.index for st in frag)
    defined = set()
    for st in frag:
        defined |= st.defs
    later_uses: set[str] = set()
    for st in method.statements:
        if st.index > last:
            later_uses |= st.uses
    return {name for name in defined & later_uses if not _is_external(method, name)}


def _is_external(method: LongMethod, name: str) -> bool:
    if name in method.param_names():
        return False
    for st in method.statements:
        for _, declared in st.declared:
            if declared == name:
                return False
    return True


def _loop_spans(method: LongMethod) -> list[tuple[int, int]]:
    """Loop extents re-derived from statement text and the line-depth profile."""
    spans = []
    loop_head = re.compile(r"^(?:\}\s*)?(while|for|do)\b")
    for st in method.statements:
        if not st.opens_block or not loop_head.match(st.text):
            continue
        open_depth = st.scope_depth
        for other in method.statements:
            if other.index <= st.index:
                continue
            if other.closes_block and other.scope_depth == open_depth:
                spans.append((st.index, other.index))
                break
    return spans


def brute_verdict(
    method: LongMethod, span: tuple[int, int], cfg: FilterConfig
) -> tuple[str, str]:
    """Re-derive (classification, reason family) for one normalized span.

    Reason families: scope, returns, flow, whole, oneliner, ok.  Only for
    shadow-free methods (relies on brute_live_out).
    """
    frag = method.statements_in(*span)
    if not frag:
        return ("invalid", "scope")
    enclosure = brute_balanced_enclosure(method, span)
    if enclosure != span:
        return ("invalid", "scope")

    if len(brute_live_out(method, span)) > 1:
        return ("invalid", "returns")

    last = max(st.index for st in frag)
    first = min(st.index for st in frag)
    has_remainder = any(
        st.index > last and st.kind != "block-close" for st in method.statements
    )
    inside_any_loop = any(h < first and c > last for h, c in _loop_spans(method))
    for st in frag:
        if st.kind == "block-close":
            continue
        if re.search(r"\breturn\b", st.flow_text) and (has_remainder or inside_any_loop):
            return ("invalid", "flow")
        if re.search(r"\b(break|continue)\b", st.flow_text):
            inside_loop = any(
                first <= h and c <= last and h < st.index < c
                for h, c in _loop_spans(method)
            )
            if not inside_loop:
                return ("invalid", "flow")

    counted = [st for st in frag if st.kind != "block-close"]
    total = method.statement_count
    if total and len(counted) / total >= cfg.max_coverage_fraction:
        return ("not_useful", "whole")
    if len(counted) < cfg.min_statements:
        return ("not_useful", "oneliner")
    return ("applicable", "ok")


def brute_recall(
    results: dict,
    oracle: list,
    n: int,
    tolerance: float,
) -> float:
    hits = 0
    for entry in oracle:
        found = False
        for s in results.get(entry.key, [])[:n]:
            deviation = abs(s.start_line - entry.oracle_start) + abs(
                s.end_line - entry.oracle_end
            )
            if deviation <= tolerance / 100.0 * (entry.host_end - entry.host_start):
                found = True
        if found:
            hits += 1
    return hits / len(oracle) if oracle else 0.0


def inline_new_method(rewritten: str, plan, host_range: tuple[int, int]) -> list[str]:
    """Splice the new method's body back over its call site.

    Inverse of apply, up to indentation: used to check that extraction moved
    statements without changing them.
    """
    lines = rewritten.splitlines()
    removed = (plan.fragment_end - plan.fragment_start + 1) - 1
    host_end = host_range[1] - removed
    new_start = host_end + 2  # blank separator line
    body = []
    depth = 0
    started = False
    for line in lines[new_start - 1 :]:
        if not started:
            depth += line.count("{") - line.count("}")
            started = True
            continue
        if depth + line.count("{") - line.count("}") == 0:
            break
        depth += line.count("{") - line.count("}")
        body.append(line)
    if plan.return_variable is not None:
        body = body[:-1]  # drop the synthesized return
    call_index = plan.fragment_start - 1
    return lines[:call_index] + body + lines[call_index + 1 : new_start - 2]


def make_flat_method(total_statements: int) -> LongMethod:
    """A method of independent single-line declarations, one per statement."""
    body = [f"        int f{i} = {i};" for i in range(total_statements)]
    lines = ["class Flat {", "    void fill() {"] + body + ["    }", "}"]
    source = "\n".join(lines) + "\n"
    return parse_method(source, (2, 2 + total_statements + 1))


def suggestion(start: int, end: int, name: str = "extracted", count: int = 1) -> ExtractSuggestion:
    return ExtractSuggestion(
        name=name, start_line=start, end_line=end, occurrence_count=count
    )
