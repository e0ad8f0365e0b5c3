"""Fragment adjustment heuristics applied to applicable suggestions.

Two moves: absorb a declaration sitting directly above the fragment when the
fragment reads that variable (so it stops being a parameter), and shrink a
fragment that is exactly an ``if`` statement down to the body of the ``if``
(so the condition stays readable in the host).  Every move is re-checked;
a move that degrades the verdict is rolled back.
"""

from __future__ import annotations

from dataclasses import replace

from carve.filtering import FilterConfig, check_usefulness, check_validity
from carve.method_model import LongMethod, live_in
from carve.suggestions import APPLICABLE, ExtractSuggestion


def _still_useful(method: LongMethod, s: ExtractSuggestion, cfg: FilterConfig) -> bool:
    verdict = check_validity(method, s)
    if verdict.classification != APPLICABLE:
        return False
    return check_usefulness(method, s, cfg).classification == APPLICABLE


def extend_for_declaration(
    method: LongMethod, s: ExtractSuggestion, cfg: FilterConfig | None = None
) -> ExtractSuggestion:
    """Pull directly-preceding declarations of fragment-read variables in.

    Iterates until the statement above is not such a declaration.  A step
    that would raise the parameter count, or break validity or usefulness,
    is not taken.
    """
    cfg = cfg or FilterConfig()
    current = s
    while True:
        frag = method.statements_in(current.start_line, current.end_line)
        if not frag:
            return current
        first = frag[0]
        above = next(
            (st for st in reversed(method.statements) if st.index < first.index),
            None,
        )
        if above is None or above.kind != "declaration":
            return current
        if above.scope_depth != first.scope_depth:
            return current
        declared = {name for _, name in above.declared}
        params_now = live_in(method, current.span)
        if not declared & set(params_now):
            return current
        candidate = replace(
            current, start_line=above.start_line, provenance="enhanced"
        )
        if len(live_in(method, candidate.span)) > len(params_now):
            return current
        if not _still_useful(method, candidate, cfg):
            return current
        current = candidate


def shrink_control_header(
    method: LongMethod, s: ExtractSuggestion, cfg: FilterConfig | None = None
) -> ExtractSuggestion:
    """Drop a leading ``if`` check, keeping only the block it guards.

    Applies only when the fragment is exactly the ``if`` statement; the
    shrunken form must survive re-verdicting or the original is kept.
    Loop headers are never shrunk.
    """
    cfg = cfg or FilterConfig()
    frag = method.statements_in(s.start_line, s.end_line)
    if not frag:
        return s
    first = frag[0]
    if not first.opens_block or not first.text.lstrip().startswith("if"):
        return s
    closer_idx = first.closed_by
    if closer_idx is None:
        return s
    by_index = {st.index: st for st in method.statements}
    closer = by_index[closer_idx]
    if closer.end_line != s.end_line or first.start_line != s.start_line:
        return s
    body = [st for st in method.statements if first.index < st.index < closer.index]
    if not body:
        return s
    candidate = ExtractSuggestion(
        name=s.name,
        start_line=body[0].start_line,
        end_line=body[-1].end_line,
        occurrence_count=s.occurrence_count,
        provenance="enhanced",
    )
    if not _still_useful(method, candidate, cfg):
        return s
    return candidate


def enhance(
    method: LongMethod, s: ExtractSuggestion, cfg: FilterConfig | None = None
) -> ExtractSuggestion:
    """Full enhancement pass for one useful suggestion.

    Extends, then shrinks, repeating until stable: a shrunken fragment may
    itself start with a nested ``if`` worth shrinking.
    """
    cfg = cfg or FilterConfig()
    current = s
    for _ in range(len(method.statements) + 1):
        out = shrink_control_header(
            method, extend_for_declaration(method, current, cfg), cfg
        )
        if out.span == current.span:
            return out
        current = out
    return current


def enhance_all(
    method: LongMethod,
    suggestions: list[ExtractSuggestion],
    cfg: FilterConfig | None = None,
) -> list[ExtractSuggestion]:
    """Enhance every suggestion; ranges that collide merge their counts."""
    cfg = cfg or FilterConfig()
    merged: dict[tuple[int, int], ExtractSuggestion] = {}
    for s in suggestions:
        out = enhance(method, s, cfg)
        prior = merged.get(out.span)
        if prior is None:
            merged[out.span] = out
        else:
            keep = prior if prior.occurrence_count >= out.occurrence_count else out
            merged[out.span] = replace(
                keep,
                start_line=out.span[0],
                end_line=out.span[1],
                occurrence_count=prior.occurrence_count + out.occurrence_count,
            )
    return [merged[span] for span in sorted(merged)]
