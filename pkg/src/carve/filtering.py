"""Validity and usefulness filtering of extraction suggestions.

Validity guarantees the fragment could be pulled into its own method without
breaking compilation: every name it reads is reachable, at most one value
flows out, and no control flow escapes the fragment.  Usefulness rejects
fragments nobody would extract: near-whole-body ranges and one-liners.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from carve.errors import UnsalvageableRange
from carve.method_model import EXTERNAL, PARAM, LongMethod, Statement, def_use, live_out
from carve.suggestions import (
    APPLICABLE,
    CONTROL_FLOW_ESCAPE,
    INVALID,
    MULTIPLE_RETURNS,
    NOT_USEFUL,
    OK,
    ONE_LINER,
    SCOPE_UNBALANCED,
    VARIABLE_INACCESSIBLE,
    WHOLE_METHOD,
    ExtractSuggestion,
    SuggestionSet,
    Verdict,
    clamp_to_body,
    normalize_scope,
)


@dataclass(frozen=True)
class FilterConfig:
    """Tunables for the usefulness rules.

    A fragment covering ``max_coverage_fraction`` or more of the method's
    statements is rejected (closed threshold), as is any fragment spanning
    fewer than ``min_statements`` statements.
    """

    max_coverage_fraction: float = 0.88
    min_statements: int = 2

    def __post_init__(self) -> None:
        if not 0 < self.max_coverage_fraction <= 1:
            raise ValueError("max_coverage_fraction must be in (0, 1]")
        if self.min_statements < 2:
            raise ValueError("min_statements must be at least 2")


@dataclass
class TriagedSet:
    """Partition of a suggestion set into invalid / not useful / applicable."""

    invalid: list[Verdict] = field(default_factory=list)
    not_useful: list[Verdict] = field(default_factory=list)
    useful: list[Verdict] = field(default_factory=list)

    def all_verdicts(self) -> list[Verdict]:
        return self.invalid + self.not_useful + self.useful

    def counts(self) -> dict[str, int]:
        return {
            "total": len(self.invalid) + len(self.not_useful) + len(self.useful),
            "invalid": len(self.invalid),
            "not_useful": len(self.not_useful),
            "useful": len(self.useful),
        }


_RETURN_TOKEN = re.compile(r"\breturn\b")
_BREAK_TOKEN = re.compile(r"\bbreak\b(?:\s+([A-Za-z_$][A-Za-z0-9_$]*))?")
_CONTINUE_TOKEN = re.compile(r"\bcontinue\b(?:\s+([A-Za-z_$][A-Za-z0-9_$]*))?")
_THROW_TOKEN = re.compile(r"\bthrow\b")
_LOOP_HEAD = re.compile(
    r"^\s*(?:\}\s*)?(?:[A-Za-z_$][A-Za-z0-9_$]*\s*:\s*)?(while|for|do|switch)\b"
)


def check_validity(method: LongMethod, s: ExtractSuggestion) -> Verdict:
    """Apply the validity rules to a scope-normalized suggestion.

    Failures come back as invalid verdicts with a reason code; this function
    never raises for a rule violation.
    """
    frag = method.statements_in(s.start_line, s.end_line)
    if not frag:
        return Verdict(s, INVALID, SCOPE_UNBALANCED, "range covers no statements")

    unbalanced = _balance_problem(method, frag)
    if unbalanced:
        return Verdict(s, INVALID, SCOPE_UNBALANCED, unbalanced)

    inaccessible = _inaccessible_name(method, frag)
    if inaccessible:
        return Verdict(
            s, INVALID, VARIABLE_INACCESSIBLE, f"'{inaccessible}' is not reachable"
        )

    escaping = live_out(method, s.span)
    if len(escaping) > 1:
        return Verdict(
            s,
            INVALID,
            MULTIPLE_RETURNS,
            "more than one value flows out: " + ", ".join(sorted(escaping)),
        )

    escape = _control_flow_escape(method, frag)
    if escape:
        return Verdict(s, INVALID, CONTROL_FLOW_ESCAPE, escape)

    return Verdict(s, APPLICABLE, OK)


def check_usefulness(
    method: LongMethod, s: ExtractSuggestion, cfg: FilterConfig
) -> Verdict:
    """Apply the usefulness rules to a validity-passing suggestion.

    Coverage counts statements, not lines; block closers are excluded from
    both sides of the ratio.
    """
    frag = method.statements_in(s.start_line, s.end_line)
    frag_count = sum(1 for st in frag if st.kind != "block-close")
    total = method.statement_count
    if total and frag_count / total >= cfg.max_coverage_fraction:
        return Verdict(
            s,
            NOT_USEFUL,
            WHOLE_METHOD,
            f"covers {frag_count} of {total} statements",
        )
    if frag_count < cfg.min_statements:
        return Verdict(s, NOT_USEFUL, ONE_LINER, f"spans {frag_count} statement(s)")
    return Verdict(s, APPLICABLE, OK)


def triage(
    method: LongMethod, suggestions: SuggestionSet, cfg: FilterConfig | None = None
) -> TriagedSet:
    """Run clamp -> normalize -> validity -> usefulness over a whole set.

    Ranges that normalize onto each other merge, summing occurrence counts.
    Every surviving range receives exactly one verdict.
    """
    cfg = cfg or FilterConfig()
    normalized: dict[tuple[int, int], ExtractSuggestion] = {}
    pre_verdicted: list[Verdict] = []

    for s in suggestions.entries():
        clamped, changed = clamp_to_body(method, s)
        if changed:
            pre_verdicted.append(
                Verdict(
                    clamped,
                    INVALID,
                    SCOPE_UNBALANCED,
                    f"lines {s.start_line}..{s.end_line} stray outside the host method",
                )
            )
            continue
        try:
            norm = normalize_scope(method, clamped)
        except UnsalvageableRange as exc:
            pre_verdicted.append(Verdict(clamped, INVALID, SCOPE_UNBALANCED, str(exc)))
            continue
        prior = normalized.get(norm.span)
        if prior is None:
            normalized[norm.span] = norm
        else:
            merged_count = prior.occurrence_count + norm.occurrence_count
            keep = prior if prior.occurrence_count >= norm.occurrence_count else norm
            normalized[norm.span] = ExtractSuggestion(
                name=keep.name,
                start_line=norm.span[0],
                end_line=norm.span[1],
                occurrence_count=merged_count,
                provenance="normalized",
            )

    result = TriagedSet()
    for verdict in pre_verdicted:
        result.invalid.append(verdict)
    for span in sorted(normalized):
        s = normalized[span]
        verdict = check_validity(method, s)
        if verdict.classification == INVALID:
            result.invalid.append(verdict)
            continue
        verdict = check_usefulness(method, s, cfg)
        if verdict.classification == NOT_USEFUL:
            result.not_useful.append(verdict)
        else:
            result.useful.append(verdict)
    return result


# ---------------------------------------------------------------------------
# Rule internals
# ---------------------------------------------------------------------------


def _balance_problem(method: LongMethod, frag: tuple[Statement, ...]) -> str | None:
    indices = {st.index for st in frag}
    balance = 0
    for st in frag:
        if st.closes_block:
            balance -= 1
            if balance < 0:
                return "fragment closes a block opened outside it"
        if st.opens_block:
            if st.closed_by is not None and st.closed_by not in indices:
                return "fragment opens a block it does not close"
            balance += 1
    if balance != 0:
        return "fragment braces are not balanced"
    return None


def _inaccessible_name(method: LongMethod, frag: tuple[Statement, ...]) -> str | None:
    """Rule: every name read in the fragment must be defined in it, declared
    before it, or external (field / parameter)."""
    chains = def_use(method)
    indices = {st.index for st in frag}
    first = min(indices)
    for name, events in chains.events.items():
        for ev in events:
            if ev.kind != "use" or ev.statement_index not in indices:
                continue
            if ev.decl_index in (EXTERNAL, PARAM):
                continue
            if ev.decl_index >= first and ev.decl_index not in indices:
                return name
            if ev.decl_index > ev.statement_index:
                return name
    return None


def _control_flow_escape(method: LongMethod, frag: tuple[Statement, ...]) -> str | None:
    indices = {st.index for st in frag}
    first, last = min(indices), max(indices)
    remainder = [
        st
        for st in method.statements
        if st.index > last and st.kind != "block-close"
    ]
    # A fragment nested in a loop (or switch) is never a true suffix: the
    # back edge re-enters code above it even when nothing follows textually.
    enclosing_jump_target = any(
        h.opens_block
        and h.index < first
        and h.closed_by is not None
        and h.closed_by > last
        and _LOOP_HEAD.match(h.text)
        for h in method.statements
    )

    for st in frag:
        if st.kind == "block-close":
            continue
        if _RETURN_TOKEN.search(st.flow_text) and (remainder or enclosing_jump_target):
            return f"return at line {st.start_line} but the method continues after the fragment"
        if _THROW_TOKEN.search(st.flow_text):
            problem = _throw_straddles_catch(method, st, indices)
            if problem:
                return problem

    problem = _try_group_integrity(method, indices)
    if problem:
        return problem

    # break/continue must target a loop that lives inside the fragment.
    loop_headers = [
        st.index
        for st in frag
        if st.opens_block and _LOOP_HEAD.match(st.text)
    ]
    by_index = {st.index: st for st in method.statements}
    for st in frag:
        for token_re, kind in ((_BREAK_TOKEN, "break"), (_CONTINUE_TOKEN, "continue")):
            m = token_re.search(st.flow_text)
            if not m:
                continue
            target_label = m.group(1)
            enclosed = False
            for header_idx in loop_headers:
                header = by_index[header_idx]
                closer = header.closed_by
                if closer is None or not header_idx < st.index < closer:
                    continue
                if target_label and not re.match(
                    rf"\s*{re.escape(target_label)}\s*:", header.text
                ):
                    continue  # labelled jump: only the named loop counts
                enclosed = True
                break
            if not enclosed:
                return f"{kind} at line {st.start_line} targets a loop outside the fragment"
    return None


def _throw_straddles_catch(
    method: LongMethod, throw_stmt: Statement, frag_indices: set[int]
) -> str | None:
    """A throw whose structurally-enclosing try sits partly outside the
    fragment would change which catch receives it."""
    for header in method.statements:
        if not header.opens_block or not header.text.lstrip().startswith("try"):
            continue
        closer = header.closed_by
        if closer is None:
            continue
        if header.index < throw_stmt.index < closer:
            group = _try_group_indices(method, header)
            if not group.issubset(frag_indices):
                return (
                    f"throw at line {throw_stmt.start_line} is caught outside the fragment"
                )
    return None


def _try_group_indices(method: LongMethod, try_header: Statement) -> set[int]:
    """Statement indices of a whole try/catch/finally chain."""
    by_index = {st.index: st for st in method.statements}
    group: set[int] = set()
    header = try_header
    while True:
        closer = header.closed_by
        if closer is None:
            break
        group.update(range(header.index, closer + 1))
        closing = by_index[closer]
        if closing.opens_block and closing.kind == "try-boundary":
            header = closing
            continue
        break
    return group


def _try_group_integrity(method: LongMethod, frag_indices: set[int]) -> str | None:
    for st in method.statements:
        if st.kind != "try-boundary" or not st.opens_block:
            continue
        if not st.text.lstrip().startswith("try"):
            continue
        group = _try_group_indices(method, st)
        inside = group & frag_indices
        if inside and inside != group:
            return "a try/catch block straddles the fragment boundary"
    return None
