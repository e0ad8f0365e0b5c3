"""Suggestion data model, verdicts, and scope normalization.

A suggestion is a named absolute line range inside a host method.  Sets of
suggestions deduplicate on the range; names are cosmetic until application,
so colliding ranges keep the most frequent name.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, replace

from carve.errors import UnsalvageableRange
from carve.method_model import LongMethod

# Verdict classes.
INVALID = "invalid"
NOT_USEFUL = "not_useful"
APPLICABLE = "applicable"

# Verdict reason codes.
SCOPE_UNBALANCED = "ScopeUnbalanced"
MULTIPLE_RETURNS = "MultipleReturns"
CONTROL_FLOW_ESCAPE = "ControlFlowEscape"
VARIABLE_INACCESSIBLE = "VariableInaccessible"
WHOLE_METHOD = "WholeMethod"
ONE_LINER = "OneLiner"
OK = "Ok"

_IDENT_CHARS = re.compile(r"[^A-Za-z0-9_$]")
_VALID_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


def sanitize_name(raw: str) -> str:
    """Reduce a model-proposed name to a plain identifier.

    Strips decoration, drops a leading digit run, and falls back to
    ``extracted`` when nothing usable remains.
    """
    cleaned = _IDENT_CHARS.sub("", raw or "")
    cleaned = cleaned.lstrip("0123456789")
    if not cleaned or not _VALID_IDENT.fullmatch(cleaned):
        return "extracted"
    return cleaned


@dataclass(frozen=True)
class ExtractSuggestion:
    """A candidate fragment: name plus absolute start/end lines."""

    name: str
    start_line: int
    end_line: int
    occurrence_count: int = 1
    provenance: str = "raw"  # raw | normalized | enhanced

    @property
    def span(self) -> tuple[int, int]:
        return (self.start_line, self.end_line)

    @property
    def line_count(self) -> int:
        return self.end_line - self.start_line + 1

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "count": self.occurrence_count,
        }


@dataclass(frozen=True)
class Verdict:
    """Classification of one suggestion after filtering."""

    suggestion: ExtractSuggestion
    classification: str  # invalid | not_useful | applicable
    reason_code: str
    detail: str = ""

    def __post_init__(self) -> None:
        if (self.classification == APPLICABLE) != (self.reason_code == OK):
            raise ValueError("applicable verdicts must carry the Ok reason, and only them")

    def to_json(self) -> dict:
        payload = self.suggestion.to_json()
        payload["class"] = self.classification
        payload["reason_code"] = self.reason_code
        return payload


class SuggestionSet:
    """Deduplicated suggestions for one host method, with occurrence counts."""

    def __init__(self, host: LongMethod) -> None:
        self.host = host
        self._counts: Counter[tuple[int, int]] = Counter()
        self._names: dict[tuple[int, int], Counter[str]] = {}

    def add(self, name: str, start_line: int, end_line: int, count: int = 1) -> None:
        span = (start_line, end_line)
        self._counts[span] += count
        self._names.setdefault(span, Counter())[sanitize_name(name)] += count

    def entries(self) -> tuple[ExtractSuggestion, ...]:
        """Suggestions sorted by range; most frequent name wins, ties go
        lexicographically."""
        out = []
        for span in sorted(self._counts):
            names = self._names[span]
            best = min(names, key=lambda n: (-names[n], n))
            out.append(
                ExtractSuggestion(
                    name=best,
                    start_line=span[0],
                    end_line=span[1],
                    occurrence_count=self._counts[span],
                )
            )
        return tuple(out)

    def __len__(self) -> int:
        return len(self._counts)

    def total_occurrences(self) -> int:
        return sum(self._counts.values())


def clamp_to_body(method: LongMethod, s: ExtractSuggestion) -> tuple[ExtractSuggestion, bool]:
    """Clamp a suggestion into the body span; report whether it changed.

    Ranges that touch the signature or closing-brace line, or stray outside
    the method entirely, are hallucinations: the caller marks them invalid
    but keeps them so reports can account for them.
    """
    lo, hi = method.body_start, method.body_end
    start = min(max(s.start_line, lo), hi)
    end = min(max(s.end_line, lo), hi)
    if start > end:
        start = end = lo
    if (start, end) == s.span:
        return s, False
    return replace(s, start_line=start, end_line=end, provenance="normalized"), True


def normalize_scope(method: LongMethod, s: ExtractSuggestion) -> ExtractSuggestion:
    """Grow the fragment outward until its start and end sit at one scope level.

    A fragment that closes a block opened above it absorbs that block's
    header; one that opens a block it never closes absorbs the closer.  The
    result is brace-balanced and never smaller than the input.  Raises
    UnsalvageableRange if balancing would have to leave the body.
    """
    stmts = method.statements_in(s.start_line, s.end_line)
    if not stmts:
        raise UnsalvageableRange(
            f"range {s.start_line}..{s.end_line} covers no statements"
        )
    by_index = {st.index: st for st in method.statements}
    first, last = stmts[0].index, stmts[-1].index

    for _ in range(2 * len(method.statements) + 2):
        # A closer whose header sits above the fragment: absorb the header.
        pulled_up = False
        for idx in range(first, last + 1):
            st = by_index[idx]
            if st.closes_block and (st.closes_header is None or st.closes_header < first):
                if st.closes_header is None:
                    raise UnsalvageableRange("fragment closes the method body itself")
                first = st.closes_header
                pulled_up = True
                break
        if pulled_up:
            continue
        # A header whose closer sits below the fragment: absorb the closer.
        extended = False
        for idx in range(first, last + 1):
            st = by_index[idx]
            if st.opens_block and (st.closed_by is None or st.closed_by > last):
                if st.closed_by is None:
                    raise UnsalvageableRange(
                        "fragment opens a block the body never closes"
                    )
                last = st.closed_by
                extended = True
                break
        if extended:
            continue
        break
    else:
        raise UnsalvageableRange("scope normalization did not converge")

    new_start = by_index[first].start_line
    new_end = by_index[last].end_line
    if new_start < method.body_start or new_end > method.body_end:
        raise UnsalvageableRange("balanced range would swallow the method braces")
    if (new_start, new_end) == s.span:
        return s
    return replace(s, start_line=new_start, end_line=new_end, provenance="normalized")
