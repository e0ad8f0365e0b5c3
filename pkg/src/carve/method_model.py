"""Statement-level model of a brace-delimited method.

Parses one method out of a source file into an ordered list of statements
with scope depths, per-statement defs/uses, and block structure, then
answers def-use and liveness queries over that model.

The grammar is a pragmatic subset: brace-delimited blocks, semicolon
terminated statements, Java-like declarations.  Identifier resolution is
lexical; names never declared in the method (fields, types, imports) land
in an "external" bucket instead of failing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from carve.errors import EmptyBody, LineNotInBody, UnbalancedBraces

# Words that can never be variable uses.
_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while var
    true false null
    """.split()
)

_CONTROL_HEADS = frozenset({"if", "else", "while", "for", "do", "switch", "synchronized"})
_TRY_HEADS = frozenset({"try", "catch", "finally"})

_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_LABEL_PREFIX = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*\s*:\s*(?!:)")

# External variables get a sentinel declaration site.
EXTERNAL = -1
PARAM = -2


@dataclass(frozen=True)
class Statement:
    """One statement of the method body.

    ``scope_depth`` is brace nesting relative to the method body (the first
    body statement sits at depth 0).  ``closes_header`` / ``closed_by`` link
    block closers to their headers; a ``} else {`` line plays both roles.
    ``flow_text`` blanks out opaque regions (lambda bodies, anonymous
    classes) so control-flow keywords inside them are not mistaken for the
    statement's own.
    """

    index: int
    start_line: int
    end_line: int
    scope_depth: int
    kind: str  # declaration|expression|control-header|block-close|return|break|continue|throw|try-boundary
    defs: frozenset[str]
    uses: frozenset[str]
    text: str
    flow_text: str = ""
    opens_block: bool = False
    closes_block: bool = False
    closes_header: int | None = None  # statement index of the header this one closes
    closed_by: int | None = None  # statement index of the closer for this header
    declared: tuple[tuple[str, str], ...] = ()  # (type text, name) pairs declared here


@dataclass(frozen=True)
class DefUseEvent:
    statement_index: int
    kind: str  # "def" | "use"
    # Resolved variable identity: index of the declaring statement, or the
    # PARAM / EXTERNAL sentinels for signature parameters and unknown names.
    decl_index: int


@dataclass(frozen=True)
class DefUseChains:
    """Per-name ordered def/use events plus the external-name bucket."""

    events: dict[str, tuple[DefUseEvent, ...]]
    external: frozenset[str]

    def for_name(self, name: str) -> tuple[DefUseEvent, ...]:
        return self.events.get(name, ())


@dataclass(frozen=True)
class LongMethod:
    """A host method picked for extraction, addressed by absolute lines."""

    file_path: Path | None
    start_line: int
    end_line: int
    signature_text: str
    statements: tuple[Statement, ...]
    doc_comment: str | None
    parameters: tuple[tuple[str, str], ...]  # (type text, name)
    lines: tuple[str, ...]  # raw source lines start_line..end_line
    _line_depths: tuple[int, ...] = field(repr=False, default=())

    @property
    def length(self) -> int:
        return self.end_line - self.start_line

    @property
    def body_start(self) -> int:
        return self.start_line + 1

    @property
    def body_end(self) -> int:
        return self.end_line - 1

    @property
    def statement_count(self) -> int:
        """Statements that count for coverage rules (block closers excluded)."""
        return sum(1 for s in self.statements if s.kind != "block-close")

    def line_text(self, line: int) -> str:
        return self.lines[line - self.start_line]

    def text(self) -> str:
        return "\n".join(self.lines)

    def statements_in(self, start_line: int, end_line: int) -> tuple[Statement, ...]:
        """Statements whose span intersects [start_line, end_line]."""
        return tuple(
            s
            for s in self.statements
            if s.start_line <= end_line and s.end_line >= start_line
        )

    def param_names(self) -> frozenset[str]:
        return frozenset(name for _, name in self.parameters)


# ---------------------------------------------------------------------------
# Comment / string scrubbing
# ---------------------------------------------------------------------------


def scrub(text: str) -> str:
    """Blank out comments and string/char literals, preserving layout.

    Every replaced character becomes a space; newlines survive, so line and
    column arithmetic on the result matches the original text.
    """
    out = list(text)
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (text[i] == "*" and i + 1 < n and text[i + 1] == "/"):
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                if i + 1 < n:
                    out[i + 1] = " "
                i += 2
        elif c in "\"'":
            quote = c
            out[i] = " "
            i += 1
            while i < n and text[i] != quote:
                if text[i] == "\\" and i + 1 < n:
                    out[i] = " "
                    if text[i + 1] != "\n":
                        out[i + 1] = " "
                    i += 2
                    continue
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Declaration recognition
# ---------------------------------------------------------------------------

_MODIFIERS = ("final",)

# Type token: identifier with optional qualification, generics and array
# brackets, e.g. Map.Entry<String, int[]> [][]
_TYPE_RE = (
    r"(?:[A-Za-z_$][A-Za-z0-9_$]*(?:\s*\.\s*[A-Za-z_$][A-Za-z0-9_$]*)*"
    r"(?:\s*<[^<>;{}]*(?:<[^<>;{}]*>[^<>;{}]*)*>)?(?:\s*\[\s*\])*)"
)

_PLAIN_DECL = re.compile(
    r"^\s*(?:(?:final|static)\s+)*(" + _TYPE_RE + r")\s+"
    r"([A-Za-z_$][A-Za-z0-9_$]*(?:\s*\[\s*\])*)\s*(=|;|,)"
)
_FOREACH_DECL = re.compile(
    r"\bfor\s*\(\s*(?:final\s+)?(" + _TYPE_RE + r")\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*:"
)
_CATCH_DECL = re.compile(
    r"\bcatch\s*\(\s*(?:final\s+)?(" + _TYPE_RE + r"(?:\s*\|\s*" + _TYPE_RE + r")*)\s+"
    r"([A-Za-z_$][A-Za-z0-9_$]*)\s*\)"
)
_FOR_CLASSIC = re.compile(r"\bfor\s*\(")


def _split_declarators(tail: str) -> list[tuple[str, str]]:
    """Split ``a = 1, b = f(x, 2), c`` into (name, init) pairs."""
    parts: list[tuple[str, str]] = []
    depth = 0
    current = []
    for ch in tail:
        if ch in "([<":
            depth += 1
        elif ch in ")]>":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    last = "".join(current).strip().rstrip(";").strip()
    if last:
        parts.append(last)
    else:
        parts = [p for p in parts if p]
    out: list[tuple[str, str]] = []
    for part in parts:
        name, eq, init = part.partition("=")
        name = name.strip().rstrip("[] \t")
        if _IDENT.fullmatch(name):
            out.append((name, init.strip() if eq else ""))
    return out


def _extract_declarations(text: str) -> list[tuple[str, str]]:
    """Return (type text, name) pairs declared by this statement's text."""
    decls: list[tuple[str, str]] = []
    stripped = text.strip()
    head = stripped.split("(", 1)[0].split(None, 1)[0] if stripped else ""

    m = _FOREACH_DECL.search(stripped)
    if m:
        decls.append((_norm_ws(m.group(1)), m.group(2)))
        return decls
    m = _CATCH_DECL.search(stripped)
    if m:
        decls.append((_norm_ws(m.group(1)), m.group(2)))
        return decls
    if head == "for":
        open_paren = stripped.index("(")
        first_clause = stripped[open_paren + 1 :].split(";", 1)[0]
        m = _PLAIN_DECL.match(first_clause + ";")
        if m:
            type_text = _norm_ws(m.group(1))
            tail = (first_clause + ";")[m.start(2) :]
            for name, _ in _split_declarators(tail):
                decls.append((type_text, name))
        return decls
    if head in _CONTROL_HEADS or head in _TRY_HEADS or head in (
        "return",
        "throw",
        "break",
        "continue",
    ):
        return decls

    m = _PLAIN_DECL.match(stripped)
    if m:
        type_text = _norm_ws(m.group(1))
        if type_text in ("return", "new", "throw"):
            return decls
        tail = stripped[m.start(2) :]
        for name, _ in _split_declarators(tail):
            decls.append((type_text, name))
    return decls


def _norm_ws(s: str) -> str:
    return re.sub(r"\s+", " ", s.strip())


# ---------------------------------------------------------------------------
# Identifier classification within a statement
# ---------------------------------------------------------------------------

_ASSIGN_TARGET = re.compile(
    r"(?<![=<>!+\-*/%&|^])"
    r"\b([A-Za-z_$][A-Za-z0-9_$]*)\s*((?:\[[^\[\]]*\])*)\s*"
    r"(=(?![=])|\+=|-=|\*=|/=|%=|&=|\|=|\^=|<<=|>>=|>>>=)"
)
_INCDEC = re.compile(
    r"\b([A-Za-z_$][A-Za-z0-9_$]*)\s*(\+\+|--)|(\+\+|--)\s*([A-Za-z_$][A-Za-z0-9_$]*)"
)


def _statement_defs_uses(
    text: str, flow_text: str, declared: list[tuple[str, str]]
) -> tuple[set[str], set[str]]:
    """Lexical defs/uses of one scrubbed statement text.

    Defs: declared names, assignment targets (indexed targets also count as
    uses), increments/decrements.  Assignments are only recognized outside
    opaque regions (a lambda cannot reassign a captured local).  Uses: every
    other identifier that is not a keyword, member access, call name,
    declared type, or annotation; plain assignment targets do not read.
    """
    defs: set[str] = set(name for _, name in declared)
    uses: set[str] = set()

    # Spans occupied by declared type tokens: skip them during use scanning.
    type_spans: list[tuple[int, int]] = []
    for type_text, _ in declared:
        base = type_text.split("<")[0].split("[")[0].strip()
        for m in re.finditer(re.escape(base), text):
            type_spans.append((m.start(), m.end()))

    target_spans: set[tuple[int, int]] = set()
    for m in _ASSIGN_TARGET.finditer(flow_text):
        name, index_part, op = m.group(1), m.group(2), m.group(3)
        if name in _KEYWORDS:
            continue
        if flow_text[: m.start(1)].rstrip().endswith("."):
            continue  # member write: mutates the base object, defines no local
        defs.add(name)
        target_spans.add((m.start(1), m.end(1)))
        if index_part or op != "=":
            uses.add(name)  # compound or element assignment reads the target
    for m in _INCDEC.finditer(flow_text):
        name = m.group(1) or m.group(4)
        if name and name not in _KEYWORDS:
            defs.add(name)
            uses.add(name)

    decl_name_positions: set[int] = set()
    for _, name in declared:
        dm = re.search(r"\b" + re.escape(name) + r"\b", text)
        if dm:
            decl_name_positions.add(dm.start())

    for m in _IDENT.finditer(text):
        name = m.group(0)
        start, end = m.start(), m.end()
        if name in _KEYWORDS:
            continue
        if start in decl_name_positions:
            continue
        if (start, end) in target_spans:
            continue
        if any(a <= start and end <= b for a, b in type_spans):
            continue
        before = text[:start].rstrip()
        if before.endswith(".") or before.endswith("@"):
            continue
        if before.endswith("new"):
            continue
        after = text[end:].lstrip()
        if after.startswith("("):
            continue
        uses.add(name)
    return defs, uses


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_method(
    source: str, method_range: tuple[int, int], file_path: Path | None = None
) -> LongMethod:
    """Parse the method occupying ``method_range`` (1-based, inclusive).

    The first line must hold the signature; the matching close brace must
    sit on the last line.  Raises UnbalancedBraces when the range is not a
    complete method and EmptyBody when the body holds no statements.
    """
    start, end = method_range
    all_lines = source.splitlines()
    if start < 1 or end > len(all_lines) or start >= end:
        raise UnbalancedBraces(f"method range {start}..{end} does not lie in the file")

    raw_lines = all_lines[start - 1 : end]
    raw_text = "\n".join(raw_lines)
    clean_text = scrub(raw_text)
    clean_lines = clean_text.split("\n")

    open_pos = clean_text.find("{")
    if open_pos == -1:
        raise UnbalancedBraces("no opening brace in method range")
    close_pos = _matching_brace(clean_text, open_pos)
    if close_pos is None:
        raise UnbalancedBraces("method braces are not balanced within the range")
    close_line = start + clean_text.count("\n", 0, close_pos)
    if close_line != end:
        raise UnbalancedBraces(
            f"method closes at line {close_line}, not at range end {end}"
        )
    if clean_text[close_pos + 1 :].strip():
        raise UnbalancedBraces("trailing content after the method's closing brace")

    signature_text = _norm_ws(clean_text[:open_pos])
    parameters = _parse_parameters(signature_text)
    doc_comment = _doc_comment_above(all_lines, start)

    statements = _split_statements(clean_lines, start, open_pos, close_pos, clean_text)
    if not statements:
        raise EmptyBody(f"method at lines {start}..{end} has an empty body")

    line_depths = _line_depths(clean_lines)

    return LongMethod(
        file_path=file_path,
        start_line=start,
        end_line=end,
        signature_text=signature_text,
        statements=tuple(statements),
        doc_comment=doc_comment,
        parameters=tuple(parameters),
        lines=tuple(raw_lines),
        _line_depths=line_depths,
    )


def _matching_brace(text: str, open_pos: int) -> int | None:
    depth = 0
    for i in range(open_pos, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


def _parse_parameters(signature: str) -> list[tuple[str, str]]:
    lp = signature.find("(")
    rp = signature.rfind(")")
    if lp == -1 or rp == -1 or rp < lp:
        return []
    inner = signature[lp + 1 : rp].strip()
    if not inner:
        return []
    params: list[tuple[str, str]] = []
    depth = 0
    piece: list[str] = []
    pieces: list[str] = []
    for ch in inner:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        if ch == "," and depth == 0:
            pieces.append("".join(piece))
            piece = []
        else:
            piece.append(ch)
    pieces.append("".join(piece))
    for p in pieces:
        tokens = p.replace("...", "[]").strip()
        m = re.match(
            r"^(?:(?:final)\s+)?(" + _TYPE_RE + r")\s+([A-Za-z_$][A-Za-z0-9_$]*)$",
            tokens,
        )
        if m:
            params.append((_norm_ws(m.group(1)), m.group(2)))
    return params


def _doc_comment_above(all_lines: list[str], start: int) -> str | None:
    i = start - 2  # 0-based index of the line above the signature
    while i >= 0 and not all_lines[i].strip():
        i -= 1
    if i < 0 or not all_lines[i].strip().endswith("*/"):
        return None
    end_idx = i
    while i >= 0 and not all_lines[i].lstrip().startswith("/*"):
        i -= 1
    if i < 0:
        return None
    return "\n".join(all_lines[i : end_idx + 1])


def _line_depths(clean_lines: list[str]) -> tuple[int, ...]:
    """Brace depth at the end of each line of the method range."""
    depths = []
    depth = 0
    for line in clean_lines:
        for ch in line:
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
        depths.append(depth)
    return tuple(depths)


class _Builder:
    """Accumulates one statement worth of text during the body walk.

    Keeps a parallel copy with opaque regions blanked, at identical offsets,
    so later position-based scans agree between the two.
    """

    def __init__(self) -> None:
        self.parts: list[str] = []
        self.flow_parts: list[str] = []
        self.start_line: int | None = None

    def add(self, ch: str, line: int, opaque: bool = False) -> None:
        if self.start_line is None and not ch.isspace():
            self.start_line = line
        self.parts.append(ch)
        if opaque and not ch.isspace():
            self.flow_parts.append(" ")
        else:
            self.flow_parts.append(ch)

    def text(self) -> str:
        return "".join(self.parts)

    def flow_text(self) -> str:
        return "".join(self.flow_parts)

    def blank(self) -> bool:
        return not self.text().strip()

    def reset(self) -> None:
        self.parts = []
        self.flow_parts = []
        self.start_line = None


def _split_statements(
    clean_lines: list[str],
    first_line: int,
    open_pos: int,
    close_pos: int,
    clean_text: str,
) -> list[Statement]:
    """Walk the body characters and cut statements.

    Lambdas, anonymous classes, and array initializers are swallowed into
    their enclosing statement so braces inside them never count as scope.
    """
    records: list[dict] = []
    header_stack: list[int] = []  # indices into records
    depth = 0
    paren = 0
    builder = _Builder()
    i = open_pos + 1
    line = first_line + clean_text.count("\n", 0, i)

    def flush(kind_hint: str | None, end_line: int, **extra) -> int | None:
        text = builder.text()
        if not text.strip() and kind_hint is None:
            builder.reset()
            return None
        rec = {
            "start_line": builder.start_line if builder.start_line is not None else end_line,
            "end_line": end_line,
            "depth": depth,
            "raw_text": text,
            "raw_flow": builder.flow_text(),
            "kind": kind_hint,
            "opens": False,
            "closes": False,
            "closes_header": None,
        }
        rec.update(extra)
        builder.reset()
        records.append(rec)
        return len(records) - 1

    while i < close_pos:
        ch = clean_text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch == "(":
            paren += 1
            builder.add(ch, line)
            i += 1
            continue
        if ch == ")":
            paren -= 1
            builder.add(ch, line)
            i += 1
            continue
        if ch == ";" and paren == 0:
            builder.add(ch, line)
            flush(None, line)
            i += 1
            continue
        if ch == "{":
            head = _head_token(builder.text())
            structural = builder.blank() or head in _CONTROL_HEADS or head in _TRY_HEADS
            if paren > 0 or not structural:
                # Opaque region: lambda body, anonymous class, array initializer.
                j = _matching_brace(clean_text, i)
                if j is None or j >= close_pos:
                    raise UnbalancedBraces("unterminated inline block in method body")
                segment = clean_text[i : j + 1]
                for seg_ch in segment:
                    builder.add(seg_ch, line, opaque=True)
                    if seg_ch == "\n":
                        line += 1
                i = j + 1
                continue
            builder.add(ch, line)
            kind = "try-boundary" if head in _TRY_HEADS else "control-header"
            idx = flush(kind, line, opens=True)
            if idx is not None:
                header_stack.append(idx)
            depth += 1
            i += 1
            continue
        if ch == "}":
            if not builder.blank():
                flush(None, line)
            depth -= 1
            header_idx = header_stack.pop() if header_stack else None
            # Peek for a continuation: "} else {", "} catch (..) {",
            # "} finally {", or a do-while tail "} while (c);".
            j = i + 1
            while j < close_pos and clean_text[j].isspace():
                j += 1
            word = _IDENT.match(clean_text, j)
            cont = word.group(0) if word else ""
            if cont in ("else", "catch", "finally"):
                builder.add("}", line)
                cont_line = first_line + clean_text.count("\n", 0, j)
                builder.start_line = line  # merged statement starts at the brace
                # Consume up to and including the continuation's opening brace.
                k = j
                cont_paren = 0
                while k < close_pos:
                    c2 = clean_text[k]
                    if c2 == "\n":
                        builder.add(c2, cont_line)
                        cont_line += 1
                        k += 1
                        continue
                    if c2 == "(":
                        cont_paren += 1
                    elif c2 == ")":
                        cont_paren -= 1
                    elif c2 == "{" and cont_paren == 0:
                        builder.add(c2, cont_line)
                        k += 1
                        break
                    builder.add(c2, cont_line)
                    k += 1
                kind = "try-boundary" if cont in ("catch", "finally") else "control-header"
                idx = flush(kind, cont_line, opens=True, closes=True, closes_header=header_idx)
                if idx is not None:
                    header_stack.append(idx)
                depth += 1
                line = cont_line
                i = k
                continue
            if cont == "while":
                # do-while tail: attach "while (c);" to the closer statement.
                k = j
                tail_line = first_line + clean_text.count("\n", 0, j)
                tail_paren = 0
                builder.add("}", line)
                builder.start_line = line
                while k < close_pos:
                    c2 = clean_text[k]
                    if c2 == "\n":
                        tail_line += 1
                        k += 1
                        builder.add(c2, tail_line)
                        continue
                    builder.add(c2, tail_line)
                    if c2 == "(":
                        tail_paren += 1
                    elif c2 == ")":
                        tail_paren -= 1
                    elif c2 == ";" and tail_paren == 0:
                        k += 1
                        break
                    k += 1
                flush("block-close", tail_line, closes=True, closes_header=header_idx)
                line = tail_line
                i = k
                continue
            builder.add("}", line)
            builder.start_line = line
            flush("block-close", line, closes=True, closes_header=header_idx)
            i += 1
            continue
        builder.add(ch, line)
        i += 1

    if not builder.blank():
        flush(None, line)

    return _finalize_statements(records)


def _head_token(text: str) -> str:
    """First word of a statement, looking through a `label:` prefix.

    `case`/`default` arms keep their own head; a statement label in front of
    a loop must not hide the loop keyword.
    """
    stripped = text.strip()
    if not stripped:
        return ""
    head_match = _IDENT.match(stripped)
    head = head_match.group(0) if head_match else ""
    if head in ("case", "default"):
        return head
    labelled = _LABEL_PREFIX.match(stripped)
    if labelled:
        rest = stripped[labelled.end() :]
        rest_match = _IDENT.match(rest)
        return rest_match.group(0) if rest_match else ""
    return head


def _classify(text: str) -> str:
    head = _head_token(text)
    if head == "return":
        return "return"
    if head == "break":
        return "break"
    if head == "continue":
        return "continue"
    if head == "throw":
        return "throw"
    if _extract_declarations(text):
        return "declaration"
    return "expression"


def _finalize_statements(records: list[dict]) -> list[Statement]:
    statements: list[Statement] = []
    closed_by: dict[int, int] = {}
    for idx, rec in enumerate(records):
        if rec["closes"] and rec["closes_header"] is not None:
            closed_by[rec["closes_header"]] = idx
    for idx, rec in enumerate(records):
        raw_text, raw_flow = rec["raw_text"], rec["raw_flow"]
        text = _norm_ws(raw_text)
        kind = rec["kind"] or _classify(text)
        declared = _extract_declarations(raw_text)
        defs, uses = _statement_defs_uses(raw_text, raw_flow, declared)
        statements.append(
            Statement(
                index=idx,
                start_line=rec["start_line"],
                end_line=rec["end_line"],
                scope_depth=rec["depth"],
                kind=kind,
                defs=frozenset(defs),
                uses=frozenset(uses),
                text=text,
                flow_text=_norm_ws(raw_flow),
                opens_block=rec["opens"],
                closes_block=rec["closes"],
                closes_header=rec["closes_header"],
                closed_by=closed_by.get(idx),
                declared=tuple(declared),
            )
        )
    return statements


# ---------------------------------------------------------------------------
# Def-use chains and liveness
# ---------------------------------------------------------------------------


def def_use(method: LongMethod) -> DefUseChains:
    """Build scope-resolved def/use chains for every identifier.

    A nested redeclaration shadows the outer variable: uses inside the inner
    scope resolve to the innermost declaration.  Names with no declaration in
    the method (fields, parameters, types) are flagged external; parameters
    keep a dedicated sentinel so liveness can still track them.
    """
    events: dict[str, list[DefUseEvent]] = {}
    external: set[str] = set()
    param_names = method.param_names()

    # Scope stack of name -> declaring statement index.
    root: dict[str, int] = {}
    scopes: list[dict[str, int]] = [root]

    def resolve(name: str) -> int:
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        # Not declared in the body: parameters and fields both count as
        # external names, but parameters keep their own sentinel so liveness
        # and planning can still treat them as typed locals.
        external.add(name)
        if name in param_names:
            return PARAM
        return EXTERNAL

    def record(name: str, kind: str, stmt_index: int, decl_index: int) -> None:
        events.setdefault(name, []).append(DefUseEvent(stmt_index, kind, decl_index))

    for stmt in method.statements:
        if stmt.closes_block and not stmt.opens_block and stmt.kind == "block-close":
            # do-while tails carry condition uses; resolve before popping.
            for name in sorted(stmt.uses):
                record(name, "use", stmt.index, resolve(name))
            if len(scopes) > 1:
                scopes.pop()
            continue
        if stmt.closes_block and stmt.opens_block:
            if len(scopes) > 1:
                scopes.pop()

        if stmt.opens_block:
            # Header: condition uses resolve in the outer scope, the header's
            # own declarations (for/foreach/catch) live in the opened scope.
            declared_names = {name for _, name in stmt.declared}
            for name in sorted(stmt.uses):
                if name in declared_names:
                    continue
                record(name, "use", stmt.index, resolve(name))
            scopes.append({})
            for _, name in stmt.declared:
                scopes[-1][name] = stmt.index
                record(name, "def", stmt.index, stmt.index)
            for name in sorted(stmt.defs - declared_names):
                record(name, "def", stmt.index, resolve(name))
            continue

        declared_names = {name for _, name in stmt.declared}
        for name in sorted(stmt.uses):
            if name in declared_names:
                record(name, "use", stmt.index, stmt.index)
            else:
                record(name, "use", stmt.index, resolve(name))
        for _, name in stmt.declared:
            scopes[-1][name] = stmt.index
            record(name, "def", stmt.index, stmt.index)
        for name in sorted(stmt.defs - declared_names):
            record(name, "def", stmt.index, resolve(name))

    return DefUseChains(
        events={k: tuple(v) for k, v in events.items()},
        external=frozenset(external),
    )


def live_out(method: LongMethod, fragment: tuple[int, int]) -> frozenset[str]:
    """Names defined inside the fragment and read after it in the method.

    Only locals and parameters count; external names (fields) are mutated in
    place and never need to be returned.
    """
    chains = def_use(method)
    frag_stmts = method.statements_in(*fragment)
    if not frag_stmts:
        return frozenset()
    frag_indices = {s.index for s in frag_stmts}
    last = max(frag_indices)

    defined: dict[str, set[int]] = {}
    for name, evs in chains.events.items():
        for ev in evs:
            if ev.kind == "def" and ev.statement_index in frag_indices:
                if ev.decl_index != EXTERNAL:
                    defined.setdefault(name, set()).add(ev.decl_index)

    result = set()
    for name, decl_ids in defined.items():
        for ev in chains.events.get(name, ()):
            if ev.kind == "use" and ev.statement_index > last and ev.decl_index in decl_ids:
                result.add(name)
                break
    return frozenset(result)


def live_in(method: LongMethod, fragment: tuple[int, int]) -> tuple[str, ...]:
    """Names used inside the fragment that are bound outside it.

    Ordered by first use inside the fragment; these become the parameters of
    the extracted method.  External names are excluded (they stay resolvable
    in the host class).
    """
    chains = def_use(method)
    frag_stmts = method.statements_in(*fragment)
    if not frag_stmts:
        return ()
    frag_indices = {s.index for s in frag_stmts}
    first = min(frag_indices)

    seen: list[str] = []
    for stmt in method.statements:
        if stmt.index not in frag_indices:
            continue
        for name in _by_position(stmt.text, stmt.uses):
            for ev in chains.events.get(name, ()):
                if ev.statement_index != stmt.index or ev.kind != "use":
                    continue
                if ev.decl_index == EXTERNAL:
                    continue
                outside = ev.decl_index == PARAM or ev.decl_index < first
                if outside and name not in seen:
                    seen.append(name)
    return tuple(seen)


def _by_position(text: str, names: frozenset[str]) -> list[str]:
    """Names ordered by first textual occurrence within the statement."""

    def pos(name: str) -> int:
        m = re.search(r"\b" + re.escape(name) + r"\b", text)
        return m.start() if m else len(text)

    return sorted(names, key=lambda n: (pos(n), n))


def scope_depth_at(method: LongMethod, line: int) -> int:
    """Scope depth of the statement covering ``line``.

    Blank or comment lines inside the body fall back to the brace depth at
    that line.  Raises LineNotInBody outside the body span.
    """
    if line < method.body_start or line > method.body_end:
        raise LineNotInBody(f"line {line} is outside the body of the method")
    for stmt in method.statements:
        if stmt.start_line <= line <= stmt.end_line:
            return stmt.scope_depth
    depth = method._line_depths[line - method.start_line]
    return max(depth - 1, 0)
