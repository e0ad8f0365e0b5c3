"""Mechanically apply an applicable suggestion to source text.

Planning recovers parameter and return types textually from the method;
application swaps the fragment for a call, inserts the new method after the
host, and re-parses both before anything is handed back.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from carve.errors import PlanInfeasible, ReparseFailure, StaleSource
from carve.method_model import (
    EXTERNAL,
    PARAM,
    LongMethod,
    def_use,
    live_in,
    live_out,
    parse_method,
)
from carve.suggestions import ExtractSuggestion


@dataclass(frozen=True)
class ExtractionPlan:
    """Everything needed to rewrite the file for one extraction."""

    new_method_name: str
    parameters: tuple[tuple[str, str], ...]  # (type text, name)
    return_variable: str | None
    return_type: str | None
    return_declared_in_fragment: bool
    tail_call: bool  # fragment is a returning suffix: call site is `return f(..)`
    fragment_start: int
    fragment_end: int
    fragment_text: str
    call_site_text: str
    new_method_text: str
    insertion_line: int  # first line of the inserted method, pre-rewrite numbering
    host_start: int
    host_end: int
    source_sha: str


def _source_sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _indent_of(line: str) -> str:
    return line[: len(line) - len(line.lstrip())]


def _declared_type(method: LongMethod, name: str, decl_index: int) -> str | None:
    if decl_index == PARAM:
        for type_text, pname in method.parameters:
            if pname == name:
                return type_text
        return None
    for st in method.statements:
        if st.index == decl_index:
            for type_text, dname in st.declared:
                if dname == name:
                    return type_text
    return None


def _binding_for(method: LongMethod, name: str, frag_first: int, frag_last: int) -> int | None:
    """Declaration index a fragment-use of ``name`` resolves to, if any."""
    chains = def_use(method)
    for ev in chains.events.get(name, ()):
        if frag_first <= ev.statement_index <= frag_last and ev.decl_index != EXTERNAL:
            return ev.decl_index
    return None


def plan_extraction(
    method: LongMethod, s: ExtractSuggestion, allow_var_fallback: bool = False
) -> ExtractionPlan:
    """Build the rewrite plan for an applicable suggestion.

    Parameters are the fragment's live-in locals and method parameters, in
    order of first use.  A live-out variable declared before the fragment is
    also passed in and returned, which keeps definite assignment intact.  A
    returning suffix fragment turns into a tail call: the new method takes
    the host's return type and the call site becomes ``return f(...);``.
    Raises PlanInfeasible when a needed type cannot be recovered.
    """
    frag_stmts = method.statements_in(s.start_line, s.end_line)
    if not frag_stmts:
        raise PlanInfeasible("suggestion covers no statements")
    frag_first, frag_last = frag_stmts[0].index, frag_stmts[-1].index

    out_names = sorted(live_out(method, s.span))
    if len(out_names) > 1:
        raise PlanInfeasible("fragment produces more than one value")
    return_variable = out_names[0] if out_names else None

    tail_call = any(
        st.kind != "block-close" and re.search(r"\breturn\b", st.flow_text)
        for st in frag_stmts
    )
    if tail_call and return_variable is not None:
        raise PlanInfeasible("fragment both returns and leaks a value")

    param_names = list(live_in(method, s.span))
    return_declared_inside = False
    return_type: str | None = None
    if return_variable is not None:
        decl_idx = _decl_index_of(method, return_variable)
        return_declared_inside = decl_idx is not None and frag_first <= decl_idx <= frag_last
        if not return_declared_inside and return_variable not in param_names:
            param_names.append(return_variable)
        src_idx = decl_idx if decl_idx is not None else PARAM
        return_type = _recover_type(method, return_variable, src_idx, allow_var_fallback)
    elif tail_call:
        return_type = _host_return_type(method)

    parameters: list[tuple[str, str]] = []
    for name in param_names:
        decl_idx = _binding_for(method, name, frag_first, frag_last)
        if decl_idx is None:
            decl_idx = _decl_index_before(method, name, frag_first)
        if decl_idx is None:
            raise PlanInfeasible(f"cannot locate the declaration of '{name}'")
        parameters.append((_recover_type(method, name, decl_idx, allow_var_fallback), name))

    fragment_lines = [method.line_text(line) for line in range(s.start_line, s.end_line + 1)]
    fragment_text = "\n".join(fragment_lines)

    host_indent = _indent_of(method.lines[0])
    body_indent = host_indent + "    "
    call_indent = _indent_of(fragment_lines[0]) if fragment_lines[0].strip() else body_indent

    arg_list = ", ".join(name for _, name in parameters)
    call_core = f"{s.name}({arg_list});"
    if return_variable is not None:
        if return_declared_inside:
            call_site = f"{call_indent}{return_type} {return_variable} = {call_core}"
        else:
            call_site = f"{call_indent}{return_variable} = {call_core}"
    elif tail_call and return_type != "void":
        call_site = f"{call_indent}return {call_core}"
    else:
        call_site = call_indent + call_core

    new_method_text = _render_new_method(
        method,
        s,
        parameters,
        return_variable,
        return_type,
        tail_call,
        fragment_lines,
        host_indent,
        body_indent,
    )

    return ExtractionPlan(
        new_method_name=s.name,
        parameters=tuple(parameters),
        return_variable=return_variable,
        return_type=return_type,
        return_declared_in_fragment=return_declared_inside,
        tail_call=tail_call,
        fragment_start=s.start_line,
        fragment_end=s.end_line,
        fragment_text=fragment_text,
        call_site_text=call_site,
        new_method_text=new_method_text,
        insertion_line=method.end_line + 1,
        host_start=method.start_line,
        host_end=method.end_line,
        source_sha="",
    )


def _decl_index_of(method: LongMethod, name: str) -> int | None:
    for st in method.statements:
        for _, dname in st.declared:
            if dname == name:
                return st.index
    return None


def _decl_index_before(method: LongMethod, name: str, frag_first: int) -> int | None:
    if name in method.param_names():
        return PARAM
    found = None
    for st in method.statements:
        if st.index >= frag_first:
            break
        for _, dname in st.declared:
            if dname == name:
                found = st.index
    return found


def _recover_type(
    method: LongMethod, name: str, decl_index: int, allow_var_fallback: bool
) -> str:
    type_text = _declared_type(method, name, decl_index)
    if type_text is None or type_text == "var":
        if allow_var_fallback:
            return "var"
        raise PlanInfeasible(f"cannot recover a declared type for '{name}'")
    return type_text


_THROWS_RE = re.compile(r"\bthrows\b[^{]*$")
_MODIFIERS_RE = re.compile(
    r"^(?:\s*(?:public|private|protected|static|final|synchronized|abstract|native|strictfp)\b)*\s*"
)


def _host_return_type(method: LongMethod) -> str:
    sig = method.signature_text
    paren = sig.find("(")
    if paren == -1:
        return "void"
    head = _MODIFIERS_RE.sub("", sig[:paren]).strip()
    pieces = head.rsplit(None, 1)
    return pieces[0].strip() if len(pieces) == 2 else "void"


def _render_new_method(
    method: LongMethod,
    s: ExtractSuggestion,
    parameters: list[tuple[str, str]],
    return_variable: str | None,
    return_type: str | None,
    tail_call: bool,
    fragment_lines: list[str],
    host_indent: str,
    body_indent: str,
) -> str:
    is_static = re.search(r"\bstatic\b", method.signature_text) is not None
    throws_match = _THROWS_RE.search(method.signature_text)
    throws = " " + throws_match.group(0).strip() if throws_match else ""
    ret = return_type if (return_variable is not None or tail_call) else "void"
    mods = "private static" if is_static else "private"
    params = ", ".join(f"{t} {n}" for t, n in parameters)
    header = f"{host_indent}{mods} {ret} {s.name}({params}){throws} {{"

    non_blank = [ln for ln in fragment_lines if ln.strip()]
    common = min((len(_indent_of(ln)) for ln in non_blank), default=0)
    body = [
        body_indent + ln[common:] if ln.strip() else ""
        for ln in fragment_lines
    ]

    lines = [header, *body]
    if return_variable is not None:
        lines.append(f"{body_indent}return {return_variable};")
    lines.append(f"{host_indent}}}")
    return "\n".join(lines)


def attach_source(plan: ExtractionPlan, source: str) -> ExtractionPlan:
    """Pin the plan to the exact source text it was made from."""
    from dataclasses import replace

    return replace(plan, source_sha=_source_sha(source))


def apply(source: str, plan: ExtractionPlan) -> str:
    """Rewrite the source: fragment becomes a call, new method goes after the host.

    Raises StaleSource when the text no longer matches the plan, and
    ReparseFailure when the rewritten text does not parse back into two
    well-formed methods (in which case nothing is returned to persist).
    """
    if plan.source_sha and _source_sha(source) != plan.source_sha:
        raise StaleSource("source text changed since the plan was made")

    lines = source.splitlines()
    frag_lines = lines[plan.fragment_start - 1 : plan.fragment_end]
    if "\n".join(frag_lines) != plan.fragment_text:
        raise StaleSource("fragment lines changed since the plan was made")

    new_lines = (
        lines[: plan.fragment_start - 1]
        + plan.call_site_text.splitlines()
        + lines[plan.fragment_end :]
    )
    removed = (plan.fragment_end - plan.fragment_start + 1) - len(
        plan.call_site_text.splitlines()
    )
    host_end = plan.host_end - removed
    insert_at = host_end  # 0-based index just past the host's closing brace
    method_lines = plan.new_method_text.splitlines()
    new_lines = new_lines[:insert_at] + ["", *method_lines] + new_lines[insert_at:]
    result = "\n".join(new_lines)
    if source.endswith("\n"):
        result += "\n"

    new_start = host_end + 2
    new_end = new_start + len(method_lines) - 1
    try:
        parse_method(result, (plan.host_start, host_end))
        new_method = parse_method(result, (new_start, new_end))
    except Exception as exc:  # noqa: BLE001 - any parse problem means rollback
        raise ReparseFailure(f"rewritten source failed to re-parse: {exc}") from exc

    _check_resolution(new_method)
    return result


def _check_resolution(new_method: LongMethod) -> None:
    """Every name the new method reads must be a parameter, a local, or external."""
    chains = def_use(new_method)
    for name, events in chains.events.items():
        for ev in events:
            if ev.kind != "use":
                continue
            if ev.decl_index in (EXTERNAL, PARAM):
                continue
            if ev.decl_index > ev.statement_index:
                raise ReparseFailure(
                    f"'{name}' is read before any reachable definition in the new method"
                )
