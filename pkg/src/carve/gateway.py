"""Prompting, response parsing, and the record/replay response cache.

The model is treated as a prolific but unreliable generator: every response
is parsed tolerantly, malformed replies are skipped with a diagnostic, and
all reliability checks live downstream.  A cache keyed by (prompt, T,
iteration) makes whole runs replayable bit-for-bit offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from carve.errors import EndpointUnreachable, MissingFixture
from carve.method_model import LongMethod
from carve.suggestions import SuggestionSet

log = logging.getLogger(__name__)

TOKEN_ENV_VAR = "CARVE_API_TOKEN"

RECORD = "record"
REPLAY = "replay"
LIVE = "live"
CACHE_MODES = (RECORD, REPLAY, LIVE)

FIXPOINT_CAP = 25


@dataclass(frozen=True)
class LlmParams:
    """Sampling and transport settings for suggestion generation."""

    temperature: float = 1.2
    iterations: int = 10
    model_name: str = "gpt-3.5-turbo"
    endpoint_url: str = ""
    request_timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")


@dataclass(frozen=True)
class PromptBundle:
    """The sections of one generation prompt, renderable to a single string."""

    task_overview: str
    long_method_definition: str
    doc_comment: str | None
    few_shot_examples: tuple[str, str]
    output_format_instructions: str
    target_method_source: str

    def render(self) -> str:
        parts = [self.task_overview, "", self.long_method_definition, ""]
        parts.append("Example 1:")
        parts.append(self.few_shot_examples[0])
        parts.append("")
        parts.append("Example 2:")
        parts.append(self.few_shot_examples[1])
        parts.append("")
        parts.append(self.output_format_instructions)
        parts.append("")
        if self.doc_comment:
            parts.append("Documentation for the method below:")
            parts.append(self.doc_comment)
            parts.append("")
        parts.append("Method to refactor (line numbers are absolute in its file):")
        parts.append(self.target_method_source)
        return "\n".join(parts)


@dataclass
class RawResponse:
    """One model reply plus whatever we managed to parse out of it."""

    iteration_index: int
    temperature: float
    raw_text: str
    parsed: list[tuple[str, int, int]] = field(default_factory=list)
    diagnostic: str | None = None


_TASK_OVERVIEW = (
    "You help refactor code by the extract-method transformation: a contiguous "
    "block of statements moves out of a host method into a brand-new method, "
    "the variables it needs become parameters, and a call to the new method "
    "replaces the block."
)

_LONG_METHOD_DEFINITION = (
    "A long method bundles several responsibilities into one body. Your job is "
    "to propose blocks worth extracting: each proposal is a new method name plus "
    "the first and last line of the block, using the absolute line numbers "
    "shown beside the code."
)

_EXAMPLE_LONG = """\
 40: private int summarizeOrders(List<Order> orders) {
 41:     int total = 0;
 42:     for (Order order : orders) {
 43:         total += order.amount();
 44:     }
 45:     int shipped = 0;
 46:     for (Order order : orders) {
 47:         if (order.isShipped()) {
 48:             shipped = shipped + 1;
 49:         }
 50:     }
 51:     logCounts(total, shipped);
 52:     return total;
 53: }

Good extractions:
[{"function_name": "sumAmounts", "start_line": 41, "end_line": 44},
 {"function_name": "countShipped", "start_line": 45, "end_line": 50}]"""

_EXAMPLE_SHORT = """\
 80: private void resetBuffer() {
 81:     cursor = 0;
 82:     Arrays.fill(buffer, 0);
 83:     dirty = false;
 84: }

Good extraction:
[{"function_name": "clearState", "start_line": 81, "end_line": 82}]"""

_OUTPUT_FORMAT = (
    "Reply with a JSON array only. Each element must be an object with exactly "
    'these keys: "function_name" (a valid identifier), "start_line" and '
    '"end_line" (absolute line numbers, start_line <= end_line). Do not add '
    "any other text."
)


def build_prompt(method: LongMethod) -> PromptBundle:
    """Assemble the prompt for a parsed method; a pure function of its text."""
    numbered = "\n".join(
        f"{method.start_line + i:>4}: {line}" for i, line in enumerate(method.lines)
    )
    return PromptBundle(
        task_overview=_TASK_OVERVIEW,
        long_method_definition=_LONG_METHOD_DEFINITION,
        doc_comment=method.doc_comment,
        few_shot_examples=(_EXAMPLE_LONG, _EXAMPLE_SHORT),
        output_format_instructions=_OUTPUT_FORMAT,
        target_method_source=numbered,
    )


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:[A-Za-z0-9_+-]*)\s*\n?(.*?)```", re.S)


def _coerce_line(value) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    return None


def _entries_from_obj(obj) -> list[tuple[str, int, int]] | None:
    if not isinstance(obj, list):
        return None
    entries: list[tuple[str, int, int]] = []
    for item in obj:
        if isinstance(item, dict):
            name = item.get("function_name") or item.get("name") or ""
            start = _coerce_line(item.get("start_line", item.get("start")))
            end = _coerce_line(item.get("end_line", item.get("end")))
        elif isinstance(item, (list, tuple)) and len(item) == 3:
            name = item[0] if isinstance(item[0], str) else ""
            start = _coerce_line(item[1])
            end = _coerce_line(item[2])
        else:
            log.debug("dropping unrecognized suggestion entry: %r", item)
            continue
        if start is None or end is None:
            log.debug("dropping entry with non-numeric lines: %r", item)
            continue
        if start > end:
            log.debug("dropping entry with start after end: %r", item)
            continue
        entries.append((str(name), start, end))
    return entries


def _json_array_regions(text: str):
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "[":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "]":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    yield text[start : i + 1]
                    start = None


def parse_response(raw_text: str) -> list[tuple[str, int, int]]:
    """Recover (name, start, end) triples from a model reply.

    Accepts a bare JSON array, arrays inside code fences, or an array buried
    in prose.  Entries with missing or non-numeric lines, or start > end,
    are dropped.  Returns an empty list when nothing can be recovered.
    """
    candidates = [raw_text.strip()]
    candidates.extend(m.strip() for m in _FENCE_RE.findall(raw_text))
    for candidate in list(candidates):
        candidates.extend(_json_array_regions(candidate))
    for candidate in candidates:
        try:
            obj = json.loads(candidate)
        except (json.JSONDecodeError, ValueError):
            continue
        entries = _entries_from_obj(obj)
        if entries is not None:
            return entries
    return []


# ---------------------------------------------------------------------------
# Cache and transport
# ---------------------------------------------------------------------------


def fixture_key(prompt_text: str, temperature: float, iteration: int) -> str:
    payload = json.dumps(
        {"prompt": prompt_text, "temperature": repr(temperature), "iteration": iteration},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """One JSON file per (prompt hash, temperature, iteration)."""

    def __init__(self, directory: Path | str) -> None:
        self.directory = Path(directory)
        self._memo: dict[str, str] = {}

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def load(self, key: str) -> str | None:
        if key in self._memo:
            return self._memo[key]
        path = self.path_for(key)
        if not path.exists():
            return None
        payload = json.loads(path.read_text(encoding="utf-8"))
        raw = payload["raw_text"]
        self._memo[key] = raw
        return raw

    def store(
        self,
        key: str,
        raw_text: str,
        *,
        model: str,
        temperature: float,
        iteration: int,
        prompt_sha: str,
    ) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        payload = {
            "raw_text": raw_text,
            "model": model,
            "temperature": temperature,
            "iteration": iteration,
            "prompt_sha": prompt_sha,
        }
        path = self.path_for(key)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(payload, ensure_ascii=True, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        tmp.replace(path)
        self._memo[key] = raw_text


def http_transport(params: LlmParams, prompt_text: str) -> str:
    """POST a chat-completions style request and return the reply text."""
    import requests

    headers = {"Content-Type": "application/json"}
    token = os.environ.get(TOKEN_ENV_VAR)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = {
        "model": params.model_name,
        "temperature": params.temperature,
        "messages": [{"role": "user", "content": prompt_text}],
    }
    response = requests.post(
        params.endpoint_url, json=body, headers=headers, timeout=params.request_timeout
    )
    response.raise_for_status()
    payload = response.json()
    return payload["choices"][0]["message"]["content"]


class LlmGateway:
    """Issues the per-method prompt across iterations and merges the replies.

    ``cache_mode`` selects the source of responses: ``live`` hits the
    endpoint, ``record`` hits it and saves every reply, ``replay`` serves
    saved replies only and fails loudly on a gap.
    """

    def __init__(
        self,
        params: LlmParams,
        cache_mode: str = REPLAY,
        cache_dir: Path | str | None = None,
        transport=None,
    ) -> None:
        if cache_mode not in CACHE_MODES:
            raise ValueError(f"unknown cache mode: {cache_mode}")
        if cache_mode in (RECORD, REPLAY) and cache_dir is None:
            raise ValueError(f"{cache_mode} mode needs a cache directory")
        self.params = params
        self.cache_mode = cache_mode
        self.cache = ResponseCache(cache_dir) if cache_dir is not None else None
        self.transport = transport or http_transport
        self.last_responses: list[RawResponse] = []

    def _fetch(self, prompt_text: str, prompt_sha: str, iteration: int) -> str:
        key = fixture_key(prompt_text, self.params.temperature, iteration)
        if self.cache_mode == REPLAY:
            assert self.cache is not None
            raw = self.cache.load(key)
            if raw is None:
                raise MissingFixture(iteration, key)
            return raw
        try:
            raw = self.transport(self.params, prompt_text)
        except Exception as exc:  # noqa: BLE001 - network failures vary widely
            raise EndpointUnreachable(iteration, str(exc)) from exc
        if self.cache_mode == RECORD:
            assert self.cache is not None
            self.cache.store(
                key,
                raw,
                model=self.params.model_name,
                temperature=self.params.temperature,
                iteration=iteration,
                prompt_sha=prompt_sha,
            )
        return raw

    def generate(
        self,
        method: LongMethod,
        iterations: int | None = None,
        fixpoint: bool = False,
    ) -> SuggestionSet:
        """Prompt ``iterations`` times and merge every parsed reply.

        Duplicate ranges raise the occurrence count instead of growing the
        set; malformed replies are skipped, never fatal.  In fixpoint mode
        iteration continues until a reply adds no new range (capped).
        """
        prompt_text = build_prompt(method).render()
        prompt_sha = hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()
        count = iterations if iterations is not None else self.params.iterations
        suggestions = SuggestionSet(method)
        self.last_responses = []

        iteration = 0
        limit = FIXPOINT_CAP if fixpoint else count
        while iteration < limit:
            raw = self._fetch(prompt_text, prompt_sha, iteration)
            parsed = parse_response(raw)
            diagnostic = None
            if not parsed:
                diagnostic = f"iteration {iteration}: no suggestions recovered from reply"
                log.warning("%s", diagnostic)
            self.last_responses.append(
                RawResponse(
                    iteration_index=iteration,
                    temperature=self.params.temperature,
                    raw_text=raw,
                    parsed=parsed,
                    diagnostic=diagnostic,
                )
            )
            before = len(suggestions)
            for name, start, end in parsed:
                suggestions.add(name, start, end)
            iteration += 1
            if fixpoint and parsed and len(suggestions) == before:
                break
        return suggestions
