"""Declaration absorption and if-header shrinking."""

from __future__ import annotations

import random

from carve.enhancement import enhance, enhance_all, extend_for_declaration, shrink_control_header
from carve.filtering import FilterConfig, check_usefulness, check_validity, triage
from carve.method_model import live_in, parse_method
from carve.suggestions import SuggestionSet
from helpers import random_method, suggestion

EXTEND_SOURCE = """\
class A {
    void f(int[] items) {
        prepare();
        int v = 0;
        for (int item : items) {
            v = v + item;
        }
        emit(v);
    }
}
"""


def _extend_method():
    return parse_method(EXTEND_SOURCE, (2, 9))


def test_declaration_above_is_absorbed():
    method = _extend_method()
    out = extend_for_declaration(method, suggestion(5, 7))
    assert out.span == (4, 7)
    assert out.provenance == "enhanced"


def test_unrelated_statement_above_stops_extension():
    method = _extend_method()
    out = extend_for_declaration(method, suggestion(4, 7))
    assert out.span == (4, 7)  # above is prepare(): not a declaration


def test_stacked_declarations_all_absorbed():
    source = """\
class A {
    void f(int[] items) {
        sync();
        int lo = 0;
        int hi = 0;
        for (int item : items) {
            lo = lo + item;
            hi = hi + item * 2;
        }
        int spread = hi - lo;
        emit(spread);
    }
}
"""
    method = parse_method(source, (2, 12))
    out = extend_for_declaration(method, suggestion(6, 10))
    assert out.span == (4, 10)

    # Exhaustive upward-extension oracle: the fixpoint must reach the
    # minimal live-in count over all same-depth upward extensions.
    counts = {}
    for start in (6, 5, 4):
        counts[start] = len(live_in(method, (start, 10)))
    assert counts[out.start_line] == min(counts.values())


def test_extension_reverts_when_live_out_degrades():
    # Absorb the counter, then stop: absorbing the ledger declaration would
    # put two values in flight (ledger is used after the loop too).
    source = """\
class A {
    void f(int[] items) {
        Ledger ledger = open();
        int n = 0;
        for (int item : items) {
            ledger.add(item);
            n = n + 1;
        }
        ledger.seal();
        emit(n);
    }
}
"""
    method = parse_method(source, (2, 11))
    out = extend_for_declaration(method, suggestion(5, 8))
    assert out.span == (4, 8)


def test_extension_never_raises_parameter_count():
    # The declaration's initializer reads two fresh names, so absorbing it
    # would grow the parameter list; the step must not be taken.
    source = """\
class A {
    void f(int a, int b, int[] items) {
        int bias = a * b;
        int sum = 0;
        for (int item : items) {
            sum = sum + item + bias;
        }
        emit(sum);
        emit(bias);
    }
}
"""
    method = parse_method(source, (2, 10))
    # Fragment reads sum and bias; absorbing `int sum = 0;` is fine (drops a
    # parameter), absorbing `int bias = a * b;` would add a and b.
    out = extend_for_declaration(method, suggestion(5, 7))
    assert out.span == (4, 7)
    before = len(live_in(method, (5, 7)))
    after = len(live_in(method, out.span))
    assert after <= before


SHRINK_SOURCE = """\
class A {
    void f(Entry entry, long now) {
        lookup();
        if (entry != null) {
            entry.touch(now);
            promote(entry);
        }
        trace(now);
    }
}
"""


def test_whole_if_shrinks_to_its_body():
    method = parse_method(SHRINK_SOURCE, (2, 9))
    out = shrink_control_header(method, suggestion(4, 7))
    assert out.span == (5, 6)
    assert out.provenance == "enhanced"


def test_plain_expression_start_never_shrinks():
    method = parse_method(SHRINK_SOURCE, (2, 9))
    out = shrink_control_header(method, suggestion(3, 7))
    assert out.span == (3, 7)


def test_loop_headers_never_shrink():
    method = _extend_method()
    out = shrink_control_header(method, suggestion(5, 7))
    assert out.span == (5, 7)


def test_shrink_reverts_when_body_is_one_liner():
    # The guarded body is a single statement; the shrunken form would be a
    # one-liner, so the original if-range survives.
    source = """\
class A {
    void f(Entry entry) {
        lookup();
        if (entry != null) {
            promote(entry);
        }
        trace();
    }
}
"""
    method = parse_method(source, (2, 8))
    out = shrink_control_header(method, suggestion(4, 6))
    assert out.span == (4, 6)


def test_shrink_skips_if_with_else_outside_range():
    # The range covers only the if arm of an if/else; it is unbalanced (the
    # closer merged into `} else {` sits outside), so after normalization it
    # is the whole if/else and no longer starts at a bare if block.
    source = """\
class A {
    void f(int n) {
        if (n > 0) {
            up(n);
            mark(n);
        } else {
            down(n);
        }
        done();
    }
}
"""
    method = parse_method(source, (2, 10))
    out = shrink_control_header(method, suggestion(3, 5))
    assert out.span == (3, 5)  # not exactly an if statement: left alone


def test_enhancement_preserves_applicability():
    rng = random.Random(4096)
    cfg = FilterConfig()
    for _ in range(150):
        _, _, method = random_method(rng)
        sset = SuggestionSet(method)
        for _ in range(4):
            a = rng.randint(method.body_start, method.body_end)
            b = rng.randint(a, method.body_end)
            sset.add("probe", a, b)
        useful = [v.suggestion for v in triage(method, sset, cfg).useful]
        for s in enhance_all(method, useful, cfg):
            assert check_validity(method, s).classification == "applicable"
            assert check_usefulness(method, s, cfg).classification == "applicable"


def test_full_pass_is_idempotent():
    rng = random.Random(777)
    cfg = FilterConfig()
    for _ in range(150):
        _, _, method = random_method(rng)
        sset = SuggestionSet(method)
        for _ in range(3):
            a = rng.randint(method.body_start, method.body_end)
            b = rng.randint(a, method.body_end)
            sset.add("probe", a, b)
        useful = [v.suggestion for v in triage(method, sset, cfg).useful]
        for s in useful:
            once = enhance(method, s, cfg)
            assert enhance(method, once, cfg).span == once.span


def test_enhance_all_merges_colliding_ranges():
    method = _extend_method()
    merged = enhance_all(
        method,
        [suggestion(5, 7, count=2), suggestion(4, 7, count=1)],
    )
    assert len(merged) == 1
    assert merged[0].span == (4, 7)
    assert merged[0].occurrence_count == 3
