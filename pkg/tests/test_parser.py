import itertools

from voxlang import programs as P
from voxlang.grammar import Category, CatItem, TokenItem, core_grammar, number_token_value
from voxlang.interpreter import scoping_variants
from voxlang.model import Params
from voxlang.parser import ChartParser, strip_root_scope, tokenize
from voxlang.world import Color, Direction


# -- tokenizer --------------------------------------------------------------------


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("Add RED; remove") == ["add", "red", ";", "remove"]


def test_tokenize_splits_digit_runs():
    assert tokenize("10x10x10") == ["10", "x", "10", "x", "10"]
    assert tokenize("repeat 12 [add red]") == [
        "repeat", "12", "[", "add", "red", "]"]


def test_tokenize_empty():
    assert tokenize("   ") == []


# -- root behavior ------------------------------------------------------------------


def make_parser(beam=100):
    return ChartParser(core_grammar(), Params(), beam)


def test_add_red_has_three_scoped_roots():
    result = make_parser().parse("add red", "u")
    programs = [d.program for d in result.roots]
    add = P.Add(Color.RED, None)
    assert programs == [
        P.Scoped(P.ScopeKind.BLOCK, add),
        P.Scoped(P.ScopeKind.RESTORE_SELECTION, add),
        P.Scoped(P.ScopeKind.ISOLATE, add),
    ]


def test_explicitly_scoped_utterance_has_single_root():
    result = make_parser().parse("{ add red }", "u")
    assert [d.program for d in result.roots] == [
        P.Scoped(P.ScopeKind.RESTORE_SELECTION, P.Add(Color.RED, None))]


def test_select_has_color_red_parses():
    result = make_parser().parse("select has color red", "u")
    wanted = P.Select(P.HasRel("color", P.PrimColor(Color.RED)))
    assert any(strip_root_scope(d).program == wanted for d in result.roots)


def test_unparsable_returns_no_roots():
    assert make_parser().parse("blorp the frobnitz", "u").roots == []
    assert make_parser().parse("", "u").roots == []


def test_number_literals_parse_only_in_range():
    parser = make_parser()
    assert parser.parse("repeat 100 [ remove ]", "u").roots
    assert not parser.parse("repeat 101 [ remove ]", "u").roots
    assert not parser.parse("repeat 007 [ remove ]", "u").roots


def test_parse_is_deterministic():
    a = make_parser().parse("select red or blue or this", "u")
    b = make_parser().parse("select red or blue or this", "u")
    assert [(d.program, d.score) for d in a.roots] \
        == [(d.program, d.score) for d in b.roots]


def test_roots_dedup_by_program_keeps_best():
    result = make_parser().parse("add red", "u")
    seen = [d.program for d in result.roots]
    assert len(seen) == len(set(seen))


def test_strip_root_scope_unwraps_promotion():
    result = make_parser().parse("add red", "u")
    stripped = strip_root_scope(result.roots[0])
    assert stripped.program == P.Add(Color.RED, None)
    assert stripped.category == Category.ACTION


def test_beam_truncates_each_cell():
    parser = make_parser(beam=2)
    result = parser.parse("select red or blue", "u")
    for (_, _), cell in result.chart.cells.items():
        assert len(cell) <= 2


def test_derivation_rule_ids_and_core_flag():
    result = make_parser().parse("add red top", "u")
    root = result.roots[0]
    assert root.is_core_only()
    grammar = core_grammar()
    for rid in root.rule_ids():
        assert grammar.by_id[rid].is_core


# -- brute-force oracle ----------------------------------------------------------------


def oracle_roots(grammar, tokens):
    """Exhaustive enumeration of full-parse programs, no chart, no beam, no
    trie: try every rule over every span with every split."""
    rules_by_lhs = {}
    for rule in grammar.rules:
        if rule.root_only or rule.dynamic_number:
            continue
        rules_by_lhs.setdefault(rule.lhs, []).append(rule)

    memo = {}

    def derive(cat, i, j):
        key = (cat, i, j)
        if key in memo:
            return memo[key]
        memo[key] = set()  # guards self-reference while computing
        found = set()
        if cat == Category.NUMBER and j == i + 1:
            value = number_token_value(tokens[i])
            if value is not None:
                found.add(value)
        for rule in rules_by_lhs.get(cat, ()):
            for children in match(rule.rhs, i, j):
                found.add(rule.template.apply(children))
        memo[key] = found
        return found

    def match(rhs, i, j):
        if not rhs:
            if i == j:
                yield ()
            return
        head, rest = rhs[0], rhs[1:]
        if isinstance(head, TokenItem):
            if i < j and tokens[i] == head.text:
                yield from match(rest, i + 1, j)
            return
        for k in range(i + 1, j + 1):
            for child in derive(head.category, i, k):
                for tail in match(rest, k, j):
                    yield (child,) + tail

    out = set()
    for program in derive(Category.ACTION, 0, len(tokens)):
        for variant in scoping_variants(program):
            out.add(variant)
    return out


def enumerate_corpus(grammar, max_len, colors=("red",),
                     directions=("left", "top"), numbers=("2",)):
    """All token strings of length <= max_len derivable from the action
    category, with lexicons cut down to keep the corpus reviewable."""
    excluded = ({c.value for c in Color} - set(colors)) \
        | ({d.value for d in Direction} - set(directions))
    by_cat_len = {cat: {length: set() for length in range(1, max_len + 1)}
                  for cat in Category}
    for n in numbers:
        by_cat_len[Category.NUMBER][1].add((n,))

    rules = [
        r for r in grammar.rules
        if not r.root_only and not r.dynamic_number
        and not any(isinstance(it, TokenItem) and it.text in excluded
                    for it in r.rhs)
    ]

    def expansions(rhs, budget):
        if not rhs:
            yield ()
            return
        head, rest = rhs[0], rhs[1:]
        floor = len(rest)  # every remaining item is at least one token
        if isinstance(head, TokenItem):
            if budget >= 1 + floor:
                for tail in expansions(rest, budget - 1):
                    yield (head.text,) + tail
            return
        for length in range(1, budget - floor + 1):
            for piece in by_cat_len[head.category][length]:
                for tail in expansions(rest, budget - length):
                    yield piece + tail

    changed = True
    while changed:
        changed = False
        for rule in rules:
            bucket = by_cat_len[rule.lhs]
            for joined in expansions(rule.rhs, max_len):
                if joined not in bucket[len(joined)]:
                    bucket[len(joined)].add(joined)
                    changed = True
    return sorted(
        s for lengths in by_cat_len[Category.ACTION].values() for s in lengths)


def test_chart_parser_matches_oracle_on_short_corpus():
    grammar = core_grammar()
    corpus = enumerate_corpus(grammar, max_len=5)
    assert len(corpus) > 200
    parser = ChartParser(grammar, Params(), beam=100_000)
    mismatches = []
    for tokens in corpus:
        text = " ".join(tokens)
        chart_programs = {d.program for d in parser.parse(text, "u").roots}
        expected = oracle_roots(grammar, list(tokens))
        if chart_programs != expected:
            mismatches.append(text)
    assert mismatches == []


def test_oracle_agrees_on_non_sentences():
    grammar = core_grammar()
    parser = ChartParser(grammar, Params(), beam=100_000)
    for text in ["red add", "select or", "move", "top left", "repeat remove",
                 "add 3", "if remove this", "very of top"]:
        tokens = tokenize(text)
        chart_programs = {d.program for d in parser.parse(text, "u").roots}
        assert chart_programs == oracle_roots(grammar, tokens), text
