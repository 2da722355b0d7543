"""Turning user definitions into new grammar rules.

Given a definition head (the utterance that failed or was rejected) and a
committed body parse, we look for head-chart derivations whose programs also
occur inside the body derivation. Non-overlapping sets of such matches
("packings") say which head spans generalize to categories; the rest of the
head stays literal tokens, and the body program with the matched subprograms
replaced by holes becomes the rule template.

Two packings are extracted per definition: the highest-scoring maximal packing
(largest, most abstract rules) and the primitive-only packing (safe color /
direction / number generalizations). For one-utterance bodies, a token
alignment pass can transplant body derivations onto head spans first, which
yields short lexical rules such as a new direction word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from . import programs as P
from .grammar import (
    Category,
    CatItem,
    Grammar,
    GrammarRule,
    PRIMITIVE_CATEGORIES,
    SemanticTemplate,
    TokenItem,
)
from .model import Params
from .parser import Chart, ChartParser, Derivation, ParseResult, strip_root_scope, tokenize

MAX_ALIGN_SPAN = 2          # aligned leftover spans are at most this many tokens
MAX_UNALIGNED_TOKENS = 2    # alignment applies only to near-total overlaps


@dataclass
class Definition:
    """A head utterance paired with the committed parses of its body."""

    author: str
    head: str
    body_utterances: List[str]
    body_derivations: List[Derivation]


@dataclass
class InductionResult:
    rules: List[GrammarRule]
    redundant: bool = False
    head_tokens: List[str] = field(default_factory=list)
    body_program: Optional[P.Program] = None


def walk_derivation(derivation: Derivation) -> Iterator[Derivation]:
    yield derivation
    for child in derivation.children:
        yield from walk_derivation(child)


def find_matches(chart: Chart, body_derivation: Derivation) -> List[Derivation]:
    """Head-chart derivations whose program equals the program of some node
    of the body derivation (structural equality)."""
    body_programs = {node.program for node in walk_derivation(body_derivation)}
    matches = [d for d in chart.partials() if d.program in body_programs]
    matches.sort(key=lambda d: (d.start, d.end, d.sort_key))
    return matches


def _overlaps(a: Derivation, b: Derivation) -> bool:
    return a.start < b.end and b.start < a.end


def _packing_key(packing: Sequence[Derivation]) -> tuple:
    # The infinity sentinel makes a packing extended by one more match sort
    # before the unextended one on otherwise-equal starts. Plain lexicographic
    # order would put the shorter sequence first, and that order breaks the
    # DP: appending a common suffix match can flip it.
    total = sum(d.score for d in packing)
    starts = tuple(d.start for d in packing) + (math.inf,)
    deep = tuple((d.start, d.end) + d.sort_key for d in packing)
    return (-total, starts, deep)


def best_packing(matches: Sequence[Derivation], length: int) -> List[Derivation]:
    """Highest-scoring maximal packing of non-overlapping matches.

    Ties prefer the lexicographically smallest sequence of span starts, where
    a longer sequence beats its own prefix. Computed left to right: the best
    packing over the first i tokens always ends with a match past the
    rightmost start seen so far, otherwise another match would still fit.
    """
    if not matches:
        return []
    by_end: Dict[int, List[Derivation]] = {}
    for d in matches:
        by_end.setdefault(d.end, []).append(d)

    best: Dict[int, List[Derivation]] = {0: []}
    for i in range(1, length + 1):
        ends_within = [e for e in by_end if e <= i]
        if not ends_within:
            best[i] = []
            continue
        frontier = max(d.start for e in ends_within for d in by_end[e])
        candidates: List[List[Derivation]] = []
        for j in range(frontier + 1, i + 1):
            for d in by_end.get(j, ()):
                candidates.append(best[d.start] + [d])
        best[i] = min(candidates, key=_packing_key)
    return best[length]


def simple_packing(matches: Sequence[Derivation]) -> List[Derivation]:
    """Greedy left-to-right packing of primitive-category matches only; on
    overlapping candidates the better-scored one wins."""
    primitives = [d for d in matches if d.category in PRIMITIVE_CATEGORIES]
    primitives.sort(key=lambda d: (d.start, d.sort_key))
    packed: List[Derivation] = []
    for d in primitives:
        if packed and _overlaps(packed[-1], d):
            continue
        packed.append(d)
    return packed


def extract_rule(
    head_tokens: Sequence[str],
    body_derivation: Derivation,
    packing: Sequence[Derivation],
) -> Tuple[Category, tuple, SemanticTemplate]:
    """Build the rule parts for one packing: packed spans become category
    slots, everything else stays literal, and every occurrence of a packed
    program in the body becomes the slot's hole. An empty packing yields a
    verbatim rule mapping the head tokens to the whole body program."""
    packing = sorted(packing, key=lambda d: d.start)
    rhs: List[object] = []
    pos = 0
    for d in packing:
        while pos < d.start:
            rhs.append(TokenItem(head_tokens[pos]))
            pos += 1
        rhs.append(CatItem(d.category))
        pos = d.end
    while pos < len(head_tokens):
        rhs.append(TokenItem(head_tokens[pos]))
        pos += 1

    skeleton: P.Program = body_derivation.program
    for index, d in enumerate(packing):
        skeleton = P.substitute(skeleton, d.program, P.Hole(index))
    holes = tuple(d.category for d in packing)
    return body_derivation.category, tuple(rhs), SemanticTemplate(skeleton, holes)


# ---------------------------------------------------------------------------
# Alignment for one-utterance bodies


def _coverage_gate(
    head_tokens: Sequence[str],
    body_tokens: Sequence[str],
    matches: Sequence[Derivation],
    body_derivation: Derivation,
) -> bool:
    """Alignment only fires when nearly every token on both sides is already
    accounted for by shared tokens or matched derivations."""
    matched_programs = {d.program for d in matches}
    head_covered = set()
    for d in matches:
        head_covered.update(range(d.start, d.end))
    body_covered = set()
    for node in walk_derivation(body_derivation):
        if node.program in matched_programs:
            body_covered.update(range(node.start, node.end))

    body_vocab = set(body_tokens)
    head_vocab = set(head_tokens)
    unaligned_head = [
        i for i, tok in enumerate(head_tokens)
        if i not in head_covered and tok not in body_vocab
    ]
    unaligned_body = [
        i for i, tok in enumerate(body_tokens)
        if i not in body_covered and tok not in head_vocab
    ]
    return (len(unaligned_head) <= MAX_UNALIGNED_TOKENS
            and len(unaligned_body) <= MAX_UNALIGNED_TOKENS)


def _spans(length: int, max_len: int) -> Iterator[Tuple[int, int]]:
    for start in range(length):
        for end in range(start + 1, min(start + max_len, length) + 1):
            yield (start, end)


def _transplant(derivation: Derivation, start: int, end: int) -> Derivation:
    moved = Derivation(
        start, end, derivation.rule, derivation.category, derivation.children,
        derivation.program, derivation.score, unary_depth=derivation.unary_depth)
    return moved


def _lowest_common_ancestor(
    root: Derivation, first: Derivation, second: Derivation
) -> Optional[Derivation]:
    def contains(node: Derivation, target: Derivation) -> bool:
        return any(n is target for n in walk_derivation(node))

    ancestor = None
    for node in walk_derivation(root):
        if contains(node, first) and contains(node, second):
            ancestor = node  # the last hit in walk order is the lowest
    return ancestor


def extend_chart_by_alignment(
    chart: Chart,
    head_tokens: Sequence[str],
    body_tokens: Sequence[str],
    body_derivation: Derivation,
    matches: Sequence[Derivation],
) -> List[Derivation]:
    """Copy body derivations onto head spans that align with their body spans.

    Two heuristics: if excising one short span from each side makes the token
    sequences equal, the excised spans align; and if two matches correspond to
    body nodes, their lowest common ancestor aligns with the covering head
    span. Returns the transplanted derivations after adding them to the chart.
    """
    if not _coverage_gate(head_tokens, body_tokens, matches, body_derivation):
        return []

    existing = {(d.start, d.end, d.program) for d in chart.partials()}
    transplants: List[Derivation] = []

    def plant(node: Derivation, start: int, end: int) -> None:
        key = (start, end, node.program)
        if key in existing:
            return
        existing.add(key)
        moved = _transplant(node, start, end)
        chart.add_partial(moved)
        transplants.append(moved)

    # Exclusion: all but one pair of short spans is token-identical. The
    # shared remainder must be nonempty, otherwise nothing is actually aligned.
    for h_start, h_end in _spans(len(head_tokens), MAX_ALIGN_SPAN):
        head_rest = list(head_tokens[:h_start]) + list(head_tokens[h_end:])
        if not head_rest:
            continue
        for b_start, b_end in _spans(len(body_tokens), MAX_ALIGN_SPAN):
            if list(head_tokens[h_start:h_end]) == list(body_tokens[b_start:b_end]):
                continue
            body_rest = list(body_tokens[:b_start]) + list(body_tokens[b_end:])
            if head_rest != body_rest:
                continue
            for node in walk_derivation(body_derivation):
                if node.start == b_start and node.end == b_end:
                    plant(node, h_start, h_end)

    # Projectivity: two matched nodes pull their common ancestor across.
    node_by_program: Dict[P.Program, Derivation] = {}
    for node in walk_derivation(body_derivation):
        node_by_program.setdefault(node.program, node)
    for i, first in enumerate(matches):
        for second in matches[i + 1:]:
            if _overlaps(first, second):
                continue
            body_first = node_by_program.get(first.program)
            body_second = node_by_program.get(second.program)
            if body_first is None or body_second is None or body_first is body_second:
                continue
            ancestor = _lowest_common_ancestor(body_derivation, body_first, body_second)
            if ancestor is None or ancestor is body_first or ancestor is body_second:
                continue
            start = min(first.start, second.start)
            end = max(first.end, second.end)
            if ancestor is body_derivation and (start, end) != (0, len(head_tokens)):
                # The whole body's meaning only ever aligns with the whole head;
                # pinning it to a fragment would make the rest vacuous.
                continue
            plant(ancestor, start, end)

    return transplants


# ---------------------------------------------------------------------------
# The full induction pipeline


def _fold_body(definition: Definition, grammar: Grammar) -> Derivation:
    """One derivation for the whole body: committed parses sequenced right to
    left with the core ';' rule. Root scoping wrappers are dropped so the
    template records what the body does, not how its steps were displayed."""
    stripped = [strip_root_scope(d) for d in definition.body_derivations]
    if len(stripped) == 1:
        return stripped[0]
    seq_rule = grammar.lookup((
        CatItem(Category.ACTION), TokenItem(";"), CatItem(Category.ACTION)))[0]
    result = stripped[-1]
    for left in reversed(stripped[:-1]):
        program = P.Seq(left.program, result.program)
        result = Derivation(
            left.start, left.end, seq_rule, Category.ACTION,
            (left, result), program, left.score + result.score)
    return result


def induce_rules(
    definition: Definition,
    grammar: Grammar,
    params: Params,
    beam: int = 100,
) -> InductionResult:
    """Parse the head, find packings against the body, and insert the
    extracted rules. A head that already parses to the body program is
    redundant and yields nothing."""
    if not definition.body_derivations:
        raise ValueError("definition has an empty body")
    parser = ChartParser(grammar, params, beam)
    head_result = parser.parse(definition.head, definition.author)
    head_tokens = head_result.tokens
    if not head_tokens:
        raise ValueError("definition head has no tokens")
    body_derivation = _fold_body(definition, grammar)

    for root in head_result.roots:
        if strip_root_scope(root).program == body_derivation.program:
            return InductionResult([], redundant=True, head_tokens=head_tokens,
                                   body_program=body_derivation.program)

    matches = find_matches(head_result.chart, body_derivation)
    transplanted: Set[int] = set()
    if len(definition.body_utterances) == 1:
        body_tokens = tokenize(definition.body_utterances[0])
        planted = extend_chart_by_alignment(
            head_result.chart, head_tokens, body_tokens, body_derivation, matches)
        if planted:
            transplanted = {id(d) for d in planted}
            matches = find_matches(head_result.chart, body_derivation)

    provenance = {"head": definition.head, "body": list(definition.body_utterances)}
    created: List[GrammarRule] = []

    def insert(lhs: Category, rhs: tuple, template: SemanticTemplate) -> None:
        # A -> A with an identity template parses nothing new.
        if (len(rhs) == 1 and isinstance(rhs[0], CatItem)
                and rhs[0].category == lhs and template.skeleton == P.Hole(0)):
            return
        rule, is_new = grammar.insert(
            lhs, rhs, template, author=definition.author, provenance=provenance)
        if is_new:
            created.append(rule)

    packings = [
        best_packing(matches, len(head_tokens)),
        simple_packing(matches),
    ]
    for packing in packings:
        lhs, rhs, template = extract_rule(head_tokens, body_derivation, packing)
        insert(lhs, rhs, template)
        for d in packing:
            if id(d) in transplanted:
                # The packed span cannot actually parse to this category yet;
                # a lexical bridge rule makes the transplant real.
                bridge_rhs = tuple(TokenItem(t) for t in head_tokens[d.start:d.end])
                insert(d.category, bridge_rhs, SemanticTemplate(d.program, ()))

    return InductionResult(created, head_tokens=list(head_tokens),
                           body_program=body_derivation.program)
