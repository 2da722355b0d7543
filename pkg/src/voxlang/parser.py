"""Tokenizer and bottom-up chart parser over the rule trie.

Every cell of the chart holds scored partial derivations for one token span,
beam-truncated per cell. Full-span action derivations are promoted to root
derivations, at which point an action without an explicit top-level scope is
offered under all three scoping interpretations.
"""

from __future__ import annotations

import re
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import model as M
from . import programs as P
from .grammar import (
    Category,
    Grammar,
    GrammarRule,
    TrieNode,
    number_token_value,
)

DEFAULT_BEAM = 100

_TOKEN_RE = re.compile(r"[a-z]+|[0-9]+|[^a-z0-9\s]")


def tokenize(text: str) -> List[str]:
    """Lowercase and split on whitespace, punctuation, and digit/letter
    boundaries, so "10x10" becomes ["10", "x", "10"] and "[add red]" gets its
    brackets as standalone tokens."""
    return _TOKEN_RE.findall(text.lower())


class Derivation:
    """One parse of a token span into a category, with its program and score."""

    __slots__ = ("start", "end", "rule", "category", "children", "program",
                 "score", "sort_key", "unary_depth")

    def __init__(
        self,
        start: int,
        end: int,
        rule: GrammarRule,
        category: Category,
        children: Tuple["Derivation", ...],
        program: P.Program,
        score: float,
        unary_depth: int = 0,
    ):
        self.start = start
        self.end = end
        self.rule = rule
        self.category = category
        self.children = children
        self.program = program
        self.score = score
        self.unary_depth = unary_depth
        # Deterministic ordering: score first, then rule id, then children.
        self.sort_key = (-score, rule.id, tuple(c.sort_key for c in children))

    def rule_ids(self) -> List[int]:
        ids = []

        def walk(node):
            ids.append(node.rule.id)
            for child in node.children:
                walk(child)

        walk(self)
        return ids

    def is_core_only(self) -> bool:
        def walk(node):
            if not node.rule.is_core:
                return False
            return all(walk(child) for child in node.children)

        return walk(self)

    def __repr__(self) -> str:
        return (f"Derivation({self.category.value}, {self.start}:{self.end}, "
                f"{P.pretty(self.program)})")


class Chart:
    def __init__(self, tokens: Sequence[str], beam: int):
        self.tokens = list(tokens)
        self.beam = beam
        self.cells: Dict[Tuple[int, int], List[Derivation]] = {}

    def cell(self, start: int, end: int) -> List[Derivation]:
        return self.cells.get((start, end), [])

    def partials(self) -> Iterator[Derivation]:
        for span in sorted(self.cells):
            yield from self.cells[span]

    def add_partial(self, derivation: Derivation) -> None:
        """Used by induction to graft transplanted derivations into the chart."""
        span = (derivation.start, derivation.end)
        cell = self.cells.setdefault(span, [])
        cell.append(derivation)
        cell.sort(key=lambda d: d.sort_key)


class ParseResult:
    def __init__(self, tokens: List[str], roots: List[Derivation], chart: Chart):
        self.tokens = tokens
        self.roots = roots
        self.chart = chart


class ChartParser:
    def __init__(self, grammar: Grammar, params: M.Params, beam: int = DEFAULT_BEAM):
        self.grammar = grammar
        self.params = params
        self.beam = beam
        self._number_rule = next(
            (r for r in grammar.rules if r.dynamic_number), None)

    # -- derivation construction ---------------------------------------------

    def _make(
        self,
        rule: GrammarRule,
        category: Category,
        start: int,
        end: int,
        children: Tuple[Derivation, ...],
        tokens: Sequence[str],
        user: str,
        program: Optional[P.Program] = None,
        unary_depth: int = 0,
    ) -> Derivation:
        if program is None:
            program = rule.template.apply([c.program for c in children])
        local = M.local_features(rule, category, start, end, tokens, user)
        score = sum(c.score for c in children) + M.dot(self.params.weights, local)
        return Derivation(start, end, rule, category, children, program, score,
                          unary_depth=unary_depth)

    # -- parsing ---------------------------------------------------------------

    def parse(self, utterance: str, user: str) -> ParseResult:
        tokens = tokenize(utterance)
        chart = Chart(tokens, self.beam)
        n = len(tokens)
        for length in range(1, n + 1):
            for start in range(0, n - length + 1):
                end = start + length
                cell = self._fill_cell(chart, tokens, start, end, user)
                if cell:
                    chart.cells[(start, end)] = cell
        roots = self._promote_roots(chart, tokens, n, user)
        return ParseResult(tokens, roots, chart)

    def _fill_cell(
        self, chart: Chart, tokens: Sequence[str], start: int, end: int, user: str
    ) -> List[Derivation]:
        found: List[Derivation] = []

        if end - start == 1 and self._number_rule is not None:
            value = number_token_value(tokens[start])
            if value is not None:
                found.append(self._make(
                    self._number_rule, Category.NUMBER, start, end, (), tokens,
                    user, program=value))

        def descend(pos: int, node: TrieNode, children: Tuple[Derivation, ...]) -> None:
            if pos == end:
                for rule in node.rules:
                    if rule.root_only:
                        continue
                    found.append(self._make(
                        rule, rule.lhs, start, end, children, tokens, user))
                return
            child_node = node.token_children.get(tokens[pos])
            if child_node is not None:
                descend(pos + 1, child_node, children)
            for category, cat_node in node.cat_children.items():
                for mid in range(pos + 1, end + 1):
                    if (pos, mid) == (start, end):
                        continue  # the cell being built; unary rules run below
                    for child in chart.cell(pos, mid):
                        if child.category is category:
                            descend(mid, cat_node, children + (child,))

        descend(start, self.grammar.trie.root, ())

        # Single-category rules (e.g. a color used as a set) apply within the
        # cell itself; a small depth cap keeps self-recursive rules finite.
        frontier = found
        for _ in range(3):
            added: List[Derivation] = []
            for derivation in frontier:
                node = self.grammar.trie.root.cat_children.get(derivation.category)
                if node is None or derivation.unary_depth >= 2:
                    continue
                for rule in node.rules:
                    if rule.root_only:
                        continue
                    added.append(self._make(
                        rule, rule.lhs, start, end, (derivation,), tokens, user,
                        unary_depth=derivation.unary_depth + 1))
            if not added:
                break
            found.extend(added)
            frontier = added

        found.sort(key=lambda d: d.sort_key)
        return found[: self.beam]

    def _promote_roots(
        self, chart: Chart, tokens: Sequence[str], n: int, user: str
    ) -> List[Derivation]:
        if n == 0:
            return []
        plain, by_kind = None, {}
        for rule in self.grammar.root_rules:
            if rule.scope_kind is None:
                plain = rule
            else:
                by_kind[rule.scope_kind] = rule
        scope_order = [P.ScopeKind.BLOCK, P.ScopeKind.RESTORE_SELECTION,
                       P.ScopeKind.ISOLATE]

        roots: List[Derivation] = []
        for derivation in chart.cell(0, n):
            if derivation.category is not Category.ACTION:
                continue
            if P.is_scoped(derivation.program):
                roots.append(self._make(
                    plain, Category.ROOT, 0, n, (derivation,), tokens, user))
            else:
                for kind in scope_order:
                    roots.append(self._make(
                        by_kind[kind], Category.ROOT, 0, n, (derivation,),
                        tokens, user))

        # Among roots with the same program keep the best-ranked derivation.
        seen: Dict[P.Program, Derivation] = {}
        for root in sorted(roots, key=lambda d: d.sort_key):
            seen.setdefault(root.program, root)
        return sorted(seen.values(), key=lambda d: d.sort_key)


def strip_root_scope(derivation: Derivation) -> Derivation:
    """The action derivation under a root promotion node. Definitions work on
    these: the top-level scoping choice is re-offered each time a rule is used,
    so it is not baked into induced templates."""
    if derivation.category is Category.ROOT:
        return derivation.children[0]
    return derivation
