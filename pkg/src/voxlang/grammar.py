"""Grammar rules, the seed grammar, and the trie used for rule lookup.

Rules map a right-hand side of tokens and categories to a semantic template:
a program skeleton whose numbered holes are filled by the child programs, in
right-hand-side order. The seed grammar is fixed; everything else is created
at runtime from user definitions and recorded in an append-only log.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import programs as P
from .programs import Hole, ScopeKind
from .world import Color, Direction


class Category(str, Enum):
    ROOT = "root"
    ACTION = "action"
    SET = "set"
    COLOR = "color"
    DIRECTION = "direction"
    NUMBER = "number"


PRIMITIVE_CATEGORIES = (Category.COLOR, Category.DIRECTION, Category.NUMBER)

# Which reader entry point deserializes a template for each result category.
_SORT_FOR = {
    Category.ROOT: "action",
    Category.ACTION: "action",
    Category.SET: "set",
    Category.COLOR: "color",
    Category.DIRECTION: "direction",
    Category.NUMBER: "number",
}


@dataclass(frozen=True)
class TokenItem:
    text: str


@dataclass(frozen=True)
class CatItem:
    category: Category


RhsItem = object  # TokenItem | CatItem


def rhs_items(entries: Iterable) -> Tuple[RhsItem, ...]:
    """Convenience: strings become tokens, Category values become slots."""
    items: List[RhsItem] = []
    for entry in entries:
        if isinstance(entry, Category):
            items.append(CatItem(entry))
        elif isinstance(entry, (TokenItem, CatItem)):
            items.append(entry)
        else:
            items.append(TokenItem(str(entry)))
    return tuple(items)


@dataclass(frozen=True)
class SemanticTemplate:
    """Program skeleton with typed holes, one per category slot of the RHS."""

    skeleton: P.Program
    hole_categories: Tuple[Category, ...] = ()

    def apply(self, children: Sequence[P.Program]) -> P.Program:
        if len(children) != len(self.hole_categories):
            raise ValueError(
                f"template expects {len(self.hole_categories)} children, got {len(children)}"
            )
        return P.fill_holes(self.skeleton, list(children))


class GrammarRule:
    """A single rewrite rule. Identity is the numeric id; the bookkeeping
    fields (use_count, used_by_other, citations) mutate as the rule is used."""

    def __init__(
        self,
        rule_id: int,
        lhs: Category,
        rhs: Tuple[RhsItem, ...],
        template: Optional[SemanticTemplate],
        author: str,
        is_core: bool,
        scope_kind: Optional[ScopeKind] = None,
        root_only: bool = False,
        dynamic_number: bool = False,
        provenance: Optional[dict] = None,
    ):
        self.id = rule_id
        self.lhs = lhs
        self.rhs = rhs
        self.template = template
        self.author = author
        self.is_core = is_core
        self.scope_kind = scope_kind
        self.root_only = root_only
        self.dynamic_number = dynamic_number
        self.provenance = provenance
        self.use_count = 0
        self.used_by_other = False
        self.citations = 0

    def cat_items(self) -> List[CatItem]:
        return [item for item in self.rhs if isinstance(item, CatItem)]

    def signature(self) -> tuple:
        return (self.lhs, self.rhs, self.template)

    def rhs_text(self) -> str:
        parts = []
        for item in self.rhs:
            if isinstance(item, TokenItem):
                parts.append(item.text)
            else:
                parts.append(f"<{item.category.value}>")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"GrammarRule({self.id}: {self.lhs.value} -> {self.rhs_text()})"


class TrieNode:
    __slots__ = ("token_children", "cat_children", "rules")

    def __init__(self):
        self.token_children: Dict[str, TrieNode] = {}
        self.cat_children: Dict[Category, TrieNode] = {}
        self.rules: List[GrammarRule] = []


class RuleTrie:
    """Prefix tree over rule right-hand sides, keyed by token or category."""

    def __init__(self):
        self.root = TrieNode()

    def insert(self, rule: GrammarRule) -> None:
        node = self.root
        for item in rule.rhs:
            if isinstance(item, TokenItem):
                node = node.token_children.setdefault(item.text, TrieNode())
            else:
                node = node.cat_children.setdefault(item.category, TrieNode())
        node.rules.append(rule)

    def lookup(self, rhs: Sequence[RhsItem]) -> List[GrammarRule]:
        node = self.root
        for item in rhs:
            if isinstance(item, TokenItem):
                node = node.token_children.get(item.text)
            else:
                node = node.cat_children.get(item.category)
            if node is None:
                return []
        return list(node.rules)


class Grammar:
    def __init__(self):
        self.rules: List[GrammarRule] = []
        self.by_id: Dict[int, GrammarRule] = {}
        self.trie = RuleTrie()
        self.root_rules: List[GrammarRule] = []
        self._signatures: Dict[tuple, GrammarRule] = {}

    def insert(
        self,
        lhs: Category,
        rhs: Tuple[RhsItem, ...],
        template: Optional[SemanticTemplate],
        author: str,
        is_core: bool = False,
        scope_kind: Optional[ScopeKind] = None,
        root_only: bool = False,
        dynamic_number: bool = False,
        provenance: Optional[dict] = None,
        rule_id: Optional[int] = None,
    ) -> Tuple[GrammarRule, bool]:
        """Add a rule; returns (rule, created). Exact duplicates are a no-op
        that hands back the existing rule."""
        if template is not None:
            slots = tuple(item.category for item in rhs if isinstance(item, CatItem))
            if template.hole_categories != slots:
                raise ValueError(
                    f"template holes {template.hole_categories} do not match rhs slots {slots}"
                )
        signature = (lhs, rhs, template)
        existing = self._signatures.get(signature)
        if existing is not None:
            return existing, False
        if rule_id is None:
            rule_id = len(self.by_id) + 1
        if rule_id in self.by_id:
            raise ValueError(f"rule id {rule_id} already taken")
        rule = GrammarRule(
            rule_id, lhs, rhs, template, author, is_core,
            scope_kind=scope_kind, root_only=root_only,
            dynamic_number=dynamic_number, provenance=provenance,
        )
        self.rules.append(rule)
        self.by_id[rule_id] = rule
        self._signatures[signature] = rule
        if root_only:
            self.root_rules.append(rule)
        elif not dynamic_number:
            self.trie.insert(rule)
        return rule, True

    def lookup(self, rhs: Sequence[RhsItem]) -> List[GrammarRule]:
        return self.trie.lookup(rhs)

    def induced_rules(self) -> List[GrammarRule]:
        return [r for r in self.rules if not r.is_core]

    def core_count(self) -> int:
        return sum(1 for r in self.rules if r.is_core)

    # -- log round trip ------------------------------------------------------

    @staticmethod
    def rule_record(rule: GrammarRule) -> dict:
        rhs = [
            item.text if isinstance(item, TokenItem) else {"cat": item.category.value}
            for item in rule.rhs
        ]
        record = {
            "id": rule.id,
            "lhs": rule.lhs.value,
            "rhs": rhs,
            "template": P.pretty(rule.template.skeleton),
            "author": rule.author,
        }
        if rule.provenance:
            record["provenance"] = rule.provenance
        return record

    def insert_from_record(self, record: dict) -> GrammarRule:
        lhs = Category(record["lhs"])
        rhs = tuple(
            TokenItem(item) if isinstance(item, str) else CatItem(Category(item["cat"]))
            for item in record["rhs"]
        )
        skeleton = P.read_program(record["template"], _SORT_FOR[lhs])
        slots = tuple(item.category for item in rhs if isinstance(item, CatItem))
        template = SemanticTemplate(skeleton, slots)
        rule, created = self.insert(
            lhs, rhs, template,
            author=record["author"],
            provenance=record.get("provenance"),
            rule_id=record["id"],
        )
        if not created:
            raise ValueError(f"duplicate rule in log: id {record['id']}")
        return rule


def _tpl(skeleton: P.Program, *holes: Category) -> SemanticTemplate:
    return SemanticTemplate(skeleton, tuple(holes))


CORE_AUTHOR = "core"

A = Category.ACTION
S = Category.SET
C = Category.COLOR
D = Category.DIRECTION
N = Category.NUMBER


def core_grammar() -> Grammar:
    """The fixed seed grammar: scoping wrappers, core actions, set algebra,
    and the primitive vocabulary."""
    g = Grammar()

    def core(lhs, rhs_shape, template, **kw):
        g.insert(lhs, rhs_items(rhs_shape), template,
                 author=CORE_AUTHOR, is_core=True, **kw)

    # Root promotion: an unscoped action is offered under each scoping
    # interpretation; an explicitly scoped one passes through unchanged.
    core(Category.ROOT, [A], _tpl(Hole(0), A), root_only=True)
    core(Category.ROOT, [A], _tpl(P.Scoped(ScopeKind.BLOCK, Hole(0)), A),
         root_only=True, scope_kind=ScopeKind.BLOCK)
    core(Category.ROOT, [A], _tpl(P.Scoped(ScopeKind.RESTORE_SELECTION, Hole(0)), A),
         root_only=True, scope_kind=ScopeKind.RESTORE_SELECTION)
    core(Category.ROOT, [A], _tpl(P.Scoped(ScopeKind.ISOLATE, Hole(0)), A),
         root_only=True, scope_kind=ScopeKind.ISOLATE)

    # Actions.
    core(A, ["select", S], _tpl(P.Select(Hole(0)), S))
    core(A, ["add", C], _tpl(P.Add(Hole(0), None), C))
    core(A, ["add", C, D], _tpl(P.Add(Hole(0), Hole(1)), C, D))
    core(A, ["move", D], _tpl(P.Move(Hole(0)), D))
    core(A, ["remove"], _tpl(P.Remove()))
    core(A, ["repeat", N, A], _tpl(P.Repeat(Hole(0), Hole(1)), N, A))
    core(A, [A, ";", A], _tpl(P.Seq(Hole(0), Hole(1)), A, A))
    core(A, ["[", A, "]"], _tpl(P.Scoped(ScopeKind.BLOCK, Hole(0)), A),
         scope_kind=ScopeKind.BLOCK)
    core(A, ["{", A, "}"], _tpl(P.Scoped(ScopeKind.RESTORE_SELECTION, Hole(0)), A),
         scope_kind=ScopeKind.RESTORE_SELECTION)
    core(A, ["isolate", "[", A, "]"], _tpl(P.Scoped(ScopeKind.ISOLATE, Hole(0)), A),
         scope_kind=ScopeKind.ISOLATE)
    core(A, ["if", S, A], _tpl(P.If(Hole(0), Hole(1)), S, A))
    core(A, ["foreach", S, A], _tpl(P.Foreach(Hole(0), Hole(1)), S, A))

    # Set expressions.
    core(S, ["this"], _tpl(P.This()))
    core(S, ["all"], _tpl(P.All()))
    for rel in P.RELATIONS:
        core(S, ["has", rel, S], _tpl(P.HasRel(rel, Hole(0)), S))
    for rel in P.RELATIONS:
        core(S, [rel, "of", S], _tpl(P.RelOf(rel, Hole(0)), S))
    core(S, [D, "of", S], _tpl(P.DirOf(Hole(0), Hole(1)), D, S))
    core(S, ["very", D, "of", S], _tpl(P.Very(Hole(0), Hole(1)), D, S))
    core(S, [S, "or", S], _tpl(P.UnionOf(Hole(0), Hole(1)), S, S))
    core(S, [S, "and", S], _tpl(P.IntersectOf(Hole(0), Hole(1)), S, S))
    core(S, ["not", S], _tpl(P.Not(Hole(0)), S))
    core(S, ["[", S, "]"], _tpl(Hole(0), S))
    core(S, [C], _tpl(P.PrimColor(Hole(0)), C))
    core(S, [N], _tpl(P.PrimNumber(Hole(0)), N))
    # A bare direction names the cells adjacent to the selection on that side.
    core(S, [D], _tpl(P.DirOf(Hole(0), P.This()), D))

    # Primitive vocabulary.
    for color in Color:
        core(C, [color.value], _tpl(color))
    for direction in Direction:
        core(D, [direction.value], _tpl(direction))
    # One lexical rule covers all integer literals 1..100.
    core(N, [CatItem(N)], None, dynamic_number=True)

    return g


MIN_NUMBER_LITERAL = 1
MAX_NUMBER_LITERAL = 100


def number_token_value(token: str) -> Optional[int]:
    """The integer a token denotes under the numeric lexical rule, if any."""
    if not token.isdigit():
        return None
    if token != str(int(token)):
        return None
    value = int(token)
    if MIN_NUMBER_LITERAL <= value <= MAX_NUMBER_LITERAL:
        return value
    return None
