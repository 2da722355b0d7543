"""Program AST for the command language, plus canonical text form.

Programs come in two sorts: set expressions, which denote sets of positions,
colors, numbers or directions, and actions, which transform the world. The
canonical text form is what users see, what gets logged, and what defines a
program's token length; `read_program` inverts `to_tokens` exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union as TUnion

from .world import (
    COLOR_TOKENS,
    DIRECTION_TOKENS,
    Color,
    Direction,
)

RELATIONS = ("row", "col", "height", "color")


class ScopeKind(str, Enum):
    BLOCK = "block"
    RESTORE_SELECTION = "restore_selection"
    ISOLATE = "isolate"


@dataclass(frozen=True)
class Hole:
    """Placeholder in a rule template, filled by the child at `index`."""

    index: int


# ---------------------------------------------------------------------------
# Set expressions


@dataclass(frozen=True)
class This:
    pass


@dataclass(frozen=True)
class All:
    pass


@dataclass(frozen=True)
class PrimColor:
    color: TUnion[Color, Hole]


@dataclass(frozen=True)
class PrimNumber:
    value: TUnion[int, Hole]


@dataclass(frozen=True)
class PrimDirection:
    direction: TUnion[Direction, Hole]


@dataclass(frozen=True)
class HasRel:
    rel: str
    expr: "SetExpr"


@dataclass(frozen=True)
class RelOf:
    rel: str
    expr: "SetExpr"


@dataclass(frozen=True)
class DirOf:
    direction: TUnion[Direction, Hole]
    expr: "SetExpr"


@dataclass(frozen=True)
class Very:
    direction: TUnion[Direction, Hole]
    expr: "SetExpr"


@dataclass(frozen=True)
class UnionOf:
    left: "SetExpr"
    right: "SetExpr"


@dataclass(frozen=True)
class IntersectOf:
    left: "SetExpr"
    right: "SetExpr"


@dataclass(frozen=True)
class Not:
    expr: "SetExpr"


SetExpr = TUnion[
    This, All, PrimColor, PrimNumber, PrimDirection,
    HasRel, RelOf, DirOf, Very, UnionOf, IntersectOf, Not, Hole,
]


# ---------------------------------------------------------------------------
# Actions


@dataclass(frozen=True)
class Select:
    expr: SetExpr


@dataclass(frozen=True)
class Add:
    color: TUnion[Color, Hole]
    direction: TUnion[Direction, Hole, None] = None


@dataclass(frozen=True)
class Move:
    direction: TUnion[Direction, Hole]


@dataclass(frozen=True)
class Remove:
    pass


@dataclass(frozen=True)
class Seq:
    first: "Action"
    second: "Action"


@dataclass(frozen=True)
class Repeat:
    count: TUnion[int, Hole]
    body: "Action"


@dataclass(frozen=True)
class If:
    cond: SetExpr
    body: "Action"


@dataclass(frozen=True)
class Foreach:
    over: SetExpr
    body: "Action"


@dataclass(frozen=True)
class Scoped:
    kind: ScopeKind
    body: "Action"


Action = TUnion[Select, Add, Move, Remove, Seq, Repeat, If, Foreach, Scoped, Hole]

# A Program is anything a grammar rule can produce: an action, a set
# expression, or a primitive value (color, direction, number).
Program = TUnion[Action, SetExpr, Color, Direction, int]

_SET_TYPES = (This, All, PrimColor, PrimNumber, PrimDirection,
              HasRel, RelOf, DirOf, Very, UnionOf, IntersectOf, Not)
_ACTION_TYPES = (Select, Add, Move, Remove, Seq, Repeat, If, Foreach, Scoped)


def is_set_expr(prog: object) -> bool:
    return isinstance(prog, _SET_TYPES)


def is_action(prog: object) -> bool:
    return isinstance(prog, _ACTION_TYPES)


def is_scoped(prog: object) -> bool:
    return isinstance(prog, Scoped)


# ---------------------------------------------------------------------------
# Canonical text form


def _value_tokens(value: object) -> List[str]:
    if isinstance(value, Hole):
        return [f"${value.index}"]
    if isinstance(value, Color):
        return [value.value]
    if isinstance(value, Direction):
        return [value.value]
    if isinstance(value, int):
        return [str(value)]
    raise TypeError(f"not a primitive value: {value!r}")


def _set_operand_tokens(expr: SetExpr) -> List[str]:
    # Union/intersection operands get brackets so the text reads back uniquely.
    if isinstance(expr, (UnionOf, IntersectOf)):
        return ["["] + _set_tokens(expr) + ["]"]
    return _set_tokens(expr)


def _set_tokens(expr: SetExpr) -> List[str]:
    if isinstance(expr, Hole):
        return [f"${expr.index}"]
    if isinstance(expr, This):
        return ["this"]
    if isinstance(expr, All):
        return ["all"]
    if isinstance(expr, PrimColor):
        return _value_tokens(expr.color)
    if isinstance(expr, PrimNumber):
        return _value_tokens(expr.value)
    if isinstance(expr, PrimDirection):
        return _value_tokens(expr.direction)
    if isinstance(expr, HasRel):
        return ["has", expr.rel] + _set_operand_tokens(expr.expr)
    if isinstance(expr, RelOf):
        return [expr.rel, "of"] + _set_operand_tokens(expr.expr)
    if isinstance(expr, DirOf):
        return _value_tokens(expr.direction) + ["of"] + _set_operand_tokens(expr.expr)
    if isinstance(expr, Very):
        return ["very"] + _value_tokens(expr.direction) + ["of"] + _set_operand_tokens(expr.expr)
    if isinstance(expr, UnionOf):
        return _set_operand_tokens(expr.left) + ["or"] + _set_operand_tokens(expr.right)
    if isinstance(expr, IntersectOf):
        return _set_operand_tokens(expr.left) + ["and"] + _set_operand_tokens(expr.right)
    if isinstance(expr, Not):
        return ["not"] + _set_operand_tokens(expr.expr)
    raise TypeError(f"not a set expression: {expr!r}")


def _action_operand_tokens(action: Action) -> List[str]:
    # A sequence under repeat/if/foreach/seq-left needs brackets to read back.
    if isinstance(action, Seq):
        return ["["] + _action_tokens(action) + ["]"]
    return _action_tokens(action)


def _action_tokens(action: Action) -> List[str]:
    if isinstance(action, Hole):
        return [f"${action.index}"]
    if isinstance(action, Select):
        return ["select"] + _set_tokens(action.expr)
    if isinstance(action, Add):
        tokens = ["add"] + _value_tokens(action.color)
        if action.direction is not None:
            tokens += _value_tokens(action.direction)
        return tokens
    if isinstance(action, Move):
        return ["move"] + _value_tokens(action.direction)
    if isinstance(action, Remove):
        return ["remove"]
    if isinstance(action, Seq):
        return _action_operand_tokens(action.first) + [";"] + _action_tokens(action.second)
    if isinstance(action, Repeat):
        return ["repeat"] + _value_tokens(action.count) + _action_operand_tokens(action.body)
    if isinstance(action, If):
        return ["if"] + _set_tokens(action.cond) + _action_operand_tokens(action.body)
    if isinstance(action, Foreach):
        return ["foreach"] + _set_tokens(action.over) + _action_operand_tokens(action.body)
    if isinstance(action, Scoped):
        inner = _action_tokens(action.body)
        if action.kind is ScopeKind.BLOCK:
            return ["["] + inner + ["]"]
        if action.kind is ScopeKind.RESTORE_SELECTION:
            return ["{"] + inner + ["}"]
        return ["isolate", "["] + inner + ["]"]
    raise TypeError(f"not an action: {action!r}")


def to_tokens(prog: Program) -> List[str]:
    if is_action(prog) or isinstance(prog, Hole):
        return _action_tokens(prog)
    if is_set_expr(prog):
        return _set_tokens(prog)
    return _value_tokens(prog)


def pretty(prog: Program) -> str:
    return " ".join(to_tokens(prog))


def program_length(prog: Program) -> int:
    """Token count of the canonical text, brackets and ';' included."""
    return len(to_tokens(prog))


# ---------------------------------------------------------------------------
# Canonical text reader


class ProgramSyntaxError(ValueError):
    pass


class _Reader:
    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Optional[str]:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ProgramSyntaxError("unexpected end of program text")
        self.pos += 1
        return tok

    def expect(self, token: str) -> None:
        tok = self.next()
        if tok != token:
            raise ProgramSyntaxError(f"expected {token!r}, got {tok!r}")

    def _hole(self, tok: str) -> Hole:
        return Hole(int(tok[1:]))

    # -- values ------------------------------------------------------------

    def read_color(self):
        tok = self.next()
        if tok.startswith("$"):
            return self._hole(tok)
        if tok in COLOR_TOKENS:
            return COLOR_TOKENS[tok]
        raise ProgramSyntaxError(f"expected a color, got {tok!r}")

    def read_direction(self):
        tok = self.next()
        if tok.startswith("$"):
            return self._hole(tok)
        if tok in DIRECTION_TOKENS:
            return DIRECTION_TOKENS[tok]
        raise ProgramSyntaxError(f"expected a direction, got {tok!r}")

    def read_number(self):
        tok = self.next()
        if tok.startswith("$"):
            return self._hole(tok)
        if tok.isdigit():
            return int(tok)
        raise ProgramSyntaxError(f"expected a number, got {tok!r}")

    # -- set expressions ---------------------------------------------------

    def read_set(self) -> SetExpr:
        expr = self.read_set_unary()
        while self.peek() in ("or", "and"):
            op = self.next()
            right = self.read_set_unary()
            expr = UnionOf(expr, right) if op == "or" else IntersectOf(expr, right)
        return expr

    def read_set_unary(self) -> SetExpr:
        tok = self.peek()
        if tok is None:
            raise ProgramSyntaxError("unexpected end of set expression")
        if tok == "[":
            self.next()
            inner = self.read_set()
            self.expect("]")
            return inner
        if tok == "this":
            self.next()
            return This()
        if tok == "all":
            self.next()
            return All()
        if tok == "not":
            self.next()
            return Not(self.read_set_unary())
        if tok == "has":
            self.next()
            rel = self.next()
            if rel not in RELATIONS:
                raise ProgramSyntaxError(f"unknown relation {rel!r}")
            return HasRel(rel, self.read_set_unary())
        if tok in RELATIONS and self.peek(1) == "of":
            self.next()
            self.next()
            return RelOf(tok, self.read_set_unary())
        if tok == "very":
            self.next()
            d = self.read_direction()
            self.expect("of")
            return Very(d, self.read_set_unary())
        if tok in DIRECTION_TOKENS or (tok.startswith("$") and self.peek(1) == "of"):
            if self.peek(1) == "of":
                d = self.read_direction()
                self.next()
                return DirOf(d, self.read_set_unary())
            self.next()
            return PrimDirection(DIRECTION_TOKENS[tok])
        if tok in COLOR_TOKENS:
            self.next()
            return PrimColor(COLOR_TOKENS[tok])
        if tok.isdigit():
            self.next()
            return PrimNumber(int(tok))
        if tok.startswith("$"):
            self.next()
            return self._hole(tok)
        raise ProgramSyntaxError(f"cannot read set expression at {tok!r}")

    # -- actions -------------------------------------------------------------

    def read_action(self) -> Action:
        action = self.read_action_unit()
        if self.peek() == ";":
            self.next()
            return Seq(action, self.read_action())
        return action

    def read_action_unit(self) -> Action:
        tok = self.peek()
        if tok is None:
            raise ProgramSyntaxError("unexpected end of action")
        if tok == "select":
            self.next()
            return Select(self.read_set())
        if tok == "add":
            self.next()
            color = self.read_color()
            nxt = self.peek()
            if nxt is not None and (nxt in DIRECTION_TOKENS or nxt.startswith("$")):
                return Add(color, self.read_direction())
            return Add(color, None)
        if tok == "move":
            self.next()
            return Move(self.read_direction())
        if tok == "remove":
            self.next()
            return Remove()
        if tok == "repeat":
            self.next()
            n = self.read_number()
            return Repeat(n, self.read_action_unit())
        if tok == "if":
            self.next()
            cond = self.read_set()
            return If(cond, self.read_action_unit())
        if tok == "foreach":
            self.next()
            over = self.read_set()
            return Foreach(over, self.read_action_unit())
        if tok == "[":
            self.next()
            body = self.read_action()
            self.expect("]")
            return Scoped(ScopeKind.BLOCK, body)
        if tok == "{":
            self.next()
            body = self.read_action()
            self.expect("}")
            return Scoped(ScopeKind.RESTORE_SELECTION, body)
        if tok == "isolate":
            self.next()
            self.expect("[")
            body = self.read_action()
            self.expect("]")
            return Scoped(ScopeKind.ISOLATE, body)
        if tok.startswith("$"):
            self.next()
            return self._hole(tok)
        raise ProgramSyntaxError(f"cannot read action at {tok!r}")


def read_program(text: str, sort: str) -> Program:
    """Parse canonical program text back into an AST.

    `sort` selects the reader entry point: "action", "set", "color",
    "direction" or "number". Only text produced by `pretty`/`to_tokens` is
    supported; this is not the user-facing utterance parser.
    """
    reader = _Reader(text.split())
    readers = {
        "action": reader.read_action,
        "set": reader.read_set,
        "color": reader.read_color,
        "direction": reader.read_direction,
        "number": reader.read_number,
    }
    result = readers[sort]()
    if reader.pos != len(reader.tokens):
        raise ProgramSyntaxError(f"trailing tokens: {reader.tokens[reader.pos:]}")
    return result


# ---------------------------------------------------------------------------
# Structural helpers


def _is_node(value: object) -> bool:
    return dataclasses.is_dataclass(value) and not isinstance(value, type)


def subprograms(prog: Program):
    """Yield prog and every nested AST node and primitive field value."""
    yield prog
    if _is_node(prog) and not isinstance(prog, Hole):
        for field in dataclasses.fields(prog):
            value = getattr(prog, field.name)
            if value is None:
                continue
            if _is_node(value) or isinstance(value, (Color, Direction, int)):
                yield from subprograms(value)


def substitute(prog: Program, target: Program, replacement: Program) -> Program:
    """Replace every occurrence of `target` (node or primitive value) in prog."""
    if prog == target and type(prog) is type(target):
        return replacement
    if not _is_node(prog) or isinstance(prog, Hole):
        return prog
    changes = {}
    for field in dataclasses.fields(prog):
        value = getattr(prog, field.name)
        if value is None or type(value) is str or isinstance(value, ScopeKind):
            # relation names and scope kinds are not substitutable programs
            continue
        if value == target and type(value) is type(target):
            changes[field.name] = replacement
        elif _is_node(value):
            new_value = substitute(value, target, replacement)
            if new_value is not value:
                changes[field.name] = new_value
    return dataclasses.replace(prog, **changes) if changes else prog


def fill_holes(prog: Program, values: Sequence[Program]) -> Program:
    """Instantiate a template skeleton by substituting each Hole(k) with values[k]."""
    if isinstance(prog, Hole):
        return values[prog.index]
    if not _is_node(prog):
        return prog
    changes = {}
    for field in dataclasses.fields(prog):
        value = getattr(prog, field.name)
        if isinstance(value, Hole):
            changes[field.name] = values[value.index]
        elif _is_node(value):
            new_value = fill_holes(value, values)
            if new_value is not value:
                changes[field.name] = new_value
    return dataclasses.replace(prog, **changes) if changes else prog
