"""Evaluation of set expressions and execution of actions against a world."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List

from . import programs as P
from .world import (
    Color,
    Direction,
    Position,
    WorldState,
    apply_add,
    apply_move,
    apply_remove,
    isolate_merge,
    offset,
)

MAX_REPEAT = 1000
MAX_PRIMITIVE_STEPS = 100_000


class EvalError(Exception):
    """Type mismatch or ill-formed program discovered during evaluation."""


class ResourceLimitError(EvalError):
    """A program exceeded the repeat bound or the primitive-action budget."""


@dataclass(frozen=True)
class ValueSet:
    """Result of a set expression: positions, colors, numbers, or directions."""

    kind: str  # "positions" | "colors" | "numbers" | "directions"
    values: FrozenSet

    def require(self, kind: str) -> FrozenSet:
        if self.kind != kind:
            raise EvalError(f"expected a set of {kind}, got {self.kind}")
        return self.values


def _positions(values) -> ValueSet:
    return ValueSet("positions", frozenset(values))


_AXIS_FIELD = {
    Direction.LEFT: "col", Direction.RIGHT: "col",
    Direction.FRONT: "row", Direction.BACK: "row",
    Direction.TOP: "height", Direction.BOT: "height",
}
_AXIS_TAKE_MAX = {
    Direction.RIGHT: True, Direction.LEFT: False,
    Direction.FRONT: True, Direction.BACK: False,
    Direction.TOP: True, Direction.BOT: False,
}


def eval_set(expr: P.SetExpr, state: WorldState) -> ValueSet:
    if isinstance(expr, P.This):
        return _positions(state.selection)
    if isinstance(expr, P.All):
        return _positions(state.voxels)
    if isinstance(expr, P.PrimColor):
        return ValueSet("colors", frozenset([expr.color]))
    if isinstance(expr, P.PrimNumber):
        return ValueSet("numbers", frozenset([expr.value]))
    if isinstance(expr, P.PrimDirection):
        return ValueSet("directions", frozenset([expr.direction]))
    if isinstance(expr, P.HasRel):
        inner = eval_set(expr.expr, state)
        if expr.rel == "color":
            colors = inner.require("colors")
            return _positions(p for p, c in state.voxels.items() if c in colors)
        numbers = inner.require("numbers")
        return _positions(
            p for p in state.voxels if getattr(p, expr.rel) in numbers
        )
    if isinstance(expr, P.RelOf):
        inner = eval_set(expr.expr, state).require("positions")
        if expr.rel == "color":
            found = frozenset(state.voxels[p] for p in inner if p in state.voxels)
            return ValueSet("colors", found)
        return ValueSet("numbers", frozenset(getattr(p, expr.rel) for p in inner))
    if isinstance(expr, P.DirOf):
        inner = eval_set(expr.expr, state).require("positions")
        shifted = (offset(p, expr.direction) for p in inner)
        return _positions(p for p in shifted if p.height >= 0)
    if isinstance(expr, P.Very):
        inner = eval_set(expr.expr, state).require("positions")
        if not inner:
            return _positions(())
        field = _AXIS_FIELD[expr.direction]
        coords = [getattr(p, field) for p in inner]
        extreme = max(coords) if _AXIS_TAKE_MAX[expr.direction] else min(coords)
        return _positions(p for p in inner if getattr(p, field) == extreme)
    if isinstance(expr, P.UnionOf):
        left = eval_set(expr.left, state)
        right = eval_set(expr.right, state)
        right_values = right.require(left.kind)
        return ValueSet(left.kind, left.values | right_values)
    if isinstance(expr, P.IntersectOf):
        left = eval_set(expr.left, state)
        right = eval_set(expr.right, state)
        right_values = right.require(left.kind)
        return ValueSet(left.kind, left.values & right_values)
    if isinstance(expr, P.Not):
        inner = eval_set(expr.expr, state).require("positions")
        return _positions(p for p in state.voxels if p not in inner)
    raise EvalError(f"cannot evaluate {expr!r} as a set")


class _Budget:
    __slots__ = ("steps",)

    def __init__(self):
        self.steps = 0

    def spend(self) -> None:
        self.steps += 1
        if self.steps > MAX_PRIMITIVE_STEPS:
            raise ResourceLimitError(
                f"more than {MAX_PRIMITIVE_STEPS} primitive actions in one program"
            )


def _execute(action: P.Action, state: WorldState, budget: _Budget) -> WorldState:
    if isinstance(action, P.Select):
        budget.spend()
        positions = eval_set(action.expr, state).require("positions")
        return state.with_selection(positions)
    if isinstance(action, P.Add):
        budget.spend()
        if not isinstance(action.color, Color):
            raise EvalError(f"add needs a concrete color, got {action.color!r}")
        return apply_add(state, action.color, action.direction)
    if isinstance(action, P.Move):
        budget.spend()
        if not isinstance(action.direction, Direction):
            raise EvalError(f"move needs a concrete direction, got {action.direction!r}")
        return apply_move(state, action.direction)
    if isinstance(action, P.Remove):
        budget.spend()
        return apply_remove(state)
    if isinstance(action, P.Seq):
        state = _execute(action.first, state, budget)
        return _execute(action.second, state, budget)
    if isinstance(action, P.Repeat):
        count = action.count
        if not isinstance(count, int) or count < 0:
            raise EvalError(f"repeat needs a nonnegative count, got {count!r}")
        if count > MAX_REPEAT:
            raise ResourceLimitError(f"repeat count {count} exceeds {MAX_REPEAT}")
        for _ in range(count):
            state = _execute(action.body, state, budget)
        return state
    if isinstance(action, P.If):
        cond = eval_set(action.cond, state)
        if cond.values:
            return _execute(action.body, state, budget)
        return state
    if isinstance(action, P.Foreach):
        positions = eval_set(action.over, state).require("positions")
        saved = state.selection
        for p in sorted(positions):
            state = _execute(action.body, state.with_selection([p]), budget)
        return state.with_selection(saved)
    if isinstance(action, P.Scoped):
        if action.kind is P.ScopeKind.BLOCK:
            return _execute(action.body, state, budget)
        if action.kind is P.ScopeKind.RESTORE_SELECTION:
            result = _execute(action.body, state, budget)
            return result.with_selection(state.selection)
        # isolate: the action sees only the selected voxels; afterwards the
        # untouched rest of the world is merged back and the selection restored.
        domain = state.restrict(state.selection)
        inner = WorldState(domain, state.selection)
        result = _execute(action.body, inner, budget)
        merged = isolate_merge(state.voxels, result.voxels, domain)
        return WorldState(merged, state.selection)
    raise EvalError(f"cannot execute {action!r}")


def execute(action: P.Action, state: WorldState) -> WorldState:
    """Run an action, returning the next world. Raises EvalError on type
    mismatches and ResourceLimitError when guards trip; callers treat both as
    a rejected program, never as a crash."""
    return _execute(action, state, _Budget())


def scoping_variants(action: P.Action) -> List[P.Action]:
    """The three scoping interpretations of an action, or the action itself
    when the user already scoped it explicitly at the top level."""
    if isinstance(action, P.Scoped):
        return [action]
    return [
        P.Scoped(P.ScopeKind.BLOCK, action),
        P.Scoped(P.ScopeKind.RESTORE_SELECTION, action),
        P.Scoped(P.ScopeKind.ISOLATE, action),
    ]
