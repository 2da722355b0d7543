"""Voxel grid state: positions, colors, selections, and the primitive edits."""

from __future__ import annotations

import json
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Tuple


class Color(str, Enum):
    RED = "red"
    ORANGE = "orange"
    YELLOW = "yellow"
    GREEN = "green"
    BLUE = "blue"
    BLACK = "black"
    WHITE = "white"
    BROWN = "brown"
    GRAY = "gray"
    PINK = "pink"


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    FRONT = "front"
    BACK = "back"
    TOP = "top"
    BOT = "bot"


class Position(NamedTuple):
    row: int
    col: int
    height: int


# Direction -> (drow, dcol, dheight)
_OFFSETS = {
    Direction.LEFT: (0, -1, 0),
    Direction.RIGHT: (0, 1, 0),
    Direction.FRONT: (1, 0, 0),
    Direction.BACK: (-1, 0, 0),
    Direction.TOP: (0, 0, 1),
    Direction.BOT: (0, 0, -1),
}

COLOR_TOKENS = {c.value: c for c in Color}
DIRECTION_TOKENS = {d.value: d for d in Direction}


def offset(pos: Position, direction: Direction) -> Position:
    dr, dc, dh = _OFFSETS[direction]
    return Position(pos.row + dr, pos.col + dc, pos.height + dh)


class WorldState:
    """Immutable-by-convention world: a voxel map plus a set of selected positions.

    Selected positions do not have to be occupied. All edit helpers return a
    new WorldState and never mutate the receiver.
    """

    __slots__ = ("voxels", "selection", "_hash")

    def __init__(
        self,
        voxels: Optional[Mapping[Position, Color]] = None,
        selection: Iterable[Position] = (),
    ):
        self.voxels: Dict[Position, Color] = dict(voxels) if voxels else {}
        self.selection: FrozenSet[Position] = frozenset(selection)
        self._hash: Optional[int] = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldState):
            return NotImplemented
        return self.voxels == other.voxels and self.selection == other.selection

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.voxels.items()), self.selection))
        return self._hash

    def __repr__(self) -> str:
        return f"WorldState({len(self.voxels)} voxels, {len(self.selection)} selected)"

    def occupied(self) -> FrozenSet[Position]:
        return frozenset(self.voxels)

    def with_selection(self, selection: Iterable[Position]) -> "WorldState":
        return WorldState(self.voxels, selection)

    def restrict(self, positions: Iterable[Position]) -> Dict[Position, Color]:
        """Voxels of this world at the given positions (unoccupied ones skipped)."""
        return {p: self.voxels[p] for p in positions if p in self.voxels}


def apply_add(state: WorldState, color: Color, direction: Optional[Direction]) -> WorldState:
    """Place a voxel of `color` relative to every selected position.

    With a direction, targets are the offsets of the selection; without one the
    selection positions themselves. Targets below height 0 are skipped, occupied
    targets are overwritten, and the selection is unchanged.
    """
    voxels = dict(state.voxels)
    for pos in sorted(state.selection):
        target = offset(pos, direction) if direction is not None else pos
        if target.height < 0:
            continue
        voxels[target] = color
    return WorldState(voxels, state.selection)


def apply_move(state: WorldState, direction: Direction) -> WorldState:
    """Translate the selected voxels one step; set semantics, so voxels moving
    onto a cell vacated by another moving voxel do not collide. Targets below
    height 0 drop out of the world. The selection follows the same translation.
    """
    sources = sorted(p for p in state.selection if p in state.voxels)
    voxels = dict(state.voxels)
    moved = [(offset(p, direction), state.voxels[p]) for p in sources]
    for p in sources:
        del voxels[p]
    for target, color in moved:
        if target.height < 0:
            continue
        voxels[target] = color
    selection = [offset(p, direction) for p in sorted(state.selection)]
    selection = [p for p in selection if p.height >= 0]
    return WorldState(voxels, selection)


def apply_remove(state: WorldState) -> WorldState:
    """Delete voxels at the selected positions; the selection itself stays."""
    voxels = {p: c for p, c in state.voxels.items() if p not in state.selection}
    return WorldState(voxels, state.selection)


def isolate_merge(
    original: Mapping[Position, Color],
    result: Mapping[Position, Color],
    domain: Mapping[Position, Color],
) -> Dict[Position, Color]:
    """Merge the result of an isolated action back into the original voxel map.

    Keeps every result voxel, restores original voxels at positions the result
    leaves empty, except positions that were part of the isolated domain: those
    were visible to the action, so their absence from the result counts as a
    deletion and they are not restored.
    """
    merged = dict(result)
    for pos, color in original.items():
        if pos not in merged and pos not in domain:
            merged[pos] = color
    return merged


def world_to_dict(state: WorldState) -> dict:
    return {
        "voxels": [
            {"row": p.row, "col": p.col, "height": p.height, "color": state.voxels[p].value}
            for p in sorted(state.voxels)
        ],
        "selection": [[p.row, p.col, p.height] for p in sorted(state.selection)],
    }


def world_from_dict(data: Mapping) -> WorldState:
    voxels = {}
    for v in data.get("voxels", ()):
        voxels[Position(int(v["row"]), int(v["col"]), int(v["height"]))] = Color(v["color"])
    selection = [Position(int(r), int(c), int(h)) for r, c, h in data.get("selection", ())]
    return WorldState(voxels, selection)


def world_to_json(state: WorldState) -> str:
    return json.dumps(world_to_dict(state), sort_keys=True, separators=(",", ":"))


def world_from_json(text: str) -> WorldState:
    return world_from_dict(json.loads(text))


def world_diff(before: WorldState, after: WorldState) -> dict:
    """Summary of what an action changed, for client-side previews."""
    added = []
    changed = []
    for p in sorted(after.voxels):
        c = after.voxels[p]
        if p not in before.voxels:
            added.append({"row": p.row, "col": p.col, "height": p.height, "color": c.value})
        elif before.voxels[p] != c:
            changed.append({"row": p.row, "col": p.col, "height": p.height, "color": c.value})
    removed = [
        [p.row, p.col, p.height] for p in sorted(before.voxels) if p not in after.voxels
    ]
    return {
        "added": added,
        "removed": removed,
        "changed": changed,
        "selection": [[p.row, p.col, p.height] for p in sorted(after.selection)],
    }
