"""Shared generators for randomized tests. Everything is seeded so failures
reproduce exactly."""

import random

import pytest

from voxlang import programs as P
from voxlang.world import Color, Direction, Position, WorldState

COLORS = list(Color)
DIRECTIONS = list(Direction)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def random_world(rng, max_extent=3, max_voxels=6):
    positions = [
        Position(r, c, h)
        for r in range(max_extent)
        for c in range(max_extent)
        for h in range(max_extent)
    ]
    voxels = {
        p: rng.choice(COLORS)
        for p in rng.sample(positions, rng.randint(0, max_voxels))
    }
    selection = rng.sample(positions, rng.randint(0, 3))
    return WorldState(voxels, selection)


def random_set_expr(rng, depth=2):
    leaves = [
        lambda: P.This(),
        lambda: P.All(),
        lambda: P.PrimColor(rng.choice(COLORS)),
        lambda: P.PrimNumber(rng.randint(0, 3)),
        lambda: P.DirOf(rng.choice(DIRECTIONS), P.This()),
    ]
    if depth <= 0:
        return rng.choice(leaves)()
    branches = [
        lambda: P.HasRel("color", P.PrimColor(rng.choice(COLORS))),
        lambda: P.HasRel(rng.choice(["row", "col", "height"]),
                         P.PrimNumber(rng.randint(0, 3))),
        lambda: P.RelOf("color", random_set_expr(rng, depth - 1)),
        lambda: P.RelOf(rng.choice(["row", "col", "height"]),
                        random_set_expr(rng, depth - 1)),
        lambda: P.DirOf(rng.choice(DIRECTIONS), random_set_expr(rng, depth - 1)),
        lambda: P.Very(rng.choice(DIRECTIONS), random_set_expr(rng, depth - 1)),
        lambda: P.UnionOf(random_set_expr(rng, depth - 1),
                          random_set_expr(rng, depth - 1)),
        lambda: P.IntersectOf(random_set_expr(rng, depth - 1),
                              random_set_expr(rng, depth - 1)),
        lambda: P.Not(random_set_expr(rng, depth - 1)),
    ]
    return rng.choice(leaves + branches)()


def random_action(rng, depth=2):
    leaves = [
        lambda: P.Select(random_set_expr(rng, 1)),
        lambda: P.Add(rng.choice(COLORS),
                      rng.choice([None] + DIRECTIONS)),
        lambda: P.Move(rng.choice(DIRECTIONS)),
        lambda: P.Remove(),
    ]
    if depth <= 0:
        return rng.choice(leaves)()
    branches = [
        lambda: P.Seq(random_action(rng, depth - 1), random_action(rng, depth - 1)),
        lambda: P.Repeat(rng.randint(0, 3), random_action(rng, depth - 1)),
        lambda: P.If(random_set_expr(rng, 1), random_action(rng, depth - 1)),
        lambda: P.Foreach(random_set_expr(rng, 1), random_action(rng, depth - 1)),
        lambda: P.Scoped(rng.choice(list(P.ScopeKind)),
                         random_action(rng, depth - 1)),
    ]
    return rng.choice(leaves + branches)()
