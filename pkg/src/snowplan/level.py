"""Maze levels: ASCII parsing, validation, rendering and the location grid.

The level format is one grid row per line, all rows the same length:

    ``#``  wall
    ``.``  floor without snow
    ``'``  floor with snow
    ``p``  character on plain floor
    ``P``  character standing on snow
    ``1``  small ball            ``2``  medium ball       ``3``  large ball
    ``4``  small on medium       ``5``  small on large    ``6``  medium on large
    ``7``  small on medium on large (a complete snowman)

The playable region must be enclosed by walls, the ball count must be a
positive multiple of three, and balls may not start on snow.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterator, NamedTuple


class Loc(NamedTuple):
    """Grid cell; rows grow downward, columns rightward.

    Tuple ordering is row-major, which doubles as the canonical
    location order used everywhere (variable naming, canonicalization).
    """

    row: int
    col: int


class Direction(Enum):
    UP = (-1, 0)
    DOWN = (1, 0)
    LEFT = (0, -1)
    RIGHT = (0, 1)

    @property
    def letter(self) -> str:
        return {"UP": "u", "DOWN": "d", "LEFT": "l", "RIGHT": "r"}[self.name]

    @property
    def inverse(self) -> "Direction":
        dr, dc = self.value
        return Direction((-dr, -dc))

    def apply(self, loc: Loc) -> Loc:
        return Loc(loc.row + self.value[0], loc.col + self.value[1])


# Fixed iteration order; also the BFS tie-break order for plan walks.
DIRECTIONS = (Direction.UP, Direction.DOWN, Direction.LEFT, Direction.RIGHT)

DIRECTION_BY_LETTER = {d.letter: d for d in DIRECTIONS}


class BallSize(IntEnum):
    SMALL = 1
    MEDIUM = 2
    LARGE = 3


def grow(size: BallSize) -> BallSize:
    """Size after landing on snow: small->medium->large, large caps."""
    return BallSize(min(size + 1, BallSize.LARGE))


# Stack symbols map to bottom-first tuples (sizes strictly decrease upward).
STACK_BY_SYMBOL = {
    "1": (BallSize.SMALL,),
    "2": (BallSize.MEDIUM,),
    "3": (BallSize.LARGE,),
    "4": (BallSize.MEDIUM, BallSize.SMALL),
    "5": (BallSize.LARGE, BallSize.SMALL),
    "6": (BallSize.LARGE, BallSize.MEDIUM),
    "7": (BallSize.LARGE, BallSize.MEDIUM, BallSize.SMALL),
}
SYMBOL_BY_STACK = {v: k for k, v in STACK_BY_SYMBOL.items()}


class LevelError(ValueError):
    """Malformed or invariant-violating level."""


class UnknownSymbol(LevelError):
    def __init__(self, row: int, col: int, symbol: str):
        super().__init__(f"unknown symbol {symbol!r} at row {row}, col {col}")
        self.row, self.col, self.symbol = row, col, symbol


class NoCharacter(LevelError):
    pass


class MultipleCharacters(LevelError):
    pass


class BallCountNotMultipleOf3(LevelError):
    pass


class OpenBoundary(LevelError):
    pass


class CharacterOnBall(LevelError):
    pass


class RaggedRows(LevelError):
    pass


@dataclass
class Level:
    """Static maze: walls, snow, initial ball stacks, character start."""

    width: int
    height: int
    walls: frozenset[Loc]
    snow: frozenset[Loc]
    stacks: dict[Loc, tuple[BallSize, ...]]
    character: Loc

    @property
    def ball_count(self) -> int:
        return sum(len(s) for s in self.stacks.values())

    @property
    def snowmen(self) -> int:
        return self.ball_count // 3

    def in_bounds(self, loc: Loc) -> bool:
        return 0 <= loc.row < self.height and 0 <= loc.col < self.width

    def is_wall(self, loc: Loc) -> bool:
        return not self.in_bounds(loc) or loc in self.walls

    def is_floor(self, loc: Loc) -> bool:
        return self.in_bounds(loc) and loc not in self.walls


def parse_level(text: str) -> Level:
    """Parse the ASCII format into a validated Level."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise LevelError("empty level")
    width = len(lines[0])
    for i, line in enumerate(lines):
        if len(line) != width:
            raise RaggedRows(f"row {i} has length {len(line)}, expected {width}")

    walls: set[Loc] = set()
    snow: set[Loc] = set()
    stacks: dict[Loc, tuple[BallSize, ...]] = {}
    character: Loc | None = None
    for r, line in enumerate(lines):
        for c, ch in enumerate(line):
            loc = Loc(r, c)
            if ch == "#":
                walls.add(loc)
            elif ch == ".":
                pass
            elif ch == "'":
                snow.add(loc)
            elif ch in ("p", "P"):
                if character is not None:
                    raise MultipleCharacters(
                        f"second character at row {r}, col {c}"
                    )
                character = loc
                if ch == "P":
                    snow.add(loc)
            elif ch in STACK_BY_SYMBOL:
                stacks[loc] = STACK_BY_SYMBOL[ch]
            else:
                raise UnknownSymbol(r, c, ch)

    if character is None:
        raise NoCharacter("no character cell ('p' or 'P')")
    level = Level(
        width=width,
        height=len(lines),
        walls=frozenset(walls),
        snow=frozenset(snow),
        stacks=stacks,
        character=character,
    )
    validate_level(level)
    return level


def validate_level(level: Level) -> None:
    """Check every Level invariant, raising a specific error on violation."""
    n = level.ball_count
    if n == 0 or n % 3 != 0:
        raise BallCountNotMultipleOf3(f"{n} balls; need a positive multiple of 3")
    if level.character in level.stacks:
        raise CharacterOnBall(f"character shares {level.character} with a ball")
    for loc in valid_locations(level):
        for d in DIRECTIONS:
            if not level.in_bounds(d.apply(loc)):
                raise OpenBoundary(f"floor cell {loc} touches the grid edge")
    for loc, stack in level.stacks.items():
        if level.is_wall(loc):
            raise LevelError(f"ball stack on wall at {loc}")
        if loc in level.snow:
            raise LevelError(f"ball stack on snow at {loc}")
        if list(stack) != sorted(set(stack), reverse=True):
            raise LevelError(f"stack at {loc} is not strictly decreasing upward")
    if level.is_wall(level.character):
        raise LevelError(f"character on wall at {level.character}")


def render_level(level: Level) -> str:
    """Inverse of parse_level; parse(render(L)) structurally equals L."""
    rows = []
    for r in range(level.height):
        row = []
        for c in range(level.width):
            loc = Loc(r, c)
            if loc in level.walls:
                row.append("#")
            elif loc == level.character:
                row.append("P" if loc in level.snow else "p")
            elif loc in level.stacks:
                row.append(SYMBOL_BY_STACK[level.stacks[loc]])
            elif loc in level.snow:
                row.append("'")
            else:
                row.append(".")
        rows.append("".join(row))
    return "\n".join(rows)


def valid_locations(level: Level) -> list[Loc]:
    """All floor cells in row-major order: the canonical location index."""
    return [
        Loc(r, c)
        for r in range(level.height)
        for c in range(level.width)
        if Loc(r, c) not in level.walls
    ]


def floor_neighbors(level: Level, loc: Loc) -> Iterator[tuple[Direction, Loc]]:
    """Orthogonally adjacent floor cells, in fixed u/d/l/r order."""
    for d in DIRECTIONS:
        nxt = d.apply(loc)
        if level.is_floor(nxt):
            yield d, nxt
