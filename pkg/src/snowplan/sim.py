"""Exact executable game semantics.

A single input -- move the character in one of four directions -- resolves
to one of four outcomes depending on what lies ahead:

* walk: the cell ahead is free, the character steps onto it;
* roll: a lone ball ahead is pushed one cell, the character follows;
* push: a lone ball ahead is pushed on top of a stack of strictly larger
  balls, the character follows;
* pop: the top (smallest) ball of a stack ahead is pushed off onto a free
  cell, the character stays put.

A ball landing on snow removes the snow and grows one size (large stays
large).  Snow under the character is never disturbed.

Every plan produced anywhere in this package is validated by replaying it
here; the simulator is deliberately simple and heavily asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from collections import deque

from .level import (
    BallSize,
    Direction,
    DIRECTIONS,
    DIRECTION_BY_LETTER,
    Level,
    Loc,
    grow,
)

PLAN_ALPHABET = "udlrUDLR"


class Blocked(Exception):
    """The attempted move is illegal; .reason says which rule failed."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class PlanError(Exception):
    """A plan string failed to replay; .index is the offending step."""

    def __init__(self, index: int, message: str):
        super().__init__(f"step {index + 1}: {message}")
        self.index = index


class CaseMismatch(PlanError):
    """Letter case disagrees with the replayed outcome kind."""


class Unreachable(Exception):
    pass


class NoBallAhead(Exception):
    pass


@dataclass
class State:
    """Dynamic snapshot: snow cells, per-cell ball size sets, character."""

    level: Level
    snow: frozenset[Loc]
    stacks: dict[Loc, frozenset[BallSize]]
    character: Loc

    def balls_at(self, loc: Loc) -> frozenset[BallSize]:
        return self.stacks.get(loc, frozenset())

    def same_dynamics(self, other: "State") -> bool:
        return (
            self.snow == other.snow
            and self.stacks == other.stacks
            and self.character == other.character
        )


@dataclass(frozen=True)
class MovedBall:
    src: Loc
    dst: Loc
    size_before: BallSize
    size_after: BallSize


@dataclass(frozen=True)
class StepOutcome:
    kind: str  # walk | roll | push | pop
    next: State
    moved_ball: MovedBall | None

    @property
    def is_ball_move(self) -> bool:
        return self.kind != "walk"


def initial_state(level: Level) -> State:
    return State(
        level=level,
        snow=level.snow,
        stacks={loc: frozenset(sizes) for loc, sizes in level.stacks.items()},
        character=level.character,
    )


def validate_state(state: State) -> None:
    level = state.level
    assert level.is_floor(state.character), "character inside a wall"
    assert state.character not in state.stacks, "character on a ball"
    for loc, sizes in state.stacks.items():
        assert level.is_floor(loc), f"stack on wall at {loc}"
        assert 1 <= len(sizes) <= 3, f"bad stack size at {loc}"
        assert loc not in state.snow, f"snow under a ball at {loc}"
    for loc in state.snow:
        assert level.is_floor(loc), f"snow on wall at {loc}"


def step(state: State, direction: Direction) -> StepOutcome:
    """Apply one directional input.  Raises Blocked when illegal."""
    level = state.level
    p = state.character
    f = direction.apply(p)
    g = direction.apply(f)

    if level.is_wall(f):
        raise Blocked("wall", f"wall at {f}")

    front = state.balls_at(f)
    if not front:
        nxt = replace(state, character=f)
        if __debug__:
            validate_state(nxt)
        return StepOutcome("walk", nxt, None)

    ball = min(front)  # the top of a stack is its smallest ball
    under = len(front) >= 2
    if level.is_wall(g):
        raise Blocked("ball-into-wall", f"ball at {f} would hit wall at {g}")
    beyond = state.balls_at(g)

    if beyond:
        if under:
            raise Blocked(
                "stacked-source", f"top of stack at {f} cannot move onto a stack"
            )
        if ball >= min(beyond):
            raise Blocked(
                "size-order",
                f"{ball.name} at {f} is not smaller than {min(beyond).name} at {g}",
            )
        kind = "push"
    elif under:
        kind = "pop"
    else:
        kind = "roll"

    grown = grow(ball) if g in state.snow else ball
    stacks = dict(state.stacks)
    remaining = front - {ball}
    if remaining:
        stacks[f] = remaining
    else:
        del stacks[f]
    stacks[g] = beyond | {grown}
    snow = state.snow - {g}
    character = p if kind == "pop" else f
    nxt = State(level=level, snow=snow, stacks=stacks, character=character)
    if __debug__:
        validate_state(nxt)
    return StepOutcome(kind, nxt, MovedBall(f, g, ball, grown))


def is_goal(state: State, snowmen: int | None = None) -> bool:
    """True iff every non-empty stack is a complete small/medium/large pile."""
    complete = frozenset((BallSize.SMALL, BallSize.MEDIUM, BallSize.LARGE))
    if any(sizes != complete for sizes in state.stacks.values()):
        return False
    if snowmen is not None and len(state.stacks) != snowmen:
        return False
    return True


def apply_plan(level: Level, plan: str) -> State:
    """Replay a plan string from the level's initial state.

    Fails with PlanError at the first blocked step and enforces the case
    convention: uppercase letters are exactly the ball-moving steps.
    """
    state = initial_state(level)
    for i, ch in enumerate(plan):
        if ch not in PLAN_ALPHABET:
            raise PlanError(i, f"invalid move character {ch!r}")
        direction = DIRECTION_BY_LETTER[ch.lower()]
        try:
            outcome = step(state, direction)
        except Blocked as exc:
            raise PlanError(i, f"blocked ({exc.reason})") from exc
        if outcome.is_ball_move != ch.isupper():
            expected = "uppercase" if outcome.is_ball_move else "lowercase"
            raise CaseMismatch(i, f"{ch!r} replays as {outcome.kind}; expected {expected}")
        state = outcome.next
    return state


def ball_move_count(plan: str) -> int:
    return sum(1 for ch in plan if ch.isupper())


def reachable_cells(state: State) -> frozenset[Loc]:
    """Flood fill from the character over ball-free floor cells."""
    level = state.level
    seen = {state.character}
    queue = deque([state.character])
    while queue:
        cur = queue.popleft()
        for d in DIRECTIONS:
            nxt = d.apply(cur)
            if nxt in seen or not level.is_floor(nxt) or state.balls_at(nxt):
                continue
            seen.add(nxt)
            queue.append(nxt)
    return frozenset(seen)


def ball_action_to_plan(state: State, push_from: Loc, direction: Direction) -> str:
    """Shortest walk to push_from plus one uppercase move in direction.

    BFS ties break in u/d/l/r order at every layer, so the fragment is
    deterministic for a given state.
    """
    if not state.balls_at(direction.apply(push_from)):
        raise NoBallAhead(f"no ball at {direction.apply(push_from)}")
    level = state.level
    parent: dict[Loc, tuple[Loc, Direction] | None] = {state.character: None}
    queue = deque([state.character])
    while queue:
        cur = queue.popleft()
        if cur == push_from:
            break
        for d in DIRECTIONS:
            nxt = d.apply(cur)
            if nxt in parent or not level.is_floor(nxt) or state.balls_at(nxt):
                continue
            parent[nxt] = (cur, d)
            queue.append(nxt)
    if push_from not in parent:
        raise Unreachable(f"{push_from} not reachable from {state.character}")
    walk: list[str] = []
    cur = push_from
    while parent[cur] is not None:
        prev, d = parent[cur]
        walk.append(d.letter)
        cur = prev
    walk.reverse()
    return "".join(walk) + direction.letter.upper()
