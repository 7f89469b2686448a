"""Exhaustive search for provably ball-move-optimal plans on small levels.

Breadth-first search where one edge is one ball action (a push-source cell
plus a direction); character walks inside one reachable region are free, so
states are deduplicated on (snow, stacks, character region).  Because BFS
explores strictly by ball-move count, the first goal state found is optimal
and every shallower count is exhausted -- which is exactly the ground truth
the SAT route is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from collections import deque
from typing import NamedTuple

from .level import BallSize, Direction, DIRECTIONS, Level, Loc
from . import sim
from .sim import State


class CanonicalState(NamedTuple):
    snow: tuple[Loc, ...]
    stacks: tuple[tuple[Loc, tuple[int, ...]], ...]
    char_region: Loc


def canonicalize(state: State) -> CanonicalState:
    """States with equal balls/snow and mutually reachable characters
    collapse to one key (the region is named by its smallest cell)."""
    return CanonicalState(
        snow=tuple(sorted(state.snow)),
        stacks=tuple(
            (loc, tuple(sorted(sizes))) for loc, sizes in sorted(state.stacks.items())
        ),
        char_region=min(sim.reachable_cells(state)),
    )


SOLVED = "solved"
NO_SOLUTION = "no-solution"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class OracleResult:
    status: str  # solved | no-solution | unknown
    ball_moves: int | None = None
    plan: str | None = None
    expanded: int = 0


def _ball_actions(state: State) -> list[tuple[Loc, Direction]]:
    """All (push_from, direction) pairs executable from this state."""
    reach = sim.reachable_cells(state)
    actions = []
    for f in sorted(state.stacks):
        for d in DIRECTIONS:
            p = d.inverse.apply(f)
            if p in reach:
                actions.append((p, d))
    return actions


def _try_action(state: State, push_from: Loc, d: Direction) -> State | None:
    trial = replace(state, character=push_from)
    try:
        outcome = sim.step(trial, d)
    except sim.Blocked:
        return None
    assert outcome.is_ball_move
    return outcome.next


def solve_optimal(
    level: Level,
    max_ball_moves: int = 20,
    node_cap: int = 10_000_000,
) -> OracleResult:
    """Minimum-ball-move plan, or why none was found.

    Returns status "no-solution" when the bounded search space is exhausted
    and "unknown" when the node cap fires first; the two are distinct on
    purpose.  A returned plan always replays to the goal.
    """
    start = sim.initial_state(level)
    k = level.snowmen
    start_key = canonicalize(start)
    if sim.is_goal(start, k):
        return OracleResult(SOLVED, 0, "", expanded=0)

    parents: dict[CanonicalState, tuple[CanonicalState, Loc, Direction] | None]
    parents = {start_key: None}
    frontier: deque[tuple[State, CanonicalState, int]] = deque([(start, start_key, 0)])
    expanded = 0
    while frontier:
        state, key, depth = frontier.popleft()
        if depth >= max_ball_moves:
            continue
        for push_from, d in _ball_actions(state):
            nxt = _try_action(state, push_from, d)
            if nxt is None:
                continue
            expanded += 1
            if expanded > node_cap:
                return OracleResult(UNKNOWN, expanded=expanded)
            nxt_key = canonicalize(nxt)
            if nxt_key in parents:
                continue
            parents[nxt_key] = (key, push_from, d)
            if sim.is_goal(nxt, k):
                plan = _expand_plan(level, _action_chain(parents, nxt_key))
                return OracleResult(SOLVED, depth + 1, plan, expanded=expanded)
            frontier.append((nxt, nxt_key, depth + 1))
    return OracleResult(NO_SOLUTION, expanded=expanded)


def _action_chain(parents, key) -> list[tuple[Loc, Direction]]:
    chain = []
    while parents[key] is not None:
        key, push_from, d = parents[key]
        chain.append((push_from, d))
    chain.reverse()
    return chain


def _expand_plan(level: Level, actions: list[tuple[Loc, Direction]]) -> str:
    """Join ball actions into a full move string via shortest walks."""
    state = sim.initial_state(level)
    parts = []
    for push_from, d in actions:
        fragment = sim.ball_action_to_plan(state, push_from, d)
        parts.append(fragment)
        for ch in fragment:
            state = sim.step(state, sim.DIRECTION_BY_LETTER[ch.lower()]).next
    plan = "".join(parts)
    final = sim.apply_plan(level, plan)
    assert sim.is_goal(final, level.snowmen), "oracle produced a non-goal plan"
    return plan
