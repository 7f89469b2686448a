"""Bounded-horizon CNF encodings of the puzzle.

Four variants share one state layout (per location and time step: snow,
small/medium/large ball, character) and one exact ball-move transition
relation; they differ in how a step's action is selected and how the
walk to the push position is justified:

* ``basic``        -- four direction actions per step; the horizon counts
                      every character move, ball-moving or not.
* ``cheating``     -- one action per (ball cell, direction); the character
                      teleports to the push source, no path required.
* ``reach-order``  -- like cheating plus a reachability certificate built
                      from edge variables whose acyclicity is enforced by a
                      strict-partial-order relation (transitivity instances
                      restricted to adjacent middle vertices).
* ``reach-count``  -- like cheating plus a degree-counting path: source and
                      target cells carry exactly one path neighbor, interior
                      path cells exactly two, ball cells none.

Ball-move variants count exactly one ball movement per time step, so the
first satisfiable horizon is the optimal ball-move count.

Models are decoded back to ball actions and expanded to full move strings
through the simulator; the simulator, not the encoder, has the final word
on validity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import CnfFormula
from .level import (
    BallSize,
    Direction,
    DIRECTIONS,
    Level,
    Loc,
    floor_neighbors,
    valid_locations,
)
from . import sim

VARIANTS = ("basic", "cheating", "reach-order", "reach-count")
BALL_VARIANTS = ("cheating", "reach-order", "reach-count")
REACH_VARIANTS = ("reach-order", "reach-count")

_SIZES = (BallSize.SMALL, BallSize.MEDIUM, BallSize.LARGE)
_SIZE_TAG = {BallSize.SMALL: "s", BallSize.MEDIUM: "m", BallSize.LARGE: "l"}

# Every way one directional input can move a ball.
_BALL_CASES = (
    ("roll", BallSize.SMALL),
    ("roll", BallSize.MEDIUM),
    ("roll", BallSize.LARGE),
    ("push", BallSize.SMALL),
    ("push", BallSize.MEDIUM),
    ("pop", BallSize.SMALL),
    ("pop", BallSize.MEDIUM),
)


class AmbiguousAction(Exception):
    """A model sets an unexpected number of action variables at one step."""


@dataclass(frozen=True)
class EncodingSpec:
    variant: str
    horizon: int
    invariants_on: bool = False

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")


def _loc_tag(loc: Loc) -> str:
    return f"r{loc.row}c{loc.col}"


class VarLayout:
    """Deterministic variable ids for a (level, spec) pair.

    Layout variables are allocated first, in a fixed order, so a model can
    be decoded against a freshly rebuilt layout; gadget auxiliaries always
    come later.
    """

    def __init__(self, formula: CnfFormula, level: Level, spec: EncodingSpec):
        self.level = level
        self.spec = spec
        self.locs = valid_locations(level)
        T = spec.horizon
        self._state: dict[tuple[str, Loc, int], int] = {}
        for t in range(T + 1):
            for loc in self.locs:
                tag = _loc_tag(loc)
                for role in ("s", "bs", "bm", "bl", "c"):
                    self._state[(role, loc, t)] = formula.new_var(f"{role}@{tag}@t{t}")

        self._dir: dict[tuple[Direction, int], int] = {}
        self._action: dict[tuple[Loc, Direction, int], int] = {}
        if spec.variant == "basic":
            for t in range(T):
                for d in DIRECTIONS:
                    self._dir[(d, t)] = formula.new_var(f"do@{d.letter}@t{t}")
        else:
            for t in range(T):
                for loc in self.locs:
                    for d in DIRECTIONS:
                        if self.action_is_legal(loc, d):
                            self._action[(loc, d, t)] = formula.new_var(
                                f"a@{_loc_tag(loc)}@{d.letter}@t{t}"
                            )

        self._reach: dict[tuple[Loc, int], int] = {}
        self._edge: dict[tuple[Loc, Loc, int], int] = {}
        self._order: dict[tuple[Loc, Loc, int], int] = {}
        self._path: dict[tuple[Loc, int], int] = {}
        self._target: dict[tuple[Loc, int], int] = {}
        if spec.variant == "reach-order":
            for t in range(T):
                for loc in self.locs:
                    self._reach[(loc, t)] = formula.new_var(f"r@{_loc_tag(loc)}@t{t}")
                for loc in self.locs:
                    for _, nxt in floor_neighbors(level, loc):
                        self._edge[(loc, nxt, t)] = formula.new_var(
                            f"e@{_loc_tag(loc)}>{_loc_tag(nxt)}@t{t}"
                        )
                for a in self.locs:
                    for b in self.locs:
                        if a != b:
                            self._order[(a, b, t)] = formula.new_var(
                                f"p@{_loc_tag(a)}>{_loc_tag(b)}@t{t}"
                            )
        elif spec.variant == "reach-count":
            for t in range(T):
                for loc in self.locs:
                    self._path[(loc, t)] = formula.new_var(f"pth@{_loc_tag(loc)}@t{t}")
                for loc in self.locs:
                    self._target[(loc, t)] = formula.new_var(f"tgt@{_loc_tag(loc)}@t{t}")
        self.layout_size = formula.var_count

    def action_is_legal(self, ball_cell: Loc, d: Direction) -> bool:
        """A ball at ball_cell can only move along d if both the push
        source behind it and the destination ahead are floor."""
        return self.level.is_floor(d.inverse.apply(ball_cell)) and self.level.is_floor(
            d.apply(ball_cell)
        )

    def snow(self, loc: Loc, t: int) -> int:
        return self._state[("s", loc, t)]

    def ball(self, loc: Loc, size: BallSize, t: int) -> int:
        return self._state[("b" + _SIZE_TAG[size], loc, t)]

    def char(self, loc: Loc, t: int) -> int:
        return self._state[("c", loc, t)]

    def dir_var(self, d: Direction, t: int) -> int:
        return self._dir[(d, t)]

    def action(self, ball_cell: Loc, d: Direction, t: int) -> int:
        return self._action[(ball_cell, d, t)]

    def actions_at(self, t: int) -> list[tuple[Loc, Direction, int]]:
        return [
            (loc, d, var) for (loc, d, tt), var in self._action.items() if tt == t
        ]

    def reach(self, loc: Loc, t: int) -> int:
        return self._reach[(loc, t)]

    def edge(self, src: Loc, dst: Loc, t: int) -> int:
        return self._edge[(src, dst, t)]

    def order(self, a: Loc, b: Loc, t: int) -> int:
        return self._order[(a, b, t)]

    def path(self, loc: Loc, t: int) -> int:
        return self._path[(loc, t)]

    def target(self, loc: Loc, t: int) -> int:
        return self._target[(loc, t)]


def build_layout(level: Level, spec: EncodingSpec) -> VarLayout:
    """Layout only (no clauses); variable ids match encode()'s."""
    return VarLayout(CnfFormula(), level, spec)


def encode(level: Level, spec: EncodingSpec) -> CnfFormula:
    """CNF whose models are exactly the valid horizon-length plans."""
    formula = CnfFormula()
    layout = VarLayout(formula, level, spec)
    enc = _Encoder(formula, layout, level, spec)
    enc.emit()
    return formula


class _Encoder:
    def __init__(self, formula: CnfFormula, lay: VarLayout, level: Level, spec: EncodingSpec):
        self.f = formula
        self.lay = lay
        self.level = level
        self.spec = spec

    def emit(self) -> None:
        self._initial_state()
        self._goal()
        for t in range(self.spec.horizon):
            if self.spec.variant == "basic":
                self._step_basic(t)
            else:
                self._step_ball(t)
        if self.spec.invariants_on:
            self._invariants()

    # ------------------------------------------------------------------

    def _initial_state(self) -> None:
        state = sim.initial_state(self.level)
        lay = self.lay
        for loc in lay.locs:
            self.f.add_clause([lay.snow(loc, 0) if loc in state.snow else -lay.snow(loc, 0)])
            balls = state.balls_at(loc)
            for z in _SIZES:
                var = lay.ball(loc, z, 0)
                self.f.add_clause([var if z in balls else -var])
            cvar = lay.char(loc, 0)
            self.f.add_clause([cvar if loc == state.character else -cvar])

    def _goal(self) -> None:
        T = self.spec.horizon
        lay = self.lay
        for loc in lay.locs:
            bs = lay.ball(loc, BallSize.SMALL, T)
            bm = lay.ball(loc, BallSize.MEDIUM, T)
            bl = lay.ball(loc, BallSize.LARGE, T)
            self.f.add_clause([-bs, bm])
            self.f.add_clause([bs, -bm])
            self.f.add_clause([-bm, bl])
            self.f.add_clause([bm, -bl])

    def _invariants(self) -> None:
        k = self.level.snowmen
        lay = self.lay
        for t in range(self.spec.horizon + 1):
            self.f.at_most_k([lay.ball(l, BallSize.LARGE, t) for l in lay.locs], k)
            self.f.at_least_k([lay.ball(l, BallSize.SMALL, t) for l in lay.locs], k)

    # ------------------------------------------------------------------
    # shared ball-move transition cases

    def _emit_case(
        self,
        t: int,
        case: int,
        kind: str,
        size: BallSize,
        p: Loc,
        fcell: Loc,
        g: Loc,
        char_mode: str,
    ) -> None:
        """Preconditions and effects of one (kind, size) outcome.

        p is where the character pushes from, fcell holds the moved ball,
        g is its destination.  All clauses are guarded by the case literal.
        """
        lay = self.lay
        add = self.f.add_clause
        S, M, L = _SIZES

        def bf(z: BallSize, tt: int) -> int:
            return lay.ball(fcell, z, tt)

        def bg(z: BallSize, tt: int) -> int:
            return lay.ball(g, z, tt)

        # --- preconditions on the source stack
        if kind in ("roll", "push"):
            for z in _SIZES:  # exactly the moved ball sits at fcell
                add([-case, bf(z, t) if z == size else -bf(z, t)])
        else:  # pop: moved ball is the smallest of a 2+ stack
            if size == S:
                add([-case, bf(S, t)])
                add([-case, bf(M, t), bf(L, t)])
            else:
                add([-case, -bf(S, t)])
                add([-case, bf(M, t)])
                add([-case, bf(L, t)])

        # --- preconditions on the destination
        if kind in ("roll", "pop"):
            for z in _SIZES:
                add([-case, -bg(z, t)])
        else:  # push: strictly larger minimum size at g
            if size == S:
                add([-case, -bg(S, t)])
                add([-case, bg(M, t), bg(L, t)])
            else:
                add([-case, -bg(S, t)])
                add([-case, -bg(M, t)])
                add([-case, bg(L, t)])

        # --- effects on the source cell
        if kind in ("roll", "push"):
            for z in _SIZES:
                add([-case, -bf(z, t + 1)])
        else:
            add([-case, -bf(size, t + 1)])
            for z in _SIZES:
                if z != size:
                    add([-case, -bf(z, t), bf(z, t + 1)])
                    add([-case, bf(z, t), -bf(z, t + 1)])

        # --- effects on the destination cell
        if kind in ("roll", "pop"):
            snow_g = lay.snow(g, t)
            if size == L:
                pins = {S: -1, M: -1, L: +1}
                for z, sign in pins.items():
                    add([-case, sign * bg(z, t + 1)])
            else:
                grown = BallSize(size + 1)
                for z in _SIZES:
                    sign = +1 if z == grown else -1
                    add([-case, -snow_g, sign * bg(z, t + 1)])
                for z in _SIZES:
                    sign = +1 if z == size else -1
                    add([-case, snow_g, sign * bg(z, t + 1)])
            add([-case, -lay.snow(g, t + 1)])
        else:  # push: ball lands unchanged, the rest of the stack persists
            add([-case, bg(size, t + 1)])
            for z in _SIZES:
                if z != size:
                    add([-case, -bg(z, t), bg(z, t + 1)])
                    add([-case, bg(z, t), -bg(z, t + 1)])

        # --- character movement
        if char_mode == "basic":
            if kind in ("roll", "push"):
                add([-case, -lay.char(p, t + 1)])
                add([-case, lay.char(fcell, t + 1)])
            # pop: the character stays; the frame axioms keep it at p
        else:
            target = p if kind == "pop" else fcell
            add([-case, lay.char(target, t + 1)])

    # ------------------------------------------------------------------

    def _step_basic(self, t: int) -> None:
        lay, level = self.lay, self.level
        add = self.f.add_clause
        dvars = [lay.dir_var(d, t) for d in DIRECTIONS]
        self.f.exactly_one(dvars)

        ball_src: dict[Loc, list[int]] = {}
        ball_dst: dict[Loc, list[int]] = {}
        char_leave: dict[Loc, list[int]] = {}
        char_enter: dict[Loc, list[int]] = {}

        for loc in lay.locs:
            cvar = lay.char(loc, t)
            for d in DIRECTIONS:
                dv = lay.dir_var(d, t)
                front = d.apply(loc)
                if level.is_wall(front):
                    add([-cvar, -dv])
                    continue
                beyond = d.apply(front)
                tag = f"{_loc_tag(loc)}@{d.letter}@t{t}"
                cases = []

                walk = self.f.new_var(f"walk@{tag}")
                add([-walk, cvar])
                add([-walk, dv])
                for z in _SIZES:
                    add([-walk, -lay.ball(front, z, t)])
                add([-walk, -lay.char(loc, t + 1)])
                add([-walk, lay.char(front, t + 1)])
                char_leave.setdefault(loc, []).append(walk)
                char_enter.setdefault(front, []).append(walk)
                cases.append(walk)

                if level.is_floor(beyond):
                    for kind, size in _BALL_CASES:
                        case = self.f.new_var(f"{kind}_{_SIZE_TAG[size]}@{tag}")
                        add([-case, cvar])
                        add([-case, dv])
                        self._emit_case(t, case, kind, size, loc, front, beyond, "basic")
                        ball_src.setdefault(front, []).append(case)
                        ball_dst.setdefault(beyond, []).append(case)
                        if kind in ("roll", "push"):
                            char_leave.setdefault(loc, []).append(case)
                            char_enter.setdefault(front, []).append(case)
                        cases.append(case)

                add([-cvar, -dv] + cases)

        self._frames(t, ball_src, ball_dst, char_leave, char_enter, char_framed=True)

    def _step_ball(self, t: int) -> None:
        lay = self.lay
        add = self.f.add_clause
        actions = lay.actions_at(t)
        if not actions:
            # no ball can ever move: any positive horizon is unsatisfiable
            dead = self.f.aux_var("dead")
            add([dead])
            add([-dead])
            return
        self.f.exactly_one([var for _, _, var in actions])
        self.f.exactly_one([lay.char(l, t + 1) for l in lay.locs])

        ball_src: dict[Loc, list[int]] = {}
        ball_dst: dict[Loc, list[int]] = {}
        actions_by_source: dict[Loc, list[int]] = {}

        for ball_cell, d, avar in actions:
            p = d.inverse.apply(ball_cell)
            g = d.apply(ball_cell)
            cases = []
            for kind, size in _BALL_CASES:
                case = self.f.new_var(
                    f"{kind}_{_SIZE_TAG[size]}@{_loc_tag(ball_cell)}@{d.letter}@t{t}"
                )
                add([-case, avar])
                self._emit_case(t, case, kind, size, p, ball_cell, g, "ball")
                cases.append(case)
            add([-avar] + cases)
            ball_src.setdefault(ball_cell, []).append(avar)
            ball_dst.setdefault(g, []).append(avar)
            actions_by_source.setdefault(p, []).append(avar)

            if self.spec.variant == "cheating":
                for z in _SIZES:  # the teleport target must be standable
                    add([-avar, -lay.ball(p, z, t)])
            elif self.spec.variant == "reach-order":
                add([-avar, lay.reach(p, t)])

        self._frames(t, ball_src, ball_dst, {}, {}, char_framed=False)

        if self.spec.variant == "reach-order":
            self._reach_order(t)
        elif self.spec.variant == "reach-count":
            self._reach_count(t, actions_by_source)

    def _frames(
        self,
        t: int,
        ball_src: dict[Loc, list[int]],
        ball_dst: dict[Loc, list[int]],
        char_leave: dict[Loc, list[int]],
        char_enter: dict[Loc, list[int]],
        char_framed: bool,
    ) -> None:
        """State changes only under an enabling action.

        Snow is never created, and snow only disappears under an arriving
        ball (which, having just grown, is medium or large)."""
        lay = self.lay
        add = self.f.add_clause
        for loc in lay.locs:
            add([-lay.snow(loc, t + 1), lay.snow(loc, t)])
            add(
                [
                    -lay.snow(loc, t),
                    lay.snow(loc, t + 1),
                    lay.ball(loc, BallSize.MEDIUM, t + 1),
                    lay.ball(loc, BallSize.LARGE, t + 1),
                ]
            )
            for z in _SIZES:
                add([-lay.ball(loc, z, t), lay.ball(loc, z, t + 1)] + ball_src.get(loc, []))
                add([lay.ball(loc, z, t), -lay.ball(loc, z, t + 1)] + ball_dst.get(loc, []))
            if char_framed:
                add([-lay.char(loc, t), lay.char(loc, t + 1)] + char_leave.get(loc, []))
                add([lay.char(loc, t), -lay.char(loc, t + 1)] + char_enter.get(loc, []))

    # ------------------------------------------------------------------
    # reachability subsystems

    def _reach_order(self, t: int) -> None:
        lay, level = self.lay, self.level
        add = self.f.add_clause
        for loc in lay.locs:
            incoming = [lay.edge(nbr, loc, t) for _, nbr in floor_neighbors(level, loc)]
            add([-lay.reach(loc, t), lay.char(loc, t)] + incoming)
            for z in _SIZES:
                add([-lay.ball(loc, z, t), -lay.reach(loc, t)])
        for loc in lay.locs:
            for _, nbr in floor_neighbors(level, loc):
                evar = lay.edge(loc, nbr, t)
                add([-evar, lay.reach(loc, t)])
                add([-evar, lay.order(loc, nbr, t)])
        # strict partial order; transitivity restricted to adjacent middles
        for i in lay.locs:
            for _, j in floor_neighbors(level, i):
                pij = lay.order(i, j, t)
                for k in lay.locs:
                    if k == j:
                        continue
                    if k == i:
                        add([-pij, -lay.order(j, i, t)])
                    else:
                        add([-pij, -lay.order(j, k, t), lay.order(i, k, t)])

    def _reach_count(self, t: int, actions_by_source: dict[Loc, list[int]]) -> None:
        lay, level = self.lay, self.level
        add = self.f.add_clause
        for loc in lay.locs:
            tvar = lay.target(loc, t)
            sources = actions_by_source.get(loc, [])
            for avar in sources:
                add([-avar, tvar])
            add([-tvar] + sources)
        for loc in lay.locs:
            pvar = lay.path(loc, t)
            cvar = lay.char(loc, t)
            tvar = lay.target(loc, t)
            neigh = [lay.path(nbr, t) for _, nbr in floor_neighbors(level, loc)]

            # endpoints (source xor target) are on the path with one neighbor
            for guard in ([-cvar, tvar], [-tvar, cvar]):
                add(guard + [pvar])
                add(guard + neigh if neigh else guard)
                for i in range(len(neigh)):
                    for j in range(i + 1, len(neigh)):
                        add(guard + [-neigh[i], -neigh[j]])

            # interior path cells have exactly two path neighbors
            interior = [-pvar, cvar, tvar]
            if len(neigh) < 2:
                add(interior)
            else:
                for i in range(len(neigh)):
                    add(interior + [nv for j, nv in enumerate(neigh) if j != i])
                for i in range(len(neigh)):
                    for j in range(i + 1, len(neigh)):
                        for k in range(j + 1, len(neigh)):
                            add(interior + [-neigh[i], -neigh[j], -neigh[k]])

            for z in _SIZES:
                add([-lay.ball(loc, z, t), -pvar])


# ----------------------------------------------------------------------
# decoding


@dataclass
class DecodeResult:
    """Ball actions read off a model, plus their simulator expansion."""

    actions: list[tuple[Loc, Direction]] = field(default_factory=list)
    plan: str | None = None
    valid: bool = False
    reason: str | None = None


def decode(assignment: list[bool], level: Level, spec: EncodingSpec) -> DecodeResult:
    """Map a satisfying assignment back to (push_from, direction) actions
    and a full move string validated by the simulator.

    Cheating models may fail expansion (that is the point of the variant);
    for the other variants a failure here means an encoder bug.
    """
    lay = build_layout(level, spec)
    if len(assignment) <= lay.layout_size:
        raise ValueError("assignment does not cover the encoding's variables")
    if spec.variant == "basic":
        return _decode_basic(assignment, lay, level, spec)
    return _decode_ball(assignment, lay, level, spec)


def _decode_basic(assignment, lay, level, spec) -> DecodeResult:
    moves: list[Direction] = []
    for t in range(spec.horizon):
        true_dirs = [d for d in DIRECTIONS if assignment[lay.dir_var(d, t)]]
        if len(true_dirs) != 1:
            raise AmbiguousAction(f"{len(true_dirs)} direction variables true at step {t}")
        moves.append(true_dirs[0])

    state = sim.initial_state(level)
    letters: list[str] = []
    actions: list[tuple[Loc, Direction]] = []
    for t, d in enumerate(moves):
        try:
            outcome = sim.step(state, d)
        except sim.Blocked as exc:
            return DecodeResult(
                actions=actions,
                plan=None,
                valid=False,
                reason=f"step {t + 1} blocked ({exc.reason})",
            )
        if outcome.is_ball_move:
            actions.append((state.character, d))
            letters.append(d.letter.upper())
        else:
            letters.append(d.letter)
        state = outcome.next
    plan = "".join(letters)
    if not sim.is_goal(state, level.snowmen):
        return DecodeResult(actions=actions, plan=plan, valid=False, reason="goal not reached")
    return DecodeResult(actions=actions, plan=plan, valid=True)


def _decode_ball(assignment, lay, level, spec) -> DecodeResult:
    actions: list[tuple[Loc, Direction]] = []
    for t in range(spec.horizon):
        true_actions = [
            (loc, d) for loc, d, var in lay.actions_at(t) if assignment[var]
        ]
        if len(true_actions) != 1:
            raise AmbiguousAction(f"{len(true_actions)} action variables true at step {t}")
        ball_cell, d = true_actions[0]
        actions.append((d.inverse.apply(ball_cell), d))

    state = sim.initial_state(level)
    parts: list[str] = []
    for t, (push_from, d) in enumerate(actions):
        try:
            fragment = sim.ball_action_to_plan(state, push_from, d)
            for ch in fragment:
                state = sim.step(state, sim.DIRECTION_BY_LETTER[ch.lower()]).next
        except (sim.Unreachable, sim.NoBallAhead, sim.Blocked) as exc:
            return DecodeResult(
                actions=actions,
                plan=None,
                valid=False,
                reason=f"action {t + 1} ({push_from}, {d.letter}): {exc}",
            )
        parts.append(fragment)
    plan = "".join(parts)
    if not sim.is_goal(state, level.snowmen):
        return DecodeResult(actions=actions, plan=plan, valid=False, reason="goal not reached")
    return DecodeResult(actions=actions, plan=plan, valid=True)
