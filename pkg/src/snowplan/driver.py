"""Planning-as-SAT orchestration.

Encodes the level at increasing horizons, hands each DIMACS formula to an
external solver process, decodes the first satisfiable model and validates
it with the simulator.  A result is certified optimal when every smaller
horizon down to the lower bound came back unsatisfiable within its time
limit.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

from . import cnf, encoder, sim
from .level import Level

DEFAULT_MAX_HORIZON = 64


class BackendFailure(Exception):
    """Solver process produced unusable output."""


class ValidationFailure(Exception):
    """A decoded plan from a non-cheating variant failed the simulator.

    This always indicates an encoder bug and is never swallowed."""


class SolverTimeout(Exception):
    pass


@dataclass
class SolverBackend:
    """External SAT solver: a command template run per formula.

    A ``{cnf}`` placeholder in the command receives a DIMACS file path;
    without one the formula is piped to stdin.  Only the ``s ...`` status
    line of the output is trusted, never the exit status.
    """

    command: str
    time_limit: float | None = None

    def run(self, dimacs: str, time_limit: float | None = None) -> str:
        limit = time_limit if time_limit is not None else self.time_limit
        argv = shlex.split(self.command)
        if any("{cnf}" in tok for tok in argv):
            with tempfile.NamedTemporaryFile(
                "w", suffix=".cnf", prefix="snowplan-", delete=False
            ) as handle:
                handle.write(dimacs)
                path = handle.name
            argv = [tok.replace("{cnf}", path) for tok in argv]
            stdin_data = None
        else:
            path = None
            stdin_data = dimacs
        try:
            proc = subprocess.run(
                argv,
                input=stdin_data,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                timeout=limit,
            )
        except subprocess.TimeoutExpired as exc:
            raise SolverTimeout(f"solver exceeded {limit}s") from exc
        except OSError as exc:
            raise BackendFailure(f"cannot run solver {argv[0]!r}: {exc}") from exc
        finally:
            if path is not None:
                try:
                    os.unlink(path)
                except OSError:
                    pass
        return proc.stdout


def default_backend(time_limit: float | None = None) -> SolverBackend:
    """SNOWPLAN_SOLVER if set, else the bundled DIMACS solver module."""
    command = os.environ.get("SNOWPLAN_SOLVER")
    if not command:
        command = f"{shlex.quote(sys.executable)} -m snowplan.satsolver {{cnf}}"
    return SolverBackend(command=command, time_limit=time_limit)


def lower_bound(level: Level) -> int:
    """Sound lower bound on the ball-move optimum.

    Each snowman needs two stacking moves beyond the junctions already
    present in the initial stacks, stacking moves never grow a ball, and
    any other move grows the total size by at most one.
    """
    k = level.snowmen
    junctions = sum(len(stack) - 1 for stack in level.stacks.values())
    total_size = sum(int(size) for stack in level.stacks.values() for size in stack)
    bound = (2 * k - junctions) + max(0, 6 * k - total_size)
    return max(0, bound)


@dataclass(frozen=True)
class HorizonRecord:
    horizon: int
    result: str  # sat | unsat | timeout
    seconds: float


@dataclass
class SolveReport:
    level_id: str
    variant: str
    records: list[HorizonRecord] = field(default_factory=list)
    plan: str | None = None
    actions: list | None = None
    ball_moves: int | None = None
    certified_optimal: bool = False
    valid: bool | None = None
    status: str = "exhausted"  # solved | timeout | exhausted
    wall_time: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def solve(
    level: Level,
    variant: str,
    backend: SolverBackend | None = None,
    min_horizon: int | None = None,
    max_horizon: int = DEFAULT_MAX_HORIZON,
    invariants_on: bool = False,
    wall_timeout: float | None = None,
    level_id: str = "",
) -> SolveReport:
    """Iterate horizons from the lower bound until the first SAT.

    Per-horizon timeouts are recorded and skipped (forfeiting the
    certificate); an overall wall_timeout stops the loop with status
    "timeout".
    """
    if variant not in encoder.VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    backend = backend or default_backend()
    bound = lower_bound(level) if variant in encoder.BALL_VARIANTS else 0
    start_at = bound if min_horizon is None else min_horizon
    report = SolveReport(level_id=level_id, variant=variant)
    t0 = time.monotonic()

    for horizon in range(start_at, max_horizon + 1):
        limit = backend.time_limit
        if wall_timeout is not None:
            remaining = wall_timeout - (time.monotonic() - t0)
            if remaining <= 0:
                report.status = "timeout"
                break
            limit = min(limit, remaining) if limit is not None else remaining

        spec = encoder.EncodingSpec(variant, horizon, invariants_on)
        formula = encoder.encode(level, spec)
        step_start = time.monotonic()
        try:
            output = backend.run(formula.to_dimacs(), time_limit=limit)
        except SolverTimeout:
            report.records.append(
                HorizonRecord(horizon, "timeout", time.monotonic() - step_start)
            )
            if wall_timeout is not None and time.monotonic() - t0 >= wall_timeout:
                report.status = "timeout"
                break
            continue
        try:
            result = cnf.parse_model(output, formula)
        except cnf.CnfError as exc:
            raise BackendFailure(str(exc)) from exc
        elapsed = time.monotonic() - step_start

        if not result.is_sat:
            report.records.append(HorizonRecord(horizon, "unsat", elapsed))
            continue

        report.records.append(HorizonRecord(horizon, "sat", elapsed))
        decoded = encoder.decode(result.assignment, level, spec)
        if not decoded.valid and variant != "cheating":
            raise ValidationFailure(
                f"{variant} model at horizon {horizon} failed validation: {decoded.reason}"
            )
        report.plan = decoded.plan
        report.actions = decoded.actions
        report.valid = decoded.valid
        report.ball_moves = (
            sim.ball_move_count(decoded.plan)
            if decoded.plan is not None
            else len(decoded.actions)
        )
        report.status = "solved"
        unsat_below = {
            rec.horizon for rec in report.records if rec.result == "unsat"
        }
        report.certified_optimal = all(
            t in unsat_below for t in range(bound, horizon)
        )
        break

    report.wall_time = time.monotonic() - t0
    return report
