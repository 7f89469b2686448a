"""Self-contained DIMACS CNF solver with SAT-competition output.

Usage: ``python -m snowplan.satsolver [file.cnf]`` (stdin when no file).
Prints ``s SATISFIABLE`` plus ``v`` value lines, or ``s UNSATISFIABLE``;
exit codes follow the competition convention (10 sat / 20 unsat).

This is the fallback backend so the toolkit works out of the box; any real
solver (kissat, cadical, ...) plugs in via the SNOWPLAN_SOLVER environment
variable.  The engine is sympy's CDCL implementation, driven directly on
integer clauses.
"""

from __future__ import annotations

import sys


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    n_vars = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) >= 4 and parts[1] == "cnf":
                n_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
                n_vars = max(n_vars, abs(lit))
    if current:
        clauses.append(current)
    return n_vars, clauses


def solve(n_vars: int, clauses: list[list[int]]) -> list[int] | None:
    """Model as a list of signed literals for vars 1..n, or None if unsat."""
    from sympy.logic.algorithms.dpll2 import SATSolver

    cleaned = []
    for clause in clauses:
        lits = set(clause)
        if not clause:
            return None  # empty clause: trivially unsat
        if any(-lit in lits for lit in lits):
            continue  # tautology
        cleaned.append(lits)
    if not cleaned:
        return list(range(-1, -n_vars - 1, -1)) if n_vars else []
    solver = SATSolver(
        cleaned, set(range(1, n_vars + 1)), set(), clause_learning="simple"
    )
    model = next(solver._find_model(), None)
    if model is None:
        return None
    return [v if model.get(v, False) else -v for v in range(1, n_vars + 1)]


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if args:
        with open(args[0], "r", encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = sys.stdin.read()
    n_vars, clauses = parse_dimacs(text)
    print(f"c snowplan-satsolver: {n_vars} vars, {len(clauses)} clauses")
    model = solve(n_vars, clauses)
    if model is None:
        print("s UNSATISFIABLE")
        return 20
    print("s SATISFIABLE")
    for start in range(0, len(model), 20):
        chunk = model[start : start + 20]
        print("v " + " ".join(str(lit) for lit in chunk))
    print("v 0")
    return 10


if __name__ == "__main__":
    sys.exit(main())
