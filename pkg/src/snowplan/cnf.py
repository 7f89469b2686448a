"""CNF formula construction and solver I/O.

Variables are dense positive integers with structured string names (kept
out of the DIMACS output unless comments are requested).  Cardinality
gadgets use the sequential counter encoding; exactly-one switches between
pairwise and sequential by arity.  Models parsed from solver output are
checked against every clause before anyone decodes them.
"""

from __future__ import annotations

from dataclasses import dataclass


class CnfError(Exception):
    pass


class DuplicateName(CnfError):
    pass


class MalformedOutput(CnfError):
    pass


class IncompleteModel(CnfError):
    pass


class InvalidModel(CnfError):
    """Solver claimed SAT but the assignment violates a clause."""


class CnfFormula:
    """Named boolean variables plus a clause list.

    Literals are +/- variable ids; clauses are non-empty, non-tautological
    lists of literals.
    """

    def __init__(self) -> None:
        self.var_count = 0
        self.clauses: list[list[int]] = []
        self.names: dict[str, int] = {}
        self._aux = 0

    def new_var(self, name: str) -> int:
        if name in self.names:
            raise DuplicateName(name)
        self.var_count += 1
        self.names[name] = self.var_count
        return self.var_count

    def aux_var(self, hint: str = "aux") -> int:
        self._aux += 1
        return self.new_var(f"_{hint}#{self._aux}")

    def add_clause(self, literals: list[int]) -> None:
        if not literals:
            raise CnfError("empty clause")
        seen = set()
        for lit in literals:
            if lit == 0 or abs(lit) > self.var_count:
                raise CnfError(f"literal {lit} out of range")
            if -lit in seen:
                raise CnfError(f"tautological clause {literals}")
            seen.add(lit)
        self.clauses.append(list(dict.fromkeys(literals)))

    def add_implication(self, premise: list[int], conclusion: list[int]) -> None:
        """premise literals (conjunction) imply conclusion (disjunction)."""
        self.add_clause([-lit for lit in premise] + conclusion)

    # ------------------------------------------------------------------
    # cardinality gadgets

    def exactly_one(self, variables: list[int], method: str | None = None) -> None:
        if not variables:
            raise CnfError("exactly_one over no variables")
        if method is None:
            method = "pairwise" if len(variables) <= 6 else "sequential"
        self.add_clause(list(variables))
        if len(variables) == 1:
            return
        if method == "pairwise":
            for i in range(len(variables)):
                for j in range(i + 1, len(variables)):
                    self.add_clause([-variables[i], -variables[j]])
        elif method == "sequential":
            self._sequential_at_most_k([v for v in variables], 1)
        else:
            raise CnfError(f"unknown exactly-one method {method!r}")

    def at_most_k(self, variables: list[int], k: int) -> None:
        if not 0 <= k <= len(variables):
            raise CnfError(f"at_most_k: k={k} out of range")
        if k == len(variables):
            return
        if k == 0:
            for v in variables:
                self.add_clause([-v])
            return
        self._sequential_at_most_k(list(variables), k)

    def at_least_k(self, variables: list[int], k: int) -> None:
        if not 0 <= k <= len(variables):
            raise CnfError(f"at_least_k: k={k} out of range")
        if k == 0:
            return
        if k == len(variables):
            for v in variables:
                self.add_clause([v])
            return
        if k == 1:
            self.add_clause(list(variables))
            return
        # at least k true == at most n-k of the negations true
        self._sequential_at_most_k([-v for v in variables], len(variables) - k)

    def _sequential_at_most_k(self, lits: list[int], k: int) -> None:
        """Sinz sequential counter over arbitrary literals."""
        n = len(lits)
        reg = [[self.aux_var("card") for _ in range(k)] for _ in range(n - 1)]
        self.add_clause([-lits[0], reg[0][0]])
        for j in range(1, k):
            self.add_clause([-reg[0][j]])
        for i in range(1, n - 1):
            self.add_clause([-lits[i], reg[i][0]])
            self.add_clause([-reg[i - 1][0], reg[i][0]])
            for j in range(1, k):
                self.add_clause([-lits[i], -reg[i - 1][j - 1], reg[i][j]])
                self.add_clause([-reg[i - 1][j], reg[i][j]])
            self.add_clause([-lits[i], -reg[i - 1][k - 1]])
        self.add_clause([-lits[n - 1], -reg[n - 2][k - 1]])

    # ------------------------------------------------------------------

    def evaluate(self, assignment: list[bool]) -> bool:
        """True iff the assignment (1-indexed) satisfies every clause."""
        return all(
            any(assignment[lit] if lit > 0 else not assignment[-lit] for lit in clause)
            for clause in self.clauses
        )

    def to_dimacs(self, with_comments: bool = False) -> str:
        out = []
        if with_comments:
            for name, vid in self.names.items():
                out.append(f"c {name} = {vid}")
        out.append(f"p cnf {self.var_count} {len(self.clauses)}")
        for clause in self.clauses:
            out.append(" ".join(str(lit) for lit in clause) + " 0")
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class SolverResult:
    status: str  # sat | unsat
    assignment: list[bool] | None = None  # 1-indexed; index 0 unused

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def parse_model(solver_output: str, formula: CnfFormula) -> SolverResult:
    """Parse SAT-competition solver output ("s ..." plus "v ..." lines).

    Sat results carry a total assignment over the formula's variables and
    are verified against every clause before being returned.
    """
    status = None
    literals: list[int] = []
    for line in solver_output.splitlines():
        line = line.strip()
        if line.startswith("s "):
            token = line[2:].strip().upper()
            if token == "SATISFIABLE":
                status = "sat"
            elif token == "UNSATISFIABLE":
                status = "unsat"
        elif line.startswith("v "):
            literals.extend(int(tok) for tok in line[2:].split())
    if status is None:
        raise MalformedOutput("no 's SATISFIABLE'/'s UNSATISFIABLE' line found")
    if status == "unsat":
        return SolverResult("unsat")

    assignment: list[bool | None] = [None] * (formula.var_count + 1)
    for lit in literals:
        if lit == 0:
            continue
        var = abs(lit)
        if var <= formula.var_count:
            assignment[var] = lit > 0
    missing = [v for v in range(1, formula.var_count + 1) if assignment[v] is None]
    if missing:
        raise IncompleteModel(f"{len(missing)} variables unassigned (first: {missing[0]})")
    total = [bool(x) for x in assignment]
    if not formula.evaluate(total):
        raise InvalidModel("reported model does not satisfy the formula")
    return SolverResult("sat", total)
