"""CNF formulas with a fixed block of main variables.

Literals are plain signed integers in the DIMACS convention: variable ``v``
is the literal ``v`` and its negation is ``-v``.  Variables ``1..num_main``
are the main variables; anything allocated afterwards is auxiliary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class CnfError(Exception):
    """Base class for formula construction and parsing errors."""


class EmptyClause(CnfError):
    pass


class UnallocatedVariable(CnfError):
    pass


class Tautology(CnfError):
    pass


class ParseError(CnfError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CountMismatch(CnfError):
    pass


@dataclass(frozen=True)
class EncodingStats:
    aux_vars: int
    clauses: int
    literals: int
    main_var_literals: int

    def astuple(self) -> tuple[int, int, int, int]:
        return (self.aux_vars, self.clauses, self.literals, self.main_var_literals)


@dataclass
class Formula:
    num_main: int = 0
    next_var: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.next_var < self.num_main + 1:
            self.next_var = self.num_main + 1

    @property
    def num_vars(self) -> int:
        return self.next_var - 1

    @property
    def mains(self) -> list[int]:
        return list(range(1, self.num_main + 1))

    def fresh_var(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def fresh_vars(self, count: int) -> list[int]:
        return [self.fresh_var() for _ in range(count)]

    def add_clause(self, literals: Iterable[int]) -> None:
        clause: list[int] = []
        seen = set()
        for lit in literals:
            if lit == 0 or abs(lit) >= self.next_var:
                raise UnallocatedVariable(f"literal {lit} is not allocated (next_var={self.next_var})")
            if -lit in seen:
                raise Tautology(f"clause contains both {lit} and {-lit}")
            if lit not in seen:
                seen.add(lit)
                clause.append(lit)
        if not clause:
            raise EmptyClause("attempt to add an empty clause")
        self.clauses.append(tuple(clause))

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    # Metadata lives in ``c key value`` comment lines.
    def set_meta(self, key: str, value) -> None:
        if not key or any(ch.isspace() for ch in key):
            raise ValueError(f"bad metadata key {key!r}")
        prefix = key + " "
        self.comments = [c for c in self.comments if not (c == key or c.startswith(prefix))]
        self.comments.append(f"{key} {value}")

    @property
    def meta(self) -> dict[str, str]:
        out = {}
        for line in self.comments:
            key, _, value = line.partition(" ")
            if key:
                out[key] = value.strip()
        return out

    def copy(self) -> "Formula":
        return Formula(self.num_main, self.next_var, list(self.clauses), list(self.comments))

    def check_model(self, model: Sequence[bool] | dict[int, bool]) -> bool:
        """True iff ``model`` satisfies every clause.

        ``model`` is either a mapping var -> bool or a sequence indexed by
        variable (index 0 unused).
        """
        for clause in self.clauses:
            for lit in clause:
                if bool(model[abs(lit)]) == (lit > 0):
                    break
            else:
                return False
        return True


def stats(formula: Formula) -> EncodingStats:
    literals = 0
    mvl = 0
    for clause in formula.clauses:
        literals += len(clause)
        mvl += sum(1 for lit in clause if abs(lit) <= formula.num_main)
    return EncodingStats(
        aux_vars=formula.next_var - 1 - formula.num_main,
        clauses=len(formula.clauses),
        literals=literals,
        main_var_literals=mvl,
    )


def write_dimacs(formula: Formula) -> str:
    lines = [f"c {c}" if c else "c" for c in formula.comments]
    lines.append(f"c mains {formula.num_main}")
    lines.append(f"p cnf {formula.num_vars} {len(formula.clauses)}")
    for clause in formula.clauses:
        lines.append(" ".join(map(str, clause)) + " 0")
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> Formula:
    comments: list[str] = []
    header = None
    mains = None
    clauses: list[list[int]] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            body = line[1:].strip()
            key, _, value = body.partition(" ")
            if key == "mains":
                try:
                    mains = int(value)
                except ValueError:
                    raise ParseError(lineno, f"bad mains comment {line!r}") from None
            else:
                comments.append(body)
            continue
        if line.startswith("p"):
            fields = line.split()
            if header is not None:
                raise ParseError(lineno, "duplicate header")
            if len(fields) != 4 or fields[1] != "cnf":
                raise ParseError(lineno, f"bad header {line!r}")
            try:
                header = (int(fields[2]), int(fields[3]), lineno)
            except ValueError:
                raise ParseError(lineno, f"bad header {line!r}") from None
            continue
        if header is None:
            raise ParseError(lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                if not pending:
                    raise ParseError(lineno, "empty clause")
                clauses.append(pending)
                pending = []
            else:
                if abs(lit) > header[0]:
                    raise ParseError(lineno, f"literal {lit} exceeds declared {header[0]} variables")
                pending.append(lit)
    if header is None:
        raise ParseError(0, "missing 'p cnf' header")
    if pending:
        clauses.append(pending)
    nvars, nclauses, _ = header
    if nclauses != len(clauses):
        raise CountMismatch(f"header declares {nclauses} clauses, body has {len(clauses)}")
    if mains is None:
        mains = nvars
    if not 0 <= mains <= nvars:
        raise CountMismatch(f"mains {mains} out of range for {nvars} variables")
    formula = Formula(num_main=mains, next_var=nvars + 1, comments=comments)
    for clause in clauses:
        formula.add_clause(clause)
    return formula


class BadBounds(CnfError):
    pass


def encode_degenerate(formula: Formula, mains: Sequence[int], r: int, equality: bool) -> bool:
    """Handle bounds outside ``1 <= r < n``.  Returns True if nothing is left to do.

    ``r <= 0`` forces every main false (``r < 0`` is rejected), ``r >= n`` is
    vacuous for ``<=``.  For equality ``r == n`` forces every main true.
    """
    n = len(mains)
    if r < 0:
        raise BadBounds(f"negative bound r={r}")
    if equality and r > n:
        raise BadBounds(f"=r with r={r} > n={n} is unsatisfiable")
    if r == 0:
        for x in mains:
            formula.add_clause([-x])
        return True
    if r >= n:
        if equality:
            for x in mains:
                formula.add_clause([x])
        return True
    return False
