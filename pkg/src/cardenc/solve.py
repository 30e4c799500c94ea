"""Embedded solving and model enumeration, plus a client for external DIMACS solvers.

Two engines live here:

* ``CDCLSolver`` -- a small conflict-driven solver (watched literals, 1UIP
  learning, VSIDS, Luby restarts) used by :func:`solve`.
* ``_ModelCounter`` -- an exhaustive DPLL search used by
  :func:`enumerate_models`.  Whenever every clause is satisfied the
  remaining unassigned variables are free, so a leaf contributes ``2**free``
  models at once instead of being expanded.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import os
import random
import re
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .cnf import CnfError, Formula, write_dimacs


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


class SolveError(Exception):
    pass


class Timeout(SolveError):
    pass


class SpawnError(SolveError):
    pass


class OutputParseError(SolveError):
    pass


class ModelCheckFailed(SolveError):
    pass


class CapExceeded(SolveError):
    def __init__(self, lower_bound: int, cap: int):
        super().__init__(f"more than {cap} models (at least {lower_bound})")
        self.lower_bound = lower_bound
        self.cap = cap


@dataclass
class SolveResult:
    status: Status
    model: list[bool] | None = None  # index 0 unused
    decisions: int | None = None
    conflicts: int | None = None
    wall_time: float = 0.0

    def true_vars(self) -> list[int]:
        if self.model is None:
            return []
        return [v for v in range(1, len(self.model)) if self.model[v]]


def _luby(i: int) -> int:
    # i-th element (1-based) of 1,1,2,1,1,2,4,...
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class CDCLSolver:
    """Conflict-driven clause learning over a fixed clause set."""

    restart_base = 100

    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]], seed: int = 0):
        self.num_vars = num_vars
        self.rng = random.Random(seed)
        n = num_vars
        self.value = [0] * (n + 1)
        self.level = [0] * (n + 1)
        self.reason: list[list[int] | None] = [None] * (n + 1)
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 2)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity = [self.rng.random() * 1e-3 for _ in range(n + 1)]
        self.var_inc = 1.0
        self.phase = [False] * (n + 1)
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.decisions = 0
        self.conflicts = 0
        self.ok = True
        self.learnts: list[list[int]] = []
        for clause in clauses:
            self._add_input(list(dict.fromkeys(clause)))

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _val(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def _add_input(self, clause: list[int]) -> None:
        if not self.ok:
            return
        if any(-lit in clause for lit in clause):
            return
        # Only level-0 values exist here; fold them in so watches start on open literals.
        if any(self._val(lit) == 1 for lit in clause):
            return
        clause = [lit for lit in clause if self._val(lit) == 0]
        if len(clause) == 1:
            lit = clause[0]
            val = self._val(lit)
            if val == -1:
                self.ok = False
            elif val == 0:
                self._enqueue(lit, None)
                if self._propagate() is not None:
                    self.ok = False
            return
        if not clause:
            self.ok = False
            return
        self.watches[self._code(clause[0])].append(clause)
        self.watches[self._code(clause[1])].append(clause)

    def _enqueue(self, lit: int, reason) -> None:
        v = abs(lit)
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        value = self.value
        watches = self.watches
        code = self._code
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[code(false_lit)]
            i = j = 0
            end = len(ws)
            while i < end:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = value[first] if first > 0 else -value[-first]
                if fv == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lit = c[k]
                    lv = value[lit] if lit > 0 else -value[-lit]
                    if lv != -1:
                        c[1] = lit
                        c[k] = false_lit
                        watches[code(lit)].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if fv == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    self._enqueue(first, c)
            del ws[j:]
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.num_vars + 1) if self.value[u] == 0]
            heapq.heapify(self.heap)
        elif self.value[v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        c = confl
        while True:
            for q in (c if p is None else c[1:]):
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            c = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.value[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        if self.rng.random() < 0.01:
            free = [v for v in range(1, self.num_vars + 1) if self.value[v] == 0]
            if free:
                return self.rng.choice(free)
        while self.heap:
            act, v = heapq.heappop(self.heap)
            if self.value[v] == 0:
                return v
        return 0

    def solve(self, timeout: float | None = None, assumptions: Sequence[int] = ()) -> Status:
        if not self.ok:
            return Status.UNSAT
        deadline = None if timeout is None else time.monotonic() + timeout
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return Status.UNSAT
        restart_no = 1
        budget = self.restart_base * _luby(restart_no)
        since_restart = 0
        steps = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return Status.UNSAT
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[self._code(learnt[0])].append(learnt)
                    self.watches[self._code(learnt[1])].append(learnt)
                    self.learnts.append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc *= 1.0 / 0.95
                continue
            steps += 1
            if deadline is not None and steps % 256 == 0 and time.monotonic() > deadline:
                self._cancel_until(0)
                return Status.TIMEOUT
            if since_restart >= budget:
                restart_no += 1
                budget = self.restart_base * _luby(restart_no)
                since_restart = 0
                self._cancel_until(0)
                continue
            # Assumptions occupy the first decision levels.
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                a = assumptions[lvl]
                val = self._val(a)
                if val == -1:
                    self._cancel_until(0)
                    return Status.UNSAT
                self.trail_lim.append(len(self.trail))
                if val == 0:
                    self._enqueue(a, None)
                continue
            v = self._pick()
            if v == 0:
                return Status.SAT
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(v if self.phase[v] else -v, None)

    def model(self) -> list[bool]:
        return [False] + [self.value[v] == 1 for v in range(1, self.num_vars + 1)]

    def add_clause(self, clause: Sequence[int]) -> None:
        """Add a clause between calls to :meth:`solve` (used for blocking)."""
        self._cancel_until(0)
        self._add_input(list(dict.fromkeys(clause)))


def solve(formula: Formula, seed: int = 0, timeout: float | None = None) -> SolveResult:
    """Solve with the embedded CDCL solver; SAT models are checked before returning."""
    start = time.perf_counter()
    solver = CDCLSolver(formula.num_vars, formula.clauses, seed=seed)
    status = solver.solve(timeout=timeout)
    result = SolveResult(status, decisions=solver.decisions, conflicts=solver.conflicts)
    if status is Status.SAT:
        result.model = solver.model()
        if not formula.check_model(result.model):
            raise ModelCheckFailed("embedded solver produced a non-model")
    result.wall_time = time.perf_counter() - start
    return result


class _ModelCounter:
    """Exhaustive DPLL with counter-based propagation.

    ``project`` is the number of leading variables to project on, or None
    for counting total models.
    """

    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]], project: int | None):
        self.n = num_vars
        self.project = project
        self.clauses = [tuple(dict.fromkeys(c)) for c in clauses]
        self.occ: dict[int, list[int]] = {}
        for v in range(1, num_vars + 1):
            self.occ[v] = []
            self.occ[-v] = []
        for ci, c in enumerate(self.clauses):
            for lit in c:
                self.occ[lit].append(ci)
        self.size = [len(c) for c in self.clauses]
        self.nsat = [0] * len(self.clauses)
        self.nfalse = [0] * len(self.clauses)
        self.unsat = len(self.clauses)
        self.live = [0] * (num_vars + 1)  # clauses not yet satisfied containing v
        for c in self.clauses:
            for lit in c:
                self.live[abs(lit)] += 1
        self.value = [0] * (num_vars + 1)
        self.trail: list[int] = []
        self.units: list[int] = []
        limit = num_vars if project is None else project
        self.order = list(range(1, num_vars + 1))
        self.limit = limit

    def _assign(self, lit: int) -> bool:
        """Assign and update counters; False on a falsified clause."""
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        clauses = self.clauses
        nsat = self.nsat
        live = self.live
        for ci in self.occ[lit]:
            nsat[ci] += 1
            if nsat[ci] == 1:
                self.unsat -= 1
                for q in clauses[ci]:
                    live[abs(q)] -= 1
        ok = True
        nfalse = self.nfalse
        size = self.size
        for ci in self.occ[-lit]:
            nfalse[ci] += 1
            if nsat[ci] == 0:
                left = size[ci] - nfalse[ci]
                if left == 0:
                    ok = False
                elif left == 1:
                    self.units.append(ci)
        return ok

    def _unassign_to(self, mark: int) -> None:
        clauses = self.clauses
        nsat = self.nsat
        live = self.live
        nfalse = self.nfalse
        while len(self.trail) > mark:
            lit = self.trail.pop()
            self.value[abs(lit)] = 0
            for ci in self.occ[lit]:
                nsat[ci] -= 1
                if nsat[ci] == 0:
                    self.unsat += 1
                    for q in clauses[ci]:
                        live[abs(q)] += 1
            for ci in self.occ[-lit]:
                nfalse[ci] -= 1

    def _propagate(self) -> bool:
        value = self.value
        while self.units:
            ci = self.units.pop()
            if self.nsat[ci]:
                continue
            for lit in self.clauses[ci]:
                if value[abs(lit)] == 0:
                    if not self._assign(lit):
                        self.units.clear()
                        return False
                    break
            else:
                self.units.clear()
                return False
        return True

    def _pick(self, lo: int, hi: int) -> int:
        value = self.value
        live = self.live
        for v in range(lo, hi + 1):
            if value[v] == 0 and live[v]:
                return v
        return 0

    def _initial(self) -> bool:
        for ci, c in enumerate(self.clauses):
            if len(c) == 1:
                self.units.append(ci)
        if any(s == 0 for s in self.size):
            return False
        return self._propagate()

    def run(self, cap: int | None, keep: bool) -> tuple[int, list[tuple[bool, ...]]]:
        """Return (count, models).  Models are main-only tuples under projection."""
        count = 0
        models: list[tuple[bool, ...]] = []
        if not self._initial():
            return 0, models
        proj = self.project
        n = self.n
        # Each stack entry: (trail mark, var, second branch already taken).
        stack: list[tuple[int, int, bool]] = []
        aux_depth: int | None = None  # stack depth where the projected witness search started

        def leaf():
            nonlocal count
            if proj is None:
                free = [v for v in range(1, n + 1) if self.value[v] == 0]
            else:
                free = [v for v in range(1, proj + 1) if self.value[v] == 0]
            count += 1 << len(free)
            if keep:
                top = n if proj is None else proj
                base = [self.value[v] == 1 for v in range(1, top + 1)]
                for bits in itertools.product((False, True), repeat=len(free)):
                    m = list(base)
                    for v, b in zip(free, bits):
                        m[v - 1] = b
                    models.append(tuple(m))
            if cap is not None and count > cap:
                raise CapExceeded(count, cap)

        def backtrack() -> bool:
            nonlocal aux_depth
            while stack:
                mark, v, flipped = stack.pop()
                self._unassign_to(mark)
                if aux_depth is not None and len(stack) < aux_depth:
                    aux_depth = None
                if not flipped:
                    stack.append((mark, v, True))
                    if self._assign(v) and self._propagate():
                        return True
                    self.units.clear()
            return False

        def witness_found():
            # In projected mode a single aux completion suffices; drop back to the mains.
            nonlocal aux_depth
            assert aux_depth is not None
            while len(stack) > aux_depth:
                mark, _, _ = stack.pop()
                self._unassign_to(mark)
            aux_depth = None

        while True:
            if self.unsat == 0:
                leaf()
                if aux_depth is not None:
                    witness_found()
                if not backtrack():
                    break
                continue
            if proj is not None and aux_depth is None:
                v = self._pick(1, proj)
                if v == 0:
                    aux_depth = len(stack)
                    v = self._pick(proj + 1, n)
            else:
                v = self._pick(1 if proj is None else proj + 1, n)
            if v == 0:
                # Unreachable when propagation is complete: an unsatisfied clause with no free literal.
                if not backtrack():
                    break
                continue
            stack.append((len(self.trail), v, False))
            if not (self._assign(-v) and self._propagate()):
                self.units.clear()
                if not backtrack():
                    break
        return count, models


@dataclass
class Enumeration:
    count: int
    models: list[tuple[bool, ...]] | None = None


def enumerate_models(
    formula: Formula,
    projection: str = "all",
    cap: int | None = 2_000_000,
    keep_models: bool = False,
    method: str = "dpll",
    seed: int = 0,
) -> Enumeration:
    """Count (and optionally list) models.

    ``projection`` is ``"all"`` for total models over every variable or
    ``"mains"`` for distinct assignments to the main block.  ``method`` is
    ``"dpll"`` (exhaustive search) or ``"blocking"`` (repeated CDCL solving
    with blocking clauses; only sensible for small counts).
    """
    if projection not in ("all", "mains"):
        raise ValueError(f"unknown projection {projection!r}")
    project = formula.num_main if projection == "mains" else None
    if method == "dpll":
        counter = _ModelCounter(formula.num_vars, formula.clauses, project)
        count, models = counter.run(cap, keep_models)
        return Enumeration(count, models if keep_models else None)
    if method == "blocking":
        return _enumerate_blocking(formula, project, cap, keep_models, seed)
    raise ValueError(f"unknown method {method!r}")


def _enumerate_blocking(formula: Formula, project: int | None, cap, keep, seed) -> Enumeration:
    solver = CDCLSolver(formula.num_vars, formula.clauses, seed=seed)
    top = formula.num_vars if project is None else project
    count = 0
    models = []
    while solver.solve() is Status.SAT:
        model = solver.model()
        block = tuple(bool(model[v]) for v in range(1, top + 1))
        count += 1
        if keep:
            models.append(block)
        if cap is not None and count > cap:
            raise CapExceeded(count, cap)
        if top == 0:
            break
        solver.add_clause([-v if model[v] else v for v in range(1, top + 1)])
    return Enumeration(count, models if keep else None)


def iter_models(formula: Formula, projection: str = "all") -> Iterator[tuple[bool, ...]]:
    yield from enumerate_models(formula, projection, cap=None, keep_models=True).models


# ---------------------------------------------------------------- external

@dataclass
class SolverCommand:
    """How to invoke an external DIMACS solver.

    ``command`` is a shell-style template; ``{file}`` is replaced by the
    DIMACS path and ``{seed}`` by the seed.  If ``seed_flag`` is given it is
    formatted with the seed and appended.  ``stat_patterns`` map a statistic
    name to a regex whose first group is an integer.
    """

    command: str
    timeout: float | None = None
    seed_flag: str | None = None
    sat_pattern: str = r"^s\s+SATISFIABLE"
    unsat_pattern: str = r"^s\s+UNSATISFIABLE"
    stat_patterns: dict[str, str] = field(default_factory=lambda: {
        "decisions": r"^c\s+decisions\s*:?\s+(\d+)",
        "conflicts": r"^c\s+conflicts\s*:?\s+(\d+)",
    })

    def argv(self, path: str, seed: int) -> list[str]:
        cmd = self.command
        if "{file}" not in cmd:
            cmd = cmd + " {file}"
        args = [a.format(file=path, seed=seed) for a in shlex.split(cmd)]
        if self.seed_flag:
            args.extend(a.format(seed=seed) for a in shlex.split(self.seed_flag))
        return args


def parse_solver_output(text: str, returncode: int, cmd: SolverCommand) -> tuple[Status, dict[int, bool] | None, dict[str, int]]:
    status = None
    if re.search(cmd.unsat_pattern, text, re.M):
        status = Status.UNSAT
    elif re.search(cmd.sat_pattern, text, re.M):
        status = Status.SAT
    elif returncode == 10:
        status = Status.SAT
    elif returncode == 20:
        status = Status.UNSAT
    if status is None:
        raise OutputParseError(f"no status line in solver output (exit code {returncode})")
    model = None
    vals: dict[int, bool] = {}
    for line in text.splitlines():
        if line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise OutputParseError(f"bad model token {tok!r}") from None
                if lit:
                    vals[abs(lit)] = lit > 0
    if vals:
        model = vals
    statistics = {}
    for name, pattern in cmd.stat_patterns.items():
        m = re.search(pattern, text, re.M)
        if m:
            statistics[name] = int(m.group(1))
    return status, model, statistics


def run_external(cmd: SolverCommand, formula: Formula, seed: int = 0) -> SolveResult:
    """Write ``formula`` to a temp file, run the external solver and parse its verdict."""
    fd, path = tempfile.mkstemp(suffix=".cnf", prefix="cardenc-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(write_dimacs(formula))
        argv = cmd.argv(path, seed)
        start = time.perf_counter()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=cmd.timeout)
        except subprocess.TimeoutExpired:
            return SolveResult(Status.TIMEOUT, wall_time=time.perf_counter() - start)
        except OSError as exc:
            raise SpawnError(f"cannot run {argv[0]!r}: {exc}") from exc
        elapsed = time.perf_counter() - start
    finally:
        os.unlink(path)
    status, values, statistics = parse_solver_output(proc.stdout, proc.returncode, cmd)
    result = SolveResult(status, wall_time=elapsed,
                         decisions=statistics.get("decisions"), conflicts=statistics.get("conflicts"))
    if status is Status.SAT and values is not None:
        model = [False] * (formula.num_vars + 1)
        for v, b in values.items():
            if v <= formula.num_vars:
                model[v] = b
        if not formula.check_model(model):
            raise ModelCheckFailed("external solver model does not satisfy the formula")
        result.model = model
    return result


__all__ = [
    "CDCLSolver", "CapExceeded", "CnfError", "Enumeration", "ModelCheckFailed", "OutputParseError",
    "SolveResult", "SolverCommand", "SpawnError", "Status", "Timeout", "enumerate_models",
    "iter_models", "parse_solver_output", "run_external", "solve",
]
