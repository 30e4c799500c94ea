"""Sequential-counter encoding of ``sum(x) <= r`` and ``sum(x) == r``.

The auxiliary variables ``e[j, k]`` live on a staggered grid with
``1 <= k <= r`` and ``k <= j <= n + k - r - 1``; ``e[j, k]`` is forced true
once at least ``k`` of ``x_1 .. x_j`` are true.  Cells outside the grid are
implicit constants and are folded into the clauses at generation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cnf import BadBounds, Formula, encode_degenerate


class ConstraintViolated(ValueError):
    pass


@dataclass(frozen=True)
class SeqVariant:
    strengthen_se: bool = False
    strengthen_transition: bool = False
    equality: bool = False

    def __post_init__(self):
        if self.equality and not (self.strengthen_se and self.strengthen_transition):
            raise ValueError("the equality form is built on the fully strengthened encoding")

    @classmethod
    def full(cls) -> "SeqVariant":
        return cls(True, True)

    @classmethod
    def exact(cls) -> "SeqVariant":
        return cls(True, True, True)


@dataclass
class SeqGrid:
    n: int
    r: int
    cell: dict[tuple[int, int], int] = field(default_factory=dict)

    def row_range(self, k: int) -> range:
        return range(k, self.n + k - self.r)

    def __len__(self):
        return len(self.cell)


def _allocate_grid(formula: Formula, n: int, r: int) -> SeqGrid:
    grid = SeqGrid(n, r)
    for k in range(1, r + 1):
        for j in grid.row_range(k):
            grid.cell[j, k] = formula.fresh_var()
    return grid


def encode_seqcounter(
    formula: Formula,
    mains: Sequence[int],
    r: int,
    variant: SeqVariant = SeqVariant(),
) -> SeqGrid:
    """Append the sequential-counter clauses for ``sum(mains) <= r`` (or ``== r``).

    ``mains`` are literals, so a complemented input is passed as ``-x``.
    """
    n = len(mains)
    if encode_degenerate(formula, mains, r, variant.equality):
        return SeqGrid(n, r)
    grid = _allocate_grid(formula, n, r)
    x = {j + 1: lit for j, lit in enumerate(mains)}

    def e(j, k):
        return grid.cell[j, k]

    add = formula.add_clause

    # Rows are monotone: e[j,k] -> e[j+1,k].
    for k in range(1, r + 1):
        for j in range(k, n + k - r - 1):
            add([-e(j, k), e(j + 1, k)])

    # Counting step: e[j,k] & x[j+1] -> e[j+1,k+1]; e[j,0] is true, e[j,r+1] false.
    for k in range(0, r + 1):
        for j in range(k, n + k - r):
            clause = []
            if k > 0:
                clause.append(-e(j, k))
            if k < r:
                clause.append(e(j + 1, k + 1))
            clause.append(-x[j + 1])
            add(clause)

    if variant.strengthen_se:
        # Zeros propagate south-east: e[j+1,k+1] -> e[j,k].
        for k in range(1, r):
            for j in range(k, n + k - r):
                add([e(j, k), -e(j + 1, k + 1)])

    if variant.strengthen_transition:
        # A 0 -> 1 step along a row needs a true main: e[j+1,k] & ~e[j,k] -> x[j+1].
        # e[k-1,k] is implicitly false; under equality e[n+k-r,k] is implicitly true.
        extra = 1 if variant.equality else 0
        for k in range(1, r + 1):
            for j in range(k - 1, n + k - r - 1 + extra):
                clause = []
                if j >= k:
                    clause.append(e(j, k))
                if j + 1 <= n + k - r - 1:
                    clause.append(-e(j + 1, k))
                clause.append(x[j + 1])
                add(clause)
    return grid


def seqcounter_clause_count(n: int, r: int, variant: SeqVariant = SeqVariant()) -> int:
    """Closed-form clause count for ``1 <= r < n``."""
    count = 2 * r * (n - r) + n - 2 * r
    if variant.strengthen_se:
        count += (r - 1) * (n - r)
    if variant.strengthen_transition:
        count += r * (n - r)
        if variant.equality:
            count += r
    return count


def encode_pigeonhole_transition(formula: Formula, mains: Sequence[int], q: int) -> SeqGrid:
    """Transition-based pigeonhole encoding of ``sum(mains) >= q``.

    Cells ``t[j, k]`` with ``1 <= k <= q`` and ``1 <= j <= n - q``; a step
    from ``t[j,k] = 1`` to ``t[j+1,k] = 0`` forces ``x[j+k]``.  The returned
    grid is keyed ``(j, k)`` in that squared-up layout.
    """
    n = len(mains)
    if not 1 <= q < n:
        raise BadBounds(f"need 1 <= q < n, got q={q}, n={n}")
    width = n - q
    grid = SeqGrid(n, q)
    for k in range(1, q + 1):
        for j in range(1, width + 1):
            grid.cell[j, k] = formula.fresh_var()
    t = grid.cell
    x = {j + 1: lit for j, lit in enumerate(mains)}

    for k in range(1, q):
        for j in range(1, width + 1):
            formula.add_clause([-t[j, k], t[j, k + 1]])
    # t[0,k] is implicitly true and t[width+1,k] implicitly false.
    for k in range(1, q + 1):
        for j in range(0, width + 1):
            clause = []
            if j >= 1:
                clause.append(-t[j, k])
            if j + 1 <= width:
                clause.append(t[j + 1, k])
            clause.append(x[j + k])
            formula.add_clause(clause)
    return grid


def canonical_aux(mains_assignment: Sequence[int | bool], n: int, r: int) -> dict[tuple[int, int], bool]:
    """The unique grid assignment with ``e[j,k] = 1`` iff ``sum(x_1..x_j) >= k``."""
    bits = [bool(b) for b in mains_assignment]
    if len(bits) != n:
        raise ValueError(f"expected {n} bits, got {len(bits)}")
    if sum(bits) > r:
        raise ConstraintViolated(f"{sum(bits)} true mains exceeds r={r}")
    prefix = [0]
    for b in bits:
        prefix.append(prefix[-1] + b)
    out = {}
    for k in range(1, r + 1):
        for j in range(k, n + k - r):
            out[j, k] = prefix[j] >= k
    return out


def count_aux_freedom_all_false(n: int, r: int) -> int:
    """Number of auxiliary solutions of the unstrengthened encoding when every main is false.

    Only row monotonicity binds, so each of the ``r`` rows of ``n - r`` cells
    independently picks one of its ``n - r + 1`` monotone patterns (all-zero included).
    """
    if not 1 <= r < n:
        raise BadBounds(f"need 1 <= r < n, got r={r}, n={n}")
    return (n - r + 1) ** r
