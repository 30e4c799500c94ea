"""Tree-based (totalizer) encoding of ``sum(x) <= r`` and ``sum(x) == r``.

The mains are the leaves of a binary tree packed into an array: leaves are
slots ``n .. 2n-1`` and internal node ``k`` has daughters ``2k`` and
``2k+1``.  Node variable ``b[k, j]`` is forced true when at least ``j``
leaves below ``k`` are true.  ``b[k, 0]`` is the constant true and a
leaf's ``b[k, 1]`` is the main literal itself.

Clauses are generated symbolically first, with node variables as
``(k, j)`` keys, so that auxiliaries can be allocated in node/count order
before anything is written to the formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cnf import BadBounds, Formula, encode_degenerate

# A symbolic literal: (sign, node, count).
SymLit = tuple[int, int, int]


@dataclass
class TotalizerTree:
    n: int
    r: int
    leaves: list[int] = field(default_factory=list)  # L_k, index 0 unused
    cap: list[int] = field(default_factory=list)  # t_k = min(r, L_k)
    cocap: list[int] = field(default_factory=list)  # u_k = min(n - r, L_k)

    @classmethod
    def build(cls, n: int, r: int) -> "TotalizerTree":
        size = 2 * n
        leaves = [0] * size
        for k in range(n, 2 * n):
            leaves[k] = 1
        for k in range(n - 1, 0, -1):
            leaves[k] = leaves[2 * k] + leaves[2 * k + 1]
        cap = [min(r, L) for L in leaves]
        cocap = [min(n - r, L) for L in leaves]
        return cls(n, r, leaves, cap, cocap)

    def is_leaf(self, k: int) -> bool:
        return k >= self.n


@dataclass
class NodeVarTable:
    tree: TotalizerTree
    var: dict[tuple[int, int], int] = field(default_factory=dict)
    required_le: set[tuple[int, int]] = field(default_factory=set)
    required_ge: set[tuple[int, int]] = field(default_factory=set)

    def lookup(self, k: int, j: int) -> int:
        return self.var[k, j]


def _atmost_clauses(tree: TotalizerTree) -> tuple[list[list[SymLit]], set[tuple[int, int]]]:
    n, r = tree.n, tree.r
    t = tree.cap
    required: set[tuple[int, int]] = set()
    clauses: list[list[SymLit]] = []
    # Forbid r+1 true leaves split across two sibling subtrees.
    for k in range(1, n):
        a, b = 2 * k, 2 * k + 1
        for i in range(1, t[a] + 1):
            j = r + 1 - i
            if 1 <= j <= t[b]:
                clauses.append([(-1, a, i), (-1, b, j)])
                required.add((a, i))
                required.add((b, j))
    # Define each required count from its daughters, top-down so requirements cascade.
    for k in range(2, n):
        a, b = 2 * k, 2 * k + 1
        for m in range(1, t[k] + 1):
            if (k, m) not in required:
                continue
            for i in range(0, t[a] + 1):
                j = m - i
                if not 0 <= j <= t[b]:
                    continue
                clause = []
                if i:
                    clause.append((-1, a, i))
                    required.add((a, i))
                if j:
                    clause.append((-1, b, j))
                    required.add((b, j))
                clause.append((1, k, m))
                clauses.append(clause)
    return clauses, required


def _atleast_clauses(tree: TotalizerTree) -> tuple[list[list[SymLit]], set[tuple[int, int]]]:
    # The same construction for >= n-r false leaves, phrased on the shared variables:
    # "at least i zeros below k" is the negation of b[k, L_k + 1 - i].
    n, r = tree.n, tree.r
    L = tree.leaves
    u = tree.cocap
    required: set[tuple[int, int]] = set()
    clauses: list[list[SymLit]] = []
    for k in range(1, n):
        a, b = 2 * k, 2 * k + 1
        for i in range(1, u[a] + 1):
            j = n - r + 1 - i
            if 1 <= j <= u[b]:
                pa, pb = (a, L[a] + 1 - i), (b, L[b] + 1 - j)
                clauses.append([(1, *pa), (1, *pb)])
                required.add(pa)
                required.add(pb)
    for k in range(2, n):
        a, b = 2 * k, 2 * k + 1
        for m in range(1, u[k] + 1):
            target = (k, L[k] + 1 - m)
            if target not in required:
                continue
            for i in range(0, u[a] + 1):
                j = m - i
                if not 0 <= j <= u[b]:
                    continue
                clause = []
                # b[k, L_k + 1] is the constant false, so i == 0 drops that literal.
                if i:
                    pa = (a, L[a] + 1 - i)
                    clause.append((1, *pa))
                    required.add(pa)
                if j:
                    pb = (b, L[b] + 1 - j)
                    clause.append((1, *pb))
                    required.add(pb)
                clause.append((-1, *target))
                clauses.append(clause)
    return clauses, required


def _sideways_clauses(tree: TotalizerTree, required: set[tuple[int, int]]) -> list[list[SymLit]]:
    clauses = []
    for k in range(2, tree.n):
        for i in range(1, tree.leaves[k]):
            if (k, i) in required and (k, i + 1) in required:
                clauses.append([(1, k, i), (-1, k, i + 1)])
    return clauses


def _touches_main(tree: TotalizerTree, clause: list[SymLit]) -> bool:
    return any(tree.is_leaf(k) for _, k, _ in clause)


def _emit(formula: Formula, mains: Sequence[int], tree: TotalizerTree,
          clauses: list[list[SymLit]]) -> NodeVarTable:
    table = NodeVarTable(tree)
    n = tree.n
    needed = sorted({(k, j) for c in clauses for _, k, j in c if k < n})
    for key in needed:
        table.var[key] = formula.fresh_var()
    for k in range(n, 2 * n):
        table.var[k, 1] = mains[k - n]
    for clause in clauses:
        formula.add_clause([s * table.var[k, j] for s, k, j in clause])
    return table


def _check(n: int, r: int) -> None:
    if not 1 <= r < n:
        raise BadBounds(f"need 1 <= r < n, got r={r}, n={n}")


def encode_totalizer_atmost(
    formula: Formula,
    mains: Sequence[int],
    r: int,
    sideways: bool = False,
    inequality: bool = False,
) -> NodeVarTable:
    """Append the tree encoding of ``sum(mains) <= r``.

    ``sideways`` adds ``b[k,i] | ~b[k,i+1]`` for adjacent required counts;
    ``inequality`` adds the ``>=`` side of the tree minus every clause that
    mentions a main variable.
    """
    n = len(mains)
    if encode_degenerate(formula, mains, r, False):
        return NodeVarTable(TotalizerTree(n, r))
    _check(n, r)
    tree = TotalizerTree.build(n, r)
    clauses, req_le = _atmost_clauses(tree)
    req_ge: set[tuple[int, int]] = set()
    if inequality:
        extra, req_ge = _atleast_clauses(tree)
        clauses += [c for c in extra if not _touches_main(tree, c)]
    if sideways:
        clauses += _sideways_clauses(tree, req_le)
    table = _emit(formula, mains, tree, clauses)
    table.required_le = req_le
    table.required_ge = req_ge
    return table


def encode_totalizer_equality(formula: Formula, mains: Sequence[int], r: int,
                              sideways: bool = True) -> NodeVarTable:
    """Append the tree encoding of ``sum(mains) == r``; node variables become exact counts.

    Sideways clauses are included by default, which is the form whose size is
    (328, 3080, 8254, 264) at n=66, r=36.
    """
    n = len(mains)
    if encode_degenerate(formula, mains, r, True):
        return NodeVarTable(TotalizerTree(n, r))
    _check(n, r)
    tree = TotalizerTree.build(n, r)
    clauses, req_le = _atmost_clauses(tree)
    extra, req_ge = _atleast_clauses(tree)
    clauses += extra
    if sideways:
        clauses += _sideways_clauses(tree, req_le | req_ge)
    table = _emit(formula, mains, tree, clauses)
    table.required_le = req_le
    table.required_ge = req_ge
    return table


def tree_variable_bound(n: int, r: int) -> int:
    return r * (n - 2)


def tree_atmost_size(n: int, r: int) -> tuple[int, int, int, int]:
    """``(aux, clauses, literals, mvls)`` of the unstrengthened tree without building it.

    Every required count set turns out to be an upper interval ``lo..t_k``, so the
    generator's two loops can be tallied per node in O(r).
    """
    if not 1 <= r < n:
        raise BadBounds(f"need 1 <= r < n, got r={r}, n={n}")
    tree = TotalizerTree.build(n, r)
    t = tree.cap
    lo = [None] * (2 * n)  # lowest required count per node; None means nothing required

    def need(k, low, high):
        if low <= high and (lo[k] is None or low < lo[k]):
            lo[k] = low

    clauses = literals = mvls = 0
    for k in range(1, n):
        a, b = 2 * k, 2 * k + 1
        first = max(1, r + 1 - t[b])
        if first <= t[a]:
            c = t[a] - first + 1
            clauses += c
            literals += 2 * c
            mvls += c * ((a >= n) + (b >= n))
            need(a, first, t[a])
            need(b, r + 1 - t[a], t[b])
    for k in range(2, n):
        if lo[k] is None:
            continue
        a, b = 2 * k, 2 * k + 1
        for m in range(lo[k], t[k] + 1):
            i0, i1 = max(0, m - t[b]), min(m, t[a])
            c = i1 - i0 + 1
            clauses += c
            with_a = c - (i0 == 0)  # clauses carrying a literal of daughter a
            with_b = c - (i1 == m)
            literals += c + with_a + with_b
            mvls += with_a * (a >= n) + with_b * (b >= n)
        need(a, max(1, lo[k] - t[b]), t[a])
        need(b, max(1, lo[k] - t[a]), t[b])
    aux = sum(t[k] - lo[k] + 1 for k in range(2, n) if lo[k] is not None)
    return aux, clauses, literals, mvls
