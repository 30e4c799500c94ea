"""Sorting-network encoding built from a recursive odd-even mergesort.

The network sorts the mains into ``a_1 >= a_2 >= ... >= a_n``.  A bound is
imposed by fixing outputs (``a_{r+1} = 0`` for a partial ``<=``, every
``a_i, i > r`` for a full one) and the consequences are pushed through the
network as wire statuses, so that constant wires never get variables and
their clauses are simplified away at generation time.  Wires whose value
cannot influence any constrained wire are *irrelevant* and their clauses
are dropped.

Two reductions then merge wires of a comparator into one variable:

* rule A: one input and the bottom output are known false, so the other
  input equals the top output;
* rule B (one-way only): the bottom output is irrelevant and the other
  three wires are active, so all three can share a variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .cnf import BadBounds, Formula, encode_degenerate


class Status(enum.Enum):
    ACTIVE = "active"
    TRUE = "known-true"
    FALSE = "known-false"
    IRRELEVANT = "irrelevant"


class Direction(str, enum.Enum):
    ONE_WAY = "one-way"
    TWO_WAY = "two-way"
    BACKWARD = "backward"


@dataclass(frozen=True)
class SortVariant:
    direction: Direction = Direction.ONE_WAY
    full: bool = False
    kind: str = "<="

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.kind not in ("<=", "=", ">="):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "=" and self.direction is not Direction.TWO_WAY:
            raise ValueError("an equality needs two-way comparators")
        if self.kind == ">=" and self.direction is Direction.ONE_WAY:
            raise ValueError("a >= bound needs backward or two-way comparators")
        if self.kind == "<=" and self.direction is Direction.BACKWARD:
            raise ValueError("a <= bound needs one-way or two-way comparators")

    @property
    def forward(self) -> bool:
        return self.direction is not Direction.BACKWARD

    @property
    def backward(self) -> bool:
        return self.direction is not Direction.ONE_WAY


@dataclass(frozen=True)
class Comparator:
    in_top: int
    in_bot: int
    out_top: int  # max
    out_bot: int  # min


@dataclass
class SortNetwork:
    """Wires are integers.  Outputs are labelled 1..n top to bottom, internal wires
    follow in creation order, and the main inputs come last (``n_wires - n + i``
    carries ``x_i``)."""

    n: int
    comparators: list[Comparator]
    inputs: list[int]
    outputs: list[int]
    n_wires: int
    status: dict[int, Status] = field(default_factory=dict)
    merged: dict[int, int] = field(default_factory=dict)  # union-find parent
    reduced: set[int] = field(default_factory=set)  # indices of comparators removed by A/B
    rule_a: int = 0
    rule_b: int = 0

    def copy(self) -> "SortNetwork":
        return SortNetwork(self.n, self.comparators, self.inputs, self.outputs, self.n_wires,
                           dict(self.status), dict(self.merged), set(self.reduced),
                           self.rule_a, self.rule_b)

    def is_main(self, w: int) -> bool:
        return w in self._main_index

    @property
    def _main_index(self) -> dict[int, int]:
        return {w: i for i, w in enumerate(self.inputs)}

    def find(self, w: int) -> int:
        root = w
        while self.merged.get(root, root) != root:
            root = self.merged[root]
        while w != root:
            nxt = self.merged.get(w, w)
            self.merged[w] = root
            w = nxt
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Keep a main wire as representative so its class maps to the main variable.
            if ra in self._main_index:
                self.merged[rb] = ra
            else:
                self.merged[ra] = rb

    def stat(self, w: int) -> Status:
        return self.status.get(w, Status.ACTIVE)

    def dump(self) -> str:
        """Plain-text listing of comparators and statuses for diffing."""
        mains = self._main_index

        def name(w):
            if w in mains:
                base = f"x{mains[w] + 1}"
            else:
                base = f"a{w}"
            s = self.stat(w)
            if s is Status.FALSE:
                return f"~{base}"
            if s is Status.TRUE:
                return f"+{base}"
            if s is Status.IRRELEVANT:
                return f"[{base}]"
            root = self.find(w)
            if root != w:
                return f"{base}={name_plain(root)}"
            return base

        def name_plain(w):
            return f"x{mains[w] + 1}" if w in mains else f"a{w}"

        lines = [f"network n={self.n} comparators={len(self.comparators)}"]
        for idx, c in enumerate(self.comparators):
            mark = " (removed)" if idx in self.reduced else ""
            lines.append(f"{name(c.in_top)} {name(c.in_bot)} -> {name(c.out_top)} {name(c.out_bot)}{mark}")
        return "\n".join(lines) + "\n"


def _odd_even_merge(a: list[int], b: list[int], new_pair) -> list[int]:
    if not a:
        return list(b)
    if not b:
        return list(a)
    if len(a) == 1 and len(b) == 1:
        return list(new_pair(a[0], b[0]))
    odd = _odd_even_merge(a[0::2], b[0::2], new_pair)
    even = _odd_even_merge(a[1::2], b[1::2], new_pair)
    out = [odd[0]]
    i = 1
    while i < len(odd) and i - 1 < len(even):
        out.extend(new_pair(odd[i], even[i - 1]))
        i += 1
    out.extend(odd[i:])
    out.extend(even[i - 1:])
    return out


def build_network(n: int) -> SortNetwork:
    """Odd-even mergesort on ``n`` inputs, splitting ``ceil(n/2)`` over ``floor(n/2)``."""
    if n < 1:
        raise ValueError("n must be positive")
    raw: list[tuple[int, int, int, int]] = []
    counter = [n]  # provisional ids: 0..n-1 are the mains

    def new_pair(p, q):
        t, b = counter[0], counter[0] + 1
        counter[0] += 2
        raw.append((p, q, t, b))
        return t, b

    def sort(ws: list[int]) -> list[int]:
        if len(ws) <= 1:
            return ws
        half = (len(ws) + 1) // 2
        return _odd_even_merge(sort(ws[:half]), sort(ws[half:]), new_pair)

    final = sort(list(range(n)))
    # Relabel: outputs 1..n, then internal wires by creation, then mains.
    label: dict[int, int] = {}
    for i, w in enumerate(final):
        if w >= n:
            label[w] = i + 1
    nxt = n + 1
    for p, q, t, b in raw:
        for w in (t, b):
            if w not in label:
                label[w] = nxt
                nxt += 1
    for i in range(n):
        label[i] = nxt + i
    comparators = [Comparator(label[p], label[q], label[t], label[b]) for p, q, t, b in raw]
    return SortNetwork(
        n=n,
        comparators=comparators,
        inputs=[label[i] for i in range(n)],
        outputs=[label[w] for w in final],
        n_wires=nxt + n - 1,
    )


def eval_network(network: SortNetwork, bits: Sequence[int | bool]) -> list[int]:
    """Two-way functional simulation; returns the outputs top to bottom."""
    if len(bits) != network.n:
        raise ValueError(f"expected {network.n} inputs, got {len(bits)}")
    val = {w: int(bool(b)) for w, b in zip(network.inputs, bits)}
    for c in network.comparators:
        p, q = val[c.in_top], val[c.in_bot]
        val[c.out_top] = max(p, q)
        val[c.out_bot] = min(p, q)
    return [val[w] for w in network.outputs]


def _seed(network: SortNetwork, variant: SortVariant, r: int) -> dict[int, Status]:
    out = network.outputs
    n = network.n
    status: dict[int, Status] = {}
    if variant.kind in ("<=", "="):
        falses = range(r, n) if variant.full else [r]
        for i in falses:
            status[out[i]] = Status.FALSE
    if variant.kind in (">=", "="):
        trues = range(0, r) if variant.full else [r - 1]
        for i in trues:
            status[out[i]] = Status.TRUE
    return status


def propagate_statuses(network: SortNetwork, variant: SortVariant, r: int) -> SortNetwork:
    """Fix output constants for the bound and push known values through the network.

    Known values follow the sorting semantics in both directions, iterated
    to a fixpoint.  Afterwards, working right to left, a wire is active if
    it occurs in a surviving clause of the comparator that consumes it and
    irrelevant otherwise.
    """
    n = network.n
    if not 1 <= r < n:
        raise BadBounds(f"need 1 <= r < n, got r={r}, n={n}")
    net = network.copy()
    net.merged = {}
    net.reduced = set()
    known: dict[int, bool] = {w: s is Status.TRUE for w, s in _seed(net, variant, r).items()}

    users: dict[int, list[Comparator]] = {}
    for c in net.comparators:
        for w in (c.in_top, c.in_bot, c.out_top, c.out_bot):
            users.setdefault(w, []).append(c)

    def deduce(c: Comparator) -> list[tuple[int, bool]]:
        p, q, t, b = (known.get(w) for w in (c.in_top, c.in_bot, c.out_top, c.out_bot))
        found = []
        if p is True or q is True:
            found.append((c.out_top, True))
        if p is True and q is True:
            found.append((c.out_bot, True))
        if p is False and q is False:
            found.append((c.out_top, False))
        if p is False or q is False:
            found.append((c.out_bot, False))
        if t is False:
            found += [(c.in_top, False), (c.in_bot, False)]
        if b is True:
            found += [(c.in_top, True), (c.in_bot, True)]
        if t is True and p is False:
            found.append((c.in_bot, True))
        if t is True and q is False:
            found.append((c.in_top, True))
        if b is False and p is True:
            found.append((c.in_bot, False))
        if b is False and q is True:
            found.append((c.in_top, False))
        return found

    work = list(net.comparators)
    while work:
        c = work.pop()
        for w, v in deduce(c):
            if w in known:
                if known[w] != v:
                    raise BadBounds("contradictory wire statuses")
                continue
            known[w] = v
            work.extend(users.get(w, []))

    status: dict[int, Status] = {w: Status.TRUE if v else Status.FALSE for w, v in known.items()}
    # Relevance, right to left: a wire is active iff a surviving clause of its consumer uses it.
    consumer: dict[int, Comparator] = {}
    for c in net.comparators:
        consumer[c.in_top] = c
        consumer[c.in_bot] = c
    for c in reversed(net.comparators):
        for w in (c.out_top, c.out_bot):
            if w not in status and w not in consumer:
                status[w] = Status.IRRELEVANT
        used = set()
        for clause in _raw_clauses(c, variant):
            simplified = _simplify(clause, status)
            if simplified is not None:
                used.update(w for w, _ in simplified)
        for w in (c.in_top, c.in_bot):
            if w not in status:
                status[w] = Status.ACTIVE if w in used else Status.IRRELEVANT
    for w in net.inputs:
        status.setdefault(w, Status.IRRELEVANT)
    net.status = {w: s for w, s in status.items() if s is not Status.ACTIVE}
    return net


def _raw_clauses(c: Comparator, variant: SortVariant) -> list[list[tuple[int, bool]]]:
    """Comparator clauses as (wire, positive) pairs."""
    p, q, t, b = c.in_top, c.in_bot, c.out_top, c.out_bot
    clauses = []
    if variant.forward:
        clauses += [[(p, False), (t, True)], [(q, False), (t, True)], [(p, False), (q, False), (b, True)]]
    if variant.backward:
        clauses += [[(p, True), (b, False)], [(q, True), (b, False)], [(p, True), (q, True), (t, False)]]
    return clauses


def _simplify(clause, status) -> list[tuple[int, bool]] | None:
    """Substitute known wires; None if the clause is satisfied or touches an irrelevant wire."""
    out = []
    for w, positive in clause:
        s = status.get(w, Status.ACTIVE)
        if s is Status.IRRELEVANT:
            return None
        if s is Status.TRUE or s is Status.FALSE:
            if (s is Status.TRUE) == positive:
                return None
            continue
        out.append((w, positive))
    return out


def reduce_network(network: SortNetwork, one_way: bool) -> SortNetwork:
    """Apply rule A everywhere, then (one-way only) rule B."""
    net = network.copy()
    st = net.stat
    for idx, c in enumerate(net.comparators):
        if st(c.out_bot) is not Status.FALSE or st(c.out_top) is not Status.ACTIVE:
            continue
        for dead, live in ((c.in_top, c.in_bot), (c.in_bot, c.in_top)):
            if st(dead) is Status.FALSE and st(live) is Status.ACTIVE:
                net.union(live, c.out_top)
                net.reduced.add(idx)
                net.rule_a += 1
                break
    if one_way:
        for idx, c in enumerate(net.comparators):
            if idx in net.reduced or st(c.out_bot) is not Status.IRRELEVANT:
                continue
            trio = (c.in_top, c.in_bot, c.out_top)
            if any(st(w) is not Status.ACTIVE for w in trio):
                continue
            if any(_class_has_main(net, w) for w in (c.in_top, c.in_bot)):
                continue
            net.union(c.in_top, c.out_top)
            net.union(c.in_bot, c.out_top)
            net.reduced.add(idx)
            net.rule_b += 1
    return net


def _class_has_main(net: SortNetwork, w: int) -> bool:
    root = net.find(w)
    return any(net.find(m) == root for m in net.inputs)


def network_clauses(net: SortNetwork, variant: SortVariant) -> list[list[tuple[int, bool]]]:
    """Surviving comparator clauses over class representatives."""
    out = []
    for idx, c in enumerate(net.comparators):
        if idx in net.reduced:
            continue
        for clause in _raw_clauses(c, variant):
            simplified = _simplify(clause, net.status)
            if simplified is None:
                continue
            out.append([(net.find(w), positive) for w, positive in simplified])
    return out


def encode_sortnet(
    formula: Formula,
    mains: Sequence[int],
    r: int,
    variant: SortVariant = SortVariant(),
    reduce: bool = True,
) -> dict[int, int]:
    """Append the sorting-network encoding.  Returns output index (1-based) -> literal
    for every output that carries a variable."""
    n = len(mains)
    if variant.kind == ">=":
        # sum >= r  is  sum(~x) <= n - r; the degenerate cases follow from that.
        if r <= 0:
            return {}
        if r >= n:
            encode_degenerate(formula, [-x for x in mains], 0, False)
            return {}
    elif encode_degenerate(formula, mains, r, variant.kind == "="):
        return {}
    net = propagate_statuses(build_network(n), variant, r)
    if reduce:
        net = reduce_network(net, one_way=variant.direction is Direction.ONE_WAY)
    clauses = network_clauses(net, variant)

    main_of = {w: mains[i] for i, w in enumerate(net.inputs)}
    lit_of: dict[int, int] = {}
    for root in sorted({w for clause in clauses for w, _ in clause}):
        if root in main_of:
            lit_of[root] = main_of[root]
        else:
            lit_of[root] = formula.fresh_var()
    for clause in clauses:
        formula.add_clause([lit_of[w] if positive else -lit_of[w] for w, positive in clause])
    outputs = {}
    for i, w in enumerate(net.outputs, start=1):
        root = net.find(w)
        if root in lit_of:
            outputs[i] = lit_of[root]
    return outputs
