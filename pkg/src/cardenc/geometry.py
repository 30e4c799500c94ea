"""Grid-covering test cases: pick the fewest points so every shape has one.

Square grids index point ``(row, col)`` as ``row * L + col``.  Triangular
grids use axial coordinates: row ``i`` in ``0..L-1`` holds positions
``j`` in ``0..i``, and points are numbered row by row.  In those
coordinates the row step and the position step are unit lattice vectors
at 120 degrees, so the squared distance of a displacement ``(di, dj)`` is
``di^2 - di*dj + dj^2``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .cnf import Formula
from .encoders import EncoderConfig, encode_cardinality

SQUARE_SEQUENCES = ("A152125", "A240443")
TRIANGLE_SEQUENCES = ("A319158", "A227116", "A319159")
SEQUENCES = SQUARE_SEQUENCES + TRIANGLE_SEQUENCES

# Known optima a(L), starting at L = 2.
TABLE: dict[str, tuple[int, ...]] = {
    "A152125": (1, 2, 4, 8, 12, 17, 23, 30, 39),
    "A240443": (1, 3, 6, 10, 15, 21, 27, 34, 42),
    "A319158": (1, 2, 4, 6, 9, 13, 18, 23, 29, 35, 43, 51),
    "A227116": (1, 2, 4, 7, 9, 14, 18, 23, 29, 36, 44, 52, 61, 71),
    "A319159": (1, 2, 4, 7, 11, 16, 22, 28, 35, 44, 53, 63, 74, 86),
}

ORDERINGS = ("row", "spiral", "random")


class BadSize(ValueError):
    pass


class UnknownSequence(ValueError):
    pass


class UnsupportedOrdering(ValueError):
    pass


def _check_sequence(sequence: str) -> None:
    if sequence not in SEQUENCES:
        raise UnknownSequence(f"unknown sequence {sequence!r}; expected one of {SEQUENCES}")


@dataclass(frozen=True)
class GridKind:
    family: str
    L: int

    def __post_init__(self):
        if self.family not in ("square", "triangular"):
            raise ValueError(f"unknown grid family {self.family!r}")
        if self.L < 1:
            raise BadSize(f"grid side must be positive, got {self.L}")

    @classmethod
    def for_sequence(cls, sequence: str, L: int) -> "GridKind":
        _check_sequence(sequence)
        return cls("square" if sequence in SQUARE_SEQUENCES else "triangular", L)

    @property
    def n(self) -> int:
        return self.L * self.L if self.family == "square" else self.L * (self.L + 1) // 2

    def point(self, a: int, b: int) -> int:
        """Point id of square ``(row, col)`` or triangular ``(i, j)``."""
        if self.family == "square":
            return a * self.L + b
        return a * (a + 1) // 2 + b

    def coords(self) -> list[tuple[int, int]]:
        if self.family == "square":
            return [(a, b) for a in range(self.L) for b in range(self.L)]
        return [(i, j) for i in range(self.L) for j in range(i + 1)]


Shape = tuple[int, ...]


def known_value(sequence: str, L: int) -> int:
    _check_sequence(sequence)
    values = TABLE[sequence]
    if not 2 <= L < 2 + len(values):
        raise BadSize(f"{sequence}({L}) is not tabulated; known for L = 2..{len(values) + 1}")
    return values[L - 2]


def _squares(L: int, tilted: bool) -> list[Shape]:
    g = GridKind("square", L)
    out = []
    for s in range(1, L):
        for row in range(L - s):
            for col in range(L - s):
                for a in range(s if tilted else 1):
                    # Corner displacement (a, s - a) inside the s x s box at (row, col).
                    corners = ((row, col + a), (row + a, col + s), (row + s, col + s - a), (row + s - a, col))
                    out.append(tuple(sorted(g.point(*c) for c in corners)))
    return out


def _triangles(L: int, downward: bool, tilted: bool) -> list[Shape]:
    g = GridKind("triangular", L)
    out = []
    for s in range(1, L):
        for i in range(L - s):
            for j in range(i + 1):
                # Upward triangle (i,j), (i+s,j), (i+s,j+s) and the ones inscribed in it.
                for t in range(s if tilted else 1):
                    corners = ((i + t, j), (i + s, j + t), (i + s - t, j + s - t))
                    out.append(tuple(sorted(g.point(*c) for c in corners)))
        if downward and not tilted:
            for i in range(s, L - s):
                for j in range(i - s + 1):
                    corners = ((i, j), (i, j + s), (i + s, j + s))
                    out.append(tuple(sorted(g.point(*c) for c in corners)))
    return out


def enumerate_shapes(sequence: str, L: int) -> list[Shape]:
    """Corner point ids of every shape that must be hit, sorted lexicographically."""
    _check_sequence(sequence)
    if L < 2:
        raise BadSize(f"need L >= 2, got {L}")
    if sequence == "A152125":
        shapes = _squares(L, tilted=False)
    elif sequence == "A240443":
        shapes = _squares(L, tilted=True)
    elif sequence == "A319158":
        shapes = _triangles(L, downward=False, tilted=False)
    elif sequence == "A227116":
        shapes = _triangles(L, downward=True, tilted=False)
    else:
        shapes = _triangles(L, downward=False, tilted=True)
    return sorted(set(shapes))


def lattice_dist2(kind: GridKind, p: tuple[int, int], q: tuple[int, int]) -> int:
    da, db = q[0] - p[0], q[1] - p[1]
    if kind.family == "square":
        return da * da + db * db
    return da * da - da * db + db * db


def _spiral(L: int) -> list[int]:
    # Counter-clockwise with rows growing downwards: east, north, west, south.
    c = (L - 1) // 2
    row, col = (c + 1, c) if L % 2 == 0 else (c, c)
    steps = ((0, 1), (-1, 0), (0, -1), (1, 0))
    order = [row * L + col]
    length, d = 1, 0
    while len(order) < L * L:
        for _ in range(2):
            dr, dc = steps[d % 4]
            for _ in range(length):
                row, col = row + dr, col + dc
                if 0 <= row < L and 0 <= col < L:
                    order.append(row * L + col)
            d += 1
        length += 1
    return order


def point_ordering(kind: GridKind, ordering: str = "row", seed: int = 0) -> list[int]:
    """Point ids in the order they receive main variables ``1, 2, ...``."""
    if ordering == "row":
        return list(range(kind.n))
    if ordering == "spiral":
        if kind.family != "square":
            raise UnsupportedOrdering("the spiral ordering is defined for square grids only")
        return _spiral(kind.L)
    if ordering == "random":
        order = list(range(kind.n))
        random.Random(seed).shuffle(order)
        return order
    raise UnsupportedOrdering(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")


@dataclass(frozen=True)
class TestCaseSpec:
    sequence: str
    L: int
    polarity: str = "SAT"
    ordering: str = "row"
    seed: int = 0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        _check_sequence(self.sequence)
        if self.polarity not in ("SAT", "UNSAT"):
            raise ValueError(f"polarity must be SAT or UNSAT, got {self.polarity!r}")
        if self.ordering not in ORDERINGS:
            raise UnsupportedOrdering(f"unknown ordering {self.ordering!r}")
        known_value(self.sequence, self.L)

    @property
    def kind(self) -> GridKind:
        return GridKind.for_sequence(self.sequence, self.L)

    @property
    def r(self) -> int:
        a = known_value(self.sequence, self.L)
        return a if self.polarity == "SAT" else a - 1

    @property
    def name(self) -> str:
        tail = f"-s{self.seed}" if self.ordering == "random" else ""
        return f"{self.sequence}-L{self.L}-{self.polarity}-{self.ordering}{tail}"


def build_instance(spec: TestCaseSpec, config: EncoderConfig = EncoderConfig(),
                   r: int | None = None) -> Formula:
    """Covering clauses for ``spec`` plus the cardinality constraint on all points.

    ``r`` overrides the bound implied by the polarity.
    """
    kind = spec.kind
    bound = spec.r if r is None else r
    order = point_ordering(kind, spec.ordering, spec.seed)
    var_of = [0] * kind.n
    for index, point in enumerate(order, start=1):
        var_of[point] = index
    formula = Formula(kind.n)
    for key, value in (("instance", spec.name), ("sequence", spec.sequence), ("L", spec.L),
                       ("polarity", spec.polarity), ("r", bound), ("ordering", spec.ordering),
                       ("seed", spec.seed), ("encoding", config.label)):
        formula.set_meta(key, value)
    for shape in enumerate_shapes(spec.sequence, spec.L):
        formula.add_clause(var_of[p] for p in shape)
    encode_cardinality(formula, formula.mains, bound, config)
    return formula


def covers(sequence: str, L: int, points: Sequence[int]) -> bool:
    chosen = set(points)
    return all(chosen.intersection(s) for s in enumerate_shapes(sequence, L))
