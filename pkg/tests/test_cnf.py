import pytest
from hypothesis import given, strategies as st

from cardenc.cnf import (
    BadBounds, CountMismatch, EmptyClause, Formula, ParseError, Tautology, UnallocatedVariable,
    encode_degenerate, read_dimacs, stats, write_dimacs,
)


@st.composite
def formulas(draw):
    mains = draw(st.integers(0, 6))
    extra = draw(st.integers(0 if mains else 1, 6))
    total = mains + extra
    f = Formula(mains, next_var=total + 1)
    for _ in range(draw(st.integers(0, 12))):
        vs = draw(st.lists(st.integers(1, total), min_size=1, max_size=4, unique=True))
        f.add_clause([v if draw(st.booleans()) else -v for v in vs])
    for i in range(draw(st.integers(0, 2))):
        f.set_meta(f"key{i}", draw(st.integers(0, 99)))
    return f


@given(formulas())
def test_dimacs_round_trip(f):
    g = read_dimacs(write_dimacs(f))
    assert g.clauses == f.clauses
    assert g.num_main == f.num_main and g.num_vars == f.num_vars
    assert g.meta == f.meta
    assert write_dimacs(g) == write_dimacs(f)


def test_add_clause_rejects_bad_input():
    f = Formula(2)
    with pytest.raises(UnallocatedVariable):
        f.add_clause([3])
    with pytest.raises(UnallocatedVariable):
        f.add_clause([0])
    with pytest.raises(Tautology):
        f.add_clause([1, -1])
    with pytest.raises(EmptyClause):
        f.add_clause([])
    f.add_clause([1, 1, -2])
    assert f.clauses == [(1, -2)]


def test_fresh_vars_follow_mains():
    f = Formula(4)
    assert f.fresh_var() == 5
    assert f.fresh_vars(2) == [6, 7]
    assert f.num_vars == 7 and f.mains == [1, 2, 3, 4]


def test_stats_counts_main_literals():
    f = Formula(2)
    a = f.fresh_var()
    f.add_clause([1, -a])
    f.add_clause([-1, -2, a])
    assert stats(f).astuple() == (1, 2, 5, 3)


def test_set_meta_replaces():
    f = Formula(1)
    f.set_meta("r", 3)
    f.set_meta("r", 4)
    assert f.meta == {"r": "4"}
    with pytest.raises(ValueError):
        f.set_meta("two words", 1)


@pytest.mark.parametrize("text, exc", [
    ("1 2 0\n", ParseError),
    ("p cnf 2\n1 0\n", ParseError),
    ("p cnf 2 1\n1 x 0\n", ParseError),
    ("p cnf 2 1\n3 0\n", ParseError),
    ("p cnf 2 2\n1 0\n", CountMismatch),
    ("p cnf 2 1\n0\n", ParseError),
    ("", ParseError),
    ("c mains 5\np cnf 2 0\n", CountMismatch),
])
def test_read_errors(text, exc):
    with pytest.raises(exc):
        read_dimacs(text)


def test_parse_error_has_line_number():
    with pytest.raises(ParseError) as info:
        read_dimacs("c hi\np cnf 2 1\n1 oops 0\n")
    assert info.value.lineno == 3


def test_read_multiline_clause_and_default_mains():
    f = read_dimacs("p cnf 3 1\n1 2\n-3 0\n")
    assert f.clauses == [(1, 2, -3)] and f.num_main == 3


def test_check_model_accepts_dict_and_list(tiny_formula):
    assert tiny_formula.check_model({1: True, 2: False, 3: True})
    assert not tiny_formula.check_model([False, True, False, False])


@pytest.mark.parametrize("r, equality, units", [(0, False, [-1, -2, -3]), (3, False, []),
                                                (5, False, []), (3, True, [1, 2, 3])])
def test_degenerate_bounds(r, equality, units):
    f = Formula(3)
    assert encode_degenerate(f, f.mains, r, equality)
    assert [c[0] for c in f.clauses] == units


def test_degenerate_rejects_impossible():
    f = Formula(3)
    with pytest.raises(BadBounds):
        encode_degenerate(f, f.mains, -1, False)
    with pytest.raises(BadBounds):
        encode_degenerate(f, f.mains, 4, True)
    assert not encode_degenerate(f, f.mains, 2, False)
