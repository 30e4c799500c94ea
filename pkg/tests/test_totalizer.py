import itertools

import pytest

from cardenc.cnf import BadBounds, Formula, stats
from cardenc.solve import enumerate_models
from cardenc.totalizer import (
    TotalizerTree, encode_totalizer_atmost, encode_totalizer_equality, tree_atmost_size,
    tree_variable_bound,
)

from conftest import expected_mains

FLAGS = [(False, False), (True, False), (False, True), (True, True)]


def atmost(n, r, sideways=False, inequality=False):
    f = Formula(n)
    table = encode_totalizer_atmost(f, f.mains, r, sideways, inequality)
    return f, table


def test_tree_layout():
    tree = TotalizerTree.build(5, 2)
    assert tree.leaves[1] == 5
    assert all(tree.leaves[k] == 1 for k in range(5, 10))
    assert tree.leaves[2] == tree.leaves[4] + tree.leaves[5]
    assert tree.cap[1] == 2 and tree.cocap[1] == 3


@pytest.mark.parametrize("sideways, inequality", FLAGS)
def test_projection_small(sideways, inequality):
    for n in range(2, 7):
        for r in range(1, n):
            f, _ = atmost(n, r, sideways, inequality)
            got = set(enumerate_models(f, "mains", keep_models=True).models)
            assert got == expected_mains(n, r, False), (n, r)


def test_equality_projection_small():
    for n in range(2, 7):
        for r in range(1, n):
            f = Formula(n)
            encode_totalizer_equality(f, f.mains, r)
            got = set(enumerate_models(f, "mains", keep_models=True).models)
            assert got == expected_mains(n, r, True)


def test_equality_node_variables_are_exact_counts():
    n, r = 6, 3
    f = Formula(n)
    table = encode_totalizer_equality(f, f.mains, r)
    tree = table.tree
    for m in enumerate_models(f, "all", keep_models=True).models:
        below = {}
        for k in range(2 * n - 1, 0, -1):
            below[k] = int(m[k - n]) if k >= n else below[2 * k] + below[2 * k + 1]
        for (k, j), v in table.var.items():
            if k < n:
                assert m[v - 1] == (below[k] >= j), (k, j)
    assert tree.n == n


def test_fast_size_matches_generator():
    for n in range(2, 40):
        for r in range(1, n):
            assert tree_atmost_size(n, r) == stats(atmost(n, r)[0]).astuple(), (n, r)


def test_variable_bound():
    for n in range(3, 60):
        for r in range(1, n):
            assert tree_atmost_size(n, r)[0] <= tree_variable_bound(n, r)


def test_table_sizes_n66():
    assert stats(atmost(66, 36)[0]).astuple() == (328, 1402, 3854, 132)
    f = Formula(66)
    encode_totalizer_equality(f, f.mains, 36)
    assert stats(f).astuple() == (328, 3080, 8254, 264)


def test_equality_without_sideways_is_smaller():
    f = Formula(66)
    encode_totalizer_equality(f, f.mains, 36, sideways=False)
    assert stats(f).astuple() == (328, 2816, 7726, 264)


def test_inequality_strengthening_never_uses_positive_mains():
    f, _ = atmost(9, 4, inequality=True)
    assert all(l < 0 for c in f.clauses for l in c if abs(l) <= 9)


@pytest.mark.parametrize("n, r", [(3, 3), (4, 0)])
def test_degenerate(n, r):
    f, _ = atmost(n, r)
    got = set(enumerate_models(f, "mains", keep_models=True).models)
    assert got == expected_mains(n, r, False)


def test_bad_bounds():
    with pytest.raises(BadBounds):
        tree_atmost_size(4, 4)
    with pytest.raises(BadBounds):
        atmost(4, -2)
