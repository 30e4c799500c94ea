import itertools

import pytest

from cardenc.cnf import Formula


def truth_table_models(num_vars, clauses):
    """Every satisfying assignment by exhaustive evaluation, as bool tuples over 1..V."""
    out = []
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            out.append(bits)
    return out


def projected_truth(formula: Formula):
    """Distinct main-block assignments that extend to a model, by brute force over the aux block."""
    n = formula.num_main
    return {m[:n] for m in truth_table_models(formula.num_vars, formula.clauses)}


def expected_mains(n, r, equality):
    return {bits for bits in itertools.product((False, True), repeat=n)
            if (sum(bits) == r if equality else sum(bits) <= r)}


@pytest.fixture
def tiny_formula():
    f = Formula(3)
    f.add_clause([1, 2])
    f.add_clause([-1, 3])
    return f


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
