import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornice.core import PartialValuation, make_constraint
from hornice.horn_solver import (
    FALSE_VAR,
    MarkState,
    PreconditionError,
    augment,
    format_marks,
    horn_solve,
    propagate_marks,
)
from oracles import brute_force_horn, gen_solver_instance

X, Y, Z, A, B = range(5)
NAMES = dict(enumerate("xyzab"))


def pebbling_example():
    return [
        make_constraint([X], Y),
        make_constraint([X, Y], Z),
        make_constraint([A], B),
        make_constraint([B], A),
        make_constraint([A, B], None),
    ]


def test_pebbling_example_result():
    r = horn_solve(pebbling_example(), PartialValuation(), T=[X])
    assert r.sat
    assert r.forced_true == {Y, Z}
    assert r.forced_false == {A, B}


def test_pebbling_example_final_marking():
    r = horn_solve(pebbling_example(), T=[X], keep_marks=True)
    table = dict(line.split(": ", 1) for line in format_marks(r.marks, NAMES).splitlines())
    assert set(table["y"].split(", ")) == {"*", "*y", "*x"}
    assert set(table["False"].split(", ")) == {"*a", "*b"}
    assert "*" not in table["False"].split(", ")


def test_empty_instance():
    r = horn_solve([], PartialValuation())
    assert r.sat and r.forced_true == set() and r.forced_false == set()


def test_fact_marks_star():
    variables, clauses = augment([make_constraint((), 0)], PartialValuation())
    marks = propagate_marks(MarkState.seeded(variables), clauses)
    assert 0 in marks.star


def test_chain_propagates():
    k = 30
    chain = [make_constraint([i], i + 1) for i in range(k - 1)]
    r = horn_solve(chain, T=[0])
    assert r.forced_true == set(range(1, k))


def test_unsat_reports_empty_sets():
    r = horn_solve([make_constraint([0], None)], T=[0])
    assert not r.sat
    assert r.forced_true == set() and r.forced_false == set()
    full = horn_solve([make_constraint([0], None)], T=[0], keep_marks=True)
    assert FALSE_VAR in full.marks.star


def test_decided_ids_are_excluded():
    C = [make_constraint([0], 1)]
    u = PartialValuation({0: True})
    r = horn_solve(C, u)
    assert r.forced_true == {1}
    # same-sign duplication between u and T is benign
    assert horn_solve(C, u, T=[0]).forced_true == {1}


@pytest.mark.parametrize("u,T,F", [
    ({}, [0], [0]),
    ({0: True}, [], [0]),
    ({0: False}, [0], []),
])
def test_precondition_errors(u, T, F):
    with pytest.raises(PreconditionError):
        horn_solve([make_constraint([0], 1)], PartialValuation(u), T, F)


def test_propagation_is_idempotent():
    variables, clauses = augment(pebbling_example(), PartialValuation(), T=[X])
    once = propagate_marks(MarkState.seeded(variables), clauses)
    twice = propagate_marks(once, clauses)
    assert once.same_marks(twice)


@pytest.mark.parametrize("seed", range(300))
def test_matches_oracle(seed):
    n = 3 + seed % 10
    h = 1 + seed % 30
    C, u, T, F = gen_solver_instance(f"solver-{seed}", n, h)
    want = brute_force_horn(C, u, T, F)
    fast = horn_solve(C, u, T, F)
    full = horn_solve(C, u, T, F, keep_marks=True)
    assert fast == full
    assert fast.sat == want.satisfiable
    if want.satisfiable:
        assert fast.forced_true == want.forced_true
        assert fast.forced_false == want.forced_false


constraints = st.lists(
    st.tuples(st.lists(st.integers(0, 7), max_size=3), st.one_of(st.none(), st.integers(0, 7))),
    max_size=16,
)


@settings(max_examples=300, deadline=None)
@given(constraints, st.sets(st.integers(0, 7), max_size=3), st.sets(st.integers(0, 7), max_size=3))
def test_matches_oracle_hypothesis(raw, T, F):
    F = F - T
    C = [make_constraint(p, c) for p, c in raw]
    want = brute_force_horn(C, None, T, F)
    got = horn_solve(C, PartialValuation(), T, F)
    assert got.sat == want.satisfiable
    if got.sat:
        assert (got.forced_true, got.forced_false) == (want.forced_true, want.forced_false)
        assert not (got.forced_true & got.forced_false)
        assert not ((got.forced_true | got.forced_false) & (T | F))
