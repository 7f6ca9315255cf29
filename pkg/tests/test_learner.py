import io
import json

import pytest

from hornice.attr_select import AttributePool
from hornice.core import (
    HornSample,
    LinearIneq,
    LocationEquals,
    PartialValuation,
    check_consistency,
    make_constraint,
)
from hornice.learner import (
    InseparablePoints,
    LearnerState,
    UnsatisfiableSample,
    add_iff_constraints,
    jsonl_writer,
    label_node,
    learn,
    learn_tree,
    split_node,
)
from oracles import brute_force_satisfiable, gen_random_sample, gen_satisfiable_sample

POOL = AttributePool(("P", "Q", "R"), (0, 1), ())


def one_point(*constraints_of):
    s = HornSample(1)
    d = s.add_point("P", (0,))
    for premises, conclusion in constraints_of:
        s.add_constraint(make_constraint(premises, conclusion))
    return s, d


def test_positive_point_gives_true_leaf():
    s, d = one_point(((), 0))
    tree = learn_tree(s, POOL)
    assert tree.root.is_leaf and tree.root.label is True


def test_contradiction_is_unsatisfiable():
    s, _ = one_point(((), 0), ((0,), None))
    with pytest.raises(UnsatisfiableSample):
        learn_tree(s, POOL)


def test_label_positive_with_no_constraints():
    s, d = one_point(((), 0))
    state = LearnerState(s, POOL)
    assert label_node(state.tree.root, state)
    assert state.u[d] is True and state.tree.root.label is True


def test_label_falls_back_to_negative():
    s = HornSample(1)
    d1, d2 = s.add_point("P", (0,)), s.add_point("P", (1,))
    s.add_constraint(make_constraint((d1, d2), None))
    state = LearnerState(s, POOL, u=PartialValuation({d1: True}))
    node = state.tree.new_node([d2])
    assert label_node(node, state)
    assert node.label is False and state.u[d2] is False


def test_split_on_location():
    s = HornSample(4)
    a = s.add_point("P0", (0, 0))
    b = s.add_point("G2", (0, 0, -1, 0))
    state = LearnerState(s, [LocationEquals("P0"), LinearIneq(((2, 1),), -1)])
    node = state.tree.root
    assert split_node(node, state)
    assert node.attribute == LocationEquals("P0")
    assert (node.left.points, node.right.points) == ([a], [b])


def test_split_indistinguishable_points_fails():
    s = HornSample(2)
    s.add_point("P", (1, 1))
    s.add_point("P", (1, 2))
    # the only attribute reads slot 0, where the points agree
    state = LearnerState(s, [LinearIneq(((0, 1),), 0)])
    assert not split_node(state.tree.root, state)


def test_split_sizes_three_two():
    s = HornSample(1)
    ids = [s.add_point("P", (v,)) for v in (-2, -1, 0, 1, 2)]
    u = PartialValuation({ids[0]: True, ids[1]: True, ids[2]: True, ids[3]: False, ids[4]: False})
    state = LearnerState(s, [LinearIneq(((0, 1),), 0)], u=u)
    assert split_node(state.tree.root, state)
    assert (len(state.tree.root.left.points), len(state.tree.root.right.points)) == (3, 2)


def test_inseparable_points_get_iff_constraints():
    s = HornSample(2)
    a = s.add_point("P", (5, 5))
    b = s.add_point("P", (7, 7))
    s.add_constraint(make_constraint((), a))
    s.add_constraint(make_constraint((b,), None))
    pool = AttributePool(("P",), (0, 1), (), cap=1)
    with pytest.raises(InseparablePoints):
        learn(s, pool)
    aug = add_iff_constraints(s, pool)
    assert len(aug.constraints) == len(s.constraints) + 2
    assert make_constraint((a,), b) in aug.constraints and make_constraint((b,), a) in aug.constraints
    with pytest.raises(UnsatisfiableSample):
        learn(aug, pool)


def test_iff_constraints_unchanged_when_separable():
    s = gen_random_sample("iff-sep", 10, 8)
    aug = add_iff_constraints(s, POOL)
    assert aug.constraints == s.constraints


def test_same_location_padded_points_then_learner_succeeds():
    s = HornSample(3)
    a = s.add_point("P", (1, 2))
    b = s.add_point("P", (1, 2, 9))  # differs only in a slot the pool ignores
    s.add_constraint(make_constraint((), a))
    s.add_constraint(make_constraint((b,), a))
    pool = AttributePool(("P",), (0, 1), ())
    aug = add_iff_constraints(s, pool)
    assert len(aug.constraints) == len(s.constraints) + 1  # b => a was already there
    tree = learn_tree(aug, pool)
    assert check_consistency(tree, aug)


def test_trace_records_are_json_lines():
    s, _ = gen_satisfiable_sample("trace", 12, 10)
    buf = io.StringIO()
    learn(s, POOL, trace=jsonl_writer(buf))
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert records and {r["action"] for r in records} <= {"label", "split"}


def leaf_partition_holds(tree, n):
    seen = [p for leaf in tree.leaves() for p in leaf.points]
    return sorted(seen) == list(range(n))


@pytest.mark.parametrize("seed", range(150))
def test_consistent_on_satisfiable_samples(seed):
    n = 5 + seed % 36
    s, _ = gen_satisfiable_sample(f"learn-{seed}", n, n)
    state = learn(s, POOL)
    assert check_consistency(state.tree, s)
    assert state.solver_calls <= 2 * n
    assert state.tree.size() <= 2 * n
    assert leaf_partition_holds(state.tree, n)
    # u extends the tree labels
    for leaf in state.tree.leaves():
        assert all(state.u.get(p, leaf.label) == leaf.label for p in leaf.points)


@pytest.mark.parametrize("seed", range(80))
def test_unsat_iff_oracle_unsat(seed):
    s = gen_random_sample(f"unsat-{seed}", 8, 10 + seed % 10)
    sat = brute_force_satisfiable(s.constraints, len(s))
    try:
        tree = learn_tree(s, POOL)
    except UnsatisfiableSample:
        assert not sat
    else:
        assert sat and check_consistency(tree, s)


def test_deterministic():
    s, _ = gen_satisfiable_sample("det", 30, 30)
    a, b = learn_tree(s, POOL), learn_tree(s, POOL)
    assert [(n.id, n.attribute, n.label) for n in a.nodes()] == [(n.id, n.attribute, n.label) for n in b.nodes()]
