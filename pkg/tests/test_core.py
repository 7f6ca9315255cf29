import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornice.core import (
    FALSE,
    TRUE,
    BooleanArg,
    DataPoint,
    DecisionTree,
    HornSample,
    IncompleteTreeError,
    LinearIneq,
    Lit,
    LocationEquals,
    PartialValuation,
    check_consistency,
    classify,
    eval_attribute,
    evaluate,
    evaluate_columns,
    format_formula,
    make_constraint,
    specialize,
    tree_formula_for,
    tree_to_formula,
)

X_MINUS_Y = ((0, 1), (1, -1))


def leaf(label):
    return DecisionTree.leaf(label=label)


def test_location_attribute():
    assert eval_attribute(LocationEquals("P4"), DataPoint(0, "P4", (2, 1)))
    assert not eval_attribute(LocationEquals("P0"), DataPoint(0, "P4", (2, 1)))


def test_linear_attribute_boundary():
    a = LinearIneq(X_MINUS_Y, 0)
    assert eval_attribute(a, DataPoint(0, "P", (0, 0)))
    assert not eval_attribute(a, DataPoint(0, "P", (2, 1)))


def test_boolean_and_padded_slots():
    assert eval_attribute(BooleanArg(1), DataPoint(0, "P", (0, True)))
    assert not eval_attribute(BooleanArg(1), DataPoint(0, "P", (0, False)))
    # slot beyond the args reads as 0
    assert eval_attribute(LinearIneq(((5, 1),), 0), DataPoint(0, "P", (3,)))


@pytest.mark.parametrize("terms", [(), ((0, 1), (1, 1), (2, 1)), ((0, 2),), ((0, 1), (0, -1))])
def test_linear_attribute_rejects_non_octagonal(terms):
    with pytest.raises(ValueError):
        LinearIneq(terms, 0)


def test_leaf_formulas():
    assert tree_to_formula(leaf(True)) == TRUE
    assert tree_to_formula(leaf(False)) == FALSE


def test_single_split_formula_agrees_with_classify():
    a = LinearIneq(X_MINUS_Y, 0)
    tree = DecisionTree.split(a, leaf(True), leaf(False))
    assert tree_to_formula(tree) == Lit(a)
    for args in [(0, 0), (1, 0), (-3, 2), (2, 1)]:
        p = DataPoint(0, "P", args)
        assert classify(tree, p) == evaluate(tree_to_formula(tree), p) == (args[0] - args[1] <= 0)


def location_rooted_tree():
    inner_p2 = DecisionTree.split(LinearIneq(X_MINUS_Y, -1), leaf(True), leaf(False))
    inner_rest = DecisionTree.split(LinearIneq(X_MINUS_Y, 0), leaf(True), leaf(False))
    return DecisionTree.split(LocationEquals("P2"), inner_p2, inner_rest)


def test_classify_location_rooted_tree():
    tree = location_rooted_tree()
    assert classify(tree, DataPoint(0, "P2", (1, 1))) is False
    assert classify(tree, DataPoint(1, "P0", (0, 0))) is True


def test_incomplete_tree_errors():
    tree = DecisionTree.split(LocationEquals("P"), leaf(True), leaf(None))
    with pytest.raises(IncompleteTreeError):
        tree_to_formula(tree)
    with pytest.raises(IncompleteTreeError):
        classify(tree, DataPoint(0, "Q", (0,)))
    with pytest.raises(IncompleteTreeError):
        tree_formula_for(tree, "P", 1)


def test_consistency_examples():
    s = HornSample(1)
    d1, d2 = s.add_point("P", (1,)), s.add_point("Q", (2,))
    assert check_consistency({d1: True, d2: True}, s)  # no constraints yet
    s.add_constraint(make_constraint((d1, d2), None))
    assert not check_consistency({d1: True, d2: True}, s)
    assert check_consistency({d1: True, d2: False}, s)

    t = HornSample(1)
    d = t.add_point("P", (0,))
    t.add_constraint(make_constraint((), d))
    assert check_consistency({d: True}, t)


def test_sample_dedup_and_padding():
    s = HornSample(3)
    a = s.add_point("P", (1, 2))
    assert s.add_point("P", (1, 2, 0)) == a
    assert len(s) == 1
    assert s.points[a].args == (1, 2, 0)
    assert s.add_point("Q", (1, 2)) != a
    with pytest.raises(ValueError):
        s.add_point("P", (1, 2, 3, 4))


def test_constraint_forms_and_dedup():
    s = HornSample(1)
    a, b = s.add_point("P", (0,)), s.add_point("P", (1,))
    assert make_constraint((), a).kind == "pos"
    assert make_constraint((a,), None).kind == "neg"
    assert make_constraint((a, b), None).kind == "horn"
    assert make_constraint((a,), b).kind == "horn"
    assert s.add_constraint(make_constraint((a,), b))
    assert not s.add_constraint(make_constraint((a,), b))
    with pytest.raises(ValueError):
        s.add_constraint(make_constraint((7,), None))


def test_partial_valuation_refuses_flip():
    u = PartialValuation({1: True})
    u.extend(true=[1, 2], false=[3])
    assert u.dom_true == {1, 2} and u.dom_false == {3}
    with pytest.raises(ValueError):
        u.extend(false=[1])


def test_specialize_fixes_location_and_padding():
    f = Lit(LocationEquals("P"))
    assert specialize(f, "P", 2) == TRUE
    assert specialize(f, "Q", 2) == FALSE
    # slot 2 is padding for an arity-2 unknown: x0 + x2 <= 1 becomes x0 <= 1
    g = Lit(LinearIneq(((0, 1), (2, 1)), 1))
    assert specialize(g, "P", 2) == Lit(LinearIneq(((0, 1),), 1))
    assert specialize(Lit(LinearIneq(((2, 1),), -1)), "P", 2) == FALSE


def test_format_formula():
    a = LinearIneq(X_MINUS_Y, 0)
    f = tree_to_formula(DecisionTree.split(a, leaf(False), leaf(True)))
    assert format_formula(f, ("x", "y")) == "!(x - y <= 0)"
    assert format_formula(Lit(LocationEquals("P2"))) == "l == P2"


# -- random trees --------------------------------------------------------

ATTRS = [
    LocationEquals("P"),
    LocationEquals("Q"),
    BooleanArg(2),
    LinearIneq(((0, 1),), 0),
    LinearIneq(((0, 1), (1, -1)), 1),
    LinearIneq(((0, -1), (1, -1)), -2),
    LinearIneq(((1, 1), (2, 1)), 0),
]


@st.composite
def trees(draw, depth=4):
    if depth == 0 or draw(st.booleans()):
        return leaf(draw(st.booleans()))
    attr = draw(st.sampled_from(ATTRS))
    return DecisionTree.split(attr, draw(trees(depth=depth - 1)), draw(trees(depth=depth - 1)))


points = st.builds(
    lambda i, loc, x, y, b: DataPoint(i, loc, (x, y, b)),
    st.just(0), st.sampled_from(["P", "Q"]), st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 1),
)


@settings(max_examples=200, deadline=None)
@given(trees(), st.lists(points, min_size=1, max_size=20))
def test_classify_matches_formula(tree, pts):
    f = tree_to_formula(tree)
    for p in pts:
        assert classify(tree, p) == evaluate(f, p)


@settings(max_examples=200, deadline=None)
@given(trees(), st.lists(points, min_size=1, max_size=20))
def test_compact_projection_matches_specialized_formula(tree, pts):
    f = tree_to_formula(tree)
    for loc in ("P", "Q"):
        g = tree_formula_for(tree, loc, 3)
        h = specialize(f, loc, 3)
        for p in pts:
            q = DataPoint(0, loc, p.args)
            assert evaluate(g, q) == evaluate(h, q) == classify(tree, q)


@settings(max_examples=100, deadline=None)
@given(trees(), st.lists(points, min_size=1, max_size=20))
def test_columns_match_scalar_evaluation(tree, pts):
    import numpy as np

    f = tree_to_formula(tree)
    for loc in ("P", "Q"):
        cols = [np.array([p.args[i] for p in pts]) for i in range(3)]
        got = np.broadcast_to(evaluate_columns(f, loc, cols), (len(pts),))
        want = [evaluate(f, DataPoint(0, loc, p.args)) for p in pts]
        assert list(got) == want
