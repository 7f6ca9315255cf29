"""Decision-tree learning from Horn samples.

The learner grows one tree breadth-first, keeping a partial valuation of the
sample points that always extends the labels fixed by the tree and stays
consistent with the constraints.  Every labeling is first checked with
:func:`horn_solve`, whose forced points are folded into the valuation.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .attr_select import as_pool, select_attribute
from .core import DecisionTree, HornSample, Node, PartialValuation, make_constraint
from .horn_solver import horn_solve


class LearningFailure(Exception):
    reason = "failure"


class UnsatisfiableSample(LearningFailure):
    reason = "unsatisfiable"


class InseparablePoints(LearningFailure):
    reason = "inseparable"

    def __init__(self, message: str, node: Node | None = None):
        super().__init__(message)
        self.node = node


class UnlabelableLeaf(LearningFailure):
    """A singleton leaf could be labeled neither way (cannot happen on a consistent state)."""

    reason = "unlabelable"


@dataclass
class LearnerState:
    sample: HornSample
    pool: object
    penalty: float = 1.0
    tree: DecisionTree = None
    u: PartialValuation = field(default_factory=PartialValuation)
    queue: deque = field(default_factory=deque)
    solver_calls: int = 0
    steps: int = 0
    trace: Callable[[dict], None] | None = None

    def __post_init__(self):
        self.pool = as_pool(self.pool)
        if self.tree is None:
            self.tree = DecisionTree.leaf(range(len(self.sample.points)))
            self.queue.append(self.tree.root)

    def solve(self, T=(), F=()):
        self.solver_calls += 1
        return horn_solve(self.sample.constraints, self.u, T, F)

    def emit(self, **record) -> None:
        if self.trace is not None:
            self.trace(record)


def is_pure(node: Node, u: PartialValuation) -> bool:
    has_true = any(u.get(p) is True for p in node.points)
    has_false = any(u.get(p) is False for p in node.points)
    return not (has_true and has_false)


def label_node(node: Node, state: LearnerState) -> bool:
    """Try to label a pure leaf, positive first unless it holds negative points."""
    u = state.u
    has_true = any(u.get(p) is True for p in node.points)
    has_false = any(u.get(p) is False for p in node.points)
    undecided = [p for p in node.points if p not in u]
    attempts = []
    if not has_false:
        attempts.append(True)
    if not has_true:
        attempts.append(False)
    for label in attempts:
        if not undecided:
            # u is closed under forcing, so nothing new can be forced.
            result_forced = (frozenset(), frozenset())
        else:
            res = state.solve(T=undecided) if label else state.solve(F=undecided)
            if not res.sat:
                continue
            result_forced = (res.forced_true, res.forced_false)
        node.label = label
        forced_t, forced_f = result_forced
        if label:
            u.extend(true=itertools.chain(undecided, forced_t), false=forced_f)
        else:
            u.extend(true=forced_t, false=itertools.chain(undecided, forced_f))
        state.emit(node=node.id, action="label", label=label,
                   forced_true=len(forced_t), forced_false=len(forced_f))
        return True
    return False


def split_node(node: Node, state: LearnerState) -> bool:
    points = [state.sample.points[p] for p in node.points]
    attr = select_attribute(points, state.pool, state.u, state.sample.constraints, state.penalty)
    if attr is None:
        return False
    left = [p.id for p in points if attr.evaluate(p)]
    right = [p.id for p in points if not attr.evaluate(p)]
    node.attribute = attr
    node.left = state.tree.new_node(left)
    node.right = state.tree.new_node(right)
    state.queue.extend((node.left, node.right))
    state.emit(node=node.id, action="split", attribute=repr(attr),
               left=len(left), right=len(right))
    return True


def learn(sample: HornSample, pool, *, penalty: float = 1.0,
          trace: Callable[[dict], None] | None = None) -> LearnerState:
    """Run the learner to completion and return its final state.

    Raises :class:`UnsatisfiableSample` or :class:`InseparablePoints`.
    """
    state = LearnerState(sample, pool, penalty, trace=trace)
    initial = state.solve()
    if not initial.sat:
        raise UnsatisfiableSample("Horn constraints are unsatisfiable")
    # Points forced by the constraints alone (teacher positives/negatives and
    # their consequences); keeps u closed under forcing from the start.
    state.u.extend(true=initial.forced_true, false=initial.forced_false)

    while state.queue:
        node = state.queue.popleft()
        state.steps += 1
        if is_pure(node, state.u) and label_node(node, state):
            continue
        if len(node.points) <= 1:
            raise UnlabelableLeaf(f"cannot label singleton leaf {node.id}")
        if not split_node(node, state):
            raise InseparablePoints(f"no attribute separates the points of node {node.id}", node)
    return state


def learn_tree(sample: HornSample, pool, *, penalty: float = 1.0,
               trace: Callable[[dict], None] | None = None) -> DecisionTree:
    return learn(sample, pool, penalty=penalty, trace=trace).tree


def add_iff_constraints(sample: HornSample, pool) -> HornSample:
    """Copy of ``sample`` with ``a => b`` and ``b => a`` for every inseparable pair."""
    pool = as_pool(pool)
    out = sample.copy()
    buckets: dict = {}
    for p in sample.points:
        buckets.setdefault(pool.signature(p), []).append(p.id)
    for ids in buckets.values():
        for a, b in itertools.combinations(ids, 2):
            out.add_constraint(make_constraint((a,), b))
            out.add_constraint(make_constraint((b,), a))
    return out


def jsonl_writer(stream) -> Callable[[dict], None]:
    """Trace sink writing one JSON object per line."""

    def write(record: dict) -> None:
        stream.write(json.dumps(record, sort_keys=True) + "\n")

    return write
