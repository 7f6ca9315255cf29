"""Domain types: data points, attributes, Horn samples, decision trees and formulas."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

Value = Union[int, bool]

# Conclusion marker for constraints of the form x1 & ... & xk => false.
FALSE_HEAD = None


class IncompleteTreeError(ValueError):
    """Raised when a tree with unlabeled leaves is used as a classifier."""


@dataclass(frozen=True)
class DataPoint:
    id: int
    location: str
    args: tuple[Value, ...]

    @property
    def key(self) -> tuple[str, tuple[Value, ...]]:
        return (self.location, self.args)


# ---------------------------------------------------------------------------
# Attributes


@dataclass(frozen=True)
class LocationEquals:
    name: str

    def evaluate(self, point: DataPoint) -> bool:
        return point.location == self.name

    def evaluate_columns(self, location: str, columns: Sequence) -> bool:
        return location == self.name


@dataclass(frozen=True)
class BooleanArg:
    slot: int

    def evaluate(self, point: DataPoint) -> bool:
        return _slot(point.args, self.slot) != 0

    def evaluate_columns(self, location: str, columns: Sequence):
        return np.asarray(_slot(columns, self.slot)) != 0


@dataclass(frozen=True)
class LinearIneq:
    """``sum(coef * args[slot]) <= threshold`` with octagonal coefficients."""

    terms: tuple[tuple[int, int], ...]
    threshold: int

    def __post_init__(self):
        if not 1 <= len(self.terms) <= 2:
            raise ValueError(f"octagonal inequality needs 1 or 2 terms, got {self.terms}")
        slots = [s for s, _ in self.terms]
        if len(set(slots)) != len(slots):
            raise ValueError(f"repeated slot in {self.terms}")
        if any(c not in (-1, 1) for _, c in self.terms):
            raise ValueError(f"coefficients must be +1 or -1, got {self.terms}")
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    def term_value(self, args: Sequence[Value]) -> int:
        return sum(c * int(_slot(args, s)) for s, c in self.terms)

    def evaluate(self, point: DataPoint) -> bool:
        return self.term_value(point.args) <= self.threshold

    def evaluate_columns(self, location: str, columns: Sequence):
        total = 0
        for s, c in self.terms:
            total = total + c * np.asarray(_slot(columns, s), dtype=np.int64)
        return np.asarray(total) <= self.threshold


Attribute = Union[LocationEquals, BooleanArg, LinearIneq]


def _slot(values: Sequence, slot: int):
    # Slots beyond a predicate's own arity read as the padding default.
    return values[slot] if slot < len(values) else 0


def eval_attribute(attr: Attribute, point: DataPoint) -> bool:
    return attr.evaluate(point)


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Lit:
    attr: Attribute


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


Formula = Union[Const, Lit, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conj(*args: Formula) -> Formula:
    """Conjunction with constant folding and flattening."""
    out: list[Formula] = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        out.extend(a.args if isinstance(a, And) else (a,))
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*args: Formula) -> Formula:
    out: list[Formula] = []
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE:
            continue
        out.extend(a.args if isinstance(a, Or) else (a,))
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def evaluate(f: Formula, point: DataPoint) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        return f.attr.evaluate(point)
    if isinstance(f, Not):
        return not evaluate(f.arg, point)
    if isinstance(f, And):
        return all(evaluate(a, point) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, point) for a in f.args)
    raise TypeError(f"not a formula: {f!r}")


def evaluate_columns(f: Formula, location: str, columns: Sequence, cache: dict | None = None):
    """Vectorised evaluation; ``columns[i]`` holds the values of slot ``i``.

    Returns a bool or a numpy bool array broadcast over the columns.  Literal
    results are memoised in ``cache`` (keyed by attribute) when one is given.
    """
    if cache is None:
        cache = {}
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        hit = cache.get(f.attr)
        if hit is None:
            hit = cache[f.attr] = f.attr.evaluate_columns(location, columns)
        return hit
    if isinstance(f, Not):
        return np.logical_not(evaluate_columns(f.arg, location, columns, cache))
    if isinstance(f, And):
        acc = True
        for a in f.args:
            acc = np.logical_and(acc, evaluate_columns(a, location, columns, cache))
        return acc
    if isinstance(f, Or):
        acc = False
        for a in f.args:
            acc = np.logical_or(acc, evaluate_columns(a, location, columns, cache))
        return acc
    raise TypeError(f"not a formula: {f!r}")


def specialize(f: Formula, location: str, arity: int) -> Formula:
    """Fix the location and the padded slots (``>= arity``), then fold constants."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return negate(specialize(f.arg, location, arity))
    if isinstance(f, And):
        return conj(*(specialize(a, location, arity) for a in f.args))
    if isinstance(f, Or):
        return disj(*(specialize(a, location, arity) for a in f.args))
    attr = f.attr
    if isinstance(attr, LocationEquals):
        return Const(attr.name == location)
    if isinstance(attr, BooleanArg):
        return f if attr.slot < arity else FALSE
    kept = tuple((s, c) for s, c in attr.terms if s < arity)
    if len(kept) == len(attr.terms):
        return f
    if not kept:
        return Const(0 <= attr.threshold)
    return Lit(LinearIneq(kept, attr.threshold))


def formula_size(f: Formula) -> int:
    """Number of literal occurrences."""
    if isinstance(f, Const):
        return 0
    if isinstance(f, Lit):
        return 1
    if isinstance(f, Not):
        return formula_size(f.arg)
    return sum(formula_size(a) for a in f.args)


def format_attribute(attr: Attribute, names: Sequence[str] | None = None) -> str:
    def name(slot: int) -> str:
        if names is not None and slot < len(names):
            return names[slot]
        return f"v{slot}"

    if isinstance(attr, LocationEquals):
        return f"l == {attr.name}"
    if isinstance(attr, BooleanArg):
        return name(attr.slot)
    parts = []
    for i, (s, c) in enumerate(attr.terms):
        if i == 0:
            parts.append(("-" if c < 0 else "") + name(s))
        else:
            parts.append(("- " if c < 0 else "+ ") + name(s))
    return f"{' '.join(parts)} <= {attr.threshold}"


def format_formula(f: Formula, names: Sequence[str] | None = None) -> str:
    """Canonical infix form, e.g. ``x - y <= 0 && !(l == P2)``."""
    return _fmt(f, names, 0)


# precedence: || = 1, && = 2, ! and atoms = 3
def _fmt(f: Formula, names, ctx: int) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Lit):
        text = format_attribute(f.attr, names)
        return text if isinstance(f.attr, BooleanArg) or ctx < 1 else f"({text})"
    if isinstance(f, Not):
        inner = f.arg
        if isinstance(inner, Lit) and isinstance(inner.attr, BooleanArg):
            return "!" + format_attribute(inner.attr, names)
        return f"!({_fmt(inner, names, 0)})"
    if isinstance(f, And):
        text = " && ".join(_fmt(a, names, 2) for a in f.args)
        return f"({text})" if ctx > 2 else text
    text = " || ".join(_fmt(a, names, 1) for a in f.args)
    return f"({text})" if ctx > 1 else text


# ---------------------------------------------------------------------------
# Horn samples


@dataclass(frozen=True)
class HornConstraint:
    """``premises => conclusion``; empty premises mean ``true``, conclusion None means ``false``."""

    premises: tuple[int, ...]
    conclusion: int | None

    @property
    def kind(self) -> str:
        if not self.premises and self.conclusion is not None:
            return "pos"
        if len(self.premises) == 1 and self.conclusion is None:
            return "neg"
        return "horn"

    def holds(self, valuation: Mapping[int, bool]) -> bool:
        if all(valuation[p] for p in self.premises):
            return self.conclusion is not None and valuation[self.conclusion]
        return True


def make_constraint(premises: Iterable[int], conclusion: int | None) -> HornConstraint:
    # Premise order is kept (first occurrence) so that sample traces stay deterministic.
    return HornConstraint(tuple(dict.fromkeys(premises)), conclusion)


class HornSample:
    """A finite set of data points with Horn constraints over them.

    Points are deduplicated on ``(location, args)``; ids are dense from 0.
    """

    def __init__(self, arity: int = 0):
        self.arity = arity
        self.points: list[DataPoint] = []
        self.constraints: list[HornConstraint] = []
        self._ids: dict[tuple[str, tuple[Value, ...]], int] = {}
        self._constraint_set: set[HornConstraint] = set()

    def __len__(self) -> int:
        return len(self.points)

    def add_point(self, location: str, args: Sequence[Value]) -> int:
        args = tuple(args)
        if len(args) > self.arity:
            raise ValueError(f"point {location}{args} exceeds sample arity {self.arity}")
        if len(args) < self.arity:
            pad = (0,) * (self.arity - len(args))
            args = args + pad
        key = (location, args)
        found = self._ids.get(key)
        if found is not None:
            return found
        pid = len(self.points)
        self.points.append(DataPoint(pid, location, args))
        self._ids[key] = pid
        return pid

    def find(self, location: str, args: Sequence[Value]) -> int | None:
        args = tuple(args) + (0,) * (self.arity - len(args))
        return self._ids.get((location, args))

    def add_constraint(self, constraint: HornConstraint) -> bool:
        """Append unless already present; returns whether it was new."""
        n = len(self.points)
        for p in constraint.premises + (
            () if constraint.conclusion is None else (constraint.conclusion,)
        ):
            if not 0 <= p < n:
                raise ValueError(f"constraint references unknown point {p}")
        if constraint in self._constraint_set:
            return False
        self._constraint_set.add(constraint)
        self.constraints.append(constraint)
        return True

    def copy(self) -> "HornSample":
        other = HornSample(self.arity)
        other.points = list(self.points)
        other.constraints = list(self.constraints)
        other._ids = dict(self._ids)
        other._constraint_set = set(self._constraint_set)
        return other

    def __repr__(self) -> str:
        return f"HornSample(points={len(self.points)}, constraints={len(self.constraints)})"


def check_consistency(valuation, sample: HornSample) -> bool:
    """Whether a total valuation (mapping or complete tree) satisfies every constraint."""
    if isinstance(valuation, DecisionTree):
        tree = valuation
        valuation = {p.id: tree.classify(p) for p in sample.points}
    return all(c.holds(valuation) for c in sample.constraints)


# ---------------------------------------------------------------------------
# Partial valuations


class PartialValuation:
    """Partial map from point ids to booleans."""

    def __init__(self, assignment: Mapping[int, bool] | None = None):
        self._map: dict[int, bool] = dict(assignment or {})

    def __contains__(self, pid: int) -> bool:
        return pid in self._map

    def __getitem__(self, pid: int) -> bool:
        return self._map[pid]

    def get(self, pid: int, default=None):
        return self._map.get(pid, default)

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self) -> Iterator[int]:
        return iter(self._map)

    def items(self):
        return self._map.items()

    @property
    def dom_true(self) -> set[int]:
        return {p for p, v in self._map.items() if v}

    @property
    def dom_false(self) -> set[int]:
        return {p for p, v in self._map.items() if not v}

    def extend(self, true: Iterable[int] = (), false: Iterable[int] = ()) -> None:
        """In-place ``u^T_F``; refuses to flip an existing assignment."""
        for value, ids in ((True, true), (False, false)):
            for p in ids:
                old = self._map.get(p)
                if old is not None and old != value:
                    raise ValueError(f"point {p} already assigned {old}")
                self._map[p] = value

    def copy(self) -> "PartialValuation":
        return PartialValuation(self._map)

    def __eq__(self, other) -> bool:
        if isinstance(other, PartialValuation):
            return self._map == other._map
        return NotImplemented

    def __repr__(self) -> str:
        return f"PartialValuation({self._map})"


# ---------------------------------------------------------------------------
# Decision trees


@dataclass(eq=False)
class Node:
    id: int
    points: list[int]
    attribute: Attribute | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    label: bool | None = None

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None


@dataclass(eq=False)
class DecisionTree:
    root: Node
    _next_id: int = field(default=1, repr=False)

    @classmethod
    def leaf(cls, points: Iterable[int] = (), label: bool | None = None) -> "DecisionTree":
        return cls(Node(0, list(points), label=label))

    @classmethod
    def split(cls, attribute: Attribute, left: "DecisionTree", right: "DecisionTree") -> "DecisionTree":
        """Assemble a tree from subtrees; node ids are renumbered in BFS order."""
        tree = cls(Node(0, left.root.points + right.root.points, attribute, left.root, right.root))
        tree.renumber()
        return tree

    def renumber(self) -> None:
        queue, i = [self.root], 0
        while queue:
            node = queue.pop(0)
            node.id = i
            i += 1
            if not node.is_leaf:
                queue.extend((node.left, node.right))
        self._next_id = i

    def new_node(self, points: list[int]) -> Node:
        node = Node(self._next_id, points)
        self._next_id += 1
        return node

    def nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes() if n.is_leaf]

    @property
    def is_complete(self) -> bool:
        return all(n.label is not None for n in self.leaves())

    def leaf_for(self, point: DataPoint) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if node.attribute.evaluate(point) else node.right
        return node

    def classify(self, point: DataPoint) -> bool:
        label = self.leaf_for(point).label
        if label is None:
            raise IncompleteTreeError("point reaches an unlabeled leaf")
        return label

    def to_formula(self) -> Formula:
        return tree_to_formula(self)

    def size(self) -> int:
        return sum(1 for _ in self.nodes())


def tree_to_formula(tree: DecisionTree) -> Formula:
    """Disjunction over root-to-True-leaf paths of the conjunction of path literals."""
    if not tree.is_complete:
        raise IncompleteTreeError("tree has unlabeled leaves")
    paths: list[Formula] = []

    def walk(node: Node, path: tuple[Formula, ...]):
        if node.is_leaf:
            if node.label:
                paths.append(conj(*path))
            return
        lit = Lit(node.attribute)
        walk(node.left, path + (lit,))
        walk(node.right, path + (negate(lit),))

    walk(tree.root, ())
    return disj(*paths)


def tree_formula_for(tree: DecisionTree, location: str, arity: int) -> Formula:
    """Compact formula of ``tree`` restricted to one location.

    Built bottom-up as guarded choices with location tests and padded slots
    resolved, merging branches that agree; equivalent on that location to
    ``specialize(tree_to_formula(tree), location, arity)``.
    """
    if not tree.is_complete:
        raise IncompleteTreeError("tree has unlabeled leaves")

    def build(node: Node) -> Formula:
        if node.is_leaf:
            return Const(bool(node.label))
        test = specialize(Lit(node.attribute), location, arity)
        if isinstance(test, Const):
            return build(node.left if test.value else node.right)
        hi, lo = build(node.left), build(node.right)
        if hi == lo:
            return hi
        if lo == FALSE:
            return conj(test, hi)
        if lo == TRUE:
            return disj(negate(test), hi)
        if hi == TRUE:
            return disj(test, lo)
        return disj(conj(test, hi), conj(negate(test), lo))

    return build(tree.root)


def classify(tree: DecisionTree, point: DataPoint) -> bool:
    return tree.classify(point)
