"""Constrained Horn clause systems over linear integer arithmetic and booleans."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

RELATIONS = ("<=", "<", "=", "!=", ">", ">=")


@dataclass(frozen=True)
class PredDecl:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, "int" | "bool")

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.params)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class LinearLit:
    """``sum(coef * var) REL const``; terms keep first-occurrence order, no zero coefficients."""

    terms: tuple[tuple[int, str], ...]
    rel: str
    const: int

    def holds(self, env) -> bool:
        lhs = sum(c * int(env[v]) for c, v in self.terms)
        return _compare(lhs, self.rel, self.const)


@dataclass(frozen=True)
class BoolLit:
    var: str
    positive: bool = True

    def holds(self, env) -> bool:
        return bool(env[self.var]) == self.positive


Literal = Union[LinearLit, BoolLit]
BodyItem = Union[Atom, LinearLit, BoolLit]


def _compare(lhs, rel: str, rhs):
    if rel == "<=":
        return lhs <= rhs
    if rel == "<":
        return lhs < rhs
    if rel == "=":
        return lhs == rhs
    if rel == "!=":
        return lhs != rhs
    if rel == ">":
        return lhs > rhs
    if rel == ">=":
        return lhs >= rhs
    raise ValueError(f"unknown relation {rel!r}")


compare = _compare


@dataclass(frozen=True)
class Clause:
    """``body => head``; body items keep source order, head None means ``false``."""

    vars: tuple[tuple[str, str], ...]
    body: tuple[BodyItem, ...]
    head: Atom | None

    @property
    def body_atoms(self) -> tuple[Atom, ...]:
        return tuple(b for b in self.body if isinstance(b, Atom))

    @property
    def body_constraint(self) -> tuple[Literal, ...]:
        return tuple(b for b in self.body if not isinstance(b, Atom))

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.vars)

    def sort_of(self, var: str) -> str:
        return dict(self.vars)[var]


@dataclass(frozen=True)
class ChcSystem:
    predicates: tuple[PredDecl, ...]
    clauses: tuple[Clause, ...]

    def pred(self, name: str) -> PredDecl:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def max_arity(self) -> int:
        return max((p.arity for p in self.predicates), default=0)

    def slot_sorts(self) -> list[set[str]]:
        """Sorts that appear at each padded slot position."""
        sorts: list[set[str]] = [set() for _ in range(self.max_arity)]
        for p in self.predicates:
            for i, (_, s) in enumerate(p.params):
                sorts[i].add(s)
        return sorts
