"""Bounded counterexample search for conjectures against a CHC system.

A clause is violated by a valuation of its variables that satisfies the
arithmetic body, makes every body atom true under the conjecture and makes
the head false.  Integer variables range over ``[-bound, bound]``, booleans
over ``{false, true}``; validity is therefore relative to the box.

Search order is deterministic: clauses by :func:`prioritize_clauses`, then
witnesses in lexicographic order of the clause variables (declaration
order, ascending values).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .chc import Atom, BoolLit, ChcSystem, Clause, LinearLit
from .core import Formula, HornConstraint, HornSample, evaluate_columns, make_constraint

# Upper bound on witnesses evaluated per vectorised block.
BLOCK = 1 << 16


Conjecture = Mapping[str, Formula]


@dataclass(frozen=True)
class Counterexample:
    clause_index: int
    witness: tuple[tuple[str, int | bool], ...]  # (variable, value) in clause order
    premises: tuple[tuple[str, tuple], ...]  # (predicate, argument values) per body atom
    head: tuple[str, tuple] | None

    @property
    def env(self) -> dict:
        return dict(self.witness)

    @property
    def kind(self) -> str:
        if not self.premises and self.head is not None:
            return "pos"
        if len(self.premises) == 1 and self.head is None:
            return "neg"
        return "horn"


def prioritize_clauses(system: ChcSystem) -> list[int]:
    """Clauses yielding positive points first, then negative points, then the rest."""

    def group(c: Clause) -> int:
        atoms = c.body_atoms
        if not atoms:
            return 0
        if c.head is None and len(atoms) == 1:
            return 1
        return 2

    return sorted(range(len(system.clauses)), key=lambda i: group(system.clauses[i]))


def _atom_holds(conj: Conjecture, atom: Atom, env) -> bool:
    from .core import DataPoint, evaluate

    point = DataPoint(-1, atom.pred, tuple(env[a] for a in atom.args))
    return evaluate(conj[atom.pred], point)


def violates(clause: Clause, conj: Conjecture, env: Mapping) -> bool:
    """Direct (scalar) check that ``env`` violates ``clause`` under ``conj``."""
    if not all(lit.holds(env) for lit in clause.body_constraint):
        return False
    if not all(_atom_holds(conj, a, env) for a in clause.body_atoms):
        return False
    return clause.head is None or not _atom_holds(conj, clause.head, env)


# ---------------------------------------------------------------------------


@dataclass
class _Plan:
    """Free variables are enumerated; each determined one is solved from an equality."""

    order: list[str]
    free: list[str]
    determined: dict  # var -> (coef, [(c, other)], const)


def _plan(clause: Clause) -> _Plan:
    order = list(clause.var_names)
    position = {v: i for i, v in enumerate(order)}
    determined: dict = {}
    for v in order:
        if clause.sort_of(v) != "int":
            continue
        for lit in clause.body_constraint:
            if not isinstance(lit, LinearLit) or lit.rel != "=":
                continue
            coef = dict((var, c) for c, var in lit.terms).get(v)
            if coef not in (1, -1):
                continue
            others = [(c, w) for c, w in lit.terms if w != v]
            # only earlier variables, so lexicographic order is preserved
            if all(position[w] < position[v] for _, w in others):
                determined[v] = (coef, others, lit.const)
                break
    free = [v for v in order if v not in determined]
    return _Plan(order, free, determined)


def _domain(sort: str, bound: int) -> np.ndarray:
    if sort == "bool":
        return np.array([0, 1], dtype=np.int64)
    return np.arange(-bound, bound + 1, dtype=np.int64)


def _linear(terms, cols):
    total = 0
    for c, v in terms:
        total = total + c * cols[v]
    return total


class _Tables:
    """Truth tables of the conjecture over the whole box, one per unknown.

    Built lazily and shared by every clause of one check, so an unknown that
    occurs in many clauses is evaluated once; atoms are then answered by
    gathering.  Unknowns whose box exceeds ``limit`` points are evaluated
    directly.
    """

    def __init__(self, system: ChcSystem, conj: Conjecture, bound: int, limit: int = 1 << 21):
        self.system, self.conj, self.bound, self.limit = system, conj, bound, limit
        self._tables: dict = {}

    def _sizes(self, pred: str) -> list[int]:
        return [2 if sort == "bool" else 2 * self.bound + 1 for _, sort in self.system.pred(pred).params]

    def table(self, pred: str):
        if pred not in self._tables:
            sizes = self._sizes(pred)
            table = None
            if int(np.prod(sizes, dtype=np.int64)) <= self.limit:
                decl = self.system.pred(pred)
                axes = [_domain(sort, self.bound) for _, sort in decl.params]
                # open grids: each literal is evaluated on the axes it mentions only
                grids = np.meshgrid(*axes, indexing="ij", sparse=True) if axes else []
                held = evaluate_columns(self.conj[pred], pred, grids)
                table = np.broadcast_to(held, tuple(sizes)).reshape(-1) if axes else \
                    np.array([bool(held)])
            self._tables[pred] = table
        return self._tables[pred]

    def holds(self, atom: Atom, live: dict):
        columns = [live[a] for a in atom.args]
        table = self.table(atom.pred)
        if table is None:
            return evaluate_columns(self.conj[atom.pred], atom.pred, columns)
        flat = 0
        for (_, sort), col, size in zip(self.system.pred(atom.pred).params, columns,
                                        self._sizes(atom.pred)):
            flat = flat * size + (col if sort == "bool" else col + self.bound)
        return table[flat]


def _violating_rows(clause: Clause, conj: Conjecture, cols: dict, rows: np.ndarray,
                    tables: _Tables | None = None) -> np.ndarray:
    """Indices (ascending) of the block rows that violate ``clause``.

    Conjuncts are applied one at a time and the columns compressed to the
    surviving rows, so later (expensive) atoms see only live candidates.
    """
    from .chc import compare

    n = len(next(iter(cols.values()))) if cols else 1
    live = dict(cols) if rows.size == n else {v: c[rows] for v, c in cols.items()}

    def keep(held):
        nonlocal rows, live
        held = np.broadcast_to(held, rows.shape)
        if held.all():
            return
        sel = np.flatnonzero(held)
        rows = rows[sel]
        live = {v: c[sel] for v, c in live.items()}

    for lit in clause.body_constraint:
        if isinstance(lit, BoolLit):
            held = live[lit.var] != 0 if lit.positive else live[lit.var] == 0
        else:
            held = compare(_linear(lit.terms, live), lit.rel, lit.const)
        keep(held)
        if not rows.size:
            return rows
    def atom_holds(atom: Atom):
        if tables is not None:
            return tables.holds(atom, live)
        return evaluate_columns(conj[atom.pred], atom.pred, [live[a] for a in atom.args])

    for atom in clause.body_atoms:
        keep(atom_holds(atom))
        if not rows.size:
            return rows
    if clause.head is not None:
        keep(np.logical_not(atom_holds(clause.head)))
    return rows


def _blocks(clause: Clause, plan: _Plan, bound: int):
    """Yield column dicts covering the box in lexicographic order of the free variables."""
    domains = [_domain(clause.sort_of(v), bound) for v in plan.free]
    # vectorise the trailing variables, loop over the leading ones
    split = len(domains)
    size = 1
    while split > 0 and size * len(domains[split - 1]) <= BLOCK:
        split -= 1
        size *= len(domains[split])
    lead, tail = domains[:split], domains[split:]
    if tail:
        grids = np.meshgrid(*tail, indexing="ij")
        tail_cols = [g.reshape(-1) for g in grids]
    else:
        tail_cols = []
    n = tail_cols[0].shape[0] if tail_cols else 1
    for prefix in itertools.product(*lead):
        cols = {}
        for v, val in zip(plan.free[:split], prefix):
            cols[v] = np.full(n, val, dtype=np.int64)
        for v, col in zip(plan.free[split:], tail_cols):
            cols[v] = col
        inbox = np.ones(n, dtype=bool)
        for v in plan.order:
            if v in plan.determined:
                coef, others, const = plan.determined[v]
                # coef * v + sum(others) = const
                val = (const - _linear(others, cols)) * coef
                cols[v] = np.broadcast_to(np.asarray(val, dtype=np.int64), (n,))
                inbox &= (cols[v] >= -bound) & (cols[v] <= bound)
        yield cols, inbox, n


def _witness_values(clause: Clause, cols: dict, index: int) -> tuple:
    out = []
    for v in clause.var_names:
        raw = int(cols[v][index])
        out.append((v, bool(raw) if clause.sort_of(v) == "bool" else raw))
    return tuple(out)


def clause_violations(clause: Clause, conj: Conjecture, bound: int, *, first_only: bool = True,
                      tables: _Tables | None = None):
    """Violating witnesses of one clause in lexicographic order (just the first by default)."""
    plan = _plan(clause)
    found = []
    for cols, inbox, n in _blocks(clause, plan, bound):
        hits = _violating_rows(clause, conj, cols, np.flatnonzero(inbox), tables)
        if hits.size:
            if first_only:
                return [_witness_values(clause, cols, int(hits[0]))]
            found += [_witness_values(clause, cols, int(i)) for i in hits]
    return found


def _make_cex(system: ChcSystem, index: int, witness) -> Counterexample:
    clause = system.clauses[index]
    env = dict(witness)
    premises = tuple((a.pred, tuple(env[x] for x in a.args)) for a in clause.body_atoms)
    head = None
    if clause.head is not None:
        head = (clause.head.pred, tuple(env[x] for x in clause.head.args))
    return Counterexample(index, witness, premises, head)


def check_conjecture(system: ChcSystem, conj: Conjecture, bound: int = 16, *,
                     rng: np.random.Generator | None = None) -> Counterexample | None:
    """First violation in priority/lexicographic order, or None if valid on the box.

    With ``rng`` the witness is drawn uniformly among all violations of the
    first violated clause instead.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    missing = [p.name for p in system.predicates if p.name not in conj]
    if missing:
        raise ValueError(f"conjecture lacks formulas for {missing}")
    tables = _Tables(system, conj, bound)
    for index in prioritize_clauses(system):
        clause = system.clauses[index]
        hits = clause_violations(clause, conj, bound, first_only=rng is None, tables=tables)
        if hits:
            pick = hits[0] if rng is None else hits[int(rng.integers(len(hits)))]
            return _make_cex(system, index, pick)
    return None


def cex_to_sample(cex: Counterexample, sample: HornSample) -> tuple[HornConstraint, bool]:
    """Add the counterexample's points and Horn constraint; returns (constraint, was_new)."""
    premises = [sample.add_point(pred, args) for pred, args in cex.premises]
    conclusion = None if cex.head is None else sample.add_point(*cex.head)
    constraint = make_constraint(premises, conclusion)
    return constraint, sample.add_constraint(constraint)
