"""Horn satisfiability with forced-variable computation by mark propagation.

Every variable carries a ``*`` mark (true in every model of the augmented
clause set) and a set of ``*z`` marks (true in every model that sets ``z``
true).  Propagation follows two rules over the clauses ``x1 & .. & xl => y``:

* all premises marked ``*``  =>  ``y`` gets ``*``;
* all premises marked ``*`` or ``*z``, at least one of them ``*z``  =>  ``y`` gets ``*z``.

The augmented set is unsatisfiable iff the pseudo-variable FALSE ends up
with ``*``; variables marked ``*`` are forced true and the ``*x`` marks on
FALSE name the variables forced false.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .core import HornConstraint, PartialValuation

log = logging.getLogger(__name__)


class _Pseudo:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


TRUE_VAR = _Pseudo("True")
FALSE_VAR = _Pseudo("False")


class PreconditionError(ValueError):
    pass


@dataclass
class MarkState:
    """Marks per variable; ``tags`` are bitmasks over ``variables`` indices."""

    variables: list[Hashable]
    star: set = field(default_factory=set)
    tags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.variables)}

    @classmethod
    def seeded(cls, variables: Iterable[Hashable]) -> "MarkState":
        """``*`` on TRUE and ``*x`` on every variable ``x``."""
        variables = list(variables)
        state = cls(variables, {TRUE_VAR})
        state.tags = {v: 1 << i for i, v in enumerate(variables)}
        return state

    def tag_set(self, var) -> set:
        mask = self.tags.get(var, 0)
        return {v for i, v in enumerate(self.variables) if mask >> i & 1}

    def copy(self) -> "MarkState":
        return MarkState(list(self.variables), set(self.star), dict(self.tags))

    def same_marks(self, other: "MarkState") -> bool:
        def norm(tags):
            return {v: m for v, m in tags.items() if m}

        return self.star == other.star and norm(self.tags) == norm(other.tags)


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    forced_true: frozenset = frozenset()
    forced_false: frozenset = frozenset()
    marks: MarkState | None = field(default=None, compare=False, repr=False)


# A solver clause: (premises, head); head is a variable or FALSE_VAR, empty premises read as TRUE.
Clause = tuple[tuple, Hashable]


def _index(clauses: Sequence[Clause]) -> dict:
    occurs: dict = {}
    for ci, (prem, _) in enumerate(clauses):
        for p in prem:
            occurs.setdefault(p, []).append(ci)
    return occurs


def _star_closure(star: set, clauses: Sequence[Clause], occurs: dict) -> None:
    """Add ``*`` marks in place (counter-based unit propagation)."""
    missing = [sum(1 for p in prem if p not in star) for prem, _ in clauses]
    work = []
    for (_, head), m in zip(clauses, missing):
        if m == 0 and head not in star:
            star.add(head)
            work.append(head)
    while work:
        v = work.pop()
        for ci in occurs.get(v, ()):
            missing[ci] -= 1
            if missing[ci] == 0:
                head = clauses[ci][1]
                if head not in star:
                    star.add(head)
                    work.append(head)


def _tag_closure(star: set, tags: dict, clauses: Sequence[Clause], occurs: dict,
                 active: Sequence[int]) -> None:
    """Add ``*z`` marks in place, visiting only the clause indices in ``active``."""

    def derived(prem) -> int:
        free = [p for p in prem if p not in star]
        if free:
            mask = tags.get(free[0], 0)
            for p in free[1:]:
                mask &= tags.get(p, 0)
            return mask
        mask = 0
        for p in prem:
            mask |= tags.get(p, 0)
        return mask

    allowed = set(active)
    pending = list(active)
    queued = set(pending)
    while pending:
        ci = pending.pop()
        queued.discard(ci)
        prem, head = clauses[ci]
        add = derived(prem) & ~tags.get(head, 0)
        if add:
            tags[head] = tags.get(head, 0) | add
            for cj in occurs.get(head, ()):
                if cj not in queued and cj in allowed:
                    queued.add(cj)
                    pending.append(cj)


def propagate_marks(state: MarkState, clauses: Sequence[Clause]) -> MarkState:
    """Apply both marking rules until nothing changes; returns a new state."""
    state = state.copy()
    occurs = _index(clauses)
    # Star marks first: they are unaffected by tags, and tags skip starred premises.
    _star_closure(state.star, clauses, occurs)
    _tag_closure(state.star, state.tags, clauses, occurs, range(len(clauses)))
    return state


def _forced_only(variables: list, clauses: Sequence[Clause]):
    """Satisfiability and forced sets without the full marking.

    When FALSE is not starred, a clause whose head is unstarred has an
    unstarred premise, so tags of unstarred variables depend only on other
    unstarred variables; clauses with starred heads can be skipped.
    """
    occurs = _index(clauses)
    star = {TRUE_VAR}
    _star_closure(star, clauses, occurs)
    if FALSE_VAR in star:
        return star, None
    tags = {v: 1 << i for i, v in enumerate(variables) if v not in star}
    active = [ci for ci, (_, head) in enumerate(clauses) if head not in star]
    _tag_closure(star, tags, clauses, occurs, active)
    return star, tags.get(FALSE_VAR, 0)


def _check_disjoint(u: PartialValuation, T: set, F: set) -> None:
    if T & F:
        raise PreconditionError(f"T and F overlap: {sorted(T & F)}")
    clash = (T & u.dom_false) | (F & u.dom_true)
    if clash:
        raise PreconditionError(f"T/F contradict the partial valuation on {sorted(clash)}")


def augment(
    constraints: Iterable[HornConstraint], u: PartialValuation, T: Iterable = (), F: Iterable = ()
) -> tuple[list, list[Clause]]:
    """Variables and clauses of C plus unit clauses for ``u``, ``T`` and ``F``."""
    variables: dict = {}
    clauses: list[Clause] = []
    for c in constraints:
        for p in c.premises:
            variables.setdefault(p, None)
        head = FALSE_VAR if c.conclusion is None else c.conclusion
        if c.conclusion is not None:
            variables.setdefault(c.conclusion, None)
        clauses.append((c.premises, head))
    for pid, value in u.items():
        variables.setdefault(pid, None)
        clauses.append(((), pid) if value else ((pid,), FALSE_VAR))
    for pid in T:
        variables.setdefault(pid, None)
        clauses.append(((), pid))
    for pid in F:
        variables.setdefault(pid, None)
        clauses.append(((pid,), FALSE_VAR))
    return list(variables), clauses


def horn_solve(
    constraints: Iterable[HornConstraint],
    u: PartialValuation | None = None,
    T: Iterable = (),
    F: Iterable = (),
    *,
    debug: bool = False,
    keep_marks: bool = False,
) -> SolveResult:
    """Decide whether ``u`` extended by ``T -> true``, ``F -> false`` satisfies the constraints.

    On success also returns the variables forced true/false, excluding ones
    already fixed by ``u``, ``T`` or ``F``.  The full marking is computed and
    attached only with ``keep_marks`` (or ``debug``).
    """
    u = u if u is not None else PartialValuation()
    T, F = set(T), set(F)
    _check_disjoint(u, T, F)
    variables, clauses = augment(constraints, u, T, F)
    decided_true = T | u.dom_true
    decided_false = F | u.dom_false
    if not (debug or keep_marks):
        star, false_mask = _forced_only(variables, clauses)
        if false_mask is None:
            return SolveResult(False)
        forced_true = frozenset(v for v in variables if v in star and v not in decided_true)
        forced_false = frozenset(v for i, v in enumerate(variables)
                                 if false_mask >> i & 1 and v not in decided_false)
        return SolveResult(True, forced_true, forced_false)
    marks = propagate_marks(MarkState.seeded(variables), clauses)
    if debug:
        log.debug("final marking:\n%s", format_marks(marks))
    if FALSE_VAR in marks.star:
        return SolveResult(False, marks=marks)
    forced_true = frozenset(v for v in variables if v in marks.star and v not in decided_true)
    forced_false = frozenset(marks.tag_set(FALSE_VAR) - decided_false)
    return SolveResult(True, forced_true, forced_false, marks)


def format_marks(marks: MarkState, names=None) -> str:
    """One line per variable: ``name: *, *a, *b``."""
    names = names or {}

    def label(v):
        return str(names.get(v, v))

    lines = []
    for v in [TRUE_VAR, *marks.variables, FALSE_VAR]:
        items = ["*"] if v in marks.star else []
        mask = marks.tags.get(v, 0)
        # own tag first, then the rest in variable order
        own = marks.index.get(v)
        if own is not None and mask >> own & 1:
            items.append("*" + label(v))
        items += [
            "*" + label(u) for i, u in enumerate(marks.variables) if mask >> i & 1 and i != own
        ]
        lines.append(f"{label(v)}: {', '.join(items)}")
    return "\n".join(lines)
