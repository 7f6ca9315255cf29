"""Split selection by information gain penalised for cutting Horn constraints."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .core import (
    Attribute,
    BooleanArg,
    DataPoint,
    HornConstraint,
    LinearIneq,
    LocationEquals,
    PartialValuation,
)

# Scores closer than this are ties; the earlier pool entry wins.
TIE_EPS = 1e-12


def octagon_terms(int_slots: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    """``x``, ``-x`` for every slot, then ``±x ± y`` for every slot pair."""
    terms = []
    for s in int_slots:
        terms += [((s, 1),), ((s, -1),)]
    for i, s in enumerate(int_slots):
        for t in int_slots[i + 1:]:
            terms += [((s, 1), (t, 1)), ((s, 1), (t, -1)), ((s, -1), (t, 1)), ((s, -1), (t, -1))]
    return terms


@dataclass(frozen=True)
class AttributePool:
    """Location tests, boolean slots and octagonal inequalities with ``|c| <= cap``.

    Thresholds are generated per node from the term values the node's points
    attain, clamped into ``[-cap, cap]``.  Pool order (used to break score
    ties) puts location and boolean tests first, then inequalities by
    increasing ``|c|``, then by term.
    """

    locations: tuple[str, ...] = ()
    int_slots: tuple[int, ...] = ()
    bool_slots: tuple[int, ...] = ()
    cap: int | None = None

    @classmethod
    def for_system(cls, system, cap: int | None = None) -> "AttributePool":
        sorts = system.slot_sorts()
        return cls(
            tuple(p.name for p in system.predicates),
            tuple(i for i, s in enumerate(sorts) if "int" in s),
            tuple(i for i, s in enumerate(sorts) if "bool" in s),
            cap,
        )

    @cached_property
    def terms(self):
        return octagon_terms(self.int_slots)

    def _clamp(self, v: int) -> int:
        if self.cap is None:
            return v
        return max(-self.cap, min(self.cap, v))

    def basic_candidates(self, points: Sequence[DataPoint]) -> list[Attribute]:
        locs = {p.location for p in points}
        out: list[Attribute] = [LocationEquals(name) for name in self.locations if name in locs]
        return out + [BooleanArg(s) for s in self.bool_slots]

    def term_values(self, points: Sequence[DataPoint]) -> np.ndarray:
        """``values[i, j]``: term j evaluated at point i."""
        terms = self.terms
        width = max(self.int_slots, default=-1) + 1
        args = np.zeros((len(points), width), dtype=np.int64)
        for i, p in enumerate(points):
            row = [int(v) for v in p.args[:width]]
            args[i, :len(row)] = row
        weights = np.zeros((width, len(terms)), dtype=np.int64)
        for j, t in enumerate(terms):
            for slot, c in t:
                weights[slot, j] = c
        return args @ weights

    def thresholds(self, values: np.ndarray) -> np.ndarray:
        vals = np.unique(values)
        if self.cap is not None:
            vals = np.unique(np.clip(vals, -self.cap, self.cap))
        return vals

    def candidate_groups(self, points: Sequence[DataPoint]) -> list[list[Attribute]]:
        groups: list[list[Attribute]] = [[a] for a in self.basic_candidates(points)]
        if not points:
            return groups
        values = self.term_values(points)
        for j, terms in enumerate(self.terms):
            groups.append([LinearIneq(terms, int(c)) for c in self.thresholds(values[:, j])])
        return groups

    def rank(self, group_index: int, attr: Attribute) -> tuple:
        if isinstance(attr, LinearIneq):
            c = attr.threshold
            return (1, abs(c), c < 0, group_index)
        return (0, group_index)

    def signature(self, point: DataPoint) -> tuple:
        """Points with equal signatures are not separated by any candidate."""
        sig: list = [point.location]
        sig += [point.args[s] != 0 if s < len(point.args) else False for s in self.bool_slots]
        for terms in self.terms:
            v = LinearIneq(terms, 0).term_value(point.args)
            if self.cap is not None:
                v = -self.cap if v <= -self.cap else (self.cap + 1 if v > self.cap else v)
            sig.append(v)
        return tuple(sig)


class FixedPool:
    """An explicit attribute list; every attribute is scored on its own."""

    def __init__(self, attributes: Iterable[Attribute]):
        self.attributes = list(attributes)

    def candidate_groups(self, points):
        return [[a] for a in self.attributes]

    def rank(self, group_index: int, attr: Attribute) -> tuple:
        return (group_index,)

    def signature(self, point: DataPoint) -> tuple:
        return tuple(a.evaluate(point) for a in self.attributes)


def as_pool(pool):
    if hasattr(pool, "candidate_groups"):
        return pool
    return FixedPool(pool)


# ---------------------------------------------------------------------------
# Scores


def entropy(P: float, N: float) -> float:
    total = P + N
    if total == 0 or P == 0 or N == 0:
        return 0.0
    p, q = P / total, N / total
    return -p * math.log2(p) - q * math.log2(q)


def _ratio(k, total):
    # unlabeled side: maximal uncertainty
    return k / total if total else 0.5


def neg_pos_likelihood(P1, N1, P2, N2) -> float:
    """Likelihood that side 1 is labeled negative and side 2 positive."""
    return _ratio(N1, P1 + N1) * _ratio(P2, P2 + N2)


def gain(P: int, N: int, PL: int, NL: int) -> float:
    """Information gain over the classified points only."""
    total = P + N
    if total == 0:
        return 0.0
    PR, NR = P - PL, N - NL
    rest = ((PL + NL) * entropy(PL, NL) + (PR + NR) * entropy(PR, NR)) / total
    return entropy(P, N) - rest


def _counts(ids, u: PartialValuation) -> tuple[int, int]:
    P = N = 0
    for i in ids:
        v = u.get(i)
        if v is True:
            P += 1
        elif v is False:
            N += 1
    return P, N


def crossing_pairs(ids: Iterable[int], constraints: Iterable[HornConstraint]) -> list[tuple[int, int]]:
    """(premise point, conclusion point) pairs with both ends inside ``ids``."""
    inside = set(ids)
    pairs = []
    for c in constraints:
        y = c.conclusion
        if y is None or y not in inside:
            continue
        pairs += [(x, y) for x in c.premises if x != y and x in inside]
    return pairs


def penalty(left: Iterable[int], right: Iterable[int], constraints: Iterable[HornConstraint],
            u: PartialValuation, scale: float = 1.0) -> float:
    """Penalty of splitting into ``left``/``right``: one term per cut premise point."""
    left, right = set(left), set(right)
    PL, NL = _counts(left, u)
    PR, NR = _counts(right, u)
    lr = rl = 0
    for x, y in crossing_pairs(left | right, constraints):
        if x in left and y in right:
            lr += 1
        elif x in right and y in left:
            rl += 1
    return scale * (lr * (1 - neg_pos_likelihood(PL, NL, PR, NR))
                    + rl * (1 - neg_pos_likelihood(PR, NR, PL, NL)))


def split_score(left, right, constraints, u, scale: float = 1.0) -> float:
    """Penalised gain of one split."""
    P, N = _counts(list(left) + list(right), u)
    PL, NL = _counts(left, u)
    return gain(P, N, PL, NL) - penalty(left, right, constraints, u, scale)


def select_attribute(points: Sequence[DataPoint], pool, u: PartialValuation,
                     constraints: Sequence[HornConstraint], scale: float = 1.0) -> Attribute | None:
    """Best non-trivial split of ``points`` or None when no candidate separates them."""
    pool = as_pool(pool)
    ids = [p.id for p in points]
    pos_of = {pid: i for i, pid in enumerate(ids)}
    labels = np.array([{True: 1, False: -1}.get(u.get(i), 0) for i in ids], dtype=np.int8)
    pairs = crossing_pairs(ids, constraints)
    pairs_idx = np.array([(pos_of[x], pos_of[y]) for x, y in pairs], dtype=np.int64).reshape(-1, 2)
    n = len(points)

    best, best_score, best_rank = None, -math.inf, None

    def offer(attr, s, rank):
        nonlocal best, best_score, best_rank
        if s > best_score + TIE_EPS or (s >= best_score - TIE_EPS and rank < best_rank):
            best, best_score, best_rank = attr, float(s), rank

    if isinstance(pool, AttributePool):
        basic = pool.basic_candidates(points)
    else:
        basic = pool.attributes
    for gi, a in enumerate(basic):
        mask = np.array([a.evaluate(p) for p in points], dtype=bool)
        if 0 < int(mask.sum()) < n:
            offer(a, _mask_score(mask, labels, pairs_idx, scale), pool.rank(gi, a))
    if not isinstance(pool, AttributePool) or n == 0:
        return best

    values = pool.term_values(points)
    thresholds = values if pool.cap is None else np.clip(values, -pool.cap, pool.cap)
    scores, n_left = _sweep_matrix(values, thresholds, labels, pairs_idx, scale)
    ok = (n_left > 0) & (n_left < n)
    if not ok.any():
        return best
    top = scores[ok].max()
    if top < best_score - TIE_EPS:
        return best
    # lowest pool rank among the tied maxima, mirroring AttributePool.rank
    rows, cols = np.nonzero(ok & (scores >= top - TIE_EPS))
    c = thresholds[rows, cols]
    k = np.lexsort((cols, c < 0, np.abs(c)))[0]
    i, j = int(rows[k]), int(cols[k])
    a = LinearIneq(pool.terms[j], int(thresholds[i, j]))
    offer(a, scores[i, j], pool.rank(len(basic) + j, a))
    return best


def _count_le(data: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """``out[i, j] = #{r : data[r, j] <= queries[i, j]}`` for int matrices."""
    m, cols = data.shape
    if m == 0:
        return np.zeros(queries.shape, dtype=np.int64)
    lo = min(int(data.min()), int(queries.min()))
    hi = max(int(data.max()), int(queries.max()))
    span = hi - lo + 1
    offset = np.arange(cols, dtype=np.int64) * span
    flat = np.sort(((data - lo) + offset).T.reshape(-1))
    pos = np.searchsorted(flat, ((queries - lo) + offset), side="right")
    return pos - np.arange(cols, dtype=np.int64) * m


def _sweep_matrix(values: np.ndarray, thresholds: np.ndarray, labels: np.ndarray,
                  pairs_idx: np.ndarray, scale: float):
    """Scores of ``term_j <= thresholds[i, j]`` for every candidate at once."""
    n_left = _count_le(values, thresholds)
    pos_vals = values[labels == 1]
    neg_vals = values[labels == -1]
    PL = _count_le(pos_vals, thresholds).astype(float)
    NL = _count_le(neg_vals, thresholds).astype(float)
    P, N = float(len(pos_vals)), float(len(neg_vals))
    PR, NR = P - PL, N - NL

    def ent(a, b):
        t = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            pa, pb = a / t, b / t
            h = -(pa * np.log2(pa) + pb * np.log2(pb))
        return np.where((a == 0) | (b == 0), 0.0, h)

    if P + N > 0:
        g = entropy(P, N) - ((PL + NL) * ent(PL, NL) + (PR + NR) * ent(PR, NR)) / (P + N)
    else:
        g = np.zeros(thresholds.shape)

    if len(pairs_idx):
        vx = values[pairs_idx[:, 0]]
        vy = values[pairs_idx[:, 1]]
        big = max(int(values.max()), int(thresholds.max())) + 1
        fwd = vx < vy
        back = vy < vx
        # x left, y right  <=>  vx <= c < vy
        lr = (_count_le(np.where(fwd, vx, big), thresholds)
              - _count_le(np.where(fwd, vy, big), thresholds))
        rl = (_count_le(np.where(back, vy, big), thresholds)
              - _count_le(np.where(back, vx, big), thresholds))
    else:
        lr = rl = np.zeros(thresholds.shape)

    def ratio(k, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t == 0, 0.5, k / np.where(t == 0, 1, t))

    f_lr = ratio(NL, PL + NL) * ratio(PR, PR + NR)
    f_rl = ratio(NR, PR + NR) * ratio(PL, PL + NL)
    return g - scale * (lr * (1 - f_lr) + rl * (1 - f_rl)), n_left


def _mask_score(mask: np.ndarray, labels: np.ndarray, pairs_idx: np.ndarray, scale: float) -> float:
    P, N = int((labels == 1).sum()), int((labels == -1).sum())
    PL, NL = int((labels[mask] == 1).sum()), int((labels[mask] == -1).sum())
    PR, NR = P - PL, N - NL
    lr = rl = 0
    if len(pairs_idx):
        mx, my = mask[pairs_idx[:, 0]], mask[pairs_idx[:, 1]]
        lr = int((mx & ~my).sum())
        rl = int((~mx & my).sum())
    return gain(P, N, PL, NL) - scale * (lr * (1 - neg_pos_likelihood(PL, NL, PR, NR))
                                         + rl * (1 - neg_pos_likelihood(PR, NR, PL, NL)))
