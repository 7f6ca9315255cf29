"""Teacher/learner round loop."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .attr_select import AttributePool
from .chc import ChcSystem
from .core import DecisionTree, HornSample, format_formula, formula_size, tree_formula_for
from .learner import (
    InseparablePoints,
    LearningFailure,
    UnsatisfiableSample,
    add_iff_constraints,
    learn,
)
from .teacher import Conjecture, cex_to_sample, check_conjecture

log = logging.getLogger(__name__)

PROVED = "proved"
GAVE_UP = "gave_up"
POOL_EXHAUSTED = "pool_exhausted"


class InternalError(RuntimeError):
    """A learner or loop invariant was violated."""


@dataclass
class RunConfig:
    bound: int = 16
    max_rounds: int = 2000
    pool_stages: tuple[int, ...] = (8, 64, 512)
    # weight of the cut penalty in split scores; positive weights keep the
    # bundled rely-guarantee system from converging, so it is off by default
    penalty: float = 0.0
    seed: int | None = None  # randomised teacher witnesses when set
    trace: Callable[[dict], None] | None = None

    def __post_init__(self):
        self.pool_stages = tuple(self.pool_stages)
        if self.bound < 1 or self.max_rounds < 1 or not self.pool_stages:
            raise ValueError("bound, max_rounds and pool_stages must be positive")
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")
        if any(c < 1 for c in self.pool_stages):
            raise ValueError("pool stage caps must be positive")


@dataclass
class RunOutcome:
    status: str
    conjecture: dict | None
    rounds: int
    pos: int = 0
    neg: int = 0
    horn: int = 0
    seconds: float = 0.0
    stage: int = 0
    sample: HornSample | None = field(default=None, repr=False)
    bound: int = 0

    def describe(self, system: ChcSystem) -> dict[str, str]:
        if self.conjecture is None:
            return {}
        return {
            p.name: format_formula(self.conjecture[p.name], p.param_names)
            for p in system.predicates
        }


def project_conjecture(tree: DecisionTree, predicates) -> dict:
    """One formula per unknown: the tree formula with location tests fixed."""
    return {p.name: tree_formula_for(tree, p.name, p.arity) for p in predicates}


def _learn_with_iff(sample: HornSample, pool, penalty: float):
    try:
        return learn(sample, pool, penalty=penalty)
    except InseparablePoints:
        pass
    augmented = add_iff_constraints(sample, pool)
    try:
        return learn(augmented, pool, penalty=penalty)
    except InseparablePoints as exc:
        raise InternalError(f"inseparable points remain after iff constraints: {exc}") from exc


def run(system: ChcSystem, cfg: RunConfig | None = None) -> RunOutcome:
    cfg = cfg or RunConfig()
    rng = np.random.default_rng(cfg.seed) if cfg.seed is not None else None
    sample = HornSample(system.max_arity)
    counts = {"pos": 0, "neg": 0, "horn": 0}
    stage = 0
    rounds = 0
    start = time.perf_counter()

    def outcome(status, conj=None):
        return RunOutcome(status, conj, rounds, counts["pos"], counts["neg"], counts["horn"],
                          time.perf_counter() - start, stage, sample, cfg.bound)

    while True:
        if rounds >= cfg.max_rounds:
            return outcome(GAVE_UP)
        pool = AttributePool.for_system(system, cfg.pool_stages[stage])
        t0 = time.perf_counter()
        try:
            state = _learn_with_iff(sample, pool, cfg.penalty)
        except UnsatisfiableSample:
            if stage + 1 >= len(cfg.pool_stages):
                log.info("learner failed in the last pool stage")
                return outcome(POOL_EXHAUSTED)
            stage += 1
            log.info("advancing to pool stage %d (cap %d)", stage, cfg.pool_stages[stage])
            continue
        except LearningFailure as exc:
            raise InternalError(str(exc)) from exc
        learn_time = time.perf_counter() - t0
        rounds += 1
        conj = project_conjecture(state.tree, system.predicates)
        t1 = time.perf_counter()
        cex = check_conjecture(system, conj, cfg.bound, rng=rng)
        check_time = time.perf_counter() - t1
        record = {
            "round": rounds,
            "stage": stage,
            "points": len(sample.points),
            "constraints": len(sample.constraints),
            "tree_nodes": state.tree.size(),
            "conjecture_size": sum(formula_size(f) for f in conj.values()),
            "solver_calls": state.solver_calls,
            "learn_seconds": round(learn_time, 6),
            "check_seconds": round(check_time, 6),
            "cex": None if cex is None else cex.kind,
            "clause": None if cex is None else cex.clause_index,
        }
        if cfg.trace is not None:
            cfg.trace(record)
        log.debug("round %s", record)
        if cex is None:
            return outcome(PROVED, conj)
        counts[cex.kind] += 1
        _, is_new = cex_to_sample(cex, sample)
        if not is_new:
            raise InternalError(f"teacher repeated a counterexample in round {rounds}")
