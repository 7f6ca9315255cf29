"""Horn-ICE invariant synthesis with decision trees.

A learner grows decision trees over octagonal attributes from Horn
samples (points plus implication constraints), and a bounded teacher
checks the conjectured invariants against constrained Horn clauses.
"""
from .core import DataPoint, DecisionTree, HornConstraint, HornSample, PartialValuation
from .driver import RunConfig, RunOutcome, run
from .frontend import ParseError, parse, parse_file
from .horn_solver import horn_solve
from .learner import learn, learn_tree

__all__ = [
    "DataPoint",
    "DecisionTree",
    "HornConstraint",
    "HornSample",
    "ParseError",
    "PartialValuation",
    "RunConfig",
    "RunOutcome",
    "horn_solve",
    "learn",
    "learn_tree",
    "parse",
    "parse_file",
    "run",
]
