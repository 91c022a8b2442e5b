"""Saturation-based reachability and E(U,X) model checking for higher-order
context-free processes (stateless higher-order pushdown systems)."""

from .errors import (BudgetExhausted, HcfpError, LevelMismatch, LevelingFailed, ModelError,
                     ParseError, PartialResultNegation, ResourceExceeded, Undefined,
                     UnsupportedOperation)
from .store import Push1, PushK, PopK, encode, parse, pop, push
from .model import Hcfp, Transition, rules, validate
from .nested import NestedAutomaton, flatten, inflate, from_store_set, member
from .saturation import SaturationConfig, SaturationReport, pre, prestar
from .constrained import constrain, prestar_constrained
from .logic import Checker, check, parse_formula, sat

__version__ = "0.1.0"
