"""waitnet: waiting nets, their exact semantics, and symbolic analysis.

Waiting nets extend time Petri nets with control places that gate firing
without stopping time measurement.  This package provides the concrete
timed semantics, a finite state-class-graph construction for bounded
nets, reachability and coverability queries, export of an equivalent
timed automaton, and a differential oracle cross-checking the symbolic
layer against simulation.
"""

from .constraints import INF, FiringDomain
from .errors import WaitnetError
from .model import EPSILON, Marking, Transition, WaitingNet, make_net
from .semantics import (
    Configuration,
    Run,
    discrete_move,
    initial_configuration,
    random_run,
    timed_move,
    timed_word_of,
)
from .stateclass import (
    ExplorationLimits,
    StateClass,
    StateClassGraph,
    build_scg,
    coverable,
    domain_stats,
    initial_class,
    reachable,
)
from .scta import TimedAutomaton, build_scta, ta_accepts
from .textio import parse_net, parse_net_file, print_net

__all__ = [
    "INF",
    "EPSILON",
    "FiringDomain",
    "WaitnetError",
    "Marking",
    "Transition",
    "WaitingNet",
    "make_net",
    "Configuration",
    "Run",
    "discrete_move",
    "initial_configuration",
    "random_run",
    "timed_move",
    "timed_word_of",
    "ExplorationLimits",
    "StateClass",
    "StateClassGraph",
    "build_scg",
    "coverable",
    "domain_stats",
    "initial_class",
    "reachable",
    "TimedAutomaton",
    "build_scta",
    "ta_accepts",
    "parse_net",
    "parse_net_file",
    "print_net",
]

__version__ = "0.1.0"
