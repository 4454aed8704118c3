"""Reachability of local states in asynchronous binary automata networks."""
from .model import (
    Aban, AbanError, GlobalState, LocalState, NotFirableError, ParseError, Transition,
    TrajectoryError, apply_trajectory, fire, firable, format_aban, parse_aban,
    parse_local_state, validate_trajectory,
)
from .boolnet import BoolNetwork, DnfLimitError, bn_to_aban, parse_bn
from .slcg import (
    Slcg, build_slcg, detect_conflicts, eval_reach_prime, extract_trajectory, find_sccs,
    preprocess_cycles,
)
from .solver import ReachReport, SolverConfig, Verdict, perm_reach
from .oracle import GeneratorSpec, brute_force_reach, random_aban, random_walk_calibration

__version__ = "0.1.0"
