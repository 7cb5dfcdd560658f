"""Temporal-logic planning with user-preferred relaxations on large graphs."""
from .errors import (CapacityError, CoSafetyError, EpsilonCycleError, FormulaSyntaxError,
                     GraphParseError, Infeasible, InvalidEditRun, InvalidTrajectory,
                     NegativeWeightError, NodeCapExceeded, PlacementError, TLRelaxError, UnknownAP)
from .formula import SpecDfa, accepts, compile_formula, evaluate, parse, symbol, to_text
from .product import RelaxedAutomaton, accepted_env_words, build_product, heuristic_table
from .search import (PlanResult, Problem, SearchConfig, check_result, plan, plan_task,
                     validate_result)
from .ts import (TransitionSystem, from_edges, load_graph, make_grid, multi_source_distance,
                 save_graph)
from .wfse import (EditSystem, PreferenceRule, build_edit_system, delete, load_edit_system,
                   parse_rules, substitute)

__version__ = "0.1.0"
