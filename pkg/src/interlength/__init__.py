"""Interaction lengths of game-semantic agents, with certified bounds.

Modules: :mod:`.agents` (the rewriting system and search), :mod:`.certificates`
(derivations and cut elimination), :mod:`.pointers` (visible pointer
structures), :mod:`.lam` (simply typed terms and head linear reduction),
:mod:`.tower` (iterated exponentials) and :mod:`.cli`.
"""

__version__ = "0.1.0"

from .agents import (
    Agent, agent, parse_agent, format_agent, graft, decrement_root,
    reduction_steps, longest_reduction, nd_via_agents, agent_metrics,
    upper_bound, sandwich, collapse_depth, ReductionStats,
)
from .errors import BudgetExceeded, OutOfHypothesis
from .tower import Tower, compare as tower_compare
from .certificates import Derivation, certify, check, extract_bound
from .pointers import Play, enumerate_interactions, simulate_step
from .lam import parse_term, typecheck, hlr_run, kam_steps, game_situation, general_bound
