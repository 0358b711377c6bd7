"""Exact solution concepts for TU-games with restricted cooperation and utilities on excesses."""
from .game import Game, GameError, UnknownCoalition, coalition_value, excess, is_preimputation, mask_of, members
from .lexcenter import PrenucleolusResult, check_nonempty, is_singleton, solve_prenucleolus
from .lp import LinearProgram, LpSolution, Status, optimize_direction, solve
from .utility import (AffineUtility, GeneralUtility, identity, inverse_at, percapita, q_weighted,
                      reciprocal_percapita, shift, u_excess)

__all__ = [
    "AffineUtility", "Game", "GameError", "GeneralUtility", "LinearProgram", "LpSolution", "PrenucleolusResult",
    "Status", "UnknownCoalition", "check_nonempty", "coalition_value", "excess", "identity", "inverse_at",
    "is_preimputation", "is_singleton", "mask_of", "members", "optimize_direction", "percapita", "q_weighted",
    "reciprocal_percapita", "shift", "solve", "solve_prenucleolus", "u_excess",
]
