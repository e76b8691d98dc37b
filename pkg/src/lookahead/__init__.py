"""Lookahead search in strategic games: a k-lookahead engine and the game
families it is applied to (GSP auctions, Cournot duopoly, selfish routing,
utility games and Shapley network design)."""

from .engine import (
    Evaluator,
    FiniteGame,
    Game,
    LookaheadConfig,
    LookaheadError,
    LookaheadStateGraph,
    NoEquilibriumError,
    StateSpaceTooLarge,
    Trajectory,
    build_state_graph,
    coordination_ratio,
    enumerate_equilibria,
    evaluate_lookahead,
    is_lookahead_equilibrium,
    lookahead_best_response,
    random_walk,
    social_optimum,
)

__version__ = "0.1.0"
