"""Brute-force reference computations that do not use the engine.

They are slow and only cover depth 1 and 2, which is enough to cross-check
the engine on small random games.
"""

from __future__ import annotations

import numpy as np

from .engine import (
    FiniteGame,
    LookaheadConfig,
    evaluate_lookahead,
    evaluator_for,
    first_best,
    random_game,
)


def myopic_best_response(game: FiniteGame, state, player: int) -> int:
    """Lowest-index strategy with the best own payoff after a unilateral switch."""
    sign = 1.0 if game.maximize else -1.0
    values = []
    for s in range(len(game.strategies[player])):
        trial = list(state)
        trial[player] = s
        values.append(sign * game.payoff(player, tuple(trial)))
    return first_best(values)


def depth2_average_values(game: FiniteGame, state, player: int, model: str = "leaf") -> list:
    """Expected depth-2 payoff of ``player`` for each of its strategies.

    The second mover is any of the ``n`` players with equal probability and
    plays a myopic best response; ``model="path"`` adds the payoff right after
    the root move.
    """
    out = []
    for s in range(len(game.strategies[player])):
        first = list(state)
        first[player] = s
        first = tuple(first)
        total = 0.0
        for j in range(game.n):
            second = list(first)
            second[j] = myopic_best_response(game, first, j)
            total += game.payoff(player, tuple(second))
        value = total / game.n
        if model == "path":
            value += game.payoff(player, first)
        out.append(value)
    return out


def selftest(trials: int = 1000, seed: int = 0, tol: float = 1e-9) -> dict:
    """Compare the engine with the brute force on random games.

    Returns counts of depth-1 best-response mismatches and of depth-2
    average-order value mismatches (both payoff models).
    """
    rng = np.random.default_rng(seed)
    mismatches = {"depth1": 0, "depth2": 0}
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        sizes = [int(x) for x in rng.integers(1, 5, size=n)]
        game = random_game(rng, n, sizes, maximize=bool(rng.integers(2)), integer=bool(rng.integers(2)))
        state = tuple(int(rng.integers(m)) for m in sizes)
        player = int(rng.integers(n))
        best, _ = evaluate_lookahead(game, state, player, LookaheadConfig(depth=1))
        if best != myopic_best_response(game, state, player):
            mismatches["depth1"] += 1
        for model in ("leaf", "path"):
            cfg = LookaheadConfig(depth=2, payoff_model=model, order="average")
            want = depth2_average_values(game, state, player, model)
            _, rows = evaluator_for(game, cfg).candidate_values(state, player)
            sign = 1.0 if game.maximize else -1.0
            got = sign * rows[:, player]
            if not np.allclose(got, want, rtol=tol, atol=tol):
                mismatches["depth2"] += 1
    return mismatches

