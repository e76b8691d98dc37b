"""
Lookahead search on a small matrix game
=======================================

A two-player coordination game where myopic play gets stuck, and what a
second ply of search does to the set of equilibria.
"""

import numpy as np

from lookahead import (
    Evaluator,
    FiniteGame,
    LookaheadConfig,
    build_state_graph,
    enumerate_equilibria,
    evaluate_lookahead,
    random_walk,
)

# Payoffs for (row, column): both prefer to meet on strategy 2, but
# meeting anywhere beats a mismatch.
payoff = np.array([
    [[3, 3], [0, 0], [0, 0]],
    [[0, 0], [2, 2], [0, 0]],
    [[0, 0], [0, 0], [5, 5]],
], dtype=float)
social = payoff.sum(axis=2)
game = FiniteGame.from_tensor(payoff, social, labels=[("a", "b", "c"), ("a", "b", "c")])

# depth 1 is plain best response
myopic = LookaheadConfig(depth=1)
print("myopic equilibria:", [game.label(s) for s in enumerate_equilibria(game, myopic)])

# with two plies a player sees the other one follow; under the worst order
# the follower may be the least helpful player, so no meeting point is given up
for order in ("average", "worst"):
    cfg = LookaheadConfig(depth=2, order=order)
    eqs = enumerate_equilibria(game, cfg)
    print(f"depth 2, {order:7s} order:", [game.label(s) for s in eqs])

# the value the row player attaches to each of its moves from (a, a)
cfg = LookaheadConfig(depth=2, order="average")
best, _ = evaluate_lookahead(game, (0, 0), 0, cfg)
opts, rows = Evaluator(game, cfg).candidate_values((0, 0), 0)
print("row player at (a, a): move to", "abc"[best], "values", rows[:, 0])

# the state graph: one edge per improving lookahead move
graph = build_state_graph(game, cfg)
print("sinks of the state graph:", [game.label(s) for s in graph.sinks()])

# a seeded walk where a random player moves each step
traj = random_walk(game, (0, 0), 8, cfg, seed=1)
for step, (state, mover, value) in enumerate(traj.steps):
    print(f"  step {step}: mover={mover} state={game.label(state)} social={value:g}")
