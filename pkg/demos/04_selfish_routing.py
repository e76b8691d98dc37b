"""
Selfish routing with two-move lookahead
=======================================

Unsplittable flow with linear latencies a*x + b. Three players share a
network with one edge that is fast when alone and slow when crowded. A
walk of lookahead best responses brings the total latency down to the
optimum, and every visited flow satisfies the inequalities the
analysis rests on.
"""

from lookahead.routing import (
    DECREASE_THRESHOLD,
    EQ_RATIO_BOUND,
    RoutingGame,
    dynamics_length,
    example_instance,
    lookahead_move_value,
    optimum,
    routing_walk,
    shared_edge_instance,
    verify_lemma_suite,
)

inst = example_instance()
game = RoutingGame(inst)
opt, best = optimum(inst)
print(f"{inst.n} players, {len(inst.edges)} edges, paths per player: {len(inst.paths(0))}")
print("optimal total latency:", opt, "with paths", best.paths)

start = (0, 0, 0)
steps = dynamics_length(inst, game.social_value(start), opt)
traj = routing_walk(inst, steps, seed=4, start=start)
print(f"\nwalk of {steps} steps from l(f) = {traj.values[0]:g}:")
print(" ", " ".join(f"{v:g}" for v in traj.values[:12]), "...", f"{traj.values[-1]:g}")
print(f"decrease is only promised above {DECREASE_THRESHOLD:.2f} x OPT")

# the inequalities checked on random flows
report = verify_lemma_suite(inst, trials=200, seed=0)
for ident in ("fundamental", "potential", "expected_total", "expected_decrease", "equilibrium_ratio"):
    print(f"  {ident:18s} checked {report.count(ident):4d}  violated {len(report.violations(ident))}")
print(f"equilibria stay within {EQ_RATIO_BOUND:.4f} x OPT")

# lookahead values of staying on a shared edge versus moving to a free one
shared = shared_edge_instance()
flow = RoutingGame(shared).flow((0, 0))
for path in shared.paths(0):
    print(f"  player 0 on {path}: lookahead value {lookahead_move_value(shared, flow, 0, path):g}")
