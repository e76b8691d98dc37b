"""
Utility games where lookahead hurts
===================================

Two constructions with submodular social functions. In the first, players
split into sub-games on the lines of the Fano plane and lookahead pulls
them from cooperative play to a state worth half the optimum. In the
second, a two-player game with Vickrey payoffs has a single two-move
lookahead equilibrium, worth a 12/kappa fraction of the optimum.
"""

import numpy as np

from lookahead.utility import (
    SteinerGame,
    basic_utility_equilibria,
    gamma,
    guaranteed_immediate_score,
    myopic_chain,
    steiner_walk,
)

fano = SteinerGame(2)
print(f"{fano.n} players, lines of size {fano.k}:", fano.blocks)
print("optimum:", fano.optimum())

traj = steiner_walk(fano, depth=3, steps=300, seed=0)
print("path-model walk from the optimum:", traj.values[:15], "...")
print(f"long-run mean {traj.values[100:].mean():g}, ratio {fano.optimum() / traj.values[100:].mean():g}")
print("guaranteed one-move score of player 0:",
      guaranteed_immediate_score(fano, fano.optimal_state(), 0))

print("\nbasic-utility game, kappa = 120")
for pair in [("B", "B"), ("B", "T"), ("T", "G"), ("G", "G")]:
    print(f"  gamma{pair} = {gamma(pair, 120):g}")
report = basic_utility_equilibria(120)
print("  lookahead equilibria:", report.equilibria, " ratio:", report.ratio)
print("  myopic play instead:", " -> ".join("".join(s) for s in myopic_chain(120)))

for kappa in (13, 50, 10**4):
    r = basic_utility_equilibria(kappa)
    print(f"  kappa={kappa}: equilibria {r.equilibria}, ratio {r.ratio:g} = kappa/12: {np.isclose(r.ratio, kappa / 12)}")
