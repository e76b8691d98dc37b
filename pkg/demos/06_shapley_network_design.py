"""
Cooperation through lookahead in network design
===============================================

Six players each buy one of two parallel links, costing 1 and 6, and share
the cost of the link they use equally. Starting with everyone on the
expensive link, no single player wants to leave: alone on the cheap link
it would pay 1, more than its current share. A player who looks far
enough ahead sees the others follow.
"""

import numpy as np

from lookahead.shapley import (
    ShapleyInstance,
    bound_holds,
    consecutive_mover_claim_check,
    default_instance,
    n_over_k,
    random_instance,
    shapley_dynamics,
    shapley_equilibria,
    total_cost,
)

inst = default_instance()
print("link costs:", inst.costs, " players:", inst.n, " OPT:", inst.optimum)

for k in range(1, inst.n + 1):
    run = shapley_dynamics(inst, k, steps=100)
    worst = max(total_cost(inst, s) for s in shapley_equilibria(inst, k))
    print(f"k={k}: walk ends at ratio {run.ratio:g}; worst equilibrium {worst:g}"
          f" (bound n/k OPT = {n_over_k(inst, k) * inst.optimum:g})")

# the first k movers of a lookahead tree always end up on the same path
print("claim holds on the default instance:",
      all(consecutive_mover_claim_check(inst, k) for k in range(1, inst.n + 1)))

# the bound on random instances with generic costs
rng = np.random.default_rng(1)
cases = held = 0
for i in range(15):
    r = random_instance(rng, graph=i % 2 == 1)
    for k in range(1, r.n + 1):
        cases += 1
        held += bound_holds(r, k)
print(f"random instances: bound held in {held} of {cases} (instance, k) cases")

# exact ties are the exception: two equal links and a split profile
tied = ShapleyInstance.parallel((1.0, 1.0), 2)
print("tied links, k=2, bound holds:", bound_holds(tied, 2))
