"""
Sponsored-search auctions with lookahead bidders
================================================

Generalized second price auction where every bidder plays a balanced bid for
some target slot. Looking two moves ahead with an adversarial next mover
sorts bidders by value; with a random next mover it can leave a
higher-value bidder below a lower-value one.
"""

import numpy as np

from lookahead import is_lookahead_equilibrium
from lookahead.gsp import (
    BAD_EXAMPLE,
    GspGame,
    allocate,
    gsp_config,
    gsp_equilibria,
    is_output_truthful,
    optimal_welfare,
    profile_for_assignment,
    random_instance,
    welfare,
)

inst = BAD_EXAMPLE
print("click-through rates:", inst.ctr)
print("valuations:         ", inst.valuations)

# bidders take slots 1..4 in index order, each at its balanced bid
bids = profile_for_assignment(inst, (0, 1, 2, 3))
alloc = allocate(inst, bids)
print("bids:", np.round(bids, 3))
print("slots:", alloc.slot, "prices:", np.round(alloc.price, 3))

game = GspGame(inst)
for order in ("average", "worst"):
    eq = is_lookahead_equilibrium(game, bids, gsp_config(order))
    print(f"equilibrium under the {order} order: {eq}")
print("output truthful:", is_output_truthful(inst, bids))
print(f"welfare {welfare(inst, bids):.1f} of {optimal_welfare(inst):.1f}")

# every worst-order equilibrium of the instance
report = gsp_equilibria(inst, "worst")
print(f"\n{len(report.equilibria)} worst-order equilibria, all truthful: {all(report.truthful)}")

# and a small random sweep
rng = np.random.default_rng(0)
seen = bad = 0
for _ in range(50):
    r = gsp_equilibria(random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6))), "worst")
    seen += len(r.equilibria)
    bad += sum(not t for t in r.truthful)
print(f"random sweep: {seen} worst-order equilibria, {bad} not truthful")
