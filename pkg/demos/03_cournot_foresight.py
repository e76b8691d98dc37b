"""
How far ahead should a Cournot duopolist look?
==============================================

Two firms with zero cost face price 1 - q1 - q2. A firm that looks k moves
ahead picks a quantity by backward induction through alternating replies.
Output rises above the myopic 1/3 for every k > 1, peaks at k = 2 and
settles a little lower.
"""

from fractions import Fraction

from lookahead.cournot import (
    MYOPIC,
    CournotOutcome,
    equilibrium_quantity,
    foresight_curve,
    grid_game,
    grid_response,
)

# exact rational values for the first two horizons
for k in (1, 2):
    q = equilibrium_quantity(k, Fraction).q
    out = CournotOutcome(q)
    print(f"k={k}: q={q}  price={out.price}  surplus={out.social_surplus}")
q2 = equilibrium_quantity(2, Fraction).q
print("output gain at k=2:", float(q2 / MYOPIC.q - 1) * 100, "%")

# the whole curve
print("\n  k        q   output %  surplus %")
for row in foresight_curve(40):
    if row.k <= 6 or row.k % 10 == 0:
        print(f"{row.k:3d}  {row.q:.6f}  {row.output_gain_pct:8.4f}  {row.surplus_gain_pct:8.4f}")

# the same reply computed by the generic engine on a quantity grid
grid = grid_game(1 / 200)
idx = 75  # opponent at 3/8
print("\ngrid reply to 3/8 with k=2:", grid_response(grid, 2, idx))
