"""Cournot duopoly under k-lookahead in the path model.

Demand is normalised to price ``1 - q_i - q_j`` with zero marginal cost. When
both firms look ``k`` turns ahead and collect profit every turn, the quantity
chosen on a turn is linear in the opponent's standing quantity,
``q = beta - alpha * q_opp``; the coefficients come from a backward recursion
over the turns remaining in the horizon.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import Evaluator, FiniteGame, LookaheadConfig, LookaheadError


@dataclass(frozen=True)
class CournotCoefficients:
    """Reaction coefficients indexed by distance from the end of the horizon.

    ``alpha[0], beta[0]`` govern the last turn; ``alpha[-1], beta[-1]`` the
    current move.
    """

    alpha: tuple
    beta: tuple

    @property
    def horizon(self) -> int:
        return len(self.alpha)

    @property
    def alpha0(self):
        return self.alpha[-1]

    @property
    def beta0(self):
        return self.beta[-1]

    def reaction(self, q_opp):
        return self.beta0 - self.alpha0 * q_opp


def coefficients(k: int, number=float) -> CournotCoefficients:
    """Backward recursion for the reaction coefficients of a k-turn horizon.

    ``number`` builds the scalars: ``float`` by default, ``Fraction`` for
    exact arithmetic, or ``mpmath.mpf`` for extended precision.
    """
    if k < 1:
        raise LookaheadError("foresight k must be at least 1")
    half = number(1) / 2
    alpha, beta = [half], [half]
    if k >= 2:
        alpha.append(number(1) / 3)
        beta.append(half)
    while len(alpha) < k:
        a1, a2 = alpha[-1], alpha[-2]
        b1, b2 = beta[-1], beta[-2]
        denom = 4 - 2 * a1 - a1 * a1 * a2
        alpha.append(1 / denom)
        beta.append((2 - b1 + a1 * b2 - a1 * a2 * b1) / denom)
    return CournotCoefficients(tuple(alpha), tuple(beta))


@dataclass(frozen=True)
class CournotOutcome:
    q: float  # per-firm quantity

    @property
    def total_output(self):
        return 2 * self.q

    @property
    def price(self):
        return 1 - 2 * self.q

    @property
    def profit(self):
        return self.q * (1 - 2 * self.q)

    @property
    def consumer_surplus(self):
        return 2 * self.q * self.q

    @property
    def social_surplus(self):
        return 2 * self.q * (1 - self.q)


def equilibrium_quantity(k: int, number=float) -> CournotOutcome:
    """Symmetric fixed point ``q = beta0 - alpha0 q`` of the k-lookahead reaction."""
    c = coefficients(k, number)
    return CournotOutcome(c.beta0 / (1 + c.alpha0))


MYOPIC = CournotOutcome(Fraction(1, 3))


@dataclass(frozen=True)
class CurveRow:
    k: int
    alpha0: float
    beta0: float
    q: float
    output_gain_pct: float
    surplus_gain_pct: float


def foresight_curve(k_max: int) -> list[CurveRow]:
    """Equilibrium output and surplus gains over the myopic outcome for k = 1..k_max."""
    if k_max < 1:
        raise LookaheadError("k_max must be at least 1")
    base_q = float(MYOPIC.q)
    base_s = float(MYOPIC.social_surplus)
    rows = []
    for k in range(1, k_max + 1):
        c = coefficients(k)
        out = CournotOutcome(c.beta0 / (1 + c.alpha0))
        rows.append(
            CurveRow(
                k,
                c.alpha0,
                c.beta0,
                out.q,
                100 * (out.q / base_q - 1),
                100 * (out.social_surplus / base_s - 1),
            )
        )
    return rows


CURVE_COLUMNS = ("k", "alpha0", "beta0", "q", "output_gain_pct", "surplus_gain_pct")


def curve_csv(rows: list[CurveRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for r in rows:
        w.writerow([r.k] + [repr(float(getattr(r, c))) for c in CURVE_COLUMNS[1:]])
    return buf.getvalue()


def leaf_reaction(depth: int, q_opp: float) -> float:
    """Leaf-model reaction of a firm whose opponent replies myopically.

    Depth 1 is the myopic best response ``(1 - q_opp)/2``. With depth 2 the
    firm maximises ``q (1 - q - (1 - q)/2)`` whatever the opponent holds now.
    """
    if depth == 1:
        return (1 - q_opp) / 2
    if depth == 2:
        return 0.5
    raise LookaheadError("leaf-model reactions are only defined for depth 1 or 2")


def stackelberg_check(leader_depth: int = 2, follower_depth: int = 1) -> tuple[float, float]:
    """Rest point of alternating leaf-model reactions with asymmetric foresight."""
    if leader_depth == follower_depth == 1:
        return 1 / 3, 1 / 3
    if (leader_depth, follower_depth) == (2, 1):
        leader = leaf_reaction(2, 0.0)
        return leader, leaf_reaction(1, leader)
    raise LookaheadError("only depth pairs (2, 1) and (1, 1) have a closed form here")


def grid_game(step: float = 1 / 400, upper: float = 0.5) -> FiniteGame:
    """Duopoly on the quantity grid ``0, step, ..., upper``."""
    grid = np.linspace(0.0, upper, int(round(upper / step)) + 1)
    qi, qj = np.meshgrid(grid, grid, indexing="ij")
    price = 1 - qi - qj
    tensor = np.stack([qi * price, qj * price], axis=-1)
    game = FiniteGame.from_tensor(tensor, labels=[grid, grid])
    game.grid = grid
    return game


def grid_response(
    game: FiniteGame, k: int, q_opp_index: int, q_own_index: int = 0, model: str = "path"
) -> float:
    """Engine best response of firm 0 with alternating moves after the root."""
    seq = tuple(1 - (t % 2) for t in range(max(k - 1, 0)))
    cfg = LookaheadConfig(depth=k, payoff_model=model, order="fixed", sequence=seq)
    ev = Evaluator(game, cfg)
    best, _ = ev.evaluate((q_own_index, q_opp_index), 0)
    return float(game.grid[best])


def grid_stackelberg(game: FiniteGame, leader_depth: int = 2, follower_depth: int = 1):
    """Leader's then follower's engine responses in the leaf model."""
    cfg = LookaheadConfig(
        depth=(leader_depth, follower_depth),
        payoff_model="leaf",
        order="fixed",
        sequence=(1,) * max(leader_depth - 1, follower_depth - 1, 0),
    )
    ev = Evaluator(game, cfg)
    lead, _ = ev.evaluate((0, 0), 0)
    follow, _ = ev.evaluate((lead, 0), 1)
    return float(game.grid[lead]), float(game.grid[follow])
