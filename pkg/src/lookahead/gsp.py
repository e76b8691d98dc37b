"""Generalised second-price (GSP) auctions with balanced bidding.

Slots are sold in decreasing bid order; the bidder in slot ``t`` pays the
next bid down per click. Players restrict themselves to *balanced* bids: to
target slot ``t`` against a price ``p`` a player with value ``v`` bids
``(1 - c_t/c_{t-1}) v + (c_t/c_{t-1}) p``, and bids ``v`` when aiming for the
top slot or for no slot at all. That makes the strategy set finite (one bid
per target slot), so the lookahead engine can search it.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import (
    Evaluator,
    Game,
    LookaheadConfig,
    LookaheadError,
    StateSpaceTooLarge,
    first_best,
    state_cap,
)

LOSE = "lose"


@dataclass(frozen=True)
class GspInstance:
    ctr: tuple[float, ...]
    valuations: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ctr", tuple(float(c) for c in self.ctr))
        object.__setattr__(self, "valuations", tuple(float(v) for v in self.valuations))
        if not self.valuations:
            raise LookaheadError("a GSP instance needs at least one bidder")
        if not self.ctr or any(c <= 0 for c in self.ctr):
            raise LookaheadError("click-through rates must be positive")
        if any(a <= b for a, b in zip(self.ctr, self.ctr[1:])):
            raise LookaheadError("click-through rates must be strictly decreasing")

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def slots(self) -> int:
        return len(self.ctr)

    def c(self, t: int) -> float:
        """Click-through rate of 1-based slot ``t``; zero for dummy slots past the end."""
        return self.ctr[t - 1] if t <= self.slots else 0.0

    @classmethod
    def from_json(cls, source) -> "GspInstance":
        data = json.loads(Path(source).read_text()) if not isinstance(source, dict) else source
        return cls(tuple(data["ctr"]), tuple(data["valuations"]))

    def to_json(self) -> dict:
        return {"ctr": list(self.ctr), "valuations": list(self.valuations)}


@dataclass
class Allocation:
    slot: tuple  # 1-based slot per player, None for losers
    price: tuple  # per-click price per player (0 for losers)
    utility: tuple


def ranking(bids) -> list[int]:
    """Players in descending bid order, equal bids broken by player index."""
    return sorted(range(len(bids)), key=lambda i: (-bids[i], i))


def allocate(inst: GspInstance, bids) -> Allocation:
    order = ranking(bids)
    slot = [None] * inst.n
    price = [0.0] * inst.n
    utility = [0.0] * inst.n
    for pos, i in enumerate(order[: inst.slots]):
        t = pos + 1
        p = bids[order[pos + 1]] if pos + 1 < len(order) else 0.0
        slot[i] = t
        price[i] = p
        utility[i] = (inst.valuations[i] - p) * inst.c(t)
    return Allocation(tuple(slot), tuple(price), tuple(utility))


def balanced_bid(inst: GspInstance, player: int, target, next_bid: float) -> float:
    """Balanced bid of ``player`` for 1-based slot ``target`` above price ``next_bid``.

    ``target=1``, ``target="lose"`` and targets past the last slot give the
    truthful bid.
    """
    v = inst.valuations[player]
    if target == LOSE:
        return v
    if not isinstance(target, (int, np.integer)) or target < 1:
        raise LookaheadError(f"target slot {target!r} out of range")
    if target > inst.slots + 1:
        raise LookaheadError(f"target slot {target} beyond the dummy slot {inst.slots + 1}")
    if target == 1 or target > inst.slots:
        return v
    ratio = inst.c(target) / inst.c(target - 1)
    return (1 - ratio) * v + ratio * next_bid


def gsp_strategy_space(inst: GspInstance, player: int, bids) -> list[tuple]:
    """``(target, bid)`` per reachable slot, plus the losing (truthful) bid.

    The price for target ``t`` is the ``t``-th highest bid among the others.
    """
    others = sorted((b for j, b in enumerate(bids) if j != player), reverse=True)
    out = []
    for t in range(1, min(inst.slots, inst.n) + 1):
        price = others[t - 1] if t - 1 < len(others) else 0.0
        out.append((t, balanced_bid(inst, player, t, price)))
    out.append((LOSE, inst.valuations[player]))
    return out


def welfare(inst: GspInstance, bids) -> float:
    alloc = allocate(inst, bids)
    return sum(inst.valuations[i] * inst.c(t) for i, t in enumerate(alloc.slot) if t)


def optimal_welfare(inst: GspInstance) -> float:
    values = sorted(inst.valuations, reverse=True)
    return sum(v * c for v, c in zip(values, inst.ctr))


def is_output_truthful(inst: GspInstance, bids) -> bool:
    return allocate(inst, bids).slot == allocate(inst, inst.valuations).slot


class GspGame(Game):
    """GSP auction as a game over bid vectors with balanced-bid options.

    ``states()`` enumerates the self-consistent balanced profiles: every
    assignment of bidders to slots whose bottom-up balanced bids reproduce
    that assignment.
    """

    def __init__(self, inst: GspInstance):
        self.inst = inst
        self.n = inst.n
        self.maximize = True
        self._alloc: dict = {}
        self._profiles: list | None = None

    def _allocation(self, state) -> Allocation:
        a = self._alloc.get(state)
        if a is None:
            a = self._alloc[state] = allocate(self.inst, state)
        return a

    def payoffs(self, state):
        return self._allocation(state).utility

    def social_value(self, state):
        return welfare(self.inst, state)

    def options(self, player, state):
        opts = [state[player]]
        for _, bid in gsp_strategy_space(self.inst, player, state):
            if bid not in opts:
                opts.append(bid)
        return opts

    def states(self):
        if self._profiles is None:
            self._profiles = balanced_profiles(self.inst)
        return iter(self._profiles)

    def num_states(self) -> int:
        return sum(1 for _ in self.states())


def profile_for_assignment(inst: GspInstance, winners) -> tuple[float, ...]:
    """Balanced bids when ``winners[t-1]`` holds slot ``t``; everyone else loses."""
    bids = [None] * inst.n
    losers = [i for i in range(inst.n) if i not in winners]
    for i in losers:
        bids[i] = inst.valuations[i]
    below = max((inst.valuations[i] for i in losers), default=0.0)
    for pos in range(len(winners) - 1, -1, -1):
        i = winners[pos]
        bids[i] = balanced_bid(inst, i, pos + 1, below)
        below = bids[i]
    return tuple(bids)


def balanced_profiles(inst: GspInstance) -> list[tuple[float, ...]]:
    count = min(inst.n, inst.slots)
    assignments = math.perm(inst.n, count)
    if assignments > state_cap():
        raise StateSpaceTooLarge(assignments, state_cap())
    out = []
    for winners in itertools.permutations(range(inst.n), count):
        bids = profile_for_assignment(inst, winners)
        slots = allocate(inst, bids).slot
        if all(slots[i] == t + 1 for t, i in enumerate(winners)):
            out.append(bids)
    return out


def lookahead_utilities(
    inst: GspInstance,
    bids,
    player: int,
    order: str = "worst",
    bid: float | None = None,
    include_self: bool = True,
) -> float:
    """Depth-2 leaf-model lookahead utility of ``player`` bidding ``bid``.

    For each possible next mover ``j`` the utility ``u^{ij}`` is taken after
    ``j`` switches to its myopic best balanced bid; the results are combined
    by ``min`` (worst order) or the mean (average order).
    """
    game = GspGame(inst)
    state = tuple(bids)
    if bid is not None:
        state = state[:player] + (float(bid),) + state[player + 1 :]
    values = []
    for j in range(inst.n):
        if j == player and not include_self:
            continue
        opts = game.options(j, state)
        utils = [game.payoffs(state[:j] + (o,) + state[j + 1 :])[j] for o in opts]
        reply = opts[first_best(utils)]
        after = state[:j] + (reply,) + state[j + 1 :]
        values.append(game.payoffs(after)[player])
    if not values:
        return game.payoffs(state)[player]
    if order == "worst":
        return min(values)
    if order == "average":
        return float(np.mean(values))
    raise LookaheadError(f"unknown order {order!r}")


def gsp_config(
    order: str, depth: int = 2, include_self: bool = True, model: str = "leaf"
) -> LookaheadConfig:
    return LookaheadConfig(
        depth=depth,
        payoff_model=model,
        order=order,
        mover_pool="all" if include_self else "distinct",
    )


@dataclass
class GspEquilibriumReport:
    inst: GspInstance
    order: str
    equilibria: list = field(default_factory=list)
    welfare: list = field(default_factory=list)
    truthful: list = field(default_factory=list)

    @property
    def opt_welfare(self) -> float:
        return optimal_welfare(self.inst)

    def rows(self, instance_id=0) -> list[dict]:
        return [
            {
                "instance_id": instance_id,
                "order_model": self.order,
                "equilibrium_id": k,
                "welfare": w,
                "opt_welfare": self.opt_welfare,
                "output_truthful": t,
            }
            for k, (w, t) in enumerate(zip(self.welfare, self.truthful))
        ]


def gsp_equilibria(
    inst: GspInstance,
    order: str = "worst",
    depth: int = 2,
    include_self: bool = True,
    model: str = "leaf",
) -> GspEquilibriumReport:
    """All lookahead equilibria among balanced profiles."""
    game = GspGame(inst)
    ev = Evaluator(game, gsp_config(order, depth, include_self, model))
    report = GspEquilibriumReport(inst, order)
    for bids in game.states():
        if ev.is_equilibrium(bids):
            report.equilibria.append(bids)
            report.welfare.append(welfare(inst, bids))
            report.truthful.append(is_output_truthful(inst, bids))
    return report


def random_instance(rng: np.random.Generator, n: int, slots: int) -> GspInstance:
    """Generic instance: distinct uniform values and strictly decreasing CTRs."""
    ctr = np.sort(rng.uniform(1.0, 100.0, slots))[::-1]
    while np.any(np.diff(ctr) >= 0):
        ctr = np.sort(rng.uniform(1.0, 100.0, slots))[::-1]
    values = rng.uniform(1.0, 100.0, n)
    return GspInstance(tuple(ctr), tuple(values))


BAD_EXAMPLE = GspInstance((35.0, 26.0, 25.0, 20.0), (82.0, 83.0, 100.0, 93.0))
