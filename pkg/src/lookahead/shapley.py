"""Shapley cost-sharing network design with one source and one sink.

Every player buys an s-t path and the cost of each edge is split equally
among its users. Myopic play can strand everyone on an expensive path;
players who look ``k`` moves ahead coordinate on cheaper paths, which caps
the total cost of an equilibrium at ``n/k`` times the cheapest path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .engine import (
    Evaluator,
    FiniteGame,
    LookaheadConfig,
    LookaheadError,
    Trajectory,
    enumerate_equilibria,
    first_best,
    random_walk,
    ratio_to_optimum,
)
from .routing import DEFAULT_PATH_CAP, Edge, RoutingInstance


@dataclass(frozen=True)
class ShapleyInstance:
    """``n`` players choosing among paths, each path a set of edge indices."""

    costs: tuple  # per-edge cost
    paths: tuple  # per-path tuple of edge indices
    n: int

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        object.__setattr__(self, "paths", tuple(tuple(p) for p in self.paths))
        if self.n < 1:
            raise LookaheadError("need at least one player")
        if not self.paths:
            raise LookaheadError("need at least one s-t path")
        if any(c < 0 for c in self.costs):
            raise LookaheadError("edge costs must be non-negative")
        for p in self.paths:
            if any(not 0 <= e < len(self.costs) for e in p):
                raise LookaheadError(f"path {p} references an unknown edge")

    @classmethod
    def parallel(cls, link_costs, n: int) -> "ShapleyInstance":
        """Parallel links: path ``i`` is the single edge ``i``."""
        return cls(tuple(link_costs), tuple((i,) for i in range(len(link_costs))), n)

    @classmethod
    def from_graph(cls, nodes: int, edges, source: int, sink: int, n: int,
                   cap: int = DEFAULT_PATH_CAP) -> "ShapleyInstance":
        """Graph form: ``edges`` are ``(tail, head, cost)``; paths are enumerated."""
        route = RoutingInstance(
            nodes, [Edge(u, v, 0.0, 0.0) for u, v, _ in edges], [(source, sink)], path_cap=cap
        )
        return cls(tuple(c for _, _, c in edges), tuple(route.paths(0)), n)

    @classmethod
    def from_json(cls, source) -> "ShapleyInstance":
        data = json.loads(Path(source).read_text()) if not isinstance(source, dict) else source
        if "paths" in data:
            return cls.parallel([p["cost"] for p in data["paths"]], data["n"])
        (player,) = {(p["s"], p["t"]) for p in data["players"]}
        edges = [(e["from"], e["to"], e.get("cost", e.get("b", 0.0))) for e in data["edges"]]
        return cls.from_graph(data["nodes"], edges, player[0], player[1], len(data["players"]))

    def path_cost(self, path: int) -> float:
        return sum(self.costs[e] for e in self.paths[path])

    @property
    def optimum(self) -> float:
        """Cost of the cheapest single path; with one terminal pair everyone shares it."""
        return min(self.path_cost(p) for p in range(len(self.paths)))

    @property
    def shortest_path(self) -> int:
        return first_best([-self.path_cost(p) for p in range(len(self.paths))])


def users(inst: ShapleyInstance, profile) -> np.ndarray:
    counts = np.zeros(len(inst.costs), dtype=int)
    for p in profile:
        for e in inst.paths[p]:
            counts[e] += 1
    return counts


def shapley_cost(inst: ShapleyInstance, profile, player: int) -> float:
    counts = users(inst, profile)
    return float(sum(inst.costs[e] / counts[e] for e in inst.paths[profile[player]]))


def total_cost(inst: ShapleyInstance, profile) -> float:
    counts = users(inst, profile)
    return float(sum(c for c, m in zip(inst.costs, counts) if m))


class ShapleyGame(FiniteGame):
    """Cost game whose strategies are path indices."""

    def __init__(self, inst: ShapleyInstance):
        self.inst = inst
        paths = list(range(len(inst.paths)))
        super().__init__(
            [paths] * inst.n,
            payoffs=lambda s: [shapley_cost(inst, s, i) for i in range(inst.n)],
            social_value=lambda s: total_cost(inst, s),
            maximize=False,
        )


def shapley_config(k: int, order: str = "worst", pool: str = "distinct") -> LookaheadConfig:
    return LookaheadConfig(depth=k, payoff_model="leaf", order=order, mover_pool=pool)


@dataclass
class ShapleyRun:
    trajectory: Trajectory
    optimum: float

    @property
    def final_cost(self) -> float:
        return float(self.trajectory.values[-1])

    @property
    def ratio(self) -> float:
        return ratio_to_optimum(self.final_cost, self.optimum, maximize=False)

    def long_run_ratio(self, burn_in: int = 0) -> float:
        tail = self.trajectory.values[burn_in:]
        return ratio_to_optimum(float(tail.mean()), self.optimum, maximize=False)


def shapley_dynamics(
    inst: ShapleyInstance,
    k: int,
    order: str = "worst",
    start=None,
    steps: int = 200,
    seed: int | None = 0,
    pool: str = "distinct",
) -> ShapleyRun:
    """Seeded k-lookahead walk; starts everyone on the costliest path by default."""
    game = ShapleyGame(inst)
    if start is None:
        worst = first_best([inst.path_cost(p) for p in range(len(inst.paths))])
        start = (worst,) * inst.n
    traj = random_walk(game, tuple(start), steps, shapley_config(k, order, pool), seed)
    return ShapleyRun(traj, inst.optimum)


def shapley_equilibria(inst: ShapleyInstance, k: int, order: str = "worst",
                       pool: str = "distinct") -> list:
    return enumerate_equilibria(ShapleyGame(inst), shapley_config(k, order, pool))


def bound_holds(inst: ShapleyInstance, k: int, order: str = "worst", pool: str = "distinct",
                tol: float = 1e-9) -> bool:
    """Every depth-k equilibrium costs at most ``(n/k) OPT``."""
    bound = inst.n / k * inst.optimum + tol
    return all(total_cost(inst, s) <= bound for s in shapley_equilibria(inst, k, order, pool))


def _tree(inst: ShapleyInstance, k: int):
    """Memoised line of play for the tree where players ``0..k-1`` move in turn."""
    if not 1 <= k <= inst.n:
        raise LookaheadError("need 1 <= k <= n")
    m = len(inst.paths)

    @lru_cache(maxsize=None)
    def play(state: tuple, step: int) -> tuple:
        if step == k:
            return state, ()
        best = None
        for p in range(m):
            child = state[:step] + (p,) + state[step + 1 :]
            leaf, line = play(child, step + 1)
            cost = shapley_cost(inst, leaf, step)
            if best is None or cost < best[0] - 1e-9 * max(1.0, abs(best[0])):
                best = (cost, leaf, (p,) + line)
        return best[1], best[2]

    return play


def induced_choices(inst: ShapleyInstance, profile, k: int) -> tuple[int, ...]:
    """Paths chosen along the played line when players ``0..k-1`` move in turn.

    Each mover minimises its own cost at the leaf given that the later
    movers respond the same way; ties go to the lowest path index. This is a
    direct recursion, independent of the engine.
    """
    return _tree(inst, k)(tuple(profile), 0)[1]


def consecutive_mover_claim_check(inst: ShapleyInstance, k: int, cap: int = 10**5) -> bool:
    """True when, from every profile, all ``k`` movers of the tree pick the same path."""
    m = len(inst.paths)
    if m**inst.n > cap:
        raise LookaheadError(f"{m ** inst.n} profiles exceed the cap {cap}")
    play = _tree(inst, k)
    return all(len(set(play(p, 0)[1])) == 1 for p in ShapleyGame(inst).states())


def first_mover_guarantee(inst: ShapleyInstance, k: int, profile, player: int = 0,
                          order: str = "worst", pool: str = "distinct") -> float:
    """Worst-case leaf cost ``player`` secures by switching to the cheapest path."""
    game = ShapleyGame(inst)
    ev = Evaluator(game, shapley_config(k, order, pool))
    opts, rows = ev.candidate_values(tuple(profile), player)
    return float(-rows[opts.index(inst.shortest_path)][player])


def guarantee_holds(inst: ShapleyInstance, k: int, tol: float = 1e-9) -> bool:
    """``first_mover_guarantee <= c(P^SP)/k`` from every profile."""
    bound = inst.optimum / k + tol
    game = ShapleyGame(inst)
    ev = Evaluator(game, shapley_config(k))
    sp = inst.shortest_path
    for profile in game.states():
        opts, rows = ev.candidate_values(profile, 0)
        if -rows[opts.index(sp)][0] > bound:
            return False
    return True


def default_instance() -> ShapleyInstance:
    return ShapleyInstance.parallel((1.0, 6.0), 6)


def n_over_k(inst: ShapleyInstance, k: int) -> float:
    return inst.n / k if k else math.inf


def random_instance(rng: np.random.Generator, max_players: int = 5, max_links: int = 3,
                    graph: bool = False, profile_cap: int = 729) -> ShapleyInstance:
    """Small instance with generic costs (ties have probability zero).

    Parallel links by default; ``graph=True`` draws a four-node DAG with a
    direct s-t edge so there is always a path. Player counts are trimmed so
    that ``paths**n`` stays under ``profile_cap``.
    """
    if graph:
        pairs = [(0, 1), (1, 3), (0, 2), (2, 3), (1, 2), (0, 3)]
        keep = [e for e in pairs[:-1] if rng.random() < 0.8] + [pairs[-1]]
        edges = [(u, v, float(rng.uniform(0.5, 5.0))) for u, v in keep]
        paths = len(RoutingInstance(4, [Edge(u, v) for u, v, _ in edges], [(0, 3)]).paths(0))
    else:
        paths = int(rng.integers(2, max_links + 1))
    n = int(rng.integers(2, max_players + 1))
    while n > 2 and paths**n > profile_cap:
        n -= 1
    if graph:
        return ShapleyInstance.from_graph(4, edges, 0, 3, n)
    return ShapleyInstance.parallel(tuple(float(c) for c in rng.uniform(0.5, 10.0, paths)), n)
