"""Unsplittable selfish routing with linear edge latencies.

Every player routes one unit from its source to its sink along a single path;
an edge carrying ``f`` players costs each of them ``a f + b``. Players search
two moves ahead under the average order: after a player's move a uniformly
random player (possibly herself) makes a myopic best response.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import (
    Evaluator,
    FiniteGame,
    LookaheadConfig,
    LookaheadError,
    StateSpaceTooLarge,
    enumerate_equilibria,
    first_best,
    state_cap,
)

DEFAULT_PATH_CAP = 10**4
EQ_RATIO_BOUND = (1 + math.sqrt(5)) ** 2
DECREASE_THRESHOLD = 6 + math.sqrt(37)


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    a: float = 0.0
    b: float = 0.0


@dataclass
class RoutingInstance:
    nodes: int
    edges: list
    players: list  # (source, sink) per player
    path_cap: int = DEFAULT_PATH_CAP
    _paths: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.edges = [e if isinstance(e, Edge) else Edge(*e) for e in self.edges]
        self.players = [tuple(p) for p in self.players]
        for e in self.edges:
            if e.a < 0 or e.b < 0:
                raise LookaheadError("latency coefficients must be non-negative")
            if not (0 <= e.tail < self.nodes and 0 <= e.head < self.nodes):
                raise LookaheadError(f"edge {e} references an unknown node")
        for i in range(self.n):
            if not self.paths(i):
                raise LookaheadError(f"player {i} has no path from source to sink")

    @property
    def n(self) -> int:
        return len(self.players)

    @classmethod
    def from_json(cls, source) -> "RoutingInstance":
        data = json.loads(Path(source).read_text()) if not isinstance(source, dict) else source
        edges = [Edge(e["from"], e["to"], e.get("a", 0.0), e.get("b", 0.0)) for e in data["edges"]]
        players = [(p["s"], p["t"]) for p in data["players"]]
        return cls(data["nodes"], edges, players)

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": [{"from": e.tail, "to": e.head, "a": e.a, "b": e.b} for e in self.edges],
            "players": [{"s": s, "t": t} for s, t in self.players],
        }

    def paths(self, player: int) -> list[tuple[int, ...]]:
        if player not in self._paths:
            s, t = self.players[player]
            self._paths[player] = enumerate_simple_paths(self, s, t, self.path_cap)
        return self._paths[player]


def enumerate_simple_paths(inst: RoutingInstance, source: int, sink: int, cap: int):
    """All simple paths as tuples of edge indices, in lexicographic order."""
    out_edges = [[] for _ in range(inst.nodes)]
    for idx, e in enumerate(inst.edges):
        out_edges[e.tail].append(idx)
    found = []
    stack = [(source, (), frozenset((source,)))]
    while stack:
        node, path, seen = stack.pop()
        if node == sink:
            found.append(path)
            if len(found) > cap:
                raise LookaheadError(f"more than {cap} paths from {source} to {sink}")
            continue
        for idx in reversed(out_edges[node]):
            head = inst.edges[idx].head
            if head not in seen:
                stack.append((head, path + (idx,), seen | {head}))
    return sorted(found)


def enumerate_paths(inst: RoutingInstance, player: int) -> list[tuple[int, ...]]:
    return inst.paths(player)


@dataclass
class Flow:
    """One path (tuple of edge indices) per player plus the edge loads."""

    paths: tuple
    loads: np.ndarray

    @classmethod
    def from_paths(cls, inst: RoutingInstance, paths) -> "Flow":
        loads = np.zeros(len(inst.edges), dtype=int)
        for p in paths:
            for e in p:
                loads[e] += 1
        return cls(tuple(tuple(p) for p in paths), loads)

    def moved(self, player: int, path) -> "Flow":
        """Flow after ``player`` switches to ``path``, updating loads incrementally."""
        loads = self.loads.copy()
        for e in self.paths[player]:
            loads[e] -= 1
        for e in path:
            loads[e] += 1
        paths = self.paths[:player] + (tuple(path),) + self.paths[player + 1 :]
        return Flow(paths, loads)


def edge_latency(inst: RoutingInstance, edge: int, load: float) -> float:
    e = inst.edges[edge]
    return e.a * load + e.b


def player_latency(inst: RoutingInstance, flow: Flow, player: int) -> float:
    return float(sum(edge_latency(inst, e, flow.loads[e]) for e in flow.paths[player]))


def total_latency(inst: RoutingInstance, flow: Flow) -> float:
    return float(
        sum(edge_latency(inst, e, f) * f for e, f in enumerate(flow.loads) if f)
    )


class RoutingGame(FiniteGame):
    """Routing instance as a cost game over path indices."""

    def __init__(self, inst: RoutingInstance):
        self.inst = inst
        strategies = [inst.paths(i) for i in range(inst.n)]
        super().__init__(strategies, payoffs=self._latencies, social_value=self._total,
                         maximize=False)
        self._a = np.array([e.a for e in inst.edges])
        self._b = np.array([e.b for e in inst.edges])

    def flow(self, state) -> Flow:
        return Flow.from_paths(self.inst, self.label(state))

    def _loads(self, state):
        loads = np.zeros(len(self.inst.edges))
        for i, s in enumerate(state):
            for e in self.strategies[i][s]:
                loads[e] += 1
        return loads

    def _latencies(self, state):
        lat = self._a * self._loads(state) + self._b
        return [float(sum(lat[e] for e in self.strategies[i][s])) for i, s in enumerate(state)]

    def _total(self, state):
        loads = self._loads(state)
        return float(((self._a * loads + self._b) * loads).sum())

    def index(self, flow: Flow) -> tuple:
        return tuple(self.strategies[i].index(p) for i, p in enumerate(flow.paths))


def routing_config(model: str = "leaf") -> LookaheadConfig:
    return LookaheadConfig(depth=2, payoff_model=model, order="average")


def myopic_response(inst: RoutingInstance, flow: Flow, player: int) -> tuple:
    """Cheapest path for ``player`` against the others, ties to canonical order."""
    paths = inst.paths(player)
    costs = [player_latency(inst, flow.moved(player, p), player) for p in paths]
    return paths[first_best([-c for c in costs])]


def lookahead_move_value(
    inst: RoutingInstance, flow: Flow, player: int, candidate, model: str = "leaf"
) -> float:
    """Expected latency of moving ``player`` onto ``candidate``.

    ``f1`` is the flow after the move and ``f2`` the flow after a uniformly
    random next player's myopic best response. The leaf model returns
    ``E[l_i(f2)]``; the path model returns ``(l_i(f1) + E[l_i(f2)]) / 2``.
    """
    f1 = flow.moved(player, candidate)
    outcomes = []
    for j in range(inst.n):
        f2 = f1.moved(j, myopic_response(inst, f1, j))
        outcomes.append(player_latency(inst, f2, player))
    expected = float(np.mean(outcomes))
    if model == "leaf":
        return expected
    if model == "path":
        return 0.5 * player_latency(inst, f1, player) + 0.5 * expected
    raise LookaheadError(f"unknown payoff model {model!r}")


def optimum(inst: RoutingInstance, cap: int | None = None) -> tuple[float, Flow]:
    """Minimum total latency by exhaustive search over path profiles."""
    cap = state_cap() if cap is None else cap
    sizes = [len(inst.paths(i)) for i in range(inst.n)]
    if math.prod(sizes) > cap:
        raise StateSpaceTooLarge(math.prod(sizes), cap)
    game = RoutingGame(inst)
    best_state = min(game.states(), key=game.social_value)
    return game.social_value(best_state), game.flow(best_state)


def lookahead_equilibria(inst: RoutingInstance, model: str = "leaf") -> list[Flow]:
    game = RoutingGame(inst)
    return [game.flow(s) for s in enumerate_equilibria(game, routing_config(model))]


@dataclass
class LemmaRow:
    trial: int
    inequality_id: str
    lhs: float
    rhs: float
    holds: bool


@dataclass
class LemmaReport:
    rows: list = field(default_factory=list)
    optimum: float = math.nan

    def add(self, trial, ident, lhs, rhs, tol=1e-9):
        holds = lhs <= rhs + tol * max(1.0, abs(rhs))
        self.rows.append(LemmaRow(trial, ident, float(lhs), float(rhs), bool(holds)))

    def violations(self, ident: str | None = None) -> list:
        return [r for r in self.rows if not r.holds and (ident is None or r.inequality_id == ident)]

    def count(self, ident: str) -> int:
        return sum(r.inequality_id == ident for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "inequality_id", "lhs", "rhs", "holds"])
        for r in self.rows:
            w.writerow([r.trial, r.inequality_id, repr(r.lhs), repr(r.rhs), r.holds])
        return buf.getvalue()


def lookahead_step(ev: Evaluator, game: RoutingGame, state):
    """Per player: the state after its improving lookahead move (or ``state``)."""
    out = []
    for i in range(game.n):
        move = ev.improving_move(state, i)
        out.append(state if move is None else state[:i] + (move,) + state[i + 1 :])
    return out


def verify_lemma_suite(
    inst: RoutingInstance, trials: int = 50, seed: int | None = 0, model: str = "leaf"
) -> LemmaReport:
    """Check the lookahead-dynamics inequalities on random flows of ``inst``.

    Per trial a uniformly random flow ``f`` is drawn. Rows recorded:

    * ``fundamental``: ``l_i(f_i') <= 2 l_i(f) + l(f)/n`` for each improving move;
    * ``potential``: ``l(f_i') <= l(f) + 2 l_i(f_i') - l_i(f)`` for the same moves;
    * ``expected_total``: ``E[l(f')] <= (1 + 4/n) l(f)`` with ``f'`` the flow
      after a uniformly random player's lookahead best response;
    * ``expected_decrease``: ``E[l(f')] <= (1 - 1/(2n)) l(f)`` whenever
      ``l(f) >= (6 + sqrt 37) OPT``;
    * ``equilibrium_ratio``: ``l(f) <= (1 + sqrt 5)^2 OPT`` when ``f`` is a
      lookahead equilibrium.
    """
    game = RoutingGame(inst)
    ev = Evaluator(game, routing_config(model))
    opt, _ = optimum(inst)
    report = LemmaReport(optimum=opt)
    rng = np.random.default_rng(seed)
    n = inst.n
    for trial in range(trials):
        state = tuple(int(rng.integers(m)) for m in game.shape)
        check_flow(report, trial, game, ev, state, opt)
    return report


def check_flow(report: LemmaReport, trial, game: RoutingGame, ev: Evaluator, state, opt):
    inst, n = game.inst, game.n
    flow = game.flow(state)
    lf = total_latency(inst, flow)
    nxt = lookahead_step(ev, game, state)
    for i, s2 in enumerate(nxt):
        if s2 == state:
            continue
        f2 = game.flow(s2)
        li_new = player_latency(inst, f2, i)
        li_old = player_latency(inst, flow, i)
        report.add(trial, "fundamental", li_new, 2 * li_old + lf / n)
        report.add(trial, "potential", total_latency(inst, f2), lf + 2 * li_new - li_old)
    expected = float(np.mean([game.social_value(s2) for s2 in nxt]))
    report.add(trial, "expected_total", expected, (1 + 4 / n) * lf)
    if lf >= DECREASE_THRESHOLD * opt:
        report.add(trial, "expected_decrease", expected, (1 - 1 / (2 * n)) * lf)
    if all(s2 == state for s2 in nxt):
        report.add(trial, "equilibrium_ratio", lf, EQ_RATIO_BOUND * opt)


def routing_walk(inst: RoutingInstance, steps: int, seed: int | None = 0, start=None,
                 model: str = "leaf"):
    """Seeded 2-lookahead dynamics; returns the engine trajectory."""
    from .engine import random_walk

    game = RoutingGame(inst)
    if start is None:
        rng = np.random.default_rng(seed)
        start = tuple(int(rng.integers(m)) for m in game.shape)
    return random_walk(game, start, steps, routing_config(model), seed)


def dynamics_length(inst: RoutingInstance, start_latency: float, opt: float) -> int:
    """Walk length ``8 n log(l(f_0)/OPT)`` (at least ``n``)."""
    if opt <= 0 or start_latency <= opt:
        return inst.n
    return max(inst.n, math.ceil(8 * inst.n * math.log(start_latency / opt)))


def random_instance(
    rng: np.random.Generator,
    max_players: int = 4,
    min_players: int = 2,
    max_paths: int = 10,
    nodes: int | None = None,
) -> RoutingInstance:
    """Random layered DAG with a shared vertex set and random terminal pairs."""
    while True:
        n = int(rng.integers(min_players, max_players + 1))
        size = nodes or int(rng.integers(2, 6))
        edges = []
        for u in range(size):
            for v in range(u + 1, size):
                copies = int(rng.integers(0, 3)) if v > u + 1 else int(rng.integers(1, 3))
                for _ in range(copies):
                    a = float(rng.choice([0.0, 1.0, 2.0, 5.0]) if rng.random() < 0.8 else rng.uniform(0, 5))
                    b = float(rng.choice([0.0, 1.0, 3.0, 10.0, 30.0]))
                    edges.append(Edge(u, v, a, b))
        players = []
        for _ in range(n):
            s = int(rng.integers(0, size - 1))
            t = int(rng.integers(s + 1, size))
            players.append((s, t))
        try:
            inst = RoutingInstance(size, edges, players, path_cap=max_paths)
        except LookaheadError:
            continue
        return inst


def example_instance() -> RoutingInstance:
    """Three players from node 0 to node 2 over a costly direct link and cheap routes."""
    return RoutingInstance(
        3,
        [Edge(0, 2, 0, 100), Edge(0, 1, 1, 0), Edge(1, 2, 1, 0), Edge(0, 2, 2, 1)],
        [(0, 2)] * 3,
    )


def shared_edge_instance() -> RoutingInstance:
    """Two players on parallel links ``2x`` and ``1``; leaving the shared link pays off."""
    return RoutingInstance(2, [Edge(0, 1, 2, 0), Edge(0, 1, 0, 1)], [(0, 1)] * 2)
