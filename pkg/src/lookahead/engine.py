"""k-lookahead search over strategic games.

A player deciding on a move grows a depth-k tree of future moves rooted at the
current state, values the leaves, and backs the values up: at every node the
player to move picks the child that is best for herself, and every other
player inherits the value of that child. The tree is searched under

* a payoff model: ``"leaf"`` (only the leaf valuation counts) or ``"path"``
  (a player collects its payoff at every state visited after a move), and
* an order model: ``"average"`` (the next mover is uniformly random),
  ``"worst"`` (the next mover is chosen adversarially, separately for each
  perspective) or ``"fixed"`` (a known sequence of movers).

Two evaluators implement the same recursion. Games with an explicit finite
strategy product small enough to tabulate are solved for every state at once
with numpy; anything else (state-dependent option sets, huge products, the
``"distinct"`` mover pool) falls back to a memoised depth-first search.
Both break ties toward the earliest option and treat values within a relative
tolerance of ``1e-9`` as equal.
"""

from __future__ import annotations

import itertools
import math
import os
import weakref
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np

State = tuple
REL_TOL = 1e-9
DEFAULT_STATE_CAP = 10**7
TABULATE_CAP = 250_000

PAYOFF_MODELS = ("leaf", "path")
ORDER_MODELS = ("worst", "average", "fixed")
MOVER_POOLS = ("all", "distinct")


class LookaheadError(ValueError):
    """Invalid game, state or configuration."""


class StateSpaceTooLarge(LookaheadError):
    """Exhaustive enumeration would exceed the configured state cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"state space has {size} states, above the enumeration cap of {cap} "
            "(set LOOKAHEAD_STATE_CAP to raise it)"
        )
        self.size = size
        self.cap = cap


class NoEquilibriumError(LookaheadError):
    """The game has no lookahead equilibrium under the given configuration."""


def state_cap() -> int:
    """Enumeration cap, overridable through ``LOOKAHEAD_STATE_CAP``."""
    raw = os.environ.get("LOOKAHEAD_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


def tie_threshold(best: float) -> float:
    return best - REL_TOL * max(1.0, abs(best))


def first_best(values: Sequence[float]) -> int:
    """Index of the first value within tolerance of the maximum."""
    arr = np.asarray(values, dtype=float)
    return int(np.argmax(arr >= tie_threshold(float(arr.max()))))


# ---------------------------------------------------------------------------
# games


class Game:
    """A strategic game whose states are tuples with one entry per player.

    Subclasses provide :meth:`payoffs`, :meth:`social_value` and
    :meth:`options`; :meth:`states` is only needed for exhaustive operations.
    ``maximize=False`` marks payoffs as costs.
    """

    n: int
    maximize: bool = True

    def payoffs(self, state: State) -> Sequence[float]:
        raise NotImplementedError

    def payoff(self, player: int, state: State) -> float:
        return float(self.payoffs(state)[player])

    def social_value(self, state: State) -> float:
        raise NotImplementedError

    def options(self, player: int, state: State) -> Sequence[Hashable]:
        """Strategies ``player`` may switch to at ``state``, current one included."""
        raise NotImplementedError

    def states(self) -> Iterator[State]:
        raise NotImplementedError(f"{type(self).__name__} cannot enumerate its states")

    def num_states(self) -> int:
        raise NotImplementedError(f"{type(self).__name__} cannot enumerate its states")

    def validate_state(self, state: State) -> None:
        if len(state) != self.n:
            raise LookaheadError(f"state has {len(state)} entries, expected {self.n}")

    def validate_player(self, player: int) -> None:
        if not 0 <= player < self.n:
            raise LookaheadError(f"player {player} out of range for {self.n} players")


class FiniteGame(Game):
    """Game with a fixed finite strategy list per player.

    States are tuples of strategy indices. ``payoff(player, state)`` and
    ``social_value(state)`` are plain callables; alternatively pass
    ``payoffs(state)`` returning the whole payoff vector, which is faster.
    ``social_value`` defaults to the sum of payoffs.
    """

    def __init__(
        self,
        strategies: Sequence[Sequence],
        payoff: Callable[[int, State], float] | None = None,
        social_value: Callable[[State], float] | None = None,
        maximize: bool = True,
        *,
        payoffs: Callable[[State], Sequence[float]] | None = None,
    ):
        if not strategies:
            raise LookaheadError("a game needs at least one player")
        self.strategies = tuple(tuple(s) for s in strategies)
        for i, s in enumerate(self.strategies):
            if not s:
                raise LookaheadError(f"player {i} has no strategies")
        if payoff is None and payoffs is None:
            raise LookaheadError("either payoff or payoffs must be given")
        self.n = len(self.strategies)
        self.shape = tuple(len(s) for s in self.strategies)
        self.maximize = maximize
        self._payoff = payoff
        self._payoffs = payoffs
        self._social = social_value
        self._tensor: np.ndarray | None = None

    @classmethod
    def from_tensor(
        cls,
        tensor: np.ndarray,
        social: np.ndarray | None = None,
        maximize: bool = True,
        labels: Sequence[Sequence] | None = None,
    ) -> "FiniteGame":
        """Build a game from a payoff array of shape ``(m_1, ..., m_n, n)``."""
        tensor = np.asarray(tensor, dtype=float)
        shape = tensor.shape[:-1]
        if tensor.shape[-1] != len(shape):
            raise LookaheadError("last axis of the payoff tensor must index players")
        if social is None:
            social = tensor.sum(axis=-1)
        social = np.asarray(social, dtype=float)
        strategies = labels or [range(m) for m in shape]
        game = cls(
            strategies,
            payoffs=lambda s: tensor[s],
            social_value=lambda s: float(social[s]),
            maximize=maximize,
        )
        game._tensor = tensor
        return game

    def payoffs(self, state):
        if self._payoffs is not None:
            return self._payoffs(state)
        return [self._payoff(i, state) for i in range(self.n)]

    def payoff(self, player, state):
        if self._payoff is not None:
            return float(self._payoff(player, state))
        return float(self._payoffs(state)[player])

    def social_value(self, state):
        if self._social is None:
            return float(sum(self.payoffs(state)))
        return float(self._social(state))

    def options(self, player, state):
        return range(self.shape[player])

    def states(self):
        return itertools.product(*(range(m) for m in self.shape))

    def num_states(self) -> int:
        return math.prod(self.shape)

    def validate_state(self, state):
        super().validate_state(state)
        for i, (s, m) in enumerate(zip(state, self.shape)):
            if not 0 <= s < m:
                raise LookaheadError(f"strategy index {s} invalid for player {i}")

    def payoff_tensor(self) -> np.ndarray:
        """All payoffs as an array of shape ``shape + (n,)``."""
        if self._tensor is None:
            out = np.empty(self.shape + (self.n,))
            for s in np.ndindex(*self.shape):
                out[s] = self.payoffs(s)
            self._tensor = out
        return self._tensor

    def label(self, state: State) -> tuple:
        return tuple(self.strategies[i][s] for i, s in enumerate(state))


def replace(state: State, player: int, strategy) -> State:
    return state[:player] + (strategy,) + state[player + 1 :]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class LookaheadConfig:
    """Search parameters.

    ``depth`` is either one integer for every player or a per-player tuple.
    ``sequence`` lists the movers after the root for ``order="fixed"``.
    ``mover_pool="distinct"`` forbids a player from moving twice along one
    branch of a tree (the root mover included).
    """

    depth: int | tuple[int, ...] = 1
    payoff_model: str = "leaf"
    order: str = "average"
    sequence: tuple[int, ...] = ()
    mover_pool: str = "all"

    def __post_init__(self):
        depths = (self.depth,) if isinstance(self.depth, int) else tuple(self.depth)
        if not depths or any(int(d) < 1 for d in depths):
            raise LookaheadError("lookahead depth must be at least 1 for every player")
        if not isinstance(self.depth, int):
            object.__setattr__(self, "depth", tuple(int(d) for d in depths))
        object.__setattr__(self, "sequence", tuple(self.sequence or ()))
        if self.payoff_model not in PAYOFF_MODELS:
            raise LookaheadError(f"unknown payoff model {self.payoff_model!r}")
        if self.order not in ORDER_MODELS:
            raise LookaheadError(f"unknown order model {self.order!r}")
        if self.mover_pool not in MOVER_POOLS:
            raise LookaheadError(f"unknown mover pool {self.mover_pool!r}")
        if self.order == "fixed" and len(self.sequence) < max(depths) - 1:
            raise LookaheadError(
                f"fixed order needs at least {max(depths) - 1} movers after the root"
            )

    def depth_of(self, player: int) -> int:
        if isinstance(self.depth, int):
            return self.depth
        return self.depth[player]

    def check(self, game: Game) -> None:
        if not isinstance(self.depth, int) and len(self.depth) != game.n:
            raise LookaheadError(f"{len(self.depth)} depths given for {game.n} players")
        for p in self.sequence:
            game.validate_player(p)
        if self.mover_pool == "distinct":
            deepest = max(self.depth_of(i) for i in range(game.n))
            if deepest > game.n:
                raise LookaheadError("distinct movers need depth at most the player count")


# ---------------------------------------------------------------------------
# evaluation


class Evaluator:
    """Lookahead valuation of one game under one configuration.

    Values are cached, so reuse an evaluator across many queries. Internally
    every payoff is multiplied by ``+1`` (maximising games) or ``-1`` (cost
    games) so that movers always maximise and the worst-case adversary
    always minimises.
    """

    def __init__(self, game: Game, cfg: LookaheadConfig, tabular: bool | None = None):
        cfg.check(game)
        self.game = game
        self.cfg = cfg
        self.sign = 1.0 if game.maximize else -1.0
        if tabular is None:
            tabular = (
                isinstance(game, FiniteGame)
                and cfg.mover_pool == "all"
                and game.num_states() * game.n <= TABULATE_CAP
            )
        elif tabular and not (isinstance(game, FiniteGame) and cfg.mover_pool == "all"):
            raise LookaheadError("tabular evaluation needs a FiniteGame and mover_pool='all'")
        self.tabular = tabular
        self._utility: dict = {}
        self._memo: dict = {}
        self._levels: dict = {}
        self._root: dict = {}

    # -- shared helpers ----------------------------------------------------

    def _u(self, state) -> np.ndarray:
        u = self._utility.get(state)
        if u is None:
            u = self.sign * np.asarray(self.game.payoffs(state), dtype=float)
            self._utility[state] = u
        return u

    def _reward(self, state) -> np.ndarray:
        if self.cfg.payoff_model == "path":
            return self._u(state)
        return np.zeros(self.game.n)

    def _leaf(self, state) -> np.ndarray:
        if self.cfg.payoff_model == "leaf":
            return self._u(state)
        return np.zeros(self.game.n)

    def _movers(self, step: int, used: frozenset) -> Sequence[int]:
        if self.cfg.order == "fixed":
            return (self.cfg.sequence[step],)
        if self.cfg.mover_pool == "distinct":
            return [j for j in range(self.game.n) if j not in used]
        return range(self.game.n)

    def _aggregate(self, vecs: list) -> np.ndarray:
        if len(vecs) == 1:
            return vecs[0]
        stacked = np.stack(vecs)
        if self.cfg.order == "worst":
            return stacked.min(axis=0)
        return stacked.mean(axis=0)

    # -- depth-first evaluator ---------------------------------------------

    def _node(self, state, d: int, step: int, used: frozenset) -> np.ndarray:
        """Utility vector at a node whose mover is not yet known."""
        if d == 0:
            return self._leaf(state)
        key = (
            state,
            d,
            step if self.cfg.order == "fixed" else None,
            used if self.cfg.mover_pool == "distinct" else None,
        )
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        vecs = [self._move(state, d, step, used, j)[1] for j in self._movers(step, used)]
        value = self._aggregate(vecs)
        self._memo[key] = value
        return value

    def _move(self, state, d, step, used, j):
        opts = list(self.game.options(j, state))
        nxt = used | {j} if self.cfg.mover_pool == "distinct" else used
        qs = []
        for o in opts:
            child = replace(state, j, o)
            qs.append(self._reward(child) + self._node(child, d - 1, step + 1, nxt))
        best = first_best([q[j] for q in qs])
        return opts[best], qs[best]

    # -- tabular evaluator -------------------------------------------------

    def _tensor_u(self) -> np.ndarray:
        if "u" not in self._levels:
            self._levels["u"] = self.sign * self.game.payoff_tensor()
        return self._levels["u"]

    @staticmethod
    def _move_tensor(q: np.ndarray, j: int) -> np.ndarray:
        own = q[..., j]
        best = own.max(axis=j, keepdims=True)
        thr = best - REL_TOL * np.maximum(1.0, np.abs(best))
        idx = np.argmax(own >= thr, axis=j)
        idx = np.expand_dims(idx, axis=(j, q.ndim - 1))
        picked = np.take_along_axis(q, idx, axis=j)
        return np.broadcast_to(picked, q.shape)

    def _level(self, d: int, k: int) -> np.ndarray:
        """Tensor of node values with ``d`` moves left, for a root of depth ``k``."""
        key = (d, k) if self.cfg.order == "fixed" else (d,)
        if key in self._levels:
            return self._levels[key]
        u = self._tensor_u()
        if d == 0:
            value = u if self.cfg.payoff_model == "leaf" else np.zeros_like(u)
        else:
            q = self._level(d - 1, k)
            if self.cfg.payoff_model == "path":
                q = q + u
            if self.cfg.order == "fixed":
                movers = (self.cfg.sequence[k - 1 - d],)
            else:
                movers = range(self.game.n)
            value = self._aggregate([self._move_tensor(q, j) for j in movers])
        self._levels[key] = value
        return value

    def _root_tensor(self, k: int) -> np.ndarray:
        """Utility vector at every child of a depth-``k`` root."""
        if k not in self._root:
            q = self._level(k - 1, k)
            if self.cfg.payoff_model == "path":
                q = q + self._tensor_u()
            self._root[k] = q
        return self._root[k]

    # -- public queries ----------------------------------------------------

    def candidate_values(self, state: State, player: int) -> tuple[list, np.ndarray]:
        """Options of ``player`` at ``state`` and the utility vector of each child.

        Rows of the returned array are in utility units (costs are negated).
        """
        self.game.validate_player(player)
        self.game.validate_state(state)
        k = self.cfg.depth_of(player)
        if self.tabular:
            q = self._root_tensor(k)
            index = list(state)
            index[player] = slice(None)
            return list(range(self.game.shape[player])), np.asarray(q[tuple(index)])
        opts = list(self.game.options(player, state))
        used = frozenset((player,))
        rows = [
            self._reward(c) + self._node(c, k - 1, 0, used)
            for c in (replace(state, player, o) for o in opts)
        ]
        return opts, np.stack(rows)

    def evaluate(self, state: State, player: int):
        """Best option for ``player`` and the root value vector in payoff units."""
        opts, rows = self.candidate_values(state, player)
        best = first_best(rows[:, player])
        return opts[best], self.sign * rows[best]

    def improving_move(self, state: State, player: int):
        """The lookahead best response if it strictly beats staying, else ``None``."""
        opts, rows = self.candidate_values(state, player)
        own = rows[:, player]
        best = first_best(own)
        current = opts.index(state[player])
        if own[current] >= tie_threshold(float(own.max())):
            return None
        return opts[best]

    def is_equilibrium(self, state: State) -> bool:
        for i in range(self.game.n):
            opts, rows = self.candidate_values(state, i)
            own = rows[:, i]
            if own[opts.index(state[i])] < tie_threshold(float(own.max())):
                return False
        return True

    def equilibrium_mask(self) -> np.ndarray:
        """Boolean array over the strategy product marking lookahead equilibria."""
        if not self.tabular:
            raise LookaheadError("equilibrium_mask needs the tabular evaluator")
        mask = np.ones(self.game.shape, dtype=bool)
        for i in range(self.game.n):
            own = self._root_tensor(self.cfg.depth_of(i))[..., i]
            best = own.max(axis=i, keepdims=True)
            mask &= own >= best - REL_TOL * np.maximum(1.0, np.abs(best))
        return mask


_EVALUATORS: "weakref.WeakKeyDictionary[Game, dict]" = weakref.WeakKeyDictionary()


def evaluator_for(game: Game, cfg: LookaheadConfig) -> Evaluator:
    """Shared cached evaluator for ``(game, cfg)``."""
    per_game = _EVALUATORS.setdefault(game, {})
    ev = per_game.get(cfg)
    if ev is None:
        ev = per_game[cfg] = Evaluator(game, cfg)
    return ev


def evaluate_lookahead(game: Game, state: State, mover: int, cfg: LookaheadConfig):
    """Return ``(best_strategy, root_value_vector)`` for ``mover`` at ``state``."""
    return evaluator_for(game, cfg).evaluate(tuple(state), mover)


def lookahead_best_response(game: Game, state: State, player: int, cfg: LookaheadConfig):
    return evaluate_lookahead(game, state, player, cfg)[0]


def is_lookahead_equilibrium(game: Game, state: State, cfg: LookaheadConfig) -> bool:
    return evaluator_for(game, cfg).is_equilibrium(tuple(state))


def _check_cap(game: Game, cap: int | None) -> None:
    cap = state_cap() if cap is None else cap
    size = game.num_states()
    if size > cap:
        raise StateSpaceTooLarge(size, cap)


def enumerate_equilibria(game: Game, cfg: LookaheadConfig, cap: int | None = None) -> list:
    """Every state at which all players already play a lookahead best response."""
    _check_cap(game, cap)
    ev = evaluator_for(game, cfg)
    if ev.tabular:
        return [tuple(int(x) for x in s) for s in np.argwhere(ev.equilibrium_mask())]
    return [s for s in game.states() if ev.is_equilibrium(s)]


@dataclass
class LookaheadStateGraph:
    nodes: list
    edges: list  # (from_state, to_state, moving_player)

    def successors(self, state) -> list:
        return [(t, i) for s, t, i in self.edges if s == state]

    def sinks(self) -> list:
        sources = {s for s, _, _ in self.edges}
        return [s for s in self.nodes if s not in sources]

    def to_networkx(self):
        import networkx as nx

        g = nx.MultiDiGraph()
        g.add_nodes_from(self.nodes)
        for s, t, i in self.edges:
            g.add_edge(s, t, label=i)
        return g


def build_state_graph(game: Game, cfg: LookaheadConfig, cap: int | None = None):
    """Graph of improving lookahead best-response moves over all states."""
    _check_cap(game, cap)
    ev = evaluator_for(game, cfg)
    nodes = [tuple(s) for s in game.states()]
    edges = []
    for s in nodes:
        for i in range(game.n):
            move = ev.improving_move(s, i)
            if move is not None:
                edges.append((s, replace(s, i, move), i))
    return LookaheadStateGraph(nodes, edges)


@dataclass
class Trajectory:
    steps: list = field(default_factory=list)  # (state, mover or None, social value)
    seed: int | None = None

    @property
    def states(self) -> list:
        return [s for s, _, _ in self.steps]

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, _, v in self.steps])


def random_walk(
    game: Game,
    start: State,
    steps: int,
    cfg: LookaheadConfig,
    seed: int | None = 0,
    responder: Callable[[State, int], object] | None = None,
) -> Trajectory:
    """Seeded walk on the lookahead state graph.

    At each step a uniformly random player switches to its lookahead best
    response when it strictly improves on staying. ``responder(state, player)``
    may replace the engine's move rule (returning ``None`` for no move).
    """
    if steps < 0:
        raise LookaheadError("steps must be non-negative")
    state = tuple(start)
    game.validate_state(state)
    if responder is None:
        responder = evaluator_for(game, cfg).improving_move
    rng = np.random.default_rng(seed)
    traj = Trajectory([(state, None, game.social_value(state))], seed)
    for _ in range(steps):
        i = int(rng.integers(game.n))
        move = responder(state, i)
        if move is not None:
            state = replace(state, i, move)
        traj.steps.append((state, i, game.social_value(state)))
    return traj


def social_optimum(game: Game, cap: int | None = None) -> float:
    """Best social value over all states (maximum, or minimum for cost games)."""
    _check_cap(game, cap)
    values = (game.social_value(s) for s in game.states())
    return max(values) if game.maximize else min(values)


def ratio_to_optimum(value: float, optimum: float, maximize: bool) -> float:
    """Coordination ratio ``>= 1`` comparing ``value`` with ``optimum``."""
    num, den = (optimum, value) if maximize else (value, optimum)
    if math.isclose(num, den, rel_tol=REL_TOL, abs_tol=1e-12):
        return 1.0
    if den == 0:
        return math.inf
    return num / den


def coordination_ratio(
    game: Game,
    cfg: LookaheadConfig,
    mode: str = "equilibria",
    *,
    start: State | None = None,
    steps: int = 1000,
    seed: int | None = 0,
    burn_in: int = 0,
    optimum: float | None = None,
    responder: Callable | None = None,
) -> float:
    """Price of anarchy of lookahead equilibria or of lookahead dynamics.

    ``mode="equilibria"`` compares the worst equilibrium with the optimum;
    ``mode="dynamics"`` compares the mean social value along a seeded walk
    (after ``burn_in`` steps) with it. Ratios are at least 1 for both
    maximising and cost games.
    """
    if optimum is None:
        optimum = social_optimum(game)
    if mode == "equilibria":
        eqs = enumerate_equilibria(game, cfg)
        if not eqs:
            raise NoEquilibriumError("no lookahead equilibrium exists for this configuration")
        values = [game.social_value(s) for s in eqs]
        worst = min(values) if game.maximize else max(values)
        return ratio_to_optimum(worst, optimum, game.maximize)
    if mode == "dynamics":
        if start is None:
            start = next(iter(game.states()))
        traj = random_walk(game, start, steps, cfg, seed, responder=responder)
        tail = traj.values[burn_in:]
        if tail.size == 0:
            raise LookaheadError("burn-in discards the whole walk")
        return ratio_to_optimum(float(tail.mean()), optimum, game.maximize)
    raise LookaheadError(f"unknown ratio mode {mode!r}")


def random_game(
    rng: np.random.Generator,
    n_players: int,
    n_strategies: Iterable[int] | int,
    maximize: bool = True,
    integer: bool = False,
) -> FiniteGame:
    """Random finite game for tests and experiments."""
    if isinstance(n_strategies, int):
        n_strategies = [n_strategies] * n_players
    shape = tuple(n_strategies) + (n_players,)
    tensor = rng.integers(0, 5, size=shape) if integer else rng.random(shape)
    return FiniteGame.from_tensor(tensor.astype(float), maximize=maximize)
