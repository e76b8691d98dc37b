"""Utility games with submodular social functions.

Two constructions live here:

* ``SteinerGame``: one sub-game per line of a projective plane of prime
  order ``q``. In every sub-game a player is either *nice* (one point) or
  *naughty* with a label ``l`` in ``1..k``; the naughty members' labels sum
  to a residue mod ``k`` that picks a winner, who scores two points while
  the other naughty members score nothing. Lookahead players drift to
  all-naughty play, which halves the optimal social value when ``q = 2``.
* ``BasicUtilityGame``: a two-player game over actions ``{B, T, G}`` where
  the social function is assembled from a table of marginal values and each
  player is paid its marginal contribution (Vickrey payoffs). With 2-lookahead
  in the leaf model the only equilibrium is ``(B, B)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .engine import (
    Evaluator,
    FiniteGame,
    Game,
    LookaheadConfig,
    LookaheadError,
    Trajectory,
    enumerate_equilibria,
    first_best,
    random_walk,
    ratio_to_optimum,
    tie_threshold,
)

NICE = 0


def projective_plane(q: int) -> list[tuple[int, ...]]:
    """Lines of PG(2, q) for prime ``q`` as sorted tuples of point indices."""
    if q < 2 or any(q % p == 0 for p in range(2, math.isqrt(q) + 1)):
        raise LookaheadError(f"order {q} is not a prime")
    points = []
    for v in itertools.product(range(q), repeat=3):
        # canonical representative: first non-zero coordinate equals 1
        nz = next((x for x in v if x), None)
        if nz == 1:
            points.append(v)
    index = {p: i for i, p in enumerate(points)}
    lines = []
    for line in points:
        members = tuple(
            sorted(index[p] for p in points if sum(a * b for a, b in zip(line, p)) % q == 0)
        )
        lines.append(members)
    return sorted(lines)


def block_points(choices: tuple[int, ...], k: int) -> tuple[int, ...]:
    """Points of each member of one sub-game.

    ``choices[m]`` is 0 for the nice strategy or the naughty label ``l`` in
    ``1..k``; the member at position ``(sum of naughty labels) mod k`` wins
    if it is naughty.
    """
    naughty = [c for c in choices if c != NICE]
    winner = sum(naughty) % k if naughty else None
    return tuple(
        1 if c == NICE else (2 if m == winner else 0) for m, c in enumerate(choices)
    )


class SteinerGame(Game):
    """Valid-utility game on the lines of the projective plane of order ``q``.

    A state holds, per player, a tuple with one choice per line through that
    player (lines in increasing index order).
    """

    def __init__(self, q: int = 2):
        self.q = q
        self.k = q + 1
        self.blocks = projective_plane(q)
        self.n = q * q + q + 1
        self.player_blocks = [
            tuple(b for b, members in enumerate(self.blocks) if i in members)
            for i in range(self.n)
        ]
        self._verify()
        self._block_evaluators: dict = {}

    def _verify(self) -> None:
        pairs = {}
        for b, members in enumerate(self.blocks):
            if len(members) != self.k:
                raise LookaheadError(f"line {b} has {len(members)} points, expected {self.k}")
            for pair in itertools.combinations(members, 2):
                pairs[pair] = pairs.get(pair, 0) + 1
        if len(pairs) != self.n * (self.n - 1) // 2 or set(pairs.values()) != {1}:
            raise LookaheadError("blocks do not cover every pair exactly once")
        if any(len(pb) != self.k for pb in self.player_blocks):
            raise LookaheadError("a player does not lie in exactly k blocks")
        # positions within a block are distinct residues mod k, so at most one winner
        for members in self.blocks:
            if len({m % self.k for m in range(len(members))}) != len(members):
                raise LookaheadError("block winner would be ambiguous")

    # -- state helpers -----------------------------------------------------

    def position(self, player: int, block: int) -> int:
        return self.blocks[block].index(player)

    def block_choices(self, state, block: int) -> tuple[int, ...]:
        return tuple(
            state[p][self.player_blocks[p].index(block)] for p in self.blocks[block]
        )

    def uniform_state(self, choice: int) -> tuple:
        return tuple((choice,) * self.k for _ in range(self.n))

    def optimal_state(self) -> tuple:
        """First member of every line naughty and winning, the rest nice."""
        state = [[NICE] * self.k for _ in range(self.n)]
        for b, members in enumerate(self.blocks):
            first = members[0]
            state[first][self.player_blocks[first].index(b)] = self.k
        return tuple(tuple(s) for s in state)

    def validate_state(self, state):
        super().validate_state(state)
        for p, s in enumerate(state):
            if len(s) != self.k or any(not 0 <= c <= self.k for c in s):
                raise LookaheadError(f"invalid strategy {s!r} for player {p}")

    # -- Game interface ----------------------------------------------------

    def payoffs(self, state):
        out = [0.0] * self.n
        for b, members in enumerate(self.blocks):
            for p, pts in zip(members, block_points(self.block_choices(state, b), self.k)):
                out[p] += pts
        return out

    def social_value(self, state):
        return float(sum(self.payoffs(state)))

    def options(self, player, state):
        return list(itertools.product(range(self.k + 1), repeat=self.k))

    def states(self):
        per_player = list(itertools.product(range(self.k + 1), repeat=self.k))
        return itertools.product(per_player, repeat=self.n)

    def num_states(self):
        return (self.k + 1) ** (self.k * self.n)

    def optimum(self) -> float:
        """Optimal social value, found line by line (lines do not interact)."""
        best = max(
            sum(block_points(c, self.k))
            for c in itertools.product(range(self.k + 1), repeat=self.k)
        )
        return float(best * len(self.blocks))

    # -- per-line decomposition --------------------------------------------

    def block_game(self, block: int) -> FiniteGame:
        """The sub-game on one line, with non-members as one-strategy dummies."""
        members = self.blocks[block]
        shape = [self.k + 1 if p in members else 1 for p in range(self.n)]
        tensor = np.zeros(tuple(shape) + (self.n,))
        for s in np.ndindex(*shape):
            pts = block_points(tuple(s[p] for p in members), self.k)
            for p, v in zip(members, pts):
                tensor[s + (p,)] = v
        return FiniteGame.from_tensor(tensor)

    def _block_evaluator(self, block: int, cfg: LookaheadConfig) -> Evaluator:
        key = (block, cfg)
        if key not in self._block_evaluators:
            self._block_evaluators[key] = Evaluator(self.block_game(block), cfg)
        return self._block_evaluators[key]

    def _block_state(self, state, block: int) -> tuple:
        choices = dict(zip(self.blocks[block], self.block_choices(state, block)))
        return tuple(choices.get(p, 0) for p in range(self.n))

    def lookahead_values(self, state, player: int, cfg: LookaheadConfig) -> list[np.ndarray]:
        """Per line through ``player``: its lookahead value of each choice there.

        Payoffs add up over lines and a move on one line never changes another
        line, so under the average and fixed orders the lookahead value of a
        full strategy is the sum of these per-line values.
        """
        if cfg.order == "worst":
            raise LookaheadError("per-line decomposition does not hold for worst-case order")
        out = []
        for b in self.player_blocks[player]:
            _, rows = self._block_evaluator(b, cfg).candidate_values(
                self._block_state(state, b), player
            )
            out.append(rows[:, player])
        return out

    def lookahead_response(self, state, player: int, cfg: LookaheadConfig):
        """Improving lookahead move for ``player`` or ``None`` if staying is best."""
        current = state[player]
        new = []
        for c, values in zip(current, self.lookahead_values(state, player, cfg)):
            if values[c] >= tie_threshold(float(values.max())):
                new.append(c)
            else:
                new.append(first_best(values))
        new = tuple(new)
        return None if new == current else new

    def lookahead_value(self, state, player: int, strategy, cfg: LookaheadConfig) -> float:
        per_block = self.lookahead_values(state, player, cfg)
        return float(sum(v[c] for v, c in zip(per_block, strategy)))


def steiner_payoff(game: SteinerGame, state, player: int) -> float:
    return game.payoffs(state)[player]


def guaranteed_immediate_score(game: SteinerGame, state, player: int) -> float:
    """Best payoff ``player`` can reach with a single move from ``state``."""
    total = 0
    for b in game.player_blocks[player]:
        pos = game.position(player, b)
        choices = list(game.block_choices(state, b))
        best = 0
        for c in range(game.k + 1):
            choices[pos] = c
            best = max(best, block_points(tuple(choices), game.k)[pos])
        total += best
    return float(total)


def worst_case_path_total(game: SteinerGame, state, player: int, depth: int | None = None):
    """Max-min path payoff of ``player`` over ``depth`` moves against an adversary.

    ``player`` moves first; each of the following ``depth - 1`` moves is made
    by another player picked by an adversary, who may also choose that
    player's new strategy freely. Only the line shared with ``player`` can
    affect it, so adversarial moves range over that line alone. Returns the
    guaranteed total and the first move achieving it.
    """
    depth = game.k if depth is None else depth
    others = [p for p in range(game.n) if p != player]

    def shared(p):
        return next(b for b in game.player_blocks[player] if b in game.player_blocks[p])

    def adversary(st, remaining):
        if remaining == 0:
            return 0.0
        worst = math.inf
        for p in others:
            b = shared(p)
            slot = game.player_blocks[p].index(b)
            for c in range(game.k + 1):
                s = list(st[p])
                s[slot] = c
                nxt = st[:p] + (tuple(s),) + st[p + 1 :]
                worst = min(worst, game.payoffs(nxt)[player] + adversary(nxt, remaining - 1))
        return worst

    best, best_move = -math.inf, None
    for move in game.options(player, state):
        nxt = state[:player] + (move,) + state[player + 1 :]
        value = game.payoffs(nxt)[player] + adversary(nxt, depth - 1)
        if value > best:
            best, best_move = value, move
    return best, best_move


def steiner_walk(
    game: SteinerGame,
    depth: int | None = None,
    steps: int = 300,
    seed: int | None = 0,
    start=None,
    order: str = "average",
) -> Trajectory:
    """Seeded path-model lookahead dynamics on the Steiner game."""
    cfg = LookaheadConfig(depth=depth or game.k, payoff_model="path", order=order)
    start = game.optimal_state() if start is None else start

    def respond(state, player):
        return game.lookahead_response(state, player, cfg)

    return random_walk(game, start, steps, cfg, seed, responder=respond)


def steiner_dynamics_ratio(
    game: SteinerGame,
    depth: int | None = None,
    steps: int = 300,
    seed: int | None = 0,
    burn_in: int = 100,
    start=None,
) -> float:
    """Optimum over the long-run mean social value of lookahead dynamics."""
    traj = steiner_walk(game, depth, steps, seed, start)
    return ratio_to_optimum(float(traj.values[burn_in:].mean()), game.optimum(), True)


# ---------------------------------------------------------------------------
# basic-utility game

ACTIONS = ("B", "T", "G")
EMPTY = "-"


def marginal_table(kappa: float) -> dict[str, dict[str | None, float]]:
    """Marginal value of adding a row action while the column action is played."""
    return {
        "B": {None: 6, "B": 6, "T": 6, "G": 1},
        "T": {None: kappa - 9, "B": kappa - 9, "T": 7, "G": 4},
        "G": {None: kappa - 5, "B": kappa - 10, "T": 8, "G": 5},
    }


@dataclass(frozen=True)
class BasicUtilityGame:
    kappa: float = 120.0

    def __post_init__(self):
        if self.kappa <= 12:
            raise LookaheadError("kappa must exceed 12")

    @cached_property
    def table(self):
        return marginal_table(self.kappa)

    def marginal(self, action: str, played) -> float:
        """Marginal value of ``action`` given the collection of played actions."""
        played = [a for a in played if a is not None and a != EMPTY]
        if not played:
            return self.table[action][None]
        return min(self.table[action][j] for j in played)

    def gamma(self, first, second=(), order: tuple[int, ...] | None = None) -> float:
        """Social value of the action sets of the two players.

        Actions are added one at a time (player-1 actions first unless
        ``order`` gives a permutation of all added actions), each contributing
        its marginal value with respect to everything added so far.
        """
        first = _as_actions(first)
        second = _as_actions(second)
        items = list(first) + list(second)
        if order is not None:
            items = [items[i] for i in order]
        total, seen = 0.0, []
        for a in items:
            total += self.marginal(a, seen)
            seen.append(a)
        return total

    def vickrey_payoff(self, state: tuple[str, str], player: int) -> float:
        """Player's marginal contribution: social value with and without its action."""
        without = list(state)
        without[player] = EMPTY
        return self.gamma(state[0], state[1]) - self.gamma(without[0], without[1])

    def as_game(self) -> FiniteGame:
        labels = (EMPTY,) + ACTIONS
        tensor = np.zeros((4, 4, 2))
        social = np.zeros((4, 4))
        for a, b in itertools.product(range(4), repeat=2):
            st = (labels[a], labels[b])
            tensor[a, b] = [self.vickrey_payoff(st, 0), self.vickrey_payoff(st, 1)]
            social[a, b] = self.gamma(*st)
        return FiniteGame.from_tensor(tensor, social, labels=[labels, labels])


def _as_actions(x) -> tuple[str, ...]:
    if x is None or x == EMPTY or x == ():
        return ()
    if isinstance(x, str):
        return (x,)
    return tuple(a for a in x if a != EMPTY)


def gamma(state: tuple[str, str], kappa: float = 120.0) -> float:
    return BasicUtilityGame(kappa).gamma(*state)


def vickrey_payoff(state: tuple[str, str], player: int, kappa: float = 120.0) -> float:
    return BasicUtilityGame(kappa).vickrey_payoff(state, player)


BASIC_CONFIG = LookaheadConfig(depth=2, payoff_model="leaf", order="average")


@dataclass
class BasicUtilityReport:
    kappa: float
    equilibria: list  # labelled states
    flags: dict  # labelled state -> is equilibrium
    optimum: float
    worst_equilibrium_value: float
    ratio: float


def basic_utility_equilibria(kappa: float, cfg: LookaheadConfig = BASIC_CONFIG):
    """Exhaustive 2-lookahead equilibrium analysis of the basic-utility game."""
    bu = BasicUtilityGame(kappa)
    game = bu.as_game()
    eqs = enumerate_equilibria(game, cfg)
    labelled = [game.label(s) for s in eqs]
    flags = {game.label(s): s in eqs for s in game.states()}
    opt = max(game.social_value(s) for s in game.states())
    worst = min(game.social_value(s) for s in eqs) if eqs else math.nan
    ratio = opt / worst if eqs else math.nan
    return BasicUtilityReport(kappa, labelled, flags, opt, worst, ratio)


def myopic_chain(kappa: float, start: tuple[str, str] = ("B", "B"), moves: int = 4) -> list:
    """Alternating myopic best responses starting with player 2."""
    bu = BasicUtilityGame(kappa)
    labels = (EMPTY,) + ACTIONS
    state = list(start)
    chain = [tuple(state)]
    player = 1
    for _ in range(moves):
        values = []
        for a in labels:
            trial = list(state)
            trial[player] = a
            values.append(bu.vickrey_payoff(tuple(trial), player))
        state[player] = labels[first_best(values)]
        chain.append(tuple(state))
        player = 1 - player
    return chain
