"""Stochastic game representation and generative-model access.

A stochastic game couples a bimatrix stage game to every state with a
transition kernel P(s'|s, i, j) driven by both players' actions.  States
carry stable integer identifiers 0..n_states-1; both players keep the same
action counts at every state so backup matrices have uniform shape.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MissingPolicyEntry, SgError
from .matrix_games import MatrixGame, MixedStrategy


@dataclass(frozen=True)
class StochasticGame:
    """Explicit stochastic game: per-state payoffs and transition kernel.

    payoffs1, payoffs2 have shape (n_states, n1, n2); transitions has shape
    (n_states, n1, n2, n_states).  Construction checks shapes only; value
    invariants (probability rows, payoff bounds) are checked by `validate`
    so malformed instances can be constructed and reported on.
    """

    payoffs1: np.ndarray
    payoffs2: np.ndarray
    transitions: np.ndarray
    start_state: int = 0
    r_max: float | None = None
    is_zero_sum: bool = False

    def __post_init__(self):
        p1 = np.array(self.payoffs1, dtype=float)
        p2 = np.array(self.payoffs2, dtype=float)
        tr = np.array(self.transitions, dtype=float)
        if p1.ndim != 3 or p1.size == 0:
            raise DimensionMismatch(f"payoffs must have shape (states, n1, n2), got {p1.shape}")
        if p2.shape != p1.shape:
            raise DimensionMismatch(f"payoff shapes differ: {p1.shape} vs {p2.shape}")
        if tr.shape != p1.shape + (p1.shape[0],):
            raise DimensionMismatch(
                f"transitions must have shape {p1.shape + (p1.shape[0],)}, got {tr.shape}")
        if not 0 <= self.start_state < p1.shape[0]:
            raise ValueError(f"start_state {self.start_state} not in 0..{p1.shape[0] - 1}")
        r_max = self.r_max
        if r_max is None:
            r_max = float(max(np.abs(p1).max(), np.abs(p2).max()))
        for name, arr in (("payoffs1", p1), ("payoffs2", p2), ("transitions", tr)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "r_max", r_max)

    @property
    def n_states(self) -> int:
        return self.payoffs1.shape[0]

    @property
    def n_row_actions(self) -> int:
        return self.payoffs1.shape[1]

    @property
    def n_col_actions(self) -> int:
        return self.payoffs1.shape[2]

    def stage_game(self, state: int) -> MatrixGame:
        return MatrixGame(self.payoffs1[state], self.payoffs2[state],
                          is_zero_sum=self.is_zero_sum)


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    message: str

    def __str__(self):
        return f"[{self.kind} at {self.where}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate(game: StochasticGame) -> ValidationReport:
    """Check every value invariant; the report lists each violation with
    its state/action coordinates."""
    out = []
    tr = game.transitions
    if np.any(tr < 0.0) or np.any(~np.isfinite(tr)):
        for s, i, j, s2 in zip(*np.nonzero((tr < 0.0) | ~np.isfinite(tr))):
            out.append(Violation("transition-entry", (int(s), int(i), int(j), int(s2)),
                                 f"probability {tr[s, i, j, s2]!r} is negative or non-finite"))
    sums = tr.sum(axis=3)
    bad = np.abs(sums - 1.0) > 1e-12
    for s, i, j in zip(*np.nonzero(bad)):
        out.append(Violation("transition-sum", (int(s), int(i), int(j)),
                             f"probabilities sum to {sums[s, i, j]!r}, not 1"))
    for player, pay in ((1, game.payoffs1), (2, game.payoffs2)):
        if np.any(~np.isfinite(pay)):
            for s, i, j in zip(*np.nonzero(~np.isfinite(pay))):
                out.append(Violation("payoff-finite", (player, int(s), int(i), int(j)),
                                     f"payoff {pay[s, i, j]!r} is not finite"))
        over = np.abs(pay) > game.r_max
        for s, i, j in zip(*np.nonzero(over)):
            out.append(Violation("payoff-bound", (player, int(s), int(i), int(j)),
                                 f"|payoff| {abs(pay[s, i, j])!r} exceeds r_max={game.r_max}"))
    if game.is_zero_sum and not np.array_equal(game.payoffs2, -game.payoffs1):
        out.append(Violation("zero-sum", (), "is_zero_sum set but payoffs2 != -payoffs1"))
    return ValidationReport(tuple(out))


class GenerativeModel(abc.ABC):
    """Black-box planning access: stage payoffs plus transition sampling.

    Sampling is driven by explicit randomness (a uniform draw or a numpy
    Generator); the model itself holds no mutable state, so concurrent use
    with independent streams is safe.
    """

    n_row_actions: int
    n_col_actions: int

    @abc.abstractmethod
    def payoffs(self, state: int) -> MatrixGame:
        """Stage game at `state`; must be deterministic in `state`."""

    @abc.abstractmethod
    def sample_from_uniform(self, state: int, i: int, j: int, u: float) -> int:
        """Next state for the uniform draw u in [0, 1) (inverse CDF)."""

    def sample(self, state: int, i: int, j: int, rng: np.random.Generator) -> int:
        return self.sample_from_uniform(state, i, j, float(rng.random()))

    def sample_from_uniform_many(self, state, i, j, us: np.ndarray) -> np.ndarray:
        return np.array([self.sample_from_uniform(state, i, j, float(u)) for u in us],
                        dtype=np.int64)

    def distribution(self, state: int, i: int, j: int):
        """Exact next-state distribution when available, else None."""
        return None


class ExplicitGenerativeModel(GenerativeModel):
    """Generative wrapper over an explicit StochasticGame.

    Inverse-CDF sampling over the stored distributions; exact-distribution
    access is enabled for oracle modes.
    """

    def __init__(self, game: StochasticGame):
        self.game = game
        self.n_row_actions = game.n_row_actions
        self.n_col_actions = game.n_col_actions
        self.start_state = game.start_state
        self.n_states = game.n_states
        self._cum = np.cumsum(game.transitions, axis=3)
        self._stage_cache = [game.stage_game(s) for s in range(game.n_states)]

    def payoffs(self, state: int) -> MatrixGame:
        return self._stage_cache[state]

    def sample_from_uniform(self, state, i, j, u):
        idx = int(np.searchsorted(self._cum[state, i, j], u, side="right"))
        return min(idx, self.game.n_states - 1)

    def sample_from_uniform_many(self, state, i, j, us):
        idx = np.searchsorted(self._cum[state, i, j], us, side="right")
        return np.minimum(idx, self.game.n_states - 1).astype(np.int64)

    def distribution(self, state, i, j):
        return self.game.transitions[state, i, j]


def as_generative(game: StochasticGame, check: bool = True) -> ExplicitGenerativeModel:
    """Wrap a validated explicit game as a generative model."""
    if check:
        report = validate(game)
        if not report.ok:
            raise SgError(f"game fails validation:\n{report}")
    return ExplicitGenerativeModel(game)


class TimeDependentPolicy:
    """One player's map (state, time-remaining) -> mixed strategy."""

    def __init__(self, horizon: int, n_actions: int, table: dict[tuple[int, int], np.ndarray]):
        self.horizon = horizon
        self.n_actions = n_actions
        self._table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        for (s, t), probs in self._table.items():
            MixedStrategy(probs)  # reject invalid entries eagerly
            if probs.size != n_actions:
                raise DimensionMismatch(
                    f"policy entry at {(s, t)} has {probs.size} actions, expected {n_actions}")

    def probs(self, state: int, t: int) -> np.ndarray:
        try:
            return self._table[(state, t)]
        except KeyError:
            raise MissingPolicyEntry(f"no strategy stored for (state={state}, t={t})") from None

    def strategy(self, state: int, t: int) -> MixedStrategy:
        return MixedStrategy(self.probs(state, t))

    def entries(self):
        """Stored (state, t, probs) triples, sorted for stable serialization."""
        for (s, t) in sorted(self._table):
            yield s, t, self._table[(s, t)]

    def __contains__(self, key):
        return key in self._table


class StationaryPolicy:
    """One player's map state -> mixed strategy (time-independent)."""

    def __init__(self, table: dict[int, np.ndarray]):
        self._table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        for s, probs in self._table.items():
            MixedStrategy(probs)

    def probs(self, state: int) -> np.ndarray:
        try:
            return self._table[state]
        except KeyError:
            raise MissingPolicyEntry(f"no strategy stored for state {state}") from None

    def strategy(self, state: int) -> MixedStrategy:
        return MixedStrategy(self.probs(state))

    def as_time_dependent(self, horizon: int) -> TimeDependentPolicy:
        n = len(next(iter(self._table.values())))
        table = {(s, t): p for s, p in self._table.items() for t in range(horizon)}
        return TimeDependentPolicy(horizon, n, table)

    def entries(self):
        for s in sorted(self._table):
            yield s, self._table[s]


def random_game(n_states: int, n_row_actions: int, n_col_actions: int,
                branching: int, payoff_scale: float, seed: int,
                zero_sum: bool = False) -> StochasticGame:
    """Seed-deterministic random instance.

    Payoffs are uniform in [-payoff_scale, payoff_scale]; each (s, i, j)
    transition is a normalized positive draw over `branching` distinct
    successor states chosen uniformly.
    """
    if min(n_states, n_row_actions, n_col_actions, branching) < 1:
        raise ValueError("all counts must be >= 1")
    if branching > n_states:
        raise ValueError(f"branching {branching} exceeds n_states {n_states}")
    rng = np.random.default_rng(seed)
    shape = (n_states, n_row_actions, n_col_actions)
    payoffs1 = rng.uniform(-payoff_scale, payoff_scale, shape)
    if zero_sum:
        payoffs2 = -payoffs1
    else:
        payoffs2 = rng.uniform(-payoff_scale, payoff_scale, shape)
    transitions = np.zeros(shape + (n_states,))
    for s in range(n_states):
        for i in range(n_row_actions):
            for j in range(n_col_actions):
                succ = rng.choice(n_states, size=branching, replace=False)
                weights = 1.0 - rng.uniform(size=branching)  # in (0, 1]
                transitions[s, i, j, succ] = weights / weights.sum()
    return StochasticGame(payoffs1, payoffs2, transitions, start_state=0,
                          r_max=payoff_scale, is_zero_sum=zero_sum)


def single_state_game(stage: MatrixGame) -> StochasticGame:
    """Repeated matrix game: one state, all transitions self-loops."""
    n1, n2 = stage.rows, stage.cols
    transitions = np.ones((1, n1, n2, 1))
    return StochasticGame(stage.payoff1[None], stage.payoff2[None], transitions,
                          start_state=0, r_max=stage.r_max,
                          is_zero_sum=stage.is_zero_sum)
