"""On-line sparse-sampling planner for large stochastic games.

`sparse_game` plans one step from a generative model: at (state, t) it
draws m successor states per pure action pair, recurses to depth t, forms
sampled backup matrices

    Qhat_k[s, t](i, j) = M_k[s](i, j) + (1/m) sum_l Qhat_k[s'_l, t-1]

and plays the selection function's equilibrium of the pair.  The per-call
cost is independent of the state-space size but exponential in t.

All randomness is derived, never streamed: each branch (i, j, l) of a node
gets its own 64-bit seed from a fixed SplitMix64-style mixing of
(parent seed, state id, time remaining, i, j, l), and the branch's uniform
draw is a second fixed mix of that seed.  Results are therefore a pure
function of (model, state, t, m, seed) and invariant to the evaluation
order of branches; both players' strategies come out of one shared run,
which is what makes the induced policy pair a correlated near-equilibrium.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NodeBudgetExceeded, SgError, SelectionFailure
from .finite_planner import nash_certificate
from .game_model import GenerativeModel, StochasticGame, TimeDependentPolicy, as_generative
from .matrix_games import MatrixGame, MixedStrategy, SelectionFunction, StrategyProfile, nash_select

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_UNIFORM_SALT = 0xD1B54A32D192ED03
_INDEPENDENT_TAG = 0x494E444550  # retag for the independent-copy probe mode

SEED_RULE = "splitmix64-v1"


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def derive_seed(parent: int, *fields: int) -> int:
    """Fold integer fields into a parent seed, one mix per field."""
    h = parent & _MASK64
    for f in fields:
        h = _mix64(h ^ _mix64(f + _GOLDEN))
    return h


def _derive_children(branch_seed: int, m: int) -> np.ndarray:
    """Vectorized derive_seed(branch_seed, l) for l = 0..m-1."""
    ells = np.arange(m, dtype=np.uint64) + np.uint64(_GOLDEN & _MASK64)
    return _mix64_arr(np.uint64(branch_seed) ^ _mix64_arr(ells))


def _uniforms(seeds: np.ndarray) -> np.ndarray:
    """One uniform in [0, 1) per seed (top 53 bits of a second mix)."""
    mixed = _mix64_arr(seeds ^ np.uint64(_UNIFORM_SALT))
    return (mixed >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus the identifier of the child-derivation rule."""

    root_seed: int
    rule: str = SEED_RULE

    def __post_init__(self):
        object.__setattr__(self, "root_seed", self.root_seed & _MASK64)
        if self.rule != SEED_RULE:
            raise ValueError(f"unknown seed derivation rule {self.rule!r}")

    def derive(self, *fields: int) -> int:
        return derive_seed(self.root_seed, *fields)

    @classmethod
    def of(cls, seed) -> "SeedSpec":
        return seed if isinstance(seed, SeedSpec) else cls(int(seed))


@dataclass(frozen=True)
class SparsePlanResult:
    """Output of one planning call: strategies at the queried state, the
    sampled backup matrices, their values at the profile (payoff-sum
    units), and the number of (conceptual) recursive calls expanded."""

    profile: StrategyProfile
    q_hats: tuple[float, float]
    q_matrices: tuple[np.ndarray, np.ndarray]
    nodes_expanded: int


def sparse_game(model: GenerativeModel, state: int, t: int, m: int, seed,
                selection: SelectionFunction = nash_select,
                node_budget: int | None = None) -> SparsePlanResult:
    """Plan one step at (state, t) from m samples per action pair.

    Deterministic in (model, state, t, m, seed).  Raises
    NodeBudgetExceeded once more than node_budget nodes are expanded and
    SelectionFailure if the selection function fails at some node.
    """
    if m < 1:
        raise ValueError(f"sample count m must be >= 1, got {m}")
    if t < 0:
        raise ValueError(f"time remaining must be >= 0, got {t}")
    spec = SeedSpec.of(seed)
    explicit_game = getattr(model, "game", None)
    if explicit_game is not None:
        scale = explicit_game.r_max
    else:
        root_stage = model.payoffs(state)
        scale = max(np.abs(root_stage.payoff1).max(), np.abs(root_stage.payoff2).max())
    if scale > 1.0:
        warnings.warn(f"payoff bound {scale:g} exceeds 1; accuracy guarantees "
                      "scale with the bound", stacklevel=2)
    n1, n2 = model.n_row_actions, model.n_col_actions
    count = [0]
    base_cache: dict[int, tuple[StrategyProfile, MatrixGame]] = {}

    def bump(k: int):
        count[0] += k
        if node_budget is not None and count[0] > node_budget:
            raise NodeBudgetExceeded(
                f"sparse recursion exceeded node budget {node_budget} "
                f"(root state={state}, t={t}, m={m})")

    def base(s: int):
        hit = base_cache.get(s)
        if hit is None:
            stage = model.payoffs(s)
            try:
                prof = selection(stage)
            except SgError as exc:
                raise SelectionFailure(s, 0, exc) from exc
            hit = (prof, stage)
            base_cache[s] = hit
        return hit

    # explicit models expose n_states; gathering base values from a lazily
    # filled array beats a per-branch np.unique pass (only states actually
    # sampled are ever evaluated)
    explicit_n = getattr(model, "n_states", None)
    if explicit_n is not None and explicit_n <= 65536:
        v1_base = np.full(explicit_n, np.nan)
        v2_base = np.full(explicit_n, np.nan)

        def base_values(states: np.ndarray) -> tuple[float, float]:
            vals1 = v1_base[states]
            if np.isnan(vals1).any():
                for s2 in np.unique(states[np.isnan(vals1)]):
                    prof = base(int(s2))[0]
                    v1_base[s2] = prof.value1
                    v2_base[s2] = prof.value2
                vals1 = v1_base[states]
            return float(vals1.mean()), float(v2_base[states].mean())
    else:
        def base_values(states: np.ndarray) -> tuple[float, float]:
            uniq, inverse = np.unique(states, return_inverse=True)
            vals = np.empty((uniq.size, 2))
            for k, s in enumerate(uniq):
                prof = base(int(s))[0]
                vals[k, 0] = prof.value1
                vals[k, 1] = prof.value2
            picked = vals[inverse]
            return float(picked[:, 0].mean()), float(picked[:, 1].mean())

    def expand(s: int, tt: int, node_seed: int):
        bump(1)
        if tt == 0:
            prof, stage = base(s)
            return prof, stage.payoff1, stage.payoff2
        stage = model.payoffs(s)
        q1 = np.array(stage.payoff1)
        q2 = np.array(stage.payoff2)
        for i in range(n1):
            for j in range(n2):
                branch = derive_seed(node_seed, s, tt, i, j)
                child_seeds = _derive_children(branch, m)
                children = model.sample_from_uniform_many(s, i, j, _uniforms(child_seeds))
                if tt == 1:
                    bump(m)
                    mean1, mean2 = base_values(children)
                else:
                    tot1 = 0.0
                    tot2 = 0.0
                    for ell in range(m):
                        child_prof, _, _ = expand(int(children[ell]), tt - 1,
                                                  int(child_seeds[ell]))
                        tot1 += child_prof.value1
                        tot2 += child_prof.value2
                    mean1 = tot1 / m
                    mean2 = tot2 / m
                q1[i, j] += mean1
                q2[i, j] += mean2
        try:
            prof = selection(MatrixGame(q1, q2))
        except SgError as exc:
            raise SelectionFailure(s, tt, exc) from exc
        return prof, q1, q2

    prof, q1, q2 = expand(state, t, spec.root_seed)
    q1.setflags(write=False)
    q2.setflags(write=False)
    return SparsePlanResult(prof, (prof.value1, prof.value2), (q1, q2), count[0])


class ExactPlanner:
    """Sampling-free twin of the sparse recursion: the per-branch average
    is replaced by the exact expectation over successor states.  Memoised
    per (state, t); matches the finite-horizon backup matrices exactly."""

    def __init__(self, game: StochasticGame, selection: SelectionFunction = nash_select):
        self.game = game
        self.selection = selection
        self._memo: dict[tuple[int, int], tuple[StrategyProfile, np.ndarray, np.ndarray]] = {}

    def node(self, state: int, t: int):
        key = (state, t)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        game = self.game
        q1 = np.array(game.payoffs1[state])
        q2 = np.array(game.payoffs2[state])
        if t > 0:
            for i in range(game.n_row_actions):
                for j in range(game.n_col_actions):
                    pvec = game.transitions[state, i, j]
                    acc1 = 0.0
                    acc2 = 0.0
                    for s2 in np.nonzero(pvec)[0]:
                        child_prof, _, _ = self.node(int(s2), t - 1)
                        acc1 += pvec[s2] * child_prof.value1
                        acc2 += pvec[s2] * child_prof.value2
                    q1[i, j] += acc1
                    q2[i, j] += acc2
        try:
            prof = self.selection(MatrixGame(q1, q2))
        except SgError as exc:
            raise SelectionFailure(state, t, exc) from exc
        q1.setflags(write=False)
        q2.setflags(write=False)
        hit = (prof, q1, q2)
        self._memo[key] = hit
        return hit

    def plan(self, state: int, t: int) -> SparsePlanResult:
        before = len(self._memo)
        prof, q1, q2 = self.node(state, t)
        expanded = len(self._memo) - before
        return SparsePlanResult(prof, (prof.value1, prof.value2), (q1, q2), expanded)

    @property
    def nodes_evaluated(self) -> int:
        return len(self._memo)


def exact_sparse_game(game: StochasticGame, state: int, t: int,
                      selection: SelectionFunction = nash_select) -> SparsePlanResult:
    """Exact-expectation oracle for `sparse_game` on an explicit game.

    nodes_expanded counts distinct (state, t) evaluations.
    """
    return ExactPlanner(game, selection).plan(state, t)


def sample_size(t: int, epsilon: float, n: int, c: float = 1.0) -> int:
    """Samples per action pair sufficient for a 2*t*epsilon-Nash guarantee:
    ceil(c * ((t^3/eps^2) ln(t/eps) + t ln(n/eps))) + 1, negative log terms
    clamped to zero.  The constant c is a caller choice (default 1)."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if t < 1 or n < 1 or c <= 0:
        raise ValueError(f"require t >= 1, n >= 1, c > 0, got t={t}, n={n}, c={c}")
    horizon_term = (t ** 3 / epsilon ** 2) * max(0.0, math.log(t / epsilon))
    action_term = t * max(0.0, math.log(n / epsilon))
    return math.ceil(c * (horizon_term + action_term)) + 1


class InducedPolicyPair:
    """The global policy pair defined by replanning at every visit.

    The strategy pair at (s, t) is the profile of
    sparse_game(model, s, t, m, derive(root_seed, s, t)); both halves come
    from that single shared call.  Plans are computed lazily and memoised;
    the memo tolerates concurrent insertion because every insert for a key
    carries the identical value.
    """

    def __init__(self, model: GenerativeModel, m: int, horizon: int, root_seed,
                 selection: SelectionFunction = nash_select,
                 node_budget: int | None = None):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.model = model
        self.m = m
        self.horizon = horizon
        self.seed = SeedSpec.of(root_seed)
        self.selection = selection
        self.node_budget = node_budget
        self._plans: dict[tuple[int, int], SparsePlanResult] = {}

    def plan(self, state: int, t: int) -> SparsePlanResult:
        key = (state, t)
        hit = self._plans.get(key)
        if hit is None:
            hit = sparse_game(self.model, state, t, self.m, self.seed.derive(state, t),
                              self.selection, self.node_budget)
            self._plans[key] = hit
        return hit

    def strategy(self, player: int, state: int, t: int) -> MixedStrategy:
        prof = self.plan(state, t).profile
        return prof.row if player == 1 else prof.col

    def materialize(self, states: Iterable[int]) -> tuple[TimeDependentPolicy, TimeDependentPolicy]:
        """Plan every (state, t) and freeze both halves as explicit policies."""
        t1 = {}
        t2 = {}
        for s in states:
            for t in range(self.horizon):
                prof = self.plan(s, t).profile
                t1[(s, t)] = prof.row.probs
                t2[(s, t)] = prof.col.probs
        return (TimeDependentPolicy(self.horizon, self.model.n_row_actions, t1),
                TimeDependentPolicy(self.horizon, self.model.n_col_actions, t2))

    @property
    def nodes_expanded(self) -> int:
        return sum(p.nodes_expanded for p in self._plans.values())


def induced_policy(model: GenerativeModel, m: int, horizon: int, root_seed,
                   selection: SelectionFunction = nash_select,
                   node_budget: int | None = None) -> InducedPolicyPair:
    """Lazy policy pair: play each visited (s, t) by a fresh shared plan."""
    return InducedPolicyPair(model, m, horizon, root_seed, selection, node_budget)


def _materialize_exact(planner: ExactPlanner, states, horizon):
    t1 = {}
    t2 = {}
    for s in states:
        for t in range(horizon):
            prof, _, _ = planner.node(s, t)
            t1[(s, t)] = prof.row.probs
            t2[(s, t)] = prof.col.probs
    game = planner.game
    return (TimeDependentPolicy(horizon, game.n_row_actions, t1),
            TimeDependentPolicy(horizon, game.n_col_actions, t2))


@dataclass(frozen=True)
class GapRow:
    """One gap-experiment observation.  m is a sample count or "exact";
    gaps are certificate gaps (per-stage average units); qerr_k is
    |Qhat_k - V_k| at the root (payoff-sum units); nodes sums the expanded
    nodes over every planning call behind the row."""

    m: int | str
    seed: int
    gap1: float
    gap2: float
    qerr1: float
    qerr2: float
    nodes: int


def gap_experiment(game: StochasticGame, horizon: int,
                   m_list: Sequence[int | str], seeds: Sequence[int],
                   selection: SelectionFunction = nash_select,
                   start: int | None = None,
                   independent_seeds: bool = False,
                   node_budget: int | None = None) -> list[GapRow]:
    """Certificate gaps and root backup errors across sample sizes/seeds.

    Each row materializes the induced policy pair, certifies it against
    the exact best-response DP, and compares the root values to the
    exact-expectation oracle.  m entries may be the string "exact" to run
    the oracle itself (its gaps reproduce the finite-horizon planner's).
    With independent_seeds each player plans from an unrelated seed
    instead of the shared run -- an exploration mode, no guarantee claimed.
    """
    if start is None:
        start = game.start_state
    model = as_generative(game)
    exact_root = exact_sparse_game(game, start, horizon - 1, selection)
    states = range(game.n_states)
    rows = []
    for m in m_list:
        for seed in seeds:
            if m == "exact":
                planner = ExactPlanner(game, selection)
                pol1, pol2 = _materialize_exact(planner, states, horizon)
                qerr1 = qerr2 = 0.0
                nodes = planner.nodes_evaluated
            else:
                pair = InducedPolicyPair(model, int(m), horizon, seed, selection, node_budget)
                pol1, pol2 = pair.materialize(states)
                if independent_seeds:
                    other = InducedPolicyPair(model, int(m), horizon,
                                              derive_seed(int(seed), _INDEPENDENT_TAG),
                                              selection, node_budget)
                    _, pol2 = other.materialize(states)
                    nodes = pair.nodes_expanded + other.nodes_expanded
                else:
                    nodes = pair.nodes_expanded
                root = pair.plan(start, horizon - 1)
                qerr1 = abs(root.q_hats[0] - exact_root.q_hats[0])
                qerr2 = abs(root.q_hats[1] - exact_root.q_hats[1])
            gap1, gap2 = nash_certificate(game, pol1, pol2, horizon, start)
            rows.append(GapRow(m, int(seed), gap1, gap2, qerr1, qerr2, nodes))
    return rows
