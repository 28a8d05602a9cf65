"""Discounted value iteration with a security selection function.

The sweep mirrors the finite-horizon backup with a discount factor:

    Q_k[s] <- M_k[s] + gamma * sum_s' P(s'|s, i, j) * v_k[s']

where v_k[s] is the security level the selection function extracts from
the backup pair at s.  With a security selection the per-player updates
are sup-norm contractions with modulus gamma, so the iteration converges
to a security pair (for zero-sum games that pair is a Nash pair and the
values are the game values).  Swapping in a Nash selection function gives
no such guarantee; `nash_mode_probe` runs that variant and reports whether
the value tables settle, cycle, or neither.

Values here are discounted payoff sums (not per-stage averages).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import state_map
from .errors import SgError, SelectionFailure
from .game_model import StationaryPolicy, StochasticGame
from .matrix_games import MatrixGame, SelectionFunction, StrategyProfile, security_select, nash_select


@dataclass(frozen=True)
class DiscountedIterate:
    """Snapshot of one sweep: backup matrices, selected profiles, values,
    and the sup-norm change from the previous sweep."""

    t: int
    q1: np.ndarray  # (n_states, n1, n2)
    q2: np.ndarray
    profiles: tuple[StrategyProfile, ...]
    values1: np.ndarray
    values2: np.ndarray
    delta: float


@dataclass(frozen=True)
class InfiniteVIResult:
    policy1: StationaryPolicy
    policy2: StationaryPolicy
    values1: np.ndarray
    values2: np.ndarray
    deltas: tuple[float, ...]
    #: (v1, v2) at the game's start state after each sweep, aligned with deltas
    value_trace: tuple[tuple[float, float], ...]
    converged: bool
    iterations: int
    final: DiscountedIterate


def _sweep(game: StochasticGame, gamma: float, v1, v2, selection, t, threads):
    n_states = game.n_states

    def backup(s):
        if t == 0:
            b1 = np.array(game.payoffs1[s])
            b2 = np.array(game.payoffs2[s])
        else:
            b1 = game.payoffs1[s] + gamma * (game.transitions[s] @ v1)
            b2 = game.payoffs2[s] + gamma * (game.transitions[s] @ v2)
        try:
            prof = selection(MatrixGame(b1, b2))
        except SgError as exc:
            raise SelectionFailure(s, t, exc) from exc
        return b1, b2, prof

    results = state_map(backup, n_states, threads)
    q1 = np.stack([r[0] for r in results])
    q2 = np.stack([r[1] for r in results])
    profiles = tuple(r[2] for r in results)
    new_v1 = np.array([p.value1 for p in profiles])
    new_v2 = np.array([p.value2 for p in profiles])
    return q1, q2, profiles, new_v1, new_v2


def infinite_vi(game: StochasticGame, gamma: float,
                selection: SelectionFunction = security_select,
                tol: float = 1e-9, max_iter: int = 100_000,
                threads: int = 1) -> InfiniteVIResult:
    """Iterate the discounted backup until the values settle.

    Stops when the sup-norm (over states and players) of successive value
    tables is <= tol, or flags non-convergence after max_iter sweeps.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"discount factor must lie in [0, 1), got {gamma}")
    q1, q2, profiles, v1, v2 = _sweep(game, gamma, None, None, selection, 0, threads)
    deltas: list[float] = []
    value_trace: list[tuple[float, float]] = []
    converged = False
    t = 0
    for t in range(1, max_iter + 1):
        q1, q2, profiles, new_v1, new_v2 = _sweep(game, gamma, v1, v2, selection, t, threads)
        delta = float(max(np.abs(new_v1 - v1).max(), np.abs(new_v2 - v2).max()))
        deltas.append(delta)
        v1, v2 = new_v1, new_v2
        value_trace.append((float(v1[game.start_state]), float(v2[game.start_state])))
        if delta <= tol:
            converged = True
            break
    final = DiscountedIterate(t, q1, q2, profiles, v1, v2,
                              deltas[-1] if deltas else 0.0)
    pol1 = StationaryPolicy({s: profiles[s].row.probs for s in range(game.n_states)})
    pol2 = StationaryPolicy({s: profiles[s].col.probs for s in range(game.n_states)})
    return InfiniteVIResult(pol1, pol2, v1, v2, tuple(deltas), tuple(value_trace),
                            converged, t, final)


@dataclass(frozen=True)
class ContractionViolation:
    t: int
    delta: float
    next_delta: float
    bound: float


@dataclass(frozen=True)
class ContractionReport:
    violations: tuple[ContractionViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def contraction_check(deltas, gamma: float, slack: float = 1e-9) -> ContractionReport:
    """Verify delta_{t+1} <= gamma * delta_t + slack along a delta trace.

    Meaningful for zero-sum runs, where the backup operator is a
    gamma-contraction of the value table.
    """
    out = []
    for t in range(len(deltas) - 1):
        bound = gamma * deltas[t] + slack
        if deltas[t + 1] > bound:
            out.append(ContractionViolation(t + 1, float(deltas[t]),
                                            float(deltas[t + 1]), float(bound)))
    return ContractionReport(tuple(out))


def _worst_case_value(game: StochasticGame, policy: StationaryPolicy, gamma: float,
                      player: int, tol: float) -> np.ndarray:
    """Discounted value of `policy` for `player` against a minimizing
    opponent: value iteration on the induced single-agent problem."""
    n_states = game.n_states
    if player == 1:
        # opponent picks columns; induced reward/transition per column j
        rewards = np.stack([policy.probs(s) @ game.payoffs1[s] for s in range(n_states)])
        trans = np.stack([np.einsum("i,ijs->js", policy.probs(s), game.transitions[s])
                          for s in range(n_states)])
    else:
        rewards = np.stack([game.payoffs2[s] @ policy.probs(s) for s in range(n_states)])
        trans = np.stack([np.einsum("j,ijs->is", policy.probs(s), game.transitions[s])
                          for s in range(n_states)])
    w = np.zeros(n_states)
    # stop once the remaining drift gamma*change/(1-gamma) is below tol
    threshold = tol * (1.0 - gamma) / gamma if gamma > 0 else 0.0
    while True:
        new = (rewards + gamma * (trans @ w)).min(axis=1)
        change = np.abs(new - w).max()
        w = new
        if change <= threshold:
            return w


def security_certificate(game: StochasticGame, policy1: StationaryPolicy,
                         policy2: StationaryPolicy, gamma: float,
                         claimed1, claimed2, start: int | None = None,
                         tol: float = 1e-9) -> tuple[float, float]:
    """Shortfall of each player's claimed security value at `start`.

    shortfall_k = claimed_k - (worst-case discounted value of player k's
    policy); positive means the claim exceeds what the policy guarantees.
    Converged zero-sum runs should show shortfalls <= ~1e-6.
    """
    if start is None:
        start = game.start_state
    claimed1 = np.asarray(claimed1, dtype=float).reshape(-1)
    claimed2 = np.asarray(claimed2, dtype=float).reshape(-1)
    worst1 = _worst_case_value(game, policy1, gamma, 1, tol)
    worst2 = _worst_case_value(game, policy2, gamma, 2, tol)
    c1 = claimed1[start] if claimed1.size > 1 else float(claimed1[0])
    c2 = claimed2[start] if claimed2.size > 1 else float(claimed2[0])
    return float(c1 - worst1[start]), float(c2 - worst2[start])


@dataclass(frozen=True)
class ProbeIteration:
    t: int
    delta: float
    values1: np.ndarray
    values2: np.ndarray
    profiles: tuple[StrategyProfile, ...]


@dataclass(frozen=True)
class ProbeReport:
    """Trajectory of the Nash-selection variant.  classification is one of
    "converged", "cyclic", "undetermined"; for cycles, cycle_start/
    cycle_length locate the first repeated value-table fingerprint."""

    classification: str
    iterations: int
    deltas: tuple[float, ...]
    trajectory: tuple[ProbeIteration, ...]
    cycle_start: int | None = None
    cycle_length: int | None = None


def nash_mode_probe(game: StochasticGame, gamma: float,
                    selection: SelectionFunction = nash_select,
                    max_iter: int = 500, tol: float = 1e-9) -> ProbeReport:
    """Run the discounted sweep with a Nash selection function and watch
    the value tables.  No claim is made about which games oscillate; the
    probe only classifies what this run did within max_iter sweeps."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"discount factor must lie in [0, 1), got {gamma}")
    _, _, profiles, v1, v2 = _sweep(game, gamma, None, None, selection, 0, 1)
    trajectory = [ProbeIteration(0, float("nan"), v1, v2, profiles)]
    fingerprints = {_fingerprint(v1, v2): 0}
    deltas: list[float] = []
    for t in range(1, max_iter + 1):
        _, _, profiles, new_v1, new_v2 = _sweep(game, gamma, v1, v2, selection, t, 1)
        delta = float(max(np.abs(new_v1 - v1).max(), np.abs(new_v2 - v2).max()))
        deltas.append(delta)
        v1, v2 = new_v1, new_v2
        trajectory.append(ProbeIteration(t, delta, v1, v2, profiles))
        if delta <= tol:
            return ProbeReport("converged", t, tuple(deltas), tuple(trajectory))
        fp = _fingerprint(v1, v2)
        if fp in fingerprints:
            first = fingerprints[fp]
            return ProbeReport("cyclic", t, tuple(deltas), tuple(trajectory),
                               cycle_start=first, cycle_length=t - first)
        fingerprints[fp] = t
    return ProbeReport("undetermined", max_iter, tuple(deltas), tuple(trajectory))


def _fingerprint(v1: np.ndarray, v2: np.ndarray) -> bytes:
    # 9-decimal rounding makes repeated tables hash equal despite float noise
    return np.round(np.concatenate([v1, v2]), 9).tobytes()
