import numpy as np
import pytest
from scipy import stats

from sgplan import (MatrixGame, MissingPolicyEntry, StochasticGame,
                    TimeDependentPolicy, as_generative, random_game,
                    single_state_game, validate)


class TestValidation:
    def test_well_formed_game_passes(self):
        game = random_game(2, 2, 2, 2, 1.0, seed=0)
        report = validate(game)
        assert report.ok
        assert report.violations == ()

    def test_bad_transition_sum_named(self):
        game = random_game(2, 2, 2, 2, 1.0, seed=0)
        transitions = np.array(game.transitions)
        transitions[1, 0, 1] *= 0.9
        bad = StochasticGame(game.payoffs1, game.payoffs2, transitions)
        report = validate(bad)
        assert not report.ok
        assert len(report.violations) == 1
        v = report.violations[0]
        assert v.kind == "transition-sum"
        assert v.where == (1, 0, 1)

    def test_payoff_over_r_max_named(self):
        payoffs = np.zeros((1, 2, 2))
        payoffs[0, 1, 0] = 1.5
        trans = np.zeros((1, 2, 2, 1))
        trans[..., 0] = 1.0
        game = StochasticGame(payoffs, np.zeros((1, 2, 2)), trans, r_max=1.0)
        report = validate(game)
        assert [v.kind for v in report.violations] == ["payoff-bound"]
        assert report.violations[0].where == (1, 0, 1, 0)

    def test_random_games_always_validate(self):
        for seed in range(10):
            game = random_game(4, 2, 3, 3, 2.0, seed=seed)
            assert validate(game).ok

    def test_start_state_bounds_checked_at_construction(self):
        with pytest.raises(ValueError):
            StochasticGame(np.zeros((1, 1, 1)), np.zeros((1, 1, 1)),
                           np.ones((1, 1, 1, 1)), start_state=3)


class TestGenerativeModel:
    def test_point_mass_always_sampled(self):
        game = single_state_game(MatrixGame([[1, 0], [0, 1]], [[0, 1], [1, 0]]))
        model = as_generative(game)
        rng = np.random.default_rng(0)
        assert all(model.sample(0, 0, 1, rng) == 0 for _ in range(50))

    def test_uniform_frequencies_converge(self):
        # two equally likely successors; 1e5 draws land within 0.01 of 1/2
        transitions = np.zeros((2, 1, 1, 2))
        transitions[:, :, :] = 0.5
        game = StochasticGame(np.zeros((2, 1, 1)), np.zeros((2, 1, 1)), transitions)
        model = as_generative(game)
        rng = np.random.default_rng(42)
        draws = np.array([model.sample(0, 0, 0, rng) for _ in range(100_000)])
        freq = (draws == 0).mean()
        assert abs(freq - 0.5) < 0.01

    def test_identical_seeds_identical_sequences(self):
        game = random_game(5, 2, 2, 3, 1.0, seed=1)
        model = as_generative(game)
        a = [model.sample(2, 1, 0, np.random.default_rng(7)) for _ in range(1)]
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(123)
            runs.append([model.sample(s % 5, 0, 1, rng) for s in range(200)])
        assert runs[0] == runs[1]

    def test_empirical_total_variation(self):
        game = random_game(6, 2, 2, 4, 1.0, seed=3)
        model = as_generative(game)
        rng = np.random.default_rng(0)
        n = 100_000
        draws = model.sample_from_uniform_many(0, 1, 1, rng.random(n))
        counts = np.bincount(draws, minlength=6) / n
        tv = 0.5 * np.abs(counts - game.transitions[0, 1, 1]).sum()
        assert tv <= 0.02

    def test_chi_squared_sanity(self):
        game = random_game(4, 2, 2, 3, 1.0, seed=9)
        model = as_generative(game)
        rng = np.random.default_rng(1)
        n = 50_000
        draws = model.sample_from_uniform_many(1, 0, 0, rng.random(n))
        expected = game.transitions[1, 0, 0] * n
        keep = expected > 0
        observed = np.bincount(draws, minlength=4)[keep]
        _, p = stats.chisquare(observed, expected[keep])
        assert p > 1e-4

    def test_exact_distribution_access(self):
        game = random_game(3, 2, 2, 2, 1.0, seed=4)
        model = as_generative(game)
        np.testing.assert_array_equal(model.distribution(1, 0, 1),
                                      game.transitions[1, 0, 1])

    def test_payoffs_deterministic(self):
        game = random_game(3, 2, 2, 2, 1.0, seed=4)
        model = as_generative(game)
        a = model.payoffs(2)
        b = model.payoffs(2)
        assert a is b

    def test_invalid_game_rejected(self):
        transitions = np.zeros((1, 1, 1, 1))  # rows sum to 0
        bad = StochasticGame(np.zeros((1, 1, 1)), np.zeros((1, 1, 1)), transitions)
        with pytest.raises(Exception, match="validation"):
            as_generative(bad)


class TestRandomGame:
    def test_same_seed_entrywise_identical(self):
        a = random_game(4, 2, 3, 2, 1.5, seed=77)
        b = random_game(4, 2, 3, 2, 1.5, seed=77)
        assert np.array_equal(a.payoffs1, b.payoffs1)
        assert np.array_equal(a.payoffs2, b.payoffs2)
        assert np.array_equal(a.transitions, b.transitions)

    def test_different_seeds_differ(self):
        a = random_game(4, 2, 2, 2, 1.0, seed=1)
        b = random_game(4, 2, 2, 2, 1.0, seed=2)
        assert not np.array_equal(a.payoffs1, b.payoffs1)

    def test_scale_bounds_and_r_max(self):
        game = random_game(3, 2, 2, 2, 1.0, seed=5)
        assert game.r_max == 1.0
        assert np.abs(game.payoffs1).max() <= 1.0
        assert validate(game).ok

    def test_zero_sum_variant(self):
        game = random_game(3, 2, 2, 2, 1.0, seed=5, zero_sum=True)
        np.testing.assert_array_equal(game.payoffs2, -game.payoffs1)
        assert game.is_zero_sum

    def test_branching_limits_support(self):
        game = random_game(6, 2, 2, 2, 1.0, seed=6)
        support_sizes = (game.transitions > 0).sum(axis=3)
        assert support_sizes.max() <= 2

    def test_branching_validation(self):
        with pytest.raises(ValueError):
            random_game(2, 2, 2, 3, 1.0, seed=0)
        with pytest.raises(ValueError):
            random_game(0, 2, 2, 1, 1.0, seed=0)


class TestSingleStateGame:
    def test_prisoners_dilemma_fixture(self, prisoners_dilemma):
        game = single_state_game(prisoners_dilemma)
        assert game.n_states == 1
        assert validate(game).ok

    def test_all_self_loops(self, battle_of_sexes):
        game = single_state_game(battle_of_sexes)
        assert np.all(game.transitions == 1.0)

    def test_zero_sum_flag_preserved(self, matching_pennies):
        game = single_state_game(matching_pennies)
        assert game.is_zero_sum
        assert game.stage_game(0).is_zero_sum


class TestPolicies:
    def test_missing_entry_raises(self):
        pol = TimeDependentPolicy(2, 2, {(0, 0): np.array([1.0, 0.0])})
        pol.probs(0, 0)
        with pytest.raises(MissingPolicyEntry):
            pol.probs(0, 1)

    def test_entries_sorted(self):
        pol = TimeDependentPolicy(2, 2, {(1, 0): np.array([1.0, 0.0]),
                                         (0, 1): np.array([0.5, 0.5]),
                                         (0, 0): np.array([0.0, 1.0])})
        assert [(s, t) for s, t, _ in pol.entries()] == [(0, 0), (0, 1), (1, 0)]

    def test_invalid_strategy_rejected(self):
        with pytest.raises(ValueError):
            TimeDependentPolicy(1, 2, {(0, 0): np.array([0.5, 0.6])})
