import numpy as np
import pytest

from sgplan import (DimensionMismatch, EnumerationCapExceeded, MatrixGame,
                    MixedStrategy, StrategyProfile, best_response,
                    enumerate_nash, epsilon_nash_gap, expected_payoff,
                    nash_select, security_level, security_select,
                    solve_zero_sum)

from oracles import enumerate_nash_exact, lp_zero_sum_value, nash_gap_exact


def profile(row, col, v1=0.0, v2=0.0):
    return StrategyProfile(MixedStrategy(row), MixedStrategy(col), v1, v2)


class TestTypes:
    def test_strategy_must_be_distribution(self):
        with pytest.raises(ValueError):
            MixedStrategy([0.5, 0.4])
        with pytest.raises(ValueError):
            MixedStrategy([1.2, -0.2])

    def test_strategy_support(self):
        assert MixedStrategy([0.5, 0.5, 0.0]).support() == (0, 1)

    def test_payoff_shapes_must_match(self):
        with pytest.raises(DimensionMismatch):
            MatrixGame([[1, 2]], [[1], [2]])

    def test_zero_sum_flag_requires_negation(self):
        with pytest.raises(ValueError):
            MatrixGame([[1, 0]], [[1, 0]], is_zero_sum=True)
        game = MatrixGame.zero_sum([[1, -1], [-1, 1]])
        assert game.is_zero_sum

    def test_r_max_bound_enforced(self):
        with pytest.raises(ValueError):
            MatrixGame([[1.5]], [[0.0]], r_max=1.0)

    def test_rectangular_games_supported(self):
        game = MatrixGame([[1, 2, 3], [0, 1, 0]], [[0, 0, 0], [1, 1, 1]])
        assert (game.rows, game.cols) == (2, 3)
        nash_select(game)


class TestExpectedPayoff:
    def test_pure_profile_selects_entry(self, prisoners_dilemma):
        assert expected_payoff(prisoners_dilemma, 1,
                               MixedStrategy.pure(2, 1), MixedStrategy.pure(2, 1)) == 1.0

    def test_matching_pennies_uniform_is_zero(self, matching_pennies):
        u = MixedStrategy.uniform(2)
        assert expected_payoff(matching_pennies, 1, u, u) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_average(self, prisoners_dilemma):
        u = MixedStrategy.uniform(2)
        assert expected_payoff(prisoners_dilemma, 1, u, u) == pytest.approx(2.25)

    def test_dimension_mismatch_rejected(self, prisoners_dilemma):
        with pytest.raises(DimensionMismatch):
            expected_payoff(prisoners_dilemma, 1, MixedStrategy.uniform(3),
                            MixedStrategy.uniform(2))


class TestBestResponse:
    def test_dominant_row(self, prisoners_dilemma):
        assert best_response(prisoners_dilemma, 1, MixedStrategy.pure(2, 0)) == (1, 5.0)

    def test_tie_broken_by_lowest_index(self, matching_pennies):
        idx, val = best_response(matching_pennies, 1, MixedStrategy.uniform(2))
        assert idx == 0
        assert val == pytest.approx(0.0, abs=1e-15)

    def test_indifference_point(self, battle_of_sexes):
        # at row (2/3, 1/3) both columns pay player 2 exactly 2/3
        idx, val = best_response(battle_of_sexes, 2, MixedStrategy([2 / 3, 1 / 3]))
        assert idx == 0
        assert val == pytest.approx(2 / 3, abs=1e-12)


class TestEpsilonNashGap:
    def test_dominant_equilibrium_has_zero_gap(self, prisoners_dilemma):
        g1, g2 = epsilon_nash_gap(prisoners_dilemma, profile([0, 1], [0, 1]))
        assert g1 == pytest.approx(0.0, abs=1e-12)
        assert g2 == pytest.approx(0.0, abs=1e-12)

    def test_cooperation_gap_is_defection_gain(self, prisoners_dilemma):
        g1, g2 = epsilon_nash_gap(prisoners_dilemma, profile([1, 0], [1, 0]))
        assert (g1, g2) == (2.0, 2.0)

    def test_mixed_equilibrium_gap(self, battle_of_sexes):
        g1, g2 = epsilon_nash_gap(battle_of_sexes,
                                  profile([2 / 3, 1 / 3], [1 / 3, 2 / 3]))
        assert max(g1, g2) <= 1e-12
        assert min(g1, g2) >= -1e-12


class TestSolveZeroSum:
    def test_matching_pennies(self):
        prof = solve_zero_sum([[1, -1], [-1, 1]])
        assert prof.value1 == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(prof.row.probs, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(prof.col.probs, [0.5, 0.5], atol=1e-12)

    def test_known_value_one_fifth(self):
        prof = solve_zero_sum([[2, -1], [-1, 1]])
        assert prof.value1 == pytest.approx(0.2, abs=1e-12)
        np.testing.assert_allclose(prof.row.probs, [0.4, 0.6], atol=1e-12)
        oracle_value, _ = lp_zero_sum_value([[2, -1], [-1, 1]])
        assert prof.value1 == pytest.approx(oracle_value, abs=1e-9)

    def test_single_entry(self):
        prof = solve_zero_sum([[3.5]])
        assert prof.value1 == 3.5
        assert prof.value2 == -3.5
        assert prof.row.probs[0] == 1.0

    def test_against_lp_oracle_random(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n1 = rng.integers(1, 7)
            n2 = rng.integers(1, 7)
            mat = rng.uniform(-5, 5, (n1, n2))
            prof = solve_zero_sum(mat)
            oracle_value, _ = lp_zero_sum_value(mat)
            assert prof.value1 == pytest.approx(oracle_value, abs=1e-9)
            # returned pair must be a Nash pair of (M, -M)
            game = MatrixGame.zero_sum(mat)
            g1, g2 = epsilon_nash_gap(game, prof)
            assert max(g1, g2) <= 1e-9

    def test_deterministic(self):
        mat = np.random.default_rng(3).uniform(-1, 1, (4, 5))
        a = solve_zero_sum(mat)
        b = solve_zero_sum(mat)
        assert np.array_equal(a.row.probs, b.row.probs)
        assert np.array_equal(a.col.probs, b.col.probs)
        assert a.value1 == b.value1


class TestSecurityLevel:
    def test_matching_pennies(self, matching_pennies):
        strat, level = security_level(matching_pennies, 1)
        np.testing.assert_allclose(strat.probs, [0.5, 0.5], atol=1e-12)
        assert level == pytest.approx(0.0, abs=1e-12)

    def test_dominant_row_guarantee(self, prisoners_dilemma):
        strat, level = security_level(prisoners_dilemma, 1)
        np.testing.assert_allclose(strat.probs, [0, 1], atol=1e-12)
        assert level == pytest.approx(1.0, abs=1e-12)

    def test_maximin_mix(self, battle_of_sexes):
        strat, level = security_level(battle_of_sexes, 1)
        np.testing.assert_allclose(strat.probs, [1 / 3, 2 / 3], atol=1e-12)
        assert level == pytest.approx(2 / 3, abs=1e-12)
        oracle_value, _ = lp_zero_sum_value(battle_of_sexes.payoff1)
        assert level == pytest.approx(oracle_value, abs=1e-9)

    def test_guarantee_holds_against_every_column(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(1, 7))
            game = MatrixGame(rng.uniform(-2, 2, (n, n)), rng.uniform(-2, 2, (n, n)))
            strat, level = security_level(game, 1)
            guarantees = strat.probs @ game.payoff1
            assert guarantees.min() >= level - 1e-9
            strat2, level2 = security_level(game, 2)
            guarantees2 = game.payoff2 @ strat2.probs
            assert guarantees2.min() >= level2 - 1e-9


class TestEnumerateNash:
    def test_prisoners_dilemma_unique(self, prisoners_dilemma):
        profiles = enumerate_nash(prisoners_dilemma)
        assert len(profiles) == 1
        np.testing.assert_allclose(profiles[0].row.probs, [0, 1])
        np.testing.assert_allclose(profiles[0].col.probs, [0, 1])
        assert (profiles[0].value1, profiles[0].value2) == (1.0, 1.0)

    def test_battle_of_sexes_three_profiles(self, battle_of_sexes):
        profiles = enumerate_nash(battle_of_sexes)
        assert len(profiles) == 3
        np.testing.assert_allclose(profiles[0].row.probs, [1, 0])
        np.testing.assert_allclose(profiles[0].col.probs, [1, 0])
        np.testing.assert_allclose(profiles[1].row.probs, [0, 1])
        np.testing.assert_allclose(profiles[1].col.probs, [0, 1])
        np.testing.assert_allclose(profiles[2].row.probs, [2 / 3, 1 / 3], atol=1e-9)
        np.testing.assert_allclose(profiles[2].col.probs, [1 / 3, 2 / 3], atol=1e-9)
        assert profiles[2].value1 == pytest.approx(2 / 3, abs=1e-9)
        assert profiles[2].value2 == pytest.approx(2 / 3, abs=1e-9)

    def test_matching_pennies_as_general_sum(self, matching_pennies):
        profiles = enumerate_nash(matching_pennies)
        assert len(profiles) == 1
        np.testing.assert_allclose(profiles[0].row.probs, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(profiles[0].col.probs, [0.5, 0.5], atol=1e-12)

    def test_matches_exact_oracle_on_integer_games(self):
        # two-sided check: every oracle equilibrium must be reproduced, and
        # every reported profile must pass an exact-rational Nash check
        rng = np.random.default_rng(5)
        for _ in range(25):
            n1 = int(rng.integers(2, 4))
            n2 = int(rng.integers(2, 4))
            m1 = rng.integers(-4, 5, (n1, n2))
            m2 = rng.integers(-4, 5, (n1, n2))
            game = MatrixGame(m1, m2)
            got = enumerate_nash(game)
            want = enumerate_nash_exact(m1.tolist(), m2.tolist())
            for prof in got:
                g1, g2 = nash_gap_exact(m1.tolist(), m2.tolist(),
                                        prof.row.probs, prof.col.probs)
                assert float(max(g1, g2)) <= 1e-9
            for alpha, beta, v1, v2 in want:
                matches = [p for p in got
                           if np.allclose(p.row.probs, [float(x) for x in alpha], atol=1e-9)
                           and np.allclose(p.col.probs, [float(x) for x in beta], atol=1e-9)]
                assert matches, f"oracle equilibrium {alpha}, {beta} not reproduced"
                assert matches[0].value1 == pytest.approx(float(v1), abs=1e-9)
                assert matches[0].value2 == pytest.approx(float(v2), abs=1e-9)
            if len(got) == len(want):  # nondegenerate case: order must agree
                for prof, (alpha, beta, _, _) in zip(got, want):
                    np.testing.assert_allclose(prof.row.probs,
                                               [float(x) for x in alpha], atol=1e-9)

    def test_every_enumerated_profile_verifies(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            game = MatrixGame(rng.uniform(-1, 1, (3, 3)), rng.uniform(-1, 1, (3, 3)))
            for prof in enumerate_nash(game):
                g1, g2 = epsilon_nash_gap(game, prof)
                assert max(g1, g2) <= 1e-9

    def test_cap_enforced(self):
        game = MatrixGame(np.zeros((9, 9)), np.zeros((9, 9)))
        with pytest.raises(EnumerationCapExceeded):
            enumerate_nash(game)
        enumerate_nash(game, cap=9)


class TestSelection:
    def test_battle_of_sexes_canonical_first(self, battle_of_sexes):
        prof = nash_select(battle_of_sexes)
        np.testing.assert_allclose(prof.row.probs, [1, 0])
        np.testing.assert_allclose(prof.col.probs, [1, 0])

    def test_zero_sum_selection_value_is_game_value(self):
        rng = np.random.default_rng(8)
        for _ in range(15):
            mat = rng.uniform(-1, 1, (3, 3))
            game = MatrixGame.zero_sum(mat)
            prof = nash_select(game)
            assert prof.value1 == pytest.approx(solve_zero_sum(mat).value1, abs=1e-9)

    def test_nash_select_bit_identical(self):
        mat1 = np.random.default_rng(9).uniform(-1, 1, (4, 4))
        mat2 = np.random.default_rng(10).uniform(-1, 1, (4, 4))
        game_a = MatrixGame(mat1, mat2)
        game_b = MatrixGame(mat1.copy(), mat2.copy())
        pa, pb = nash_select(game_a), nash_select(game_b)
        assert np.array_equal(pa.row.probs, pb.row.probs)
        assert np.array_equal(pa.col.probs, pb.col.probs)
        assert (pa.value1, pa.value2) == (pb.value1, pb.value2)

    def test_security_select_examples(self, matching_pennies, prisoners_dilemma):
        mp = security_select(matching_pennies)
        np.testing.assert_allclose(mp.row.probs, [0.5, 0.5], atol=1e-12)
        assert (mp.value1, mp.value2) == (pytest.approx(0.0, abs=1e-12),
                                          pytest.approx(0.0, abs=1e-12))
        pd = security_select(prisoners_dilemma)
        np.testing.assert_allclose(pd.row.probs, [0, 1], atol=1e-12)
        np.testing.assert_allclose(pd.col.probs, [0, 1], atol=1e-12)
        assert (pd.value1, pd.value2) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_security_select_is_nash_for_zero_sum(self):
        rng = np.random.default_rng(12)
        for _ in range(15):
            game = MatrixGame.zero_sum(rng.uniform(-1, 1, (4, 4)))
            prof = security_select(game)
            g1, g2 = epsilon_nash_gap(game, prof)
            assert max(g1, g2) <= 1e-9
