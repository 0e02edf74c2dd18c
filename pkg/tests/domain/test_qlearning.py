"""Tests for evoctrl.domain.qlearning."""

import numpy as np
import pytest

from evoctrl.domain.errors import DomainError, IncompleteTableError
from evoctrl.domain.evaluation import policy_suboptimality
from evoctrl.domain.policies import ConstantPolicy
from evoctrl.domain.probability import ProblemSpec, build_transition_model, default_action_grid
from evoctrl.domain.qlearning import (
    ConstantAlpha,
    ConstantEpsilon,
    LearningConfig,
    LinearEpsilon,
    PolynomialAlpha,
    QTable,
    choose_action,
    greedy_from_q,
    q_update,
    train,
)
from evoctrl.domain.simulator import RngSeed
from evoctrl.domain.solver import backward_induction

QUARTER_GRID = (0.25, 0.5, 0.75, 1.0)


class TestSchedules:
    """Tests for the learning-rate and exploration schedules."""

    def test_polynomial_alpha(self) -> None:
        """Should decay as alpha0 / (1 + visits)^omega."""
        schedule = PolynomialAlpha(0.5, 0.85)
        assert schedule.value(0) == 0.5
        assert schedule.value(3) == pytest.approx(0.5 / 4**0.85)

    def test_polynomial_alpha_rejects_omega_half(self) -> None:
        """Should require omega in (0.5, 1]."""
        with pytest.raises(DomainError):
            PolynomialAlpha(0.5, 0.5)

    def test_constant_alpha_rejects_zero(self) -> None:
        """Should keep alpha inside (0, 1]."""
        with pytest.raises(DomainError):
            ConstantAlpha(0.0)

    def test_linear_epsilon_endpoints(self) -> None:
        """Should start at start and reach end on the last episode."""
        schedule = LinearEpsilon(1.0, 0.05)
        assert schedule.value(0, 10) == 1.0
        assert schedule.value(9, 10) == pytest.approx(0.05)
        assert schedule.value(0, 1) == 1.0

    def test_constant_epsilon(self) -> None:
        """Should ignore the episode index."""
        assert ConstantEpsilon(0.2).value(7, 10) == 0.2


class TestLearningConfig:
    """Tests for LearningConfig validation."""

    def test_defaults(self) -> None:
        """Should carry the documented defaults."""
        config = LearningConfig(episodes=10)
        assert config.alpha == PolynomialAlpha(1.0, 0.7)
        assert config.epsilon == LinearEpsilon(1.0, 0.05)
        assert config.seed == RngSeed(42)

    def test_rejects_zero_episodes(self) -> None:
        """Should need at least one episode."""
        with pytest.raises(DomainError):
            LearningConfig(episodes=0)

    def test_guide_rate_needs_guide(self) -> None:
        """Should reject a positive guide rate without a guide policy."""
        with pytest.raises(DomainError):
            LearningConfig(episodes=10, guide_rate=0.5)


class TestQTable:
    """Tests for QTable."""

    def test_zeros(self) -> None:
        """Should hold one row per state including the terminal row."""
        table = QTable.zeros(ProblemSpec(3, QUARTER_GRID))
        assert table.q.shape == (4, 4)
        assert table.unvisited_states() == (0, 1, 2)

    def test_rejects_non_zero_terminal_row(self) -> None:
        """Should pin the terminal row at zero."""
        q = np.zeros((3, 4))
        q[2, 1] = -1.0
        with pytest.raises(DomainError):
            QTable(ProblemSpec(2, QUARTER_GRID), q)

    def test_rejects_wrong_shape(self) -> None:
        """Should match the problem's state and action counts."""
        with pytest.raises(DomainError):
            QTable(ProblemSpec(2, QUARTER_GRID), np.zeros((2, 4)))


class TestQUpdate:
    """Tests for q_update."""

    def test_update_towards_terminal(self) -> None:
        """Should move halfway to -1 with alpha = 0.5 when s' is terminal."""
        table = QTable.zeros(ProblemSpec(1, QUARTER_GRID))
        q_update(table, 0, 3, -1.0, 1, 0.5)
        assert table.q[0, 3] == -0.5

    def test_update_uses_max_of_next_row(self) -> None:
        """Should bootstrap from the best action at s'."""
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        table.q[1] = [-4.0, -3.0, -5.0, -6.0]
        q_update(table, 0, 0, -1.0, 1, 1.0)
        assert table.q[0, 0] == -4.0

    def test_rejects_terminal_state(self) -> None:
        """Should never update the terminal row."""
        table = QTable.zeros(ProblemSpec(1, QUARTER_GRID))
        with pytest.raises(DomainError):
            q_update(table, 1, 0, -1.0, 1, 0.5)

    def test_rejects_zero_alpha(self) -> None:
        """Should require alpha in (0, 1]."""
        table = QTable.zeros(ProblemSpec(1, QUARTER_GRID))
        with pytest.raises(DomainError):
            q_update(table, 0, 0, -1.0, 1, 0.0)


class TestChooseAction:
    """Tests for choose_action."""

    def test_greedy_without_exploration(self) -> None:
        """Should pick the unique maximizer when epsilon = 0."""
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        table.q[0] = [-3.0, -1.0, -2.0, -5.0]
        rng = RngSeed(0).generator()
        assert all(choose_action(table, 0, 0.0, rng) == 1 for _ in range(50))

    def test_ties_broken_at_random(self) -> None:
        """Should pick every tied maximizer eventually."""
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        table.q[0] = [-1.0, -1.0, -2.0, -1.0]
        rng = RngSeed(0).generator()
        chosen = {int(choose_action(table, 0, 0.0, rng)) for _ in range(200)}
        assert chosen == {0, 1, 3}

    @pytest.mark.parametrize(("epsilon", "row"), [(1.0, [-3.0, -1.0, -2.0, -5.0]), (0.0, [-2.0, -2.0, -2.0, -2.0])])
    def test_uniform_frequencies(self, epsilon: float, row: list[float]) -> None:
        """Should spread draws evenly when exploring fully or when every action ties."""
        draws = 100_000
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        table.q[0] = row
        rng = RngSeed(3).generator()
        counts = np.bincount([choose_action(table, 0, epsilon, rng) for _ in range(draws)], minlength=4)
        sigma = np.sqrt(draws * 0.25 * 0.75)
        assert np.all(np.abs(counts - draws / 4) < 4 * sigma)

    def test_full_guide_rate_follows_guide(self) -> None:
        """Should take the guide action on every exploratory move."""
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        rng = RngSeed(0).generator()
        assert all(choose_action(table, 0, 1.0, rng, guide_action=2, guide_rate=1.0) == 2 for _ in range(50))

    def test_rejects_terminal_state(self) -> None:
        """Should have no action at s = n."""
        table = QTable.zeros(ProblemSpec(2, QUARTER_GRID))
        with pytest.raises(DomainError):
            choose_action(table, 2, 0.1, RngSeed(0).generator())


class TestTrain:
    """Tests for train and greedy_from_q."""

    def test_single_bit_learns_theta_one(self) -> None:
        """Should learn that flipping the only bit is optimal."""
        spec = ProblemSpec(1, QUARTER_GRID)
        config = LearningConfig(episodes=500, alpha=ConstantAlpha(0.5), epsilon=ConstantEpsilon(0.1))
        table, report = train(spec, config)
        assert greedy_from_q(table).thetas == (1.0,)
        assert table.q[0, 3] == pytest.approx(-1.0, abs=1e-6)
        assert report.episodes_run == 500

    @pytest.mark.parametrize("sampler", ["model", "bit"])
    def test_deterministic_given_seed(self, sampler: str) -> None:
        """Should give identical tables for identical configs."""
        spec = ProblemSpec(4, QUARTER_GRID)
        config = LearningConfig(episodes=200, seed=RngSeed(5))
        a, _ = train(spec, config, sampler=sampler)  # type: ignore[arg-type]
        b, _ = train(spec, config, sampler=sampler)  # type: ignore[arg-type]
        assert np.array_equal(a.q, b.q)

    def test_visit_counts_sum_to_steps(self) -> None:
        """Should count one visit per transition."""
        spec = ProblemSpec(5, QUARTER_GRID)
        table, report = train(spec, LearningConfig(episodes=100))
        assert int(report.visit_counts.sum()) == report.total_steps
        assert table.visits is not None
        assert np.array_equal(table.visits, report.visit_counts)
        assert np.all(table.q[5] == 0)

    def test_values_stay_bounded(self) -> None:
        """Should keep every Q finite, non-positive and no larger in magnitude than the updates made."""
        spec = ProblemSpec(6, QUARTER_GRID)
        table, report = train(spec, LearningConfig(episodes=300, step_cap=50))
        assert np.all(np.isfinite(table.q))
        assert np.all(table.q <= 0)
        assert np.abs(table.q).max() <= report.total_steps

    def test_step_cap_truncates(self) -> None:
        """Should stop every episode at the cap and count it."""
        spec = ProblemSpec(30)
        config = LearningConfig(episodes=3, step_cap=1, start_distribution="uniform-bitstring")
        _, report = train(spec, config)
        assert report.total_steps == 3
        assert report.truncated_episodes == 3

    def test_guided_exploration_only_visits_guide(self) -> None:
        """Should apply the guide action on every move when exploring fully."""
        spec = ProblemSpec(4, QUARTER_GRID)
        config = LearningConfig(
            episodes=50,
            epsilon=ConstantEpsilon(1.0),
            guide_policy=ConstantPolicy(0.5),
            guide_rate=1.0,
        )
        table, _ = train(spec, config)
        assert table.visits is not None
        assert table.visits[:, [0, 2, 3]].sum() == 0
        assert table.visits[:, 1].sum() > 0

    def test_rejects_foreign_model(self) -> None:
        """Should refuse a model built for another spec."""
        model = build_transition_model(ProblemSpec(3, QUARTER_GRID))
        with pytest.raises(DomainError):
            train(ProblemSpec(4, QUARTER_GRID), LearningConfig(episodes=1), model=model)

    def test_incomplete_table(self) -> None:
        """Should refuse a greedy policy when states were never visited."""
        spec = ProblemSpec(20)
        config = LearningConfig(episodes=1, start_distribution="uniform-bitstring")
        table, _ = train(spec, config)
        with pytest.raises(IncompleteTableError) as exc_info:
            greedy_from_q(table)
        assert 0 in exc_info.value.states

    def test_greedy_ties_go_to_smaller_theta(self) -> None:
        """Should pick the first maximizer when extracting the policy."""
        spec = ProblemSpec(1, QUARTER_GRID)
        table = QTable(spec, np.zeros((2, 4)), np.ones((2, 4), dtype=np.int64))
        assert greedy_from_q(table).thetas == (0.25,)

    @pytest.mark.parametrize("sampler", ["model", "bit"])
    def test_small_problem_near_optimal(self, sampler: str) -> None:
        """Should learn a greedy policy within 5% of optimal at n = 3."""
        spec = ProblemSpec(3, default_action_grid(0.1, 1.0, 0.1))
        model = build_transition_model(spec)
        table, _ = train(spec, LearningConfig(episodes=20_000), sampler=sampler)  # type: ignore[arg-type]
        policy = greedy_from_q(table)
        assert policy_suboptimality(model, policy, backward_induction(model)) <= 0.05


@pytest.mark.slow
class TestConvergence:
    """Long runs of the full-grid problem at n = 10."""

    def test_default_schedules_reach_two_percent(self) -> None:
        """Should stay within 2% mean suboptimality for at least 4 of 5 seeds."""
        spec = ProblemSpec(10)
        model = build_transition_model(spec)
        optimal = backward_induction(model)

        failures = 0
        for seed in range(5):
            table, _ = train(spec, LearningConfig(episodes=200_000, seed=RngSeed(seed)), model=model)
            if policy_suboptimality(model, greedy_from_q(table), optimal) > 0.02:
                failures += 1
        assert failures <= 1

    def test_samplers_give_overlapping_quality(self) -> None:
        """Should give overlapping suboptimality ranges across 10 seeds for both samplers."""
        spec = ProblemSpec(10)
        model = build_transition_model(spec)
        optimal = backward_induction(model)

        ranges = {}
        for sampler in ("model", "bit"):
            scores = []
            for seed in range(10):
                config = LearningConfig(episodes=20_000, seed=RngSeed(seed))
                table, _ = train(spec, config, sampler=sampler)  # type: ignore[arg-type]
                scores.append(policy_suboptimality(model, greedy_from_q(table), optimal))
            ranges[sampler] = (min(scores), max(scores))

        (low_a, high_a), (low_b, high_b) = ranges["model"], ranges["bit"]
        assert low_a <= high_b and low_b <= high_a
