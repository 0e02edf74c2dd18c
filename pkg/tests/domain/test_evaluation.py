"""Tests for evoctrl.domain.evaluation."""

import math

import numpy as np
import pytest

from evoctrl.domain.errors import DomainError, EvaluationError
from evoctrl.domain.evaluation import (
    compare_policies,
    expected_time_from_random_start,
    figure_data,
    monte_carlo_eval,
    policy_suboptimality,
)
from evoctrl.domain.policies import ConstantPolicy, ReciprocalPolicy, constant_one_over_n
from evoctrl.domain.probability import ProblemSpec, TransitionModel, build_transition_model
from evoctrl.domain.simulator import RngSeed
from evoctrl.domain.solver import ValueFunction, backward_induction, greedy_policy, policy_evaluation


@pytest.fixture(scope="module")
def model_50() -> TransitionModel:
    return build_transition_model(ProblemSpec(50))


class TestMonteCarloEval:
    """Tests for monte_carlo_eval."""

    def test_start_at_optimum(self) -> None:
        """Should report zero steps from s = n."""
        bench = monte_carlo_eval(ProblemSpec(10), ReciprocalPolicy(), 10, runs=20)
        assert bench.mean == 0.0
        assert bench.std == 0.0
        assert bench.runs == 20

    def test_single_run_has_zero_std(self) -> None:
        """Should not divide by zero with one run."""
        bench = monte_carlo_eval(ProblemSpec(10), ReciprocalPolicy(), 0, runs=1)
        assert bench.std == 0.0

    def test_deterministic_given_seed(self) -> None:
        """Should reproduce every episode for the same seed."""
        spec = ProblemSpec(20)
        a = monte_carlo_eval(spec, ReciprocalPolicy(), "random", runs=50, seed=RngSeed(7))
        b = monte_carlo_eval(spec, ReciprocalPolicy(), "random", runs=50, seed=RngSeed(7))
        assert np.array_equal(a.steps, b.steps)
        assert a.mean == b.mean

    def test_workers_do_not_change_results(self) -> None:
        """Should give the same statistics serially and across two processes."""
        spec = ProblemSpec(10)
        serial = monte_carlo_eval(spec, ReciprocalPolicy(), "random", runs=51, seed=RngSeed(3))
        parallel = monte_carlo_eval(spec, ReciprocalPolicy(), "random", runs=51, seed=RngSeed(3), workers=2)
        assert np.array_equal(serial.steps, parallel.steps)
        assert np.array_equal(serial.start_states, parallel.start_states)
        assert (serial.mean, serial.std) == (parallel.mean, parallel.std)

    def test_all_truncated(self) -> None:
        """Should refuse to summarise when no episode finished."""
        with pytest.raises(EvaluationError):
            monte_carlo_eval(ProblemSpec(4), ConstantPolicy(1.0), 3, runs=10, step_cap=10)

    def test_partial_truncation_is_counted(self) -> None:
        """Should keep only completed episodes in runs."""
        bench = monte_carlo_eval(ProblemSpec(30), ReciprocalPolicy(), "random", runs=200, step_cap=200)
        assert bench.runs + bench.truncated == 200
        assert bench.truncated == int(bench.truncated_mask.sum())
        assert bench.truncated > 0

    def test_rejects_zero_runs(self) -> None:
        """Should need at least one run."""
        with pytest.raises(DomainError):
            monte_carlo_eval(ProblemSpec(4), ReciprocalPolicy(), 0, runs=0)

    def test_by_start_covers_completed_runs(self) -> None:
        """Should split the completed runs by start state."""
        bench = monte_carlo_eval(ProblemSpec(12), ReciprocalPolicy(), "random", runs=300)
        breakdown = bench.by_start()
        assert sum(group.runs for group in breakdown.values()) == bench.runs
        assert list(breakdown) == sorted(breakdown)

    def test_mean_matches_exact_value(self) -> None:
        """Should land within 4 standard errors of -V(s) at the real thetas."""
        model = build_transition_model(ProblemSpec(30))
        exact = policy_evaluation(model, ReciprocalPolicy(), snap=False)
        bench = monte_carlo_eval(model.spec, ReciprocalPolicy(), 10, runs=1000, seed=RngSeed(11))
        assert abs(bench.mean - exact.expected_steps(10)) < 4 * bench.standard_error


class TestComparePolicies:
    """Tests for compare_policies."""

    def test_common_random_numbers(self) -> None:
        """Should start every policy from the same bitstrings."""
        report = compare_policies(
            ProblemSpec(20),
            {"constant": constant_one_over_n(20), "reciprocal": ReciprocalPolicy(), "again": ReciprocalPolicy()},
            runs=40,
            seed=RngSeed(5),
        )
        assert np.array_equal(report.entry("constant").start_states, report.entry("reciprocal").start_states)
        assert np.array_equal(report.entry("reciprocal").steps, report.entry("again").steps)
        assert report.seed == RngSeed(5)
        assert report.start == "random"

    def test_rejects_empty_mapping(self) -> None:
        """Should need a policy to compare."""
        with pytest.raises(DomainError):
            compare_policies(ProblemSpec(5), {})

    def test_unknown_entry(self) -> None:
        """Should raise KeyError for an unknown policy name."""
        report = compare_policies(ProblemSpec(5), {"reciprocal": ReciprocalPolicy()}, runs=5)
        with pytest.raises(KeyError):
            report.entry("optimal")

    def test_benchmark_at_fifty_bits(self, model_50: TransitionModel) -> None:
        """Should reproduce the known random-start benchmark at n = 50 with 2000 runs."""
        optimal_values = backward_induction(model_50)
        policies = {
            "constant": constant_one_over_n(50),
            "reciprocal": ReciprocalPolicy(),
            "optimal": greedy_policy(model_50, optimal_values),
        }
        report = compare_policies(model_50.spec, policies, runs=2000, seed=RngSeed(42))

        on_grid = {
            name: expected_time_from_random_start(policy_evaluation(model_50, policy))
            for name, policy in policies.items()
        }
        assert on_grid["optimal"] <= on_grid["reciprocal"] <= on_grid["constant"]

        for name, policy in policies.items():
            entry = report.entry(name)
            exact = expected_time_from_random_start(policy_evaluation(model_50, policy, snap=False))
            assert abs(entry.mean - exact) < 4 * entry.standard_error, name
            assert entry.truncated == 0

        known = {"constant": (442, 163), "reciprocal": (430, 165), "optimal": (412, 164)}
        for name, (mean, std) in known.items():
            entry = report.entry(name)
            assert abs(entry.mean - mean) <= 15, name
            assert abs(entry.std - std) <= 20, name

        means = {name: report.entry(name).mean for name in policies}
        assert means["optimal"] < means["reciprocal"] < means["constant"]


class TestExactSummaries:
    """Tests for expected_time_from_random_start and policy_suboptimality."""

    def test_random_start_single_bit(self) -> None:
        """Should weight V(0) = -1 by 1/2."""
        assert expected_time_from_random_start(ValueFunction(np.array([-1.0, 0.0]))) == pytest.approx(0.5)

    def test_optimal_policy_has_zero_suboptimality(self, model_50: TransitionModel) -> None:
        """Should score the greedy policy of V* at zero."""
        optimal = backward_induction(model_50)
        score = policy_suboptimality(model_50, greedy_policy(model_50, optimal), optimal)
        assert score == pytest.approx(0.0, abs=1e-12)

    def test_baseline_is_suboptimal(self, model_50: TransitionModel) -> None:
        """Should give a positive score to the constant 1/n policy."""
        optimal = backward_induction(model_50)
        assert policy_suboptimality(model_50, constant_one_over_n(50), optimal) > 0

    def test_improper_policy_scores_infinity(self) -> None:
        """Should score a policy that never finishes as infinite."""
        model = build_transition_model(ProblemSpec(4))
        optimal = backward_induction(model)
        assert policy_suboptimality(model, ConstantPolicy(1.0), optimal) == math.inf


class TestFigureData:
    """Tests for figure_data."""

    def test_curves_and_marks(self) -> None:
        """Should hold one curve per policy and one mark per (policy, state)."""
        model = build_transition_model(ProblemSpec(12))
        data = figure_data(model, {"reciprocal": ReciprocalPolicy()}, runs=20, marks=(2, 6))
        assert data.values["reciprocal"].values.shape == (13,)
        assert len(data.thetas["reciprocal"]) == 12
        assert [(m.policy, m.state) for m in data.marks] == [("reciprocal", 2), ("reciprocal", 6)]

    def test_rejects_mark_beyond_n(self) -> None:
        """Should reject marks outside 0..n."""
        model = build_transition_model(ProblemSpec(12))
        with pytest.raises(DomainError):
            figure_data(model, {"reciprocal": ReciprocalPolicy()}, runs=5, marks=(13,))

    def test_marks_match_exact_values(self, model_50: TransitionModel) -> None:
        """Should put every mark within 4 standard errors of its exact value at n = 50."""
        policies = {
            "constant": constant_one_over_n(50),
            "reciprocal": ReciprocalPolicy(),
            "optimal": greedy_policy(model_50, backward_induction(model_50)),
        }
        data = figure_data(model_50, policies, runs=1000, seed=RngSeed(42))
        assert len(data.marks) == 12
        for mark in data.marks:
            standard_error = mark.std / math.sqrt(mark.runs)
            assert abs(mark.mean - mark.exact_value) < 4 * standard_error, (mark.policy, mark.state)

    def test_curves_never_beat_optimal(self) -> None:
        """Should export curves bounded by V* even where real thetas beat the grid."""
        model = build_transition_model(ProblemSpec(100))
        optimal = backward_induction(model)
        policies = {"reciprocal": ReciprocalPolicy(), "constant": constant_one_over_n(100)}
        data = figure_data(model, policies, runs=1, marks=())
        for name, values in data.values.items():
            assert np.all(optimal.values >= values.values - 1e-9), name
        assert set(data.thetas["reciprocal"]) <= set(model.spec.actions)
        assert policy_suboptimality(model, ReciprocalPolicy(), optimal) >= 0
