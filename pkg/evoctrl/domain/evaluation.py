"""Monte Carlo benchmarking of mutation-rate policies.

Episode i of every evaluation runs on seed.stream(i). Two policies compared
with the same seed therefore see common random numbers, and splitting the
episodes across worker processes leaves every statistic unchanged because
results are reassembled in episode order before aggregation.
"""

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from evoctrl.domain.errors import DomainError, EvaluationError, ImproperPolicyError
from evoctrl.domain.models import Theta
from evoctrl.domain.policies import PolicySpec, policy_thetas
from evoctrl.domain.probability import ProblemSpec, TransitionModel, binomial_pmf_vector
from evoctrl.domain.simulator import DEFAULT_STEP_CAP, RngSeed, episode_length
from evoctrl.domain.solver import ValueFunction, policy_evaluation

DEFAULT_RUNS = 2000
DEFAULT_SEED = RngSeed(42)
DEFAULT_MARKS = (5, 10, 22, 45)

EvalStart = int | Literal["random"]


@dataclass(frozen=True)
class StartBreakdown:
    runs: int
    mean: float
    std: float


@dataclass(frozen=True, eq=False)
class PolicyBenchmark:
    """Monte Carlo statistics of one policy.

    runs counts the completed episodes only; mean and std (sample, ddof=1) are
    computed from them, and truncated episodes are counted separately.
    """

    name: str
    start: EvalStart
    runs: int
    mean: float
    std: float
    truncated: int
    start_states: NDArray[np.int64]
    steps: NDArray[np.int64]
    truncated_mask: NDArray[np.bool_]

    @property
    def standard_error(self) -> float:
        return self.std / math.sqrt(self.runs)

    def by_start(self) -> dict[int, StartBreakdown]:
        """Completed-episode statistics per start state, in state order."""
        completed = ~self.truncated_mask
        starts = self.start_states[completed]
        steps = self.steps[completed]

        breakdown = {}
        for s in np.unique(starts):
            group = steps[starts == s]
            mean, std = _summarise(group)
            breakdown[int(s)] = StartBreakdown(int(group.size), mean, std)
        return breakdown


@dataclass(frozen=True)
class BenchmarkReport:
    """Benchmarks of several policies on common random numbers."""

    n: int
    seed: RngSeed
    start: EvalStart
    entries: tuple[PolicyBenchmark, ...]

    def entry(self, name: str) -> PolicyBenchmark:
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise KeyError(name)


@dataclass(frozen=True)
class MarkEntry:
    """Empirical time-to-termination at one start state, with its exact counterpart."""

    policy: str
    state: int
    runs: int
    mean: float
    std: float
    exact_value: float


@dataclass(frozen=True)
class FigureData:
    """Value curves, policy curves and Monte Carlo marks per policy."""

    n: int
    values: dict[str, ValueFunction]
    thetas: dict[str, list[Theta]]
    marks: tuple[MarkEntry, ...]


def _summarise(steps: NDArray[np.int64]) -> tuple[float, float]:
    # integer sums keep the mean independent of accumulation order
    count = int(steps.size)
    mean = int(steps.sum()) / count
    if count == 1:
        return mean, 0.0
    return mean, float(np.std(steps, ddof=1))


def _run_chunk(
    spec: ProblemSpec,
    policy: PolicySpec,
    start: EvalStart,
    seed: RngSeed,
    first: int,
    last: int,
    step_cap: int,
) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.bool_]]:
    size = last - first
    starts = np.empty(size, dtype=np.int64)
    steps = np.empty(size, dtype=np.int64)
    truncated = np.empty(size, dtype=bool)

    for offset, index in enumerate(range(first, last)):
        rng = seed.stream(index).generator()
        starts[offset], steps[offset], truncated[offset] = episode_length(spec, policy, start, rng, step_cap)
    return starts, steps, truncated


def _chunks(runs: int, workers: int) -> list[tuple[int, int]]:
    size = math.ceil(runs / workers)
    return [(first, min(first + size, runs)) for first in range(0, runs, size)]


def monte_carlo_eval(
    spec: ProblemSpec,
    policy: PolicySpec,
    start: EvalStart,
    runs: int = DEFAULT_RUNS,
    seed: RngSeed = DEFAULT_SEED,
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
    name: str = "policy",
) -> PolicyBenchmark:
    """Run `runs` independent episodes of a policy and summarise their lengths.

    Args:
        spec: Problem spec.
        policy: Policy under evaluation (exact theta, no snapping).
        start: Start state, or "random" for uniform random bitstrings.
        runs: Number of episodes (>= 1); episode i uses seed.stream(i).
        seed: Master seed; its own stream id is not used.
        step_cap: Per-episode iteration cap.
        workers: Worker processes; results do not depend on this value.
        name: Label of the policy in reports.

    Returns:
        PolicyBenchmark over the completed episodes.

    Raises:
        DomainError: If runs or workers are invalid.
        EvaluationError: If every episode hit the step cap.
    """
    if runs < 1:
        raise DomainError(f"runs must be >= 1, got {runs}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    if workers == 1:
        starts, steps, truncated = _run_chunk(spec, policy, start, seed, 0, runs, step_cap)
    else:
        bounds = _chunks(runs, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_chunk, spec, policy, start, seed, first, last, step_cap) for first, last in bounds
            ]
            parts = [future.result() for future in futures]
        starts = np.concatenate([part[0] for part in parts])
        steps = np.concatenate([part[1] for part in parts])
        truncated = np.concatenate([part[2] for part in parts])

    completed = steps[~truncated]
    if completed.size == 0:
        raise EvaluationError(f"All {runs} episodes of '{name}' hit the step cap of {step_cap}; improper policy?")

    mean, std = _summarise(completed)
    return PolicyBenchmark(
        name=name,
        start=start,
        runs=int(completed.size),
        mean=mean,
        std=std,
        truncated=int(truncated.sum()),
        start_states=starts,
        steps=steps,
        truncated_mask=truncated,
    )


def compare_policies(
    spec: ProblemSpec,
    policies: Mapping[str, PolicySpec],
    runs: int = DEFAULT_RUNS,
    seed: RngSeed = DEFAULT_SEED,
    start: EvalStart = "random",
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
) -> BenchmarkReport:
    """Benchmark several policies on common random numbers.

    Every policy runs the same episode streams, so episode i starts from the same
    bitstring under every policy.

    Raises:
        DomainError: If no policy is given.
        EvaluationError: As monte_carlo_eval.
    """
    if not policies:
        raise DomainError("At least one policy is needed for a comparison")

    entries = tuple(
        monte_carlo_eval(spec, policy, start, runs, seed, step_cap, workers, name=name)
        for name, policy in policies.items()
    )
    return BenchmarkReport(spec.n, seed, start, entries)


def expected_time_from_random_start(values: ValueFunction) -> float:
    """Exact expected time-to-termination from a uniform random bitstring.

    The start state is Bin(n, 1/2), so this is -sum_s P(s) V(s).
    """
    weights = binomial_pmf_vector(values.n, 0.5)
    return -math.fsum(weights * values.values)


def policy_suboptimality(model: TransitionModel, policy: PolicySpec, optimal: ValueFunction) -> float:
    """Mean over non-terminal states of (V*(s) - V^pi(s)) / |V*(s)|.

    V^pi is evaluated with grid-snapped thetas, so the score is never negative
    beyond rounding.
    An improper policy has infinite expected time somewhere and scores math.inf.
    """
    if optimal.n != model.n:
        raise DomainError(f"Optimal values cover n={optimal.n}, model has n={model.n}")
    try:
        values = policy_evaluation(model, policy)
    except ImproperPolicyError:
        return math.inf

    best = optimal.values[: model.n]
    gaps = (best - values.values[: model.n]) / np.abs(best)
    return float(gaps.mean())


def figure_data(
    model: TransitionModel,
    policies: Mapping[str, PolicySpec],
    runs: int = DEFAULT_RUNS,
    seed: RngSeed = DEFAULT_SEED,
    marks: Sequence[int] = DEFAULT_MARKS,
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
) -> FigureData:
    """Exact value and theta curves of each policy plus Monte Carlo marks.

    Curves and thetas use grid-snapped thetas, so no curve lies above V*. Each
    mark runs `runs` episodes from a fixed start state at the policy's real
    thetas; its exact_value is -V^pi at that state on the plotted curve.

    Raises:
        DomainError: If a mark lies outside 0..n or no policy is given.
        ImproperPolicyError: If a policy cannot be evaluated exactly.
    """
    spec = model.spec
    if not policies:
        raise DomainError("At least one policy is needed for figure data")
    for s in marks:
        if not 0 <= s <= spec.n:
            raise DomainError(f"Mark state {s} outside [0, {spec.n}]")

    values = {name: policy_evaluation(model, policy) for name, policy in policies.items()}
    thetas = {name: policy_thetas(policy, spec, snap=True) for name, policy in policies.items()}

    entries = []
    for name, policy in policies.items():
        for s in marks:
            bench = monte_carlo_eval(spec, policy, s, runs, seed, step_cap, workers, name=name)
            entries.append(MarkEntry(name, s, bench.runs, bench.mean, bench.std, values[name].expected_steps(s)))

    return FigureData(spec.n, values, thetas, tuple(entries))
