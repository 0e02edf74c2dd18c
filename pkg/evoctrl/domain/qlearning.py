"""Tabular Q-Learning of the mutation-rate policy from sampled transitions.

The learner never reads transition probabilities directly: it observes
(s, theta, s') either from the bit-level EA or from inverse-CDF draws over the
exact model, which follow the same law. Every step costs r = -1 and the
terminal row of the table stays at zero, so Q(s, theta) estimates minus the
expected remaining time when theta is applied once at s and the greedy policy
is followed afterwards.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from evoctrl.domain.errors import DomainError, IncompleteTableError
from evoctrl.domain.models import ActionIndex
from evoctrl.domain.policies import PolicySpec, TablePolicy, action_for_state
from evoctrl.domain.probability import ProblemSpec, TransitionModel, build_transition_model
from evoctrl.domain.simulator import DEFAULT_STEP_CAP, Bitstring, RngSeed, sample_transition_index, step

STEP_REWARD = -1.0

Sampler = Literal["model", "bit"]
StartDistribution = Literal["uniform-state", "uniform-bitstring"]


@dataclass(frozen=True)
class ConstantAlpha:
    """Same learning rate for every update."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise DomainError(f"Learning rate {self.alpha} outside (0, 1]")

    def value(self, visits: int) -> float:
        return self.alpha


@dataclass(frozen=True)
class PolynomialAlpha:
    """Per-cell rate alpha0 / (1 + visits)^omega, visits counted before the update."""

    alpha0: float
    omega: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha0 <= 1:
            raise DomainError(f"Learning rate {self.alpha0} outside (0, 1]")
        if not 0.5 < self.omega <= 1:
            raise DomainError(f"Polynomial exponent {self.omega} outside (0.5, 1]")

    def value(self, visits: int) -> float:
        return float(self.alpha0 / (1 + visits) ** self.omega)


@dataclass(frozen=True)
class ConstantEpsilon:
    epsilon: float

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon <= 1:
            raise DomainError(f"Exploration rate {self.epsilon} outside [0, 1]")

    def value(self, episode: int, episodes: int) -> float:
        return self.epsilon


@dataclass(frozen=True)
class LinearEpsilon:
    """Exploration decaying linearly from start (first episode) to end (last episode)."""

    start: float
    end: float

    def __post_init__(self) -> None:
        for eps in (self.start, self.end):
            if not 0 <= eps <= 1:
                raise DomainError(f"Exploration rate {eps} outside [0, 1]")

    def value(self, episode: int, episodes: int) -> float:
        if episodes <= 1:
            return self.start
        return self.start + (self.end - self.start) * episode / (episodes - 1)


AlphaSchedule = ConstantAlpha | PolynomialAlpha
EpsilonSchedule = ConstantEpsilon | LinearEpsilon


@dataclass(frozen=True)
class LearningConfig:
    """Budget, schedules and seed of one training run."""

    episodes: int
    alpha: AlphaSchedule = field(default_factory=lambda: PolynomialAlpha(1.0, 0.7))
    epsilon: EpsilonSchedule = field(default_factory=lambda: LinearEpsilon(1.0, 0.05))
    start_distribution: StartDistribution = "uniform-state"
    seed: RngSeed = field(default_factory=lambda: RngSeed(42))
    step_cap: int = DEFAULT_STEP_CAP
    guide_policy: PolicySpec | None = None
    guide_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise DomainError(f"episodes must be >= 1, got {self.episodes}")
        if self.step_cap < 1:
            raise DomainError(f"step_cap must be >= 1, got {self.step_cap}")
        if self.start_distribution not in ("uniform-state", "uniform-bitstring"):
            raise DomainError(f"Unknown start distribution {self.start_distribution!r}")
        if not 0 <= self.guide_rate <= 1:
            raise DomainError(f"Guide rate {self.guide_rate} outside [0, 1]")
        if self.guide_rate > 0 and self.guide_policy is None:
            raise DomainError("A positive guide rate needs a guide policy")


@dataclass(eq=False)
class QTable:
    """Action values per (state, grid action).

    q has shape (n + 1, n_actions); row n is the terminal row and stays zero.
    visits counts the updates per cell, or is None for a table loaded from disk.
    """

    spec: ProblemSpec
    q: NDArray[np.float64]
    visits: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        shape = (self.spec.n + 1, self.spec.n_actions)
        if self.q.shape != shape:
            raise DomainError(f"Q-table must have shape {shape}, got {self.q.shape}")
        if self.visits is not None and self.visits.shape != shape:
            raise DomainError(f"Visit counts must have shape {shape}, got {self.visits.shape}")
        if np.any(self.q[self.spec.n] != 0):
            raise DomainError("Terminal row of the Q-table must be zero")

    @classmethod
    def zeros(cls, spec: ProblemSpec) -> "QTable":
        shape = (spec.n + 1, spec.n_actions)
        return cls(spec, np.zeros(shape), np.zeros(shape, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.spec.n

    def unvisited_states(self) -> tuple[int, ...]:
        if self.visits is None:
            return ()
        counts = self.visits[: self.n].sum(axis=1)
        return tuple(int(s) for s in np.flatnonzero(counts == 0))


@dataclass(frozen=True, eq=False)
class TrainingReport:
    """Summary of a training run; visit_counts sums to total_steps."""

    episodes_run: int
    total_steps: int
    visit_counts: NDArray[np.int64]
    truncated_episodes: int
    mean_suboptimality: float | None = None


def q_update(table: QTable, s: int, a: int, r: float, s_next: int, alpha: float) -> None:
    """Temporal-difference update Q(s,a) += alpha [r + max_a' Q(s_next, a') - Q(s,a)].

    Raises:
        DomainError: If s is terminal or out of range, or alpha is outside (0, 1].
    """
    if not 0 <= s < table.n:
        raise DomainError(f"No update from state {s} (non-terminal states are 0..{table.n - 1})")
    if not 0 < alpha <= 1:
        raise DomainError(f"Learning rate {alpha} outside (0, 1]")

    target = r + float(table.q[s_next].max())
    table.q[s, a] += alpha * (target - table.q[s, a])


def _greedy_action(row: NDArray[np.float64], rng: np.random.Generator) -> ActionIndex:
    best = np.flatnonzero(row == row.max())
    if best.size == 1:
        return ActionIndex(int(best[0]))
    return ActionIndex(int(best[rng.integers(best.size)]))


def choose_action(
    table: QTable,
    s: int,
    epsilon: float,
    rng: np.random.Generator,
    guide_action: int | None = None,
    guide_rate: float = 0.0,
) -> ActionIndex:
    """Epsilon-greedy action at a non-terminal state.

    With probability epsilon the move is exploratory: it follows guide_action with
    probability guide_rate, otherwise it is uniform over the grid. Greedy moves
    break ties uniformly at random among the maximizers.

    Raises:
        DomainError: If s is terminal or epsilon is outside [0, 1].
    """
    if not 0 <= s < table.n:
        raise DomainError(f"No action at state {s} (non-terminal states are 0..{table.n - 1})")
    if not 0 <= epsilon <= 1:
        raise DomainError(f"Exploration rate {epsilon} outside [0, 1]")

    if rng.random() < epsilon:
        if guide_action is not None and guide_rate > 0 and rng.random() < guide_rate:
            return ActionIndex(guide_action)
        return ActionIndex(int(rng.integers(table.spec.n_actions)))
    return _greedy_action(table.q[s], rng)


def _draw_start(
    spec: ProblemSpec, distribution: StartDistribution, bit_level: bool, rng: np.random.Generator
) -> Bitstring | int:
    if distribution == "uniform-state":
        s = int(rng.integers(0, spec.n))
        return Bitstring.from_state(spec.n, s) if bit_level else s
    if bit_level:
        return Bitstring.random(spec.n, rng)
    return int(rng.binomial(spec.n, 0.5))


def train(
    spec: ProblemSpec,
    config: LearningConfig,
    sampler: Sampler = "model",
    model: TransitionModel | None = None,
) -> tuple[QTable, TrainingReport]:
    """Run Q-Learning for config.episodes episodes.

    Each episode draws a start, then repeats choose_action, a sampled transition and
    q_update with r = -1 until the optimum or the step cap. A single generator
    seeded from config.seed drives the whole run, so equal configs give equal tables.

    Args:
        spec: Problem size and action grid.
        config: Budget, schedules, start distribution and seed.
        sampler: "model" draws s' from the exact model, "bit" runs the bit-level EA.
        model: Prebuilt model for the model sampler; built from spec when omitted.

    Returns:
        Tuple of (Q-table, training report).
    """
    if sampler not in ("model", "bit"):
        raise DomainError(f"Unknown sampler {sampler!r}")
    bit_level = sampler == "bit"
    if not bit_level:
        if model is None:
            model = build_transition_model(spec)
        elif model.spec != spec:
            raise DomainError("Transition model was built for a different problem spec")

    n = spec.n
    table = QTable.zeros(spec)
    assert table.visits is not None
    rng = config.seed.generator()

    guides: list[int | None] = [None] * n
    if config.guide_policy is not None:
        guides = [int(action_for_state(config.guide_policy, s, spec)) for s in range(n)]

    total_steps = 0
    truncated = 0
    for episode in range(config.episodes):
        epsilon = config.epsilon.value(episode, config.episodes)
        start = _draw_start(spec, config.start_distribution, bit_level, rng)
        x: Bitstring | None = None
        if isinstance(start, Bitstring):
            x, s = start, start.ones
        else:
            s = start

        steps = 0
        while s < n and steps < config.step_cap:
            a = choose_action(table, s, epsilon, rng, guides[s], config.guide_rate)
            if x is not None:
                x = step(x, spec.actions[a], rng)
                s_next = x.ones
            else:
                assert model is not None
                s_next = sample_transition_index(s, a, model, rng)

            alpha = config.alpha.value(int(table.visits[s, a]))
            q_update(table, s, a, STEP_REWARD, s_next, alpha)
            table.visits[s, a] += 1
            s = s_next
            steps += 1

        total_steps += steps
        if s < n:
            truncated += 1

    report = TrainingReport(
        episodes_run=config.episodes,
        total_steps=total_steps,
        visit_counts=table.visits.copy(),
        truncated_episodes=truncated,
    )
    return table, report


def greedy_from_q(table: QTable) -> TablePolicy:
    """Greedy policy of a Q-table; ties go to the smaller theta.

    Raises:
        IncompleteTableError: If some non-terminal state was never visited.
    """
    missing = table.unvisited_states()
    if missing:
        raise IncompleteTableError(missing)

    best = np.argmax(table.q[: table.n], axis=1)
    return TablePolicy(tuple(table.spec.actions[int(a)] for a in best))
