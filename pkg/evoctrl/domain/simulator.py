"""Bit-level (1+1) EA on OneMax with policy-controlled mutation probability.

Every mutation consumes exactly n uniform draws from the stream (bit i flips
when its draw is below theta), whatever the outcome. Random streams are numpy
PCG64 generators keyed by (master_seed, stream_id), so a trace is fully
determined by its seed, problem size, policy and start state.

A state-level sampler over the exact transition model is provided for fast
learning at the same transition law.
"""

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray

from evoctrl.domain.errors import DomainError
from evoctrl.domain.models import State, Steps, Theta
from evoctrl.domain.policies import PolicySpec, theta_for_state
from evoctrl.domain.probability import ProblemSpec, TransitionModel

DEFAULT_STEP_CAP = 1_000_000

# Uniforms drawn per block in run_episode, and rows scanned per window
_BLOCK_VALUES = 1 << 15
_WINDOW_ROWS = 32


@dataclass(frozen=True)
class RngSeed:
    """Identifies one reproducible random stream."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0 or self.stream_id < 0:
            raise DomainError("Seeds and stream ids must be non-negative")
        if self.master_seed >= 2**64 or self.stream_id >= 2**64:
            raise DomainError("Seeds and stream ids must fit in 64 bits")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))

    def stream(self, stream_id: int) -> "RngSeed":
        return RngSeed(self.master_seed, stream_id)


@dataclass(frozen=True, eq=False)
class Bitstring:
    """Immutable solution x in {0,1}^n with its cached OneMax value."""

    bits: NDArray[np.bool_]
    ones: int

    def __post_init__(self) -> None:
        if self.bits.ndim != 1 or self.bits.size < 1:
            raise DomainError("Bitstring must be a non-empty 1-D array")
        if int(np.count_nonzero(self.bits)) != self.ones:
            raise DomainError(f"Cached ones={self.ones} does not match the bits")
        self.bits.flags.writeable = False

    @classmethod
    def from_bits(cls, bits: NDArray[np.bool_] | list[int]) -> "Bitstring":
        array = np.array(bits, dtype=bool)
        return cls(array, int(np.count_nonzero(array)))

    @classmethod
    def from_state(cls, n: int, s: int) -> "Bitstring":
        """Canonical string with s leading ones."""
        if not 0 <= s <= n:
            raise DomainError(f"State {s} outside [0, {n}]")
        bits = np.zeros(n, dtype=bool)
        bits[:s] = True
        return cls(bits, s)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Bitstring":
        """Uniform random string; its state is Bin(n, 1/2)."""
        return cls.from_bits(rng.integers(0, 2, size=n).astype(bool))

    @property
    def n(self) -> int:
        return self.bits.size

    @property
    def state(self) -> State:
        return State(self.ones)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bitstring):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())


class Transition(NamedTuple):
    s: State
    theta: Theta
    s_next: State


@dataclass(frozen=True)
class EpisodeTrace:
    """One run of the EA until the optimum or the step cap."""

    start_state: State
    transitions: tuple[Transition, ...]
    truncated: bool

    @property
    def steps(self) -> Steps:
        return Steps(len(self.transitions))

    @property
    def final_state(self) -> State:
        if not self.transitions:
            return self.start_state
        return self.transitions[-1].s_next


Start = Bitstring | int | Literal["random"]


def mutate(x: Bitstring, theta: float, rng: np.random.Generator) -> Bitstring:
    """Flip each bit independently with probability theta (n draws)."""
    if not 0 <= theta <= 1:
        raise DomainError(f"Theta {theta} outside [0, 1]")
    mask = rng.random(x.n) < theta
    return Bitstring.from_bits(x.bits ^ mask)


def step(x: Bitstring, theta: float, rng: np.random.Generator) -> Bitstring:
    """One (1+1) EA iteration: keep the offspring only if it has strictly more ones."""
    offspring = mutate(x, theta, rng)
    if offspring.ones > x.ones:
        return offspring
    return x


def resolve_start(spec: ProblemSpec, start: Start, rng: np.random.Generator) -> Bitstring:
    """Materialise an episode start; 'random' draws n uniform bits from rng."""
    if isinstance(start, Bitstring):
        if start.n != spec.n:
            raise DomainError(f"Start has length {start.n}, problem has n={spec.n}")
        return start
    if start == "random":
        return Bitstring.random(spec.n, rng)
    return Bitstring.from_state(spec.n, int(start))


def _simulate(
    spec: ProblemSpec,
    policy: PolicySpec,
    x: Bitstring,
    rng: np.random.Generator,
    step_cap: int,
    record: list[Transition] | None,
) -> tuple[int, int]:
    """Run the EA from x; returns (steps, final ones).

    Uniforms are drawn in blocks of whole steps and scanned window by window, so
    stream consumption is identical to calling step() once per iteration.
    """
    n = spec.n
    bits = x.bits.copy()
    ones = x.ones
    steps = 0
    rows_per_block = max(1, _BLOCK_VALUES // n)

    while ones < n and steps < step_cap:
        block = rng.random((min(rows_per_block, step_cap - steps), n))
        pos = 0
        while pos < block.shape[0] and ones < n:
            theta = theta_for_state(policy, ones, spec)
            sign = np.where(bits, -1, 1)
            window = block[pos : pos + _WINDOW_ROWS] < theta
            gains = window @ sign
            hits = np.flatnonzero(gains > 0)

            rejected = window.shape[0] if hits.size == 0 else int(hits[0])
            if record is not None and rejected:
                record.extend([Transition(State(ones), theta, State(ones))] * rejected)
            steps += rejected
            pos += rejected

            if hits.size:
                accepted = int(hits[0])
                new_ones = ones + int(gains[accepted])
                if record is not None:
                    record.append(Transition(State(ones), theta, State(new_ones)))
                bits ^= window[accepted]
                ones = new_ones
                steps += 1
                pos += 1

    return steps, ones


def run_episode(
    spec: ProblemSpec,
    policy: PolicySpec,
    start: Start,
    rng: np.random.Generator,
    step_cap: int = DEFAULT_STEP_CAP,
) -> EpisodeTrace:
    """Run the EA under a policy until OM(x) = n or step_cap iterations.

    Args:
        spec: Problem spec.
        policy: Mutation-rate policy; its exact (unsnapped) theta is used.
        start: A Bitstring, a state (canonical string with leading ones) or "random".
        rng: Random stream; a random start consumes it before the first mutation.
        step_cap: Maximum number of iterations (> 0).

    Returns:
        EpisodeTrace; truncated is set when the cap was hit before the optimum.
    """
    if step_cap <= 0:
        raise DomainError(f"step_cap must be positive, got {step_cap}")

    x = resolve_start(spec, start, rng)
    transitions: list[Transition] = []
    _, ones = _simulate(spec, policy, x, rng, step_cap, transitions)
    return EpisodeTrace(State(x.ones), tuple(transitions), truncated=ones < spec.n)


def episode_length(
    spec: ProblemSpec,
    policy: PolicySpec,
    start: Start,
    rng: np.random.Generator,
    step_cap: int = DEFAULT_STEP_CAP,
) -> tuple[State, Steps, bool]:
    """Same run as run_episode without recording transitions.

    Returns:
        Tuple of (start_state, steps, truncated).
    """
    if step_cap <= 0:
        raise DomainError(f"step_cap must be positive, got {step_cap}")

    x = resolve_start(spec, start, rng)
    steps, ones = _simulate(spec, policy, x, rng, step_cap, None)
    return State(x.ones), Steps(steps), ones < spec.n


def sample_transition(s: int, theta: float, model: TransitionModel, rng: np.random.Generator) -> State:
    """Draw s' from the model row (s, theta) by inverse CDF (one uniform draw)."""
    action = model.spec.index_of(theta)
    return sample_transition_index(s, action, model, rng)


def sample_transition_index(s: int, action: int, model: TransitionModel, rng: np.random.Generator) -> State:
    """sample_transition for a known grid index."""
    if not 0 <= s <= model.n:
        raise DomainError(f"State {s} outside [0, {model.n}]")
    cdf = model.cumulative[s][action]
    offset = int(np.searchsorted(cdf, rng.random(), side="right"))
    return State(s + min(offset, cdf.size - 1))
