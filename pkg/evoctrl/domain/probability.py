"""Exact transition probabilities of the (1+1) EA on OneMax.

This module contains the functional core of the probability model:
- Binomial pmfs for the ones gained (W) and the ones lost (L) in one mutation
- The net-gain distribution Z' = W - L and its elitist truncation
- The full transition model P(s' | s, theta) over the action grid
- An exhaustive 2^n mask enumeration used as an independent oracle

States count the one-bits of the current solution; state n is absorbing.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.stats import binom

from evoctrl.domain.errors import DomainError, EnumerationBudgetError
from evoctrl.domain.models import ActionIndex, State, Theta

ENUMERATION_LIMIT = 16
NORMALIZATION_TOLERANCE = 1e-12


def default_action_grid(grid_min: float = 0.01, grid_max: float = 1.0, grid_step: float = 0.01) -> tuple[float, ...]:
    """Build an evenly spaced grid of mutation probabilities.

    Args:
        grid_min: Smallest probability (must be > 0).
        grid_max: Largest probability (must be <= 1).
        grid_step: Spacing between consecutive probabilities.

    Returns:
        Tuple of probabilities from grid_min to grid_max inclusive, rounded to 12 decimals
        so that e.g. the 0.01 grid contains exactly the float literals 0.01 ... 1.0.

    Raises:
        DomainError: If the bounds or the step are invalid.
    """
    if grid_step <= 0:
        raise DomainError(f"Grid step must be positive, got {grid_step}")
    if not 0 < grid_min <= grid_max <= 1:
        raise DomainError(f"Grid bounds must satisfy 0 < min <= max <= 1, got [{grid_min}, {grid_max}]")

    span = (grid_max - grid_min) / grid_step
    count = round(span) + 1
    if abs(span - (count - 1)) > 1e-9:
        raise DomainError(f"Grid step {grid_step} does not divide [{grid_min}, {grid_max}]")

    return tuple(round(grid_min + i * grid_step, 12) for i in range(count))


@dataclass(frozen=True)
class ProblemSpec:
    """Problem size and the discrete action grid of mutation probabilities."""

    n: int
    actions: tuple[float, ...] = field(default_factory=default_action_grid)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"Problem size n must be >= 1, got {self.n}")

        actions = tuple(float(theta) for theta in self.actions)
        if not actions:
            raise DomainError("Action grid is empty")
        for theta in actions:
            if not 0 < theta <= 1:
                raise DomainError(f"Action {theta} outside (0, 1]")
        for lower, upper in zip(actions, actions[1:], strict=False):
            if upper <= lower:
                raise DomainError(f"Actions must be strictly increasing ({lower} then {upper})")

        object.__setattr__(self, "actions", actions)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def terminal(self) -> State:
        return State(self.n)

    def index_of(self, theta: float) -> ActionIndex:
        """Look up the grid index of an on-grid probability.

        Raises:
            DomainError: If theta is not a grid point.
        """
        idx = int(np.searchsorted(self.actions, theta))
        for candidate in (idx - 1, idx):
            if 0 <= candidate < self.n_actions and abs(self.actions[candidate] - theta) <= 1e-12:
                return ActionIndex(candidate)
        raise DomainError(f"Theta {theta} is not on the action grid")


@dataclass(frozen=True, eq=False)
class NetGainDistribution:
    """Distribution of Z' = W - L for one mutation from state s.

    probs[i] is P(Z' = support_min + i), for z = -s ... n - s.
    """

    s: State
    theta: Theta
    n: int
    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.probs.shape != (self.n + 1,):
            raise DomainError(f"Net-gain pmf must have {self.n + 1} entries, got {self.probs.shape}")
        self.probs.flags.writeable = False

    @property
    def support_min(self) -> int:
        return -self.s

    @property
    def support_max(self) -> int:
        return self.n - self.s

    def prob(self, z: int) -> float:
        if not self.support_min <= z <= self.support_max:
            return 0.0
        return float(self.probs[z - self.support_min])


@dataclass(frozen=True, eq=False)
class TransitionRow:
    """Successor distribution for (s, theta); probs[i] is P(s' = s + i)."""

    s: State
    theta: Theta
    n: int
    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.probs.shape != (self.n - self.s + 1,):
            raise DomainError(f"Transition row from s={self.s} must have {self.n - self.s + 1} entries")
        self.probs.flags.writeable = False

    @property
    def stay(self) -> float:
        return float(self.probs[0])

    @property
    def improvement(self) -> float:
        """Probability of a strictly better successor."""
        return float(self.probs[1:].sum())

    @property
    def support(self) -> NDArray[np.int64]:
        return np.arange(self.s, self.n + 1)

    def prob(self, s_prime: int) -> float:
        if not self.s <= s_prime <= self.n:
            return 0.0
        return float(self.probs[s_prime - self.s])


def _check_theta(theta: float, allow_zero: bool) -> None:
    low_ok = theta >= 0 if allow_zero else theta > 0
    if not (low_ok and theta <= 1):
        bounds = "[0, 1]" if allow_zero else "(0, 1]"
        raise DomainError(f"Theta {theta} outside {bounds}")


def _check_state(s: int, n: int) -> None:
    if n < 1:
        raise DomainError(f"Problem size n must be >= 1, got {n}")
    if not 0 <= s <= n:
        raise DomainError(f"State {s} outside [0, {n}]")


def binomial_pmf_vector(m: int, theta: float) -> NDArray[np.float64]:
    """Return P(X = k) for k = 0..m with X ~ Bin(m, theta).

    The endpoints theta = 0 and theta = 1 are point masses built directly;
    interior values come from scipy's stable binomial pmf.
    """
    if m < 0:
        raise DomainError(f"Trial count must be >= 0, got {m}")
    _check_theta(theta, allow_zero=True)

    if theta == 0.0:
        pmf = np.zeros(m + 1)
        pmf[0] = 1.0
        return pmf
    if theta == 1.0:
        pmf = np.zeros(m + 1)
        pmf[m] = 1.0
        return pmf

    return np.asarray(binom.pmf(np.arange(m + 1), m, theta), dtype=np.float64)


def binomial_pmf(k: int, m: int, theta: float) -> float:
    """Binomial probability C(m, k) theta^k (1 - theta)^(m - k).

    Args:
        k: Number of successes.
        m: Number of trials.
        theta: Success probability in [0, 1].

    Returns:
        The probability, exact at theta in {0, 1}.

    Raises:
        DomainError: If k is outside [0, m] or theta outside [0, 1].
    """
    if m < 0 or not 0 <= k <= m:
        raise DomainError(f"k={k} outside [0, {m}]")
    return float(binomial_pmf_vector(m, theta)[k])


def _convolve_gain(p_w: NDArray[np.float64], p_l: NDArray[np.float64]) -> NDArray[np.float64]:
    # P(Z' = z) = sum_k p_W(k) p_L(k - z); index i <-> z = i - len(p_l) + 1
    return np.convolve(p_w, p_l[::-1])


def net_gain_pmf(s: int, theta: float, n: int) -> NetGainDistribution:
    """Distribution of the net gain in ones after mutating a string with s ones.

    Args:
        s: Current number of ones.
        theta: Per-bit flip probability in (0, 1].
        n: String length.

    Returns:
        NetGainDistribution over z = -s ... n - s.

    Raises:
        DomainError: If s or theta are out of range.
    """
    _check_state(s, n)
    _check_theta(theta, allow_zero=False)

    p_w = binomial_pmf_vector(n - s, theta)
    p_l = binomial_pmf_vector(s, theta)
    return NetGainDistribution(State(s), Theta(theta), n, _convolve_gain(p_w, p_l))


def elitist_truncate(d: NetGainDistribution) -> TransitionRow:
    """Collapse the non-improving mass of Z' onto the self-loop s' = s.

    Args:
        d: Net-gain distribution from state d.s.

    Returns:
        TransitionRow over s' = s ... n.
    """
    split = d.s + 1  # entries 0..s hold z <= 0
    stay = d.probs[:split].sum()
    probs = np.concatenate(([stay], d.probs[split:]))
    return TransitionRow(d.s, d.theta, d.n, probs)


def transition_row(s: int, theta: float, n: int) -> TransitionRow:
    """Exact transition row for any real theta in (0, 1]."""
    return elitist_truncate(net_gain_pmf(s, theta, n))


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Exact transition probabilities for every state and grid action.

    blocks[s] has shape (n_actions, n - s + 1); row a is P(s' = s + i | s, actions[a]).
    Only s' >= s is stored. blocks[n] is the absorbing row.
    """

    spec: ProblemSpec
    blocks: tuple[NDArray[np.float64], ...]

    def __post_init__(self) -> None:
        n = self.spec.n
        if len(self.blocks) != n + 1:
            raise DomainError(f"Expected {n + 1} state blocks, got {len(self.blocks)}")
        for s, block in enumerate(self.blocks):
            if block.shape != (self.spec.n_actions, n - s + 1):
                raise DomainError(f"Block for state {s} has shape {block.shape}")
            block.flags.writeable = False

    @property
    def n(self) -> int:
        return self.spec.n

    def block(self, s: int) -> NDArray[np.float64]:
        _check_state(s, self.n)
        return self.blocks[s]

    def row(self, s: int, action: int) -> TransitionRow:
        block = self.block(s)
        return TransitionRow(State(s), Theta(self.spec.actions[action]), self.n, block[action].copy())

    @cached_property
    def improvement(self) -> NDArray[np.float64]:
        """P(s' > s | s, theta) with shape (n + 1, n_actions)."""
        out = np.zeros((self.n + 1, self.spec.n_actions))
        for s, block in enumerate(self.blocks):
            out[s] = block[:, 1:].sum(axis=1)
        out.flags.writeable = False
        return out

    def admissible(self, s: int) -> NDArray[np.bool_]:
        """Mask of actions with positive improvement probability at s."""
        _check_state(s, self.n)
        mask: NDArray[np.bool_] = self.improvement[s] > 0
        return mask

    @cached_property
    def dense(self) -> NDArray[np.float64]:
        """Full upper-triangular tensor P[a, s, s'] of shape (n_actions, n + 1, n + 1)."""
        n = self.n
        tensor = np.zeros((self.spec.n_actions, n + 1, n + 1))
        for s, block in enumerate(self.blocks):
            tensor[:, s, s:] = block
        tensor.flags.writeable = False
        return tensor

    @cached_property
    def cumulative(self) -> tuple[NDArray[np.float64], ...]:
        """Row-wise cumulative sums of every block, for inverse-CDF sampling."""
        sums = []
        for block in self.blocks:
            cdf = np.cumsum(block, axis=1)
            cdf.flags.writeable = False
            sums.append(cdf)
        return tuple(sums)


def build_transition_model(spec: ProblemSpec) -> TransitionModel:
    """Compute every transition row for the problem's states and action grid.

    Binomial pmfs are computed once per (trial count, theta) and shared between
    the W and L factors of all states.

    Args:
        spec: Problem size and action grid.

    Returns:
        TransitionModel with an absorbing row at s = n.
    """
    n = spec.n
    blocks = [np.empty((spec.n_actions, n - s + 1)) for s in range(n + 1)]

    for a, theta in enumerate(spec.actions):
        pmfs = [binomial_pmf_vector(m, theta) for m in range(n + 1)]
        for s in range(n):
            gain = _convolve_gain(pmfs[n - s], pmfs[s])
            blocks[s][a, 0] = gain[: s + 1].sum()
            blocks[s][a, 1:] = gain[s + 1 :]
        blocks[n][a, 0] = 1.0

    return TransitionModel(spec, tuple(blocks))


def enumerate_transition_oracle(s: int, theta: float, n: int) -> TransitionRow:
    """Transition row by brute force over all 2^n mutation masks.

    The canonical parent has its s ones in the low bits. Each mask is weighted by
    theta^f (1 - theta)^(n - f) with f flipped bits, and the offspring is kept only
    if it has strictly more ones than the parent.

    Args:
        s: Number of ones of the parent.
        theta: Flip probability in [0, 1].
        n: String length, at most 16.

    Returns:
        TransitionRow aggregated from the enumeration.

    Raises:
        EnumerationBudgetError: If n > 16.
        DomainError: If s or theta are out of range.
    """
    if n > ENUMERATION_LIMIT:
        raise EnumerationBudgetError(n, ENUMERATION_LIMIT)
    _check_state(s, n)
    _check_theta(theta, allow_zero=True)

    parent = (1 << s) - 1
    terms: list[list[float]] = [[] for _ in range(n + 1)]

    for mask in range(1 << n):
        flipped = mask.bit_count()
        weight = theta**flipped * (1.0 - theta) ** (n - flipped)
        ones = (parent ^ mask).bit_count()
        terms[ones if ones > s else s].append(weight)

    probs = np.array([math.fsum(bucket) for bucket in terms[s:]])
    return TransitionRow(State(s), Theta(theta), n, probs)
