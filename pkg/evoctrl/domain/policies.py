"""Mutation-rate control policies.

Three policy families are compared:
- ConstantPolicy: a fixed theta, typically 1/n
- ReciprocalPolicy: theta = 1 / (1 + s)
- TablePolicy: one theta per non-terminal state, e.g. a greedy policy of the MDP

Policies produce real-valued thetas. Model lookups and learning need grid actions,
so theta_for_state can snap to the nearest grid point (ties toward the smaller theta).
"""

from dataclasses import dataclass

import numpy as np

from evoctrl.domain.errors import DomainError
from evoctrl.domain.models import ActionIndex, State, Theta
from evoctrl.domain.probability import ProblemSpec


@dataclass(frozen=True)
class ConstantPolicy:
    """Same theta in every state."""

    theta: float

    def __post_init__(self) -> None:
        if not 0 < self.theta <= 1:
            raise DomainError(f"Constant theta {self.theta} outside (0, 1]")


@dataclass(frozen=True)
class ReciprocalPolicy:
    """theta = 1 / (1 + s)."""


@dataclass(frozen=True)
class TablePolicy:
    """Explicit theta for every state 0 .. n - 1."""

    thetas: tuple[float, ...]

    def __post_init__(self) -> None:
        thetas = tuple(float(theta) for theta in self.thetas)
        if not thetas:
            raise DomainError("Table policy must cover at least one state")
        for s, theta in enumerate(thetas):
            if not 0 < theta <= 1:
                raise DomainError(f"Table theta {theta} at state {s} outside (0, 1]")
        object.__setattr__(self, "thetas", thetas)

    @property
    def n(self) -> int:
        return len(self.thetas)


PolicySpec = ConstantPolicy | ReciprocalPolicy | TablePolicy


def constant_one_over_n(n: int) -> ConstantPolicy:
    """The textbook static rate theta = 1/n."""
    return ConstantPolicy(1.0 / n)


def snap_to_grid(theta: float, actions: tuple[float, ...]) -> ActionIndex:
    """Index of the grid point nearest to theta; exact ties go to the smaller theta.

    Args:
        theta: Any real probability.
        actions: Strictly increasing action grid.

    Returns:
        ActionIndex of the nearest grid point.
    """
    idx = int(np.searchsorted(actions, theta))
    if idx == 0:
        return ActionIndex(0)
    if idx == len(actions):
        return ActionIndex(len(actions) - 1)

    lower, upper = actions[idx - 1], actions[idx]
    if upper - theta < theta - lower:
        return ActionIndex(idx)
    return ActionIndex(idx - 1)


def raw_theta(policy: PolicySpec, s: int) -> Theta:
    """Real-valued theta of a policy at state s (no range check on s)."""
    match policy:
        case ConstantPolicy(theta=theta):
            return Theta(theta)
        case ReciprocalPolicy():
            return Theta(1.0 / (1 + s))
        case TablePolicy(thetas=thetas):
            return Theta(thetas[s])


def theta_for_state(policy: PolicySpec, s: int, spec: ProblemSpec, snap: bool = False) -> Theta:
    """Mutation probability chosen by a policy in state s.

    Args:
        policy: Policy to query.
        s: Non-terminal state, 0 <= s < n.
        spec: Problem spec (size and action grid).
        snap: Return the nearest grid action instead of the exact theta.

    Returns:
        Theta in (0, 1].

    Raises:
        DomainError: If s is terminal or out of range, or a table does not match n.
    """
    if not 0 <= s < spec.n:
        raise DomainError(f"No action at state {s} (non-terminal states are 0..{spec.n - 1})")
    if isinstance(policy, TablePolicy) and policy.n != spec.n:
        raise DomainError(f"Table policy covers {policy.n} states, problem has {spec.n}")

    theta = raw_theta(policy, s)
    if snap:
        return Theta(spec.actions[snap_to_grid(theta, spec.actions)])
    return theta


def action_for_state(policy: PolicySpec, s: int, spec: ProblemSpec) -> ActionIndex:
    """Grid index of the policy's snapped action at s."""
    return snap_to_grid(theta_for_state(policy, s, spec), spec.actions)


def policy_thetas(policy: PolicySpec, spec: ProblemSpec, snap: bool = False) -> list[Theta]:
    """Theta for every non-terminal state, in state order."""
    return [theta_for_state(policy, State(s), spec, snap=snap) for s in range(spec.n)]


def policy_label(policy: PolicySpec) -> str:
    """Short identifier used in file headers."""
    match policy:
        case ConstantPolicy(theta=theta):
            return f"constant:{theta!r}"
        case ReciprocalPolicy():
            return "reciprocal"
        case TablePolicy():
            return "table"
