"""Exact solvers for the mutation-rate control MDP.

The control problem is an undiscounted Stochastic Shortest Path problem: every
non-terminal step earns -1, state n is absorbing with value 0, and V(s) is minus
the expected time-to-termination. Elitism makes the transition model
upper-triangular, so besides Value Iteration the optimal values can be computed
exactly in a single backward pass.

Actions whose improvement probability is zero at a state (theta = 1 once
n - s <= s) never reach the goal and are excluded from every maximum.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from evoctrl.domain.errors import DomainError, ImproperPolicyError
from evoctrl.domain.models import State, Theta
from evoctrl.domain.policies import PolicySpec, TablePolicy, snap_to_grid, theta_for_state
from evoctrl.domain.probability import TransitionModel, transition_row

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITERATIONS = 100_000
STEP_REWARD = -1.0


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Expected total reward per state s = 0..n (minus expected steps to the optimum)."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size < 2:
            raise DomainError(f"Value function needs one entry per state, got shape {self.values.shape}")
        self.values.flags.writeable = False

    @property
    def n(self) -> int:
        return self.values.size - 1

    def __getitem__(self, s: int) -> float:
        return float(self.values[s])

    def expected_steps(self, s: int) -> float:
        return -float(self.values[s])


@dataclass(frozen=True)
class SolveReport:
    """Outcome of an iterative solve."""

    iterations: int
    final_residual: float
    converged: bool
    tolerance: float
    residuals: tuple[float, ...] = ()


def _require_admissible(model: TransitionModel) -> NDArray[np.bool_]:
    admissible: NDArray[np.bool_] = model.improvement > 0
    for s in range(model.n):
        if not admissible[s].any():
            raise ImproperPolicyError(s)
    return admissible


def value_iteration(
    model: TransitionModel,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> tuple[ValueFunction, SolveReport]:
    """Synchronous Value Iteration from V = 0.

    Each sweep applies V(s) <- max_theta [-1 + sum_s' P(s'|s,theta) V(s')] to every
    state at once and pins V(n) = 0. The run stops once the sup-norm residual is at
    most `tolerance` and the geometric tail of the remaining residuals, estimated
    from the last contraction ratio, is also below `tolerance`.

    Args:
        model: Transition model.
        tolerance: Sup-norm stopping tolerance (> 0).
        max_iterations: Sweep budget.

    Returns:
        Tuple of (values, report). Values are returned even without convergence.

    Raises:
        DomainError: If tolerance or max_iterations are invalid.
        ImproperPolicyError: If some state has no admissible action.
    """
    if tolerance <= 0:
        raise DomainError(f"Tolerance must be positive, got {tolerance}")
    if max_iterations < 1:
        raise DomainError(f"max_iterations must be >= 1, got {max_iterations}")

    n = model.n
    inadmissible = ~_require_admissible(model).T  # (n_actions, n + 1)
    inadmissible[:, n] = False
    tensor = model.dense

    values = np.zeros(n + 1)
    residuals: list[float] = []
    converged = False

    for _ in range(max_iterations):
        backups = STEP_REWARD + tensor @ values
        backups[inadmissible] = -np.inf
        updated = backups.max(axis=0)
        updated[n] = 0.0

        residual = float(np.max(np.abs(updated - values)))
        values = updated
        residuals.append(residual)

        if residual <= tolerance and _tail_small(residuals, tolerance):
            converged = True
            break

    report = SolveReport(
        iterations=len(residuals),
        final_residual=residuals[-1],
        converged=converged,
        tolerance=tolerance,
        residuals=tuple(residuals),
    )
    return ValueFunction(values), report


def _tail_small(residuals: list[float], tolerance: float) -> bool:
    current = residuals[-1]
    if current <= tolerance * 1e-3:
        return True
    if len(residuals) < 2 or residuals[-2] <= 0:
        return False

    ratio = current / residuals[-2]
    if ratio >= 1:
        return False
    return current * ratio / (1 - ratio) <= tolerance


def backward_induction(model: TransitionModel) -> ValueFunction:
    """Exact optimal values in one backward pass over the states.

    V*(n) = 0 and, for s < n,
    V*(s) = max_theta (-1 + sum_{s'>s} P(s'|s,theta) V*(s')) / (1 - P(s|s,theta))
    over the admissible thetas at s.

    Raises:
        ImproperPolicyError: If some state has no admissible action.
    """
    n = model.n
    admissible = _require_admissible(model)
    values = np.zeros(n + 1)

    for s in range(n - 1, -1, -1):
        block = model.blocks[s]
        improvement = model.improvement[s]
        allowed = admissible[s]
        numerators = STEP_REWARD + block[allowed, 1:] @ values[s + 1 :]
        values[s] = float(np.max(numerators / improvement[allowed]))

    return ValueFunction(values)


def greedy_q_values(model: TransitionModel, values: ValueFunction) -> NDArray[np.float64]:
    """One-step lookahead r(s,theta) + sum_s' P(s'|s,theta) V(s') for s < n.

    Returns:
        Array of shape (n, n_actions); inadmissible actions hold -inf.
    """
    n = model.n
    if values.n != n:
        raise DomainError(f"Value function covers n={values.n}, model has n={n}")

    q = np.full((n, model.spec.n_actions), -np.inf)
    for s in range(n):
        allowed = model.admissible(s)
        q[s, allowed] = STEP_REWARD + model.blocks[s][allowed] @ values.values[s:]
    return q


def greedy_policy(model: TransitionModel, values: ValueFunction) -> TablePolicy:
    """Greedy table policy; ties go to the smaller theta (first grid index)."""
    q = greedy_q_values(model, values)
    best = np.argmax(q, axis=1)
    return TablePolicy(tuple(model.spec.actions[int(a)] for a in best))


def _policy_row(model: TransitionModel, policy: PolicySpec, s: int, snap: bool) -> tuple[Theta, NDArray[np.float64]]:
    spec = model.spec
    theta = theta_for_state(policy, State(s), spec)
    nearest = snap_to_grid(theta, spec.actions)

    if snap or abs(spec.actions[nearest] - theta) <= 1e-12:
        return Theta(spec.actions[nearest]), model.blocks[s][nearest]
    return theta, transition_row(s, theta, model.n).probs


def policy_evaluation(model: TransitionModel, policy: PolicySpec, snap: bool = True) -> ValueFunction:
    """Exact value of a fixed policy by backward recursion.

    By default every theta is snapped to the nearest grid action and the model's
    rows are used, so the result is the value of a policy of the discretized MDP
    and never exceeds V*. With snap=False off-grid thetas (e.g. 1/(1+s)) are
    evaluated at their real value, the quantity a bit-level simulation of the
    same policy estimates; that value is not bounded by the grid's V*.

    Raises:
        ImproperPolicyError: If the policy's theta never improves some state.
    """
    n = model.n
    values = np.zeros(n + 1)

    for s in range(n - 1, -1, -1):
        theta, row = _policy_row(model, policy, s, snap)
        improvement = float(row[1:].sum())
        if improvement <= 0:
            raise ImproperPolicyError(s, f"theta={theta} has zero improvement probability")
        values[s] = (STEP_REWARD + float(row[1:] @ values[s + 1 :])) / improvement

    return ValueFunction(values)
