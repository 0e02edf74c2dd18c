"""Helpers shared by the command modules."""

import sys
from pathlib import Path
from typing import Any, Literal, NoReturn

from rich.console import Console

from evoctrl.config import RunConfig, resolve_config
from evoctrl.domain.errors import EvoCtrlError
from evoctrl.domain.policies import ConstantPolicy, PolicySpec, ReciprocalPolicy, constant_one_over_n
from evoctrl.domain.probability import ProblemSpec, TransitionModel, build_transition_model, default_action_grid
from evoctrl.domain.qlearning import (
    AlphaSchedule,
    ConstantAlpha,
    ConstantEpsilon,
    EpsilonSchedule,
    LearningConfig,
    LinearEpsilon,
    PolynomialAlpha,
)
from evoctrl.domain.simulator import RngSeed
from evoctrl.domain.solver import backward_induction, greedy_policy
from evoctrl.store.files import load_policy

console = Console()


def fail(message: str, code: int = 1) -> NoReturn:
    """Print an error and exit."""
    console.print(f"[red]{message}[/red]", style="bold")
    sys.exit(code)


def load_run_config(config_file: str | None, **overrides: Any) -> RunConfig:
    """Resolve the effective configuration, exiting with code 1 on invalid input."""
    path = Path(config_file).expanduser() if config_file else None
    try:
        return resolve_config(path, overrides)
    except (EvoCtrlError, ValueError) as e:
        fail(f"Configuration error: {e}")
    except OSError as e:
        fail(f"Could not read config: {e}")


def problem_spec(config: RunConfig) -> ProblemSpec:
    return ProblemSpec(config.n, default_action_grid(config.grid_min, config.grid_max, config.grid_step))


def output_path(config: RunConfig, name: str) -> Path:
    return Path(config.output_dir).expanduser() / name


def parse_start(raw: str) -> int | Literal["random"]:
    """'random' or a state number."""
    if raw == "random":
        return "random"
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Start must be 'random' or a state, got '{raw}'") from None


class PolicyResolver:
    """Turns policy names into policies; the exact solution is built once, on demand."""

    def __init__(self, spec: ProblemSpec, model: TransitionModel | None = None) -> None:
        self.spec = spec
        self._model = model
        self._optimal: PolicySpec | None = None

    @property
    def model(self) -> TransitionModel:
        if self._model is None:
            self._model = build_transition_model(self.spec)
        return self._model

    def resolve(self, name: str) -> PolicySpec:
        """Built-in name (constant, reciprocal, optimal) or a policy file path."""
        match name:
            case "constant":
                return constant_one_over_n(self.spec.n)
            case "reciprocal":
                return ReciprocalPolicy()
            case "optimal":
                if self._optimal is None:
                    self._optimal = greedy_policy(self.model, backward_induction(self.model))
                return self._optimal
        return load_policy(Path(name).expanduser(), self.spec.n)

    def resolve_all(self, names: str) -> dict[str, PolicySpec]:
        labels = [label.strip() for label in names.split(",") if label.strip()]
        if not labels:
            raise ValueError("No policies given")
        return {label: self.resolve(label) for label in labels}


def learning_config(config: RunConfig, guide: PolicySpec | None) -> LearningConfig:
    alpha: AlphaSchedule = (
        PolynomialAlpha(config.alpha, config.omega)
        if config.alpha_schedule == "polynomial"
        else ConstantAlpha(config.alpha)
    )
    epsilon: EpsilonSchedule = (
        LinearEpsilon(config.epsilon, config.epsilon_min)
        if config.epsilon_schedule == "linear"
        else ConstantEpsilon(config.epsilon)
    )
    return LearningConfig(
        episodes=config.episodes,
        alpha=alpha,
        epsilon=epsilon,
        start_distribution="uniform-bitstring" if config.start_distribution == "uniform-bitstring" else "uniform-state",
        seed=RngSeed(config.seed),
        step_cap=config.step_cap,
        guide_policy=guide,
        guide_rate=config.guide_rate,
    )


def describe_policy(policy: PolicySpec) -> str:
    match policy:
        case ConstantPolicy(theta=theta):
            return f"constant θ={theta:g}"
        case ReciprocalPolicy():
            return "θ = 1/(1+s)"
    return "table"
