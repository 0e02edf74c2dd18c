"""CLI entry point for evoctrl."""

import typer

from evoctrl.commands.admin import init_command
from evoctrl.commands.evaluate import evaluate_command
from evoctrl.commands.export import export_command
from evoctrl.commands.learn import learn_command
from evoctrl.commands.shared import load_run_config
from evoctrl.commands.simulate import simulate_command
from evoctrl.commands.solve import solve_command

app = typer.Typer(
    name="evoctrl",
    help="Optimal mutation-rate control for the (1+1) EA on OneMax",
    add_completion=False,
)

CONFIG_HELP = "Config file (default: $XDG_CONFIG_HOME/evoctrl/config.toml if present)"


@app.callback()
def main() -> None:
    """Optimal mutation-rate control for the (1+1) EA on OneMax."""
    pass


@app.command(name="init")
def init(
    force: bool = typer.Option(False, "--force", "-f", help="Overwrite an existing config file"),
    path: str | None = typer.Option(None, "--path", help="Where to write the config (default: XDG config path)"),
) -> None:
    """Write a config file holding every default."""
    init_command(force, path)


@app.command()
def solve(
    config: str | None = typer.Option(None, "--config", help=CONFIG_HELP),
    n: int | None = typer.Option(None, "--n", help="Problem size (default: 50)"),
    grid_min: float | None = typer.Option(None, "--grid-min", help="Smallest mutation probability (default: 0.01)"),
    grid_max: float | None = typer.Option(None, "--grid-max", help="Largest mutation probability (default: 1.0)"),
    grid_step: float | None = typer.Option(None, "--grid-step", help="Action grid spacing (default: 0.01)"),
    method: str | None = typer.Option(None, "--method", help="'backward' or 'vi' (default: backward)"),
    tolerance: float | None = typer.Option(None, "--tolerance", help="Value iteration tolerance (default: 1e-9)"),
    max_iterations: int | None = typer.Option(
        None, "--max-iterations", help="Value iteration sweep budget (default: 100000)"
    ),
    model_csv: str | None = typer.Option(None, "--model-csv", help="Also write the transition model to this CSV"),
    output_dir: str | None = typer.Option(None, "--output-dir", "-o", help="Output directory (default: .)"),
) -> None:
    """Solve the control MDP exactly and write value.csv and policy.csv."""
    run_config = load_run_config(
        config,
        n=n,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_step=grid_step,
        method=method,
        tolerance=tolerance,
        max_iterations=max_iterations,
        output_dir=output_dir,
    )
    solve_command(run_config, model_csv)


@app.command()
def learn(
    config: str | None = typer.Option(None, "--config", help=CONFIG_HELP),
    n: int | None = typer.Option(None, "--n", help="Problem size (default: 50)"),
    grid_min: float | None = typer.Option(None, "--grid-min", help="Smallest mutation probability (default: 0.01)"),
    grid_max: float | None = typer.Option(None, "--grid-max", help="Largest mutation probability (default: 1.0)"),
    grid_step: float | None = typer.Option(None, "--grid-step", help="Action grid spacing (default: 0.01)"),
    episodes: int | None = typer.Option(None, "--episodes", help="Training episodes (default: 200000)"),
    alpha_schedule: str | None = typer.Option(
        None, "--alpha-schedule", help="'constant' or 'polynomial' (default: polynomial)"
    ),
    alpha: float | None = typer.Option(None, "--alpha", help="Initial learning rate (default: 1.0)"),
    omega: float | None = typer.Option(None, "--omega", help="Polynomial learning-rate exponent (default: 0.7)"),
    epsilon_schedule: str | None = typer.Option(
        None, "--epsilon-schedule", help="'constant' or 'linear' (default: linear)"
    ),
    epsilon: float | None = typer.Option(None, "--epsilon", help="Initial exploration rate (default: 1.0)"),
    epsilon_min: float | None = typer.Option(None, "--epsilon-min", help="Final exploration rate (default: 0.05)"),
    start_distribution: str | None = typer.Option(
        None, "--start-distribution", help="'uniform-state' or 'uniform-bitstring' (default: uniform-state)"
    ),
    sampler: str | None = typer.Option(None, "--sampler", help="'model' or 'bit' (default: model)"),
    guide_policy: str | None = typer.Option(
        None, "--guide-policy", help="Policy followed by guided exploratory moves (default: none)"
    ),
    guide_rate: float | None = typer.Option(
        None, "--guide-rate", help="Share of exploratory moves that follow the guide (default: 0.0)"
    ),
    step_cap: int | None = typer.Option(None, "--step-cap", help="Per-episode step cap (default: 1000000)"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: $EVOCTRL_SEED or 42)"),
    compare_exact: bool = typer.Option(
        False, "--compare-exact", help="Report suboptimality against the exact solution"
    ),
    output_dir: str | None = typer.Option(None, "--output-dir", "-o", help="Output directory (default: .)"),
) -> None:
    """Learn a policy with Q-Learning and write qtable.csv and policy.csv."""
    run_config = load_run_config(
        config,
        n=n,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_step=grid_step,
        episodes=episodes,
        alpha_schedule=alpha_schedule,
        alpha=alpha,
        omega=omega,
        epsilon_schedule=epsilon_schedule,
        epsilon=epsilon,
        epsilon_min=epsilon_min,
        start_distribution=start_distribution,
        sampler=sampler,
        guide_policy=guide_policy,
        guide_rate=guide_rate,
        step_cap=step_cap,
        seed=seed,
        output_dir=output_dir,
    )
    learn_command(run_config, compare_exact)


@app.command()
def simulate(
    config: str | None = typer.Option(None, "--config", help=CONFIG_HELP),
    n: int | None = typer.Option(None, "--n", help="Problem size (default: 50)"),
    grid_min: float | None = typer.Option(None, "--grid-min", help="Smallest mutation probability (default: 0.01)"),
    grid_max: float | None = typer.Option(None, "--grid-max", help="Largest mutation probability (default: 1.0)"),
    grid_step: float | None = typer.Option(None, "--grid-step", help="Action grid spacing (default: 0.01)"),
    policy: str = typer.Option("optimal", "--policy", help="constant, reciprocal, optimal or a policy CSV"),
    start: str | None = typer.Option(None, "--start", help="Start state or 'random' (default: random)"),
    stream: int = typer.Option(0, "--stream", help="Stream id of the episode"),
    step_cap: int | None = typer.Option(None, "--step-cap", help="Step cap (default: 1000000)"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: $EVOCTRL_SEED or 42)"),
    output_dir: str | None = typer.Option(None, "--output-dir", "-o", help="Output directory (default: .)"),
) -> None:
    """Run one traced episode and write trace.csv."""
    run_config = load_run_config(
        config,
        n=n,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_step=grid_step,
        start=start,
        step_cap=step_cap,
        seed=seed,
        output_dir=output_dir,
    )
    simulate_command(run_config, policy, stream)


@app.command()
def evaluate(
    config: str | None = typer.Option(None, "--config", help=CONFIG_HELP),
    n: int | None = typer.Option(None, "--n", help="Problem size (default: 50)"),
    grid_min: float | None = typer.Option(None, "--grid-min", help="Smallest mutation probability (default: 0.01)"),
    grid_max: float | None = typer.Option(None, "--grid-max", help="Largest mutation probability (default: 1.0)"),
    grid_step: float | None = typer.Option(None, "--grid-step", help="Action grid spacing (default: 0.01)"),
    policies: str | None = typer.Option(
        None, "--policies", help="Comma-separated built-ins or policy CSVs (default: constant,reciprocal,optimal)"
    ),
    runs: int | None = typer.Option(None, "--runs", help="Episodes per policy (default: 2000)"),
    start: str | None = typer.Option(None, "--start", help="Start state or 'random' (default: random)"),
    workers: int | None = typer.Option(None, "--workers", help="Worker processes (default: 1)"),
    step_cap: int | None = typer.Option(None, "--step-cap", help="Per-episode step cap (default: 1000000)"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: $EVOCTRL_SEED or 42)"),
    by_start: bool = typer.Option(False, "--by-start", help="Also write benchmark_by_start.csv"),
    output_dir: str | None = typer.Option(None, "--output-dir", "-o", help="Output directory (default: .)"),
) -> None:
    """Benchmark policies by Monte Carlo and write benchmark.csv."""
    run_config = load_run_config(
        config,
        n=n,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_step=grid_step,
        policies=policies,
        runs=runs,
        start=start,
        workers=workers,
        step_cap=step_cap,
        seed=seed,
        output_dir=output_dir,
    )
    evaluate_command(run_config, by_start)


@app.command()
def export(
    config: str | None = typer.Option(None, "--config", help=CONFIG_HELP),
    n: int | None = typer.Option(None, "--n", help="Problem size (default: 50)"),
    grid_min: float | None = typer.Option(None, "--grid-min", help="Smallest mutation probability (default: 0.01)"),
    grid_max: float | None = typer.Option(None, "--grid-max", help="Largest mutation probability (default: 1.0)"),
    grid_step: float | None = typer.Option(None, "--grid-step", help="Action grid spacing (default: 0.01)"),
    policies: str | None = typer.Option(
        None, "--policies", help="Comma-separated built-ins or policy CSVs (default: constant,reciprocal,optimal)"
    ),
    prefix: str = typer.Option("figure", "--prefix", help="File name prefix inside the output directory"),
    runs: int | None = typer.Option(None, "--runs", help="Episodes per mark (default: 2000)"),
    marks: str = typer.Option("5,10,22,45", "--marks", help="Comma-separated start states of the marks"),
    workers: int | None = typer.Option(None, "--workers", help="Worker processes (default: 1)"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: $EVOCTRL_SEED or 42)"),
    output_dir: str | None = typer.Option(None, "--output-dir", "-o", help="Output directory (default: .)"),
) -> None:
    """Write value curves, policy curves and Monte Carlo marks as CSV."""
    run_config = load_run_config(
        config,
        n=n,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_step=grid_step,
        policies=policies,
        runs=runs,
        workers=workers,
        seed=seed,
        output_dir=output_dir,
    )
    export_command(run_config, prefix, marks)


if __name__ == "__main__":
    app()
