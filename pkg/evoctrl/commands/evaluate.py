"""Evaluate command: Monte Carlo time-to-termination of several policies."""

from rich.console import Console
from rich.table import Table

from evoctrl.commands.shared import PolicyResolver, fail, output_path, parse_start, problem_spec
from evoctrl.config import RunConfig
from evoctrl.domain.errors import EvoCtrlError, ImproperPolicyError
from evoctrl.domain.evaluation import BenchmarkReport, compare_policies, expected_time_from_random_start
from evoctrl.domain.policies import PolicySpec
from evoctrl.domain.probability import TransitionModel
from evoctrl.domain.simulator import RngSeed
from evoctrl.domain.solver import policy_evaluation
from evoctrl.store.files import save_benchmark

console = Console()


def exact_times(model: TransitionModel, policies: dict[str, PolicySpec], start: int | str) -> dict[str, float | None]:
    """Exact expected time per policy at its real thetas, None when improper."""
    times: dict[str, float | None] = {}
    for name, policy in policies.items():
        try:
            values = policy_evaluation(model, policy, snap=False)
        except ImproperPolicyError:
            times[name] = None
            continue
        if start == "random":
            times[name] = expected_time_from_random_start(values)
        else:
            times[name] = values.expected_steps(int(start))
    return times


def render_benchmark(report: BenchmarkReport, exact: dict[str, float | None], runs: int) -> None:
    start = "random starting state" if report.start == "random" else f"start s={report.start}"
    table = Table(title=f"Empirical time-to-termination, {runs:,} runs ({start}, n={report.n})")
    table.add_column("Policy", style="cyan")
    for entry in report.entries:
        table.add_column(entry.name, justify="right")

    table.add_row("Average", *(f"{entry.mean:,.1f}" for entry in report.entries))
    table.add_row("Standard Deviation", *(f"{entry.std:,.1f}" for entry in report.entries))
    table.add_row(
        "[dim]Exact[/dim]",
        *(
            f"[dim]{exact[entry.name]:,.1f}[/dim]" if exact.get(entry.name) is not None else "[dim]-[/dim]"
            for entry in report.entries
        ),
    )
    if any(entry.truncated for entry in report.entries):
        table.add_row("[yellow]Truncated[/yellow]", *(str(entry.truncated) for entry in report.entries))

    console.print(table)


def evaluate_command(config: RunConfig, by_start: bool = False) -> None:
    """Benchmark policies on common random numbers and write benchmark.csv."""
    try:
        spec = problem_spec(config)
        resolver = PolicyResolver(spec)
        policies = resolver.resolve_all(config.policies)
        start = parse_start(config.start)

        with console.status(f"[cyan]Running {config.runs:,} episodes per policy...[/cyan]"):
            report = compare_policies(
                spec, policies, config.runs, RngSeed(config.seed), start, config.step_cap, config.workers
            )
        exact = exact_times(resolver.model, policies, start)

        benchmark_path = output_path(config, "benchmark.csv")
        by_start_path = output_path(config, "benchmark_by_start.csv") if by_start else None
        save_benchmark(report, benchmark_path, by_start_path)

    except (EvoCtrlError, ValueError) as e:
        fail(f"Evaluation failed: {e}")
    except OSError as e:
        fail(f"Filesystem error: {e}")

    render_benchmark(report, exact, config.runs)
    console.print(f"[green]✓[/green] Benchmark written to {benchmark_path}")
    if by_start_path is not None:
        console.print(f"[green]✓[/green] Per-start breakdown written to {by_start_path}")
