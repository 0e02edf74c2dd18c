"""Solve command: exact optimal mutation-rate policy."""

from rich.console import Console
from rich.table import Table

from evoctrl.commands.shared import fail, output_path, problem_spec
from evoctrl.config import RunConfig
from evoctrl.domain.errors import EvoCtrlError
from evoctrl.domain.evaluation import expected_time_from_random_start
from evoctrl.domain.probability import build_transition_model
from evoctrl.domain.solver import SolveReport, backward_induction, greedy_policy, value_iteration
from evoctrl.store.files import save_policy, save_transition_model, save_values

console = Console()


def render_solve_report(config: RunConfig, v0: float, random_start: float, report: SolveReport | None) -> None:
    table = Table(title=f"Solve report (n={config.n})")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")

    table.add_row("Method", "value iteration" if config.method == "vi" else "backward induction")
    if report is not None:
        table.add_row("Iterations", str(report.iterations))
        table.add_row("Final residual", f"{report.final_residual:.3e}")
        table.add_row("Converged", "[green]yes[/green]" if report.converged else "[red]no[/red]")
    table.add_row("Expected steps from s=0", f"{-v0:,.3f}")
    table.add_row("Expected steps from random start", f"{random_start:,.3f}")

    console.print(table)


def solve_command(config: RunConfig, model_csv: str | None = None) -> None:
    """Build the transition model, solve it and write value.csv and policy.csv."""
    try:
        spec = problem_spec(config)
        with console.status(f"[cyan]Building transition model for n={spec.n}...[/cyan]"):
            model = build_transition_model(spec)

        report = None
        if config.method == "vi":
            with console.status("[cyan]Running value iteration...[/cyan]"):
                values, report = value_iteration(model, config.tolerance, config.max_iterations)
        else:
            values = backward_induction(model)
        policy = greedy_policy(model, values)

        values_path = output_path(config, "value.csv")
        policy_path = output_path(config, "policy.csv")
        save_values(values, values_path)
        save_policy(policy, policy_path)
        if model_csv:
            save_transition_model(model, output_path(config, model_csv))

    except (EvoCtrlError, ValueError) as e:
        fail(f"Solve failed: {e}")
    except OSError as e:
        fail(f"Filesystem error: {e}")

    render_solve_report(config, values[0], expected_time_from_random_start(values), report)
    if report is not None and not report.converged:
        console.print(f"[yellow]Value iteration stopped after {report.iterations} sweeps without converging[/yellow]")
    console.print(f"[green]✓[/green] Values written to {values_path}")
    console.print(f"[green]✓[/green] Policy written to {policy_path}")
