"""Learn command: Q-Learning of the mutation-rate policy."""

from dataclasses import replace

from rich.console import Console
from rich.table import Table

from evoctrl.commands.shared import PolicyResolver, fail, learning_config, output_path, problem_spec
from evoctrl.config import RunConfig
from evoctrl.domain.errors import EvoCtrlError, IncompleteTableError
from evoctrl.domain.evaluation import policy_suboptimality
from evoctrl.domain.qlearning import TrainingReport, greedy_from_q, train
from evoctrl.domain.solver import backward_induction
from evoctrl.store.files import save_policy, save_qtable

console = Console()


def render_training_report(config: RunConfig, report: TrainingReport) -> None:
    table = Table(title=f"Training report (n={config.n}, {config.sampler} sampler)")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")

    unvisited = int((report.visit_counts[: config.n] == 0).sum())
    table.add_row("Episodes", f"{report.episodes_run:,}")
    table.add_row("Total steps", f"{report.total_steps:,}")
    table.add_row("Truncated episodes", str(report.truncated_episodes))
    table.add_row("Unvisited (state, theta) cells", str(unvisited))
    if report.mean_suboptimality is not None:
        sub = report.mean_suboptimality
        colour = "green" if sub <= 0.02 else "yellow"
        table.add_row("Mean suboptimality vs exact", f"[{colour}]{sub:.3%}[/{colour}]")

    console.print(table)


def learn_command(config: RunConfig, compare_exact: bool = False) -> None:
    """Train a Q-table and write qtable.csv and the greedy policy.csv."""
    try:
        spec = problem_spec(config)
        resolver = PolicyResolver(spec)
        guide = resolver.resolve(config.guide_policy) if config.guide_policy else None
        settings = learning_config(config, guide)
        model = resolver.model if config.sampler == "model" else None

        with console.status(f"[cyan]Training for {config.episodes:,} episodes...[/cyan]"):
            table, report = train(spec, settings, "bit" if config.sampler == "bit" else "model", model)

        qtable_path = output_path(config, "qtable.csv")
        save_qtable(table, qtable_path)
        policy = greedy_from_q(table)

        policy_path = output_path(config, "policy.csv")
        save_policy(policy, policy_path)

        if compare_exact:
            with console.status("[cyan]Comparing with the exact solution...[/cyan]"):
                optimal = backward_induction(resolver.model)
                report = replace(report, mean_suboptimality=policy_suboptimality(resolver.model, policy, optimal))

    except IncompleteTableError as e:
        console.print("[red]Learning incomplete: some states were never visited[/red]", style="bold")
        fail(f"  {e}", code=2)
    except (EvoCtrlError, ValueError) as e:
        fail(f"Learning failed: {e}")
    except OSError as e:
        fail(f"Filesystem error: {e}")

    render_training_report(config, report)
    console.print(f"[green]✓[/green] Q-table written to {qtable_path}")
    console.print(f"[green]✓[/green] Policy written to {policy_path}")
