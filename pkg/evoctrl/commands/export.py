"""Export command: plot-ready value curves, policy curves and Monte Carlo marks."""

from rich.console import Console

from evoctrl.commands.shared import PolicyResolver, fail, output_path, problem_spec
from evoctrl.config import RunConfig
from evoctrl.domain.errors import EvoCtrlError
from evoctrl.domain.evaluation import figure_data
from evoctrl.domain.simulator import RngSeed
from evoctrl.store.files import export_figure_data

console = Console()


def parse_marks(raw: str) -> list[int]:
    """Parse a comma-separated list of start states."""
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"Marks must be comma-separated states, got '{raw}'") from None


def export_command(config: RunConfig, prefix: str = "figure", marks: str = "5,10,22,45") -> None:
    """Write <prefix>_values.csv, <prefix>_policies.csv and <prefix>_marks.csv."""
    try:
        spec = problem_spec(config)
        states = parse_marks(marks)
        skipped = [s for s in states if s > spec.n]
        states = [s for s in states if s <= spec.n]
        if skipped:
            console.print(f"[dim]Skipping marks beyond n={spec.n}: {', '.join(map(str, skipped))}[/dim]")

        resolver = PolicyResolver(spec)
        policies = resolver.resolve_all(config.policies)

        with console.status(f"[cyan]Evaluating {len(policies)} policies at {len(states)} marks...[/cyan]"):
            data = figure_data(
                resolver.model, policies, config.runs, RngSeed(config.seed), states, config.step_cap, config.workers
            )
        paths = export_figure_data(data, output_path(config, prefix))

    except (EvoCtrlError, ValueError) as e:
        fail(f"Export failed: {e}")
    except OSError as e:
        fail(f"Filesystem error: {e}")

    for path in paths:
        console.print(f"[green]✓[/green] Wrote {path}")
