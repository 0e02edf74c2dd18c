"""Simulate command: one traced episode of the (1+1) EA."""

from rich.console import Console

from evoctrl.commands.shared import PolicyResolver, describe_policy, fail, output_path, parse_start, problem_spec
from evoctrl.config import RunConfig
from evoctrl.domain.errors import EvoCtrlError
from evoctrl.domain.simulator import RngSeed, run_episode
from evoctrl.store.files import save_trace

console = Console()


def simulate_command(config: RunConfig, policy_name: str, stream: int = 0) -> None:
    """Run one episode and write trace.csv."""
    try:
        spec = problem_spec(config)
        policy = PolicyResolver(spec).resolve(policy_name)
        start = parse_start(config.start)
        rng = RngSeed(config.seed, stream).generator()

        trace = run_episode(spec, policy, start, rng, config.step_cap)
        trace_path = output_path(config, "trace.csv")
        save_trace(trace, trace_path)

    except (EvoCtrlError, ValueError) as e:
        fail(f"Simulation failed: {e}")
    except OSError as e:
        fail(f"Filesystem error: {e}")

    improvements = sum(1 for t in trace.transitions if t.s_next > t.s)
    console.print(
        f"[cyan]{policy_name}[/cyan] [dim]({describe_policy(policy)})[/dim]: "
        f"start s={trace.start_state} → s={trace.final_state} in {trace.steps:,} steps "
        f"({improvements} improvements)"
    )
    if trace.truncated:
        console.print(f"[yellow]Episode hit the step cap of {config.step_cap:,}[/yellow]")
    console.print(f"[green]✓[/green] Trace written to {trace_path}")
