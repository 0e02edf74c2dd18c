"""Admin command for writing the default configuration."""

import sys
from pathlib import Path

from rich.console import Console

from evoctrl.config import create_default_config, get_config_path

console = Console()


def init_command(force: bool = False, path: str | None = None) -> None:
    """Write a config file holding every default."""
    config_path = Path(path).expanduser() if path else get_config_path()

    # Guard: refuse to overwrite without force flag
    if config_path.exists() and not force:
        console.print("[red]Initialization failed:[/red]", style="bold")
        console.print(f"  Config already exists: {config_path}")
        console.print("\n[yellow]Use 'evoctrl init --force' to overwrite[/yellow]")
        sys.exit(1)

    try:
        console.print(f"[cyan]Creating config file at {config_path}...[/cyan]")
        create_default_config(config_path)
        console.print("[green]✓[/green] Config file created")
        console.print(f"[dim]Config: {config_path}[/dim]")
    except OSError as e:
        console.print(f"[red]Filesystem error: {e}[/red]", style="bold")
        sys.exit(1)
