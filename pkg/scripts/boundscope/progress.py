"""Rich terminal progress display for table reproduction."""

from __future__ import annotations

import sys
from typing import Any

try:
    from rich.console import Console
    from rich.panel import Panel
    from rich.progress import (
        Progress, SpinnerColumn, BarColumn, TextColumn,
        TaskProgressColumn, TimeElapsedColumn,
    )
    from rich.table import Table
    from rich import box
    HAS_RICH = True
except ImportError:
    HAS_RICH = False


class ReproductionProgress:
    """Progress display for a table reproduction run.

    Uses rich for styled output when available and stdout is a terminal.
    Falls back to plain text otherwise.
    """

    def __init__(self, verbose: bool = False):
        self.verbose = verbose
        self._use_rich = HAS_RICH and sys.stdout.isatty()
        self.console = Console() if self._use_rich else None
        self._progress: Any = None
        self._task: Any = None
        self._failed: list[str] = []

    # header

    def show_header(self, version: str, which: str, cells: int, fhat_mode: str, workers: int):
        if self._use_rich:
            lines = [
                f"[bold]Table:[/bold]      {which}",
                f"[bold]Cells:[/bold]      {cells}",
                f"[bold]fhat_max:[/bold]   {fhat_mode}",
                f"[bold]Workers:[/bold]    {workers}",
            ]
            self.console.print(Panel(
                "\n".join(lines),
                title=f"[bold blue]boundscope · Reproduction v{version}[/bold blue]",
                border_style="blue",
                padding=(0, 1),
            ))
        else:
            print(f"\n{'-' * 60}")
            print(f"  boundscope · Reproduction v{version}")
            print(f"  Table: {which} | Cells: {cells} | fhat_max: {fhat_mode} | Workers: {workers}")
            print(f"{'-' * 60}")

    # cells

    def start(self, total: int):
        self._failed = []
        if self._use_rich:
            self._progress = Progress(
                SpinnerColumn(),
                TextColumn("[bold blue]{task.description}[/bold blue]"),
                BarColumn(bar_width=30),
                TaskProgressColumn(),
                TextColumn("·"),
                TimeElapsedColumn(),
                console=self.console,
                transient=True,
            )
            self._progress.start()
            self._task = self._progress.add_task("Computing cells", total=total)
        else:
            print(f"\n  Computing {total} cells...")

    def advance(self, label: str, error: str | None = None):
        if error:
            self._failed.append(f"{label}: {error}")
        if self._use_rich and self._progress is not None:
            self._progress.update(self._task, description=f"Computed [cyan]{label}[/cyan]")
            self._progress.advance(self._task)
        elif self.verbose:
            mark = "✗" if error else "✓"
            print(f"    {mark} {label}")

    def stop(self):
        if self._use_rich and self._progress is not None:
            self._progress.stop()
            self._progress = None
            self.console.print()

    # summary

    def show_summary(self, summary: dict[str, Any]):
        """summary: columns -> (max_abs_dev, max_rel_dev, failures), plus elapsed_seconds."""
        columns = summary.get("columns", {})
        exceeded = summary.get("exceeded", 0)

        if self._use_rich:
            table = Table(title="Deviation from reference", box=box.ROUNDED, padding=(0, 1))
            table.add_column("Column", style="cyan")
            table.add_column("Max abs dev", justify="right")
            table.add_column("Max rel dev", justify="right")
            table.add_column("Exceeded", justify="right")
            for column, (abs_dev, rel_dev, failures) in columns.items():
                style = "red" if failures else "green"
                table.add_row(column, f"{abs_dev:.4g}", f"{rel_dev:.3%}", f"[{style}]{failures}[/{style}]")
            self.console.print(table)

            lines = [f"[bold]Exceeded[/bold]     {exceeded} cells"]
            if self._failed:
                lines.append(f"[bold]Errors[/bold]       [red]{len(self._failed)} cells[/red]")
            if summary.get("out"):
                lines.append(f"[bold]Written[/bold]      {summary['out']}")
            if summary.get("elapsed_seconds") is not None:
                lines.append(f"[bold]Time[/bold]         {summary['elapsed_seconds']}s")
            self.console.print(Panel(
                "\n".join(lines),
                title="[bold]Summary[/bold]",
                border_style="green" if not exceeded and not self._failed else "yellow",
                padding=(0, 1),
            ))
            if self._failed:
                self.console.print("\n[bold red]Failed cells:[/bold red]")
                for err in self._failed:
                    self.console.print(f"  [red]•[/red] {err}")
        else:
            print("-" * 60)
            print("  Summary")
            print("-" * 60)
            print(f"  {'Column':<12} {'Max abs dev':>12} {'Max rel dev':>12} {'Exceeded':>9}")
            for column, (abs_dev, rel_dev, failures) in columns.items():
                print(f"  {column:<12} {abs_dev:>12.4g} {rel_dev:>12.3%} {failures:>9}")
            print(f"  Exceeded:   {exceeded} cells")
            if summary.get("out"):
                print(f"  Written:    {summary['out']}")
            if summary.get("elapsed_seconds") is not None:
                print(f"  Time:       {summary['elapsed_seconds']}s")
            print("-" * 60)
            if self._failed:
                print("\nFailed cells:")
                for err in self._failed:
                    print(f"  • {err}")
