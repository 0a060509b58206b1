"""CLI entrypoint: single bounds, table reproduction, density grids and verification."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

# Ensure project root is in path
_project_root = Path(__file__).parent.parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

from scripts.boundscope import (
    RESULTS_DIR,
    AccuracyError,
    BoundReport,
    ConditioningError,
    InputError,
    RangeError,
    __version__,
    format_number,
)
from scripts.boundscope.annealing import fhat_max, sa_bound
from scripts.boundscope.config import (
    VALID_BASES,
    VALID_FHAT_MODES,
    VALID_METHODS,
    RunConfig,
    load_config_file,
    merge_config,
    validate_run_config,
)
from scripts.boundscope.grid import DENSITY_KINDS, emit_density_grid
from scripts.boundscope.lasserre import lasserre_upper_bound
from scripts.boundscope.progress import ReproductionProgress
from scripts.boundscope.reproduce import TableReproducer, write_comparison_csv
from scripts.boundscope.taylor import ChainReport, taylor_density_bound, verify_chain
from scripts.boundscope.verify import CHECKS, run_verification

try:
    from rich.console import Console
    from rich.table import Table
    from rich.panel import Panel
    from rich import box
    HAS_RICH = True
except ImportError:
    HAS_RICH = False

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_TOLERANCE = 3


def _console():
    """Get a console instance if rich is available."""
    return Console() if HAS_RICH and sys.stdout.isatty() else None


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def append_csv_row(path: Path, header, row) -> None:
    """Append one row, writing the header first when the file is new."""
    path.parent.mkdir(parents=True, exist_ok=True)
    is_new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if is_new:
            writer.writerow(header)
        writer.writerow(row)


def run_bound(config: RunConfig, r: int | None = None) -> BoundReport | ChainReport:
    """Compute one bound (or chain report) for config at r and append its CSV row."""
    r = config.r if r is None else r
    f, K, printed_fhat = config.resolve()
    label = config.label

    if config.method == "lasserre":
        report = lasserre_upper_bound(f, K, r, config.basis, function_name=label)
    elif config.method == "sa":
        report = sa_bound(f, K, r, printed_fhat, function_name=label, t=config.t)
    else:
        fhat = printed_fhat if printed_fhat is not None else fhat_max(f, K)
        t = config.t
        if t is None:
            if fhat == 0 or r == 0:
                raise InputError(f"Cannot derive a temperature for r={r} with fhat_max={fhat}; pass --t")
            t = math.e * fhat / r
        if config.method == "taylor":
            value = taylor_density_bound(f, K, r, t)
            report = BoundReport(method="taylor", function=label, r=r, value=value, t=t)
        else:
            report = verify_chain(f, K, r, t, fhat=fhat, basis_kind=config.basis, function_name=label)

    if config.out:
        append_csv_row(Path(config.out), report.CSV_HEADER, report.csv_row())
    return report


def _print_reports(reports: list) -> None:
    if not reports:
        return
    header = reports[0].CSV_HEADER
    console = _console()
    if console:
        table = Table(box=box.ROUNDED, padding=(0, 1))
        for column in header:
            table.add_column(column, justify="right" if column not in ("method", "function") else "left")
        for report in reports:
            table.add_row(*report.csv_row())
        console.print(table)
    else:
        print(",".join(header))
        for report in reports:
            print(",".join(report.csv_row()))


def _config_from_args(args) -> RunConfig:
    file_values = load_config_file(Path(args.config)) if args.config else None
    cli_values = {
        "function": args.function,
        "expr": args.expr,
        "n": args.n,
        "box": args.box,
        "method": getattr(args, "method", None),
        "r": args.r,
        "r_max": getattr(args, "r_max", None),
        "t": args.t,
        "basis": args.basis,
        "fhat": getattr(args, "fhat", None),
        "out": args.out,
    }
    config = merge_config(cli_values, file_values)
    validate_run_config(config)
    return config


def cmd_bound(args):
    """Compute bounds for one function over a range of r."""
    config = _config_from_args(args)
    if config.out is None:
        name = "chain.csv" if config.method == "chain" else "bounds.csv"
        config.out = str(RESULTS_DIR / name)
    reports = [run_bound(config, r) for r in config.r_values()]
    _print_reports(reports)
    if config.method == "chain" and not all(report.holds for report in reports):
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_table(args):
    """Reproduce a reference table."""
    progress = ReproductionProgress(verbose=args.verbose)
    reproducer = TableReproducer(
        which=args.which,
        fhat_mode=args.fhat,
        reference_path=Path(args.reference) if args.reference else None,
        progress=progress,
        functions=args.function or None,
    )
    report = reproducer.run()
    out = Path(args.out) if args.out else RESULTS_DIR / f"{args.which}_comparison.csv"
    write_comparison_csv(report, out)

    summary = report.summary()
    summary["out"] = str(out)
    progress.show_summary(summary)

    if report.errors:
        return EXIT_NUMERIC
    return EXIT_TOLERANCE if report.exceeded else EXIT_OK


def cmd_grid(args):
    """Emit a density grid for external plotting."""
    config = _config_from_args(args)
    f, K, _ = config.resolve()
    out = Path(config.out) if config.out else RESULTS_DIR / f"{args.kind}_grid.csv"
    params = {"t": config.t, "r": config.r, "basis": config.basis}
    summary = emit_density_grid(f, K, args.kind, params, args.grid_m, out)

    console = _console()
    if console:
        lines = [
            f"[bold]Rows:[/bold]   {summary.rows}",
            f"[bold]Mass:[/bold]   {summary.mass:.6f}",
            f"[bold]Peak:[/bold]   {format_number(summary.peak[2])} at ({summary.peak[0]:g}, {summary.peak[1]:g})",
            f"[bold]Modes:[/bold]  {len(summary.modes)}",
        ]
        console.print(Panel("\n".join(lines), title=f"[bold]{args.kind} grid → {out}[/bold]", border_style="blue"))
    else:
        print(f"Wrote {summary.rows} rows to {out} (mass {summary.mass:.6f}, {len(summary.modes)} modes)")
    return EXIT_OK


def cmd_verify(args):
    """Run property checks."""
    results = run_verification(checks=args.check)

    console = _console()
    has_errors = False
    has_critical = False

    if console:
        table = Table(box=box.SIMPLE_HEAVY, padding=(0, 1))
        table.add_column("Status", width=10, justify="center")
        table.add_column("Check", style="bold", width=24)
        table.add_column("Message")

        for result in results:
            severity = result["severity"]
            if severity == "OK":
                status = "[green]OK[/green]"
            elif severity == "WARNING":
                status = "[yellow]WARN[/yellow]"
            elif severity == "ERROR":
                status = "[red]ERROR[/red]"
                has_errors = True
            else:
                status = "[bold red]CRIT[/bold red]"
                has_critical = True

            table.add_row(status, result["check"], result["message"])

        console.print(Panel(table, title="[bold]Verification[/bold]", border_style="blue"))
    else:
        symbol = {"OK": "✓", "WARNING": "⚠", "ERROR": "✗", "CRITICAL": "✗✗"}
        for result in results:
            severity = result["severity"]
            print(f"  {symbol.get(severity, '?')} [{severity}] {result['check']}: {result['message']}")
            if severity == "ERROR":
                has_errors = True
            elif severity == "CRITICAL":
                has_critical = True

    if has_critical:
        return EXIT_NUMERIC
    return EXIT_TOLERANCE if has_errors else EXIT_OK


def _add_function_args(sub):
    sub.add_argument("--function", help="Builtin function: booth, matyas, camel3, motzkin")
    sub.add_argument("--expr", help="Polynomial expression in x1..xn")
    sub.add_argument("--n", type=int, help="Dimension for --expr (default: 2)")
    sub.add_argument("--box", help='Box as "lo:hi,lo:hi,..." (default: builtin box or [-1,1]^n)')
    sub.add_argument("--r", type=int, help="Hierarchy index r")
    sub.add_argument("--t", type=float, help="Temperature")
    sub.add_argument("--basis", choices=sorted(VALID_BASES), help="Lasserre basis (default: orthonormal)")
    sub.add_argument("--out", help="Output CSV path")
    sub.add_argument("--config", help="key=value config file; flags win on conflict")
    sub.add_argument("--verbose", action="store_true", help="Verbose output")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="boundscope",
        description=f"Upper bounds for polynomial minimization over a box v{__version__}",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # bound command
    bound_parser = subparsers.add_parser("bound", help="Compute bounds for one function")
    _add_function_args(bound_parser)
    bound_parser.add_argument("--method", choices=sorted(VALID_METHODS), help="Bound family (default: lasserre)")
    bound_parser.add_argument("--r-max", type=int, help="Compute every r from --r to --r-max")
    bound_parser.add_argument("--fhat", choices=sorted(VALID_FHAT_MODES), help="Printed or computed fhat_max (default: paper)")
    bound_parser.set_defaults(func=cmd_bound)

    # table command
    table_parser = subparsers.add_parser("table", help="Reproduce a reference table")
    table_parser.add_argument("which", choices=["table1", "table2"])
    table_parser.add_argument("--fhat", choices=sorted(VALID_FHAT_MODES), default="paper")
    table_parser.add_argument("--reference", help="Alternative table2.csv to compare against")
    table_parser.add_argument("--function", nargs="*", help="Restrict to these builtin functions")
    table_parser.add_argument("--out", help="Comparison CSV path")
    table_parser.add_argument("--verbose", action="store_true", help="Verbose output")
    table_parser.set_defaults(func=cmd_table)

    # grid command
    grid_parser = subparsers.add_parser("grid", help="Emit a density grid (n = 2)")
    _add_function_args(grid_parser)
    grid_parser.add_argument("--kind", choices=DENSITY_KINDS, required=True)
    grid_parser.add_argument("--grid-m", type=int, default=201, help="Points per axis (default: 201)")
    grid_parser.set_defaults(func=cmd_grid)

    # verify command
    verify_parser = subparsers.add_parser("verify", help="Run property checks")
    verify_parser.add_argument("--check", nargs="*", choices=sorted(CHECKS), help="Specific checks to run")
    verify_parser.add_argument("--verbose", action="store_true", help="Verbose output")
    verify_parser.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    log_level = logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, ConditioningError, RangeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, ValueError) as e:
        logger.debug("Numeric failure", exc_info=True)
        print(f"Error: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
