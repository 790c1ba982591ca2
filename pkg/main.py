#!/usr/bin/env python3
"""
cinf-lift - Main CLI Entry Point

Lifts C-infinity structures on Frobenius algebras to symplectic ones and
computes the Harrison and cyclic cohomology that governs the lift.
"""

import sys
from typing import List, Optional

import click
from rich.console import Console
from rich.panel import Panel
from rich.text import Text

from cli import CommandRunner, RunResult
from config import activate, load_settings, setup_logging
from errors import CinfLiftError
from formats import write_report
from harrison import FLAVORS
from obstruction_lift import STRUCTURE_FLAVORS

console = Console()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
STYLES = {0: "green", 1: "yellow", 2: "red", 3: "bold red"}


class Session:
    """Settings and output options shared by every command of one invocation."""

    def __init__(self, settings, json_path: Optional[str]):
        self.settings = settings
        self.json_path = json_path
        self.runner = CommandRunner(settings)

    def run(self, command: str, **options) -> int:
        result = self.runner.run(command, **options)
        show_result(result)
        if self.json_path:
            write_report(result.report(), self.json_path, self.settings.report_indent)
        return result.exit_code


def show_result(result: RunResult) -> None:
    """Render a RunResult's tables and a status panel."""
    for table in result.tables:
        console.print(table)
    style = STYLES.get(result.exit_code, "red")
    text = Text(f"{result.command}: {result.status}", style=f"bold {style}")
    if result.summary:
        text.append(f"\n{result.summary}", style="italic")
    console.print(Panel.fit(text, border_style=style))


algebra_argument = click.argument("algebra_file", type=click.Path(exists=True, dir_okay=False))
structure_option = click.option("--structure", "structure_file", type=click.Path(exists=True, dir_okay=False),
                                help="Structure file with the parts m3, m4, ... (default: m_2 alone)")
seed_option = click.option("--seed", type=int, default=None, help="Seed of the random inputs")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--json", "json_path", type=click.Path(dir_okay=False),
              help="Write the structured report to PATH")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Log level (default: CINF_LIFT_LOG_LEVEL or WARNING)")
@click.option("--env-file", type=click.Path(dir_okay=False), default=None, help="Load settings from this .env file")
@click.pass_context
def cli(ctx, json_path, log_level, env_file):
    """Symplectic lifting of C-infinity structures with exact rational arithmetic."""
    settings = load_settings(env_file).override(log_level=log_level.upper() if log_level else None)
    activate(settings)
    setup_logging(settings.log_level)
    ctx.obj = Session(settings, json_path)


@cli.command()
@algebra_argument
@structure_option
@click.pass_obj
def check(session, algebra_file, structure_file):
    """Validate an algebra and optionally a structure on it."""
    return session.run("check", algebra_path=algebra_file, structure_path=structure_file)


@cli.command()
@algebra_argument
@click.option("--flavor", type=click.Choice(FLAVORS), default="harrison", show_default=True)
@click.option("--window", default="1-4", show_default=True, help="Orders to compute, e.g. 1-4 or 2,3")
@click.option("--normalised", is_flag=True, help="Use normalised cochains")
@click.pass_obj
def cohomology(session, algebra_file, flavor, window, normalised):
    """Cohomology table of a complex over a window of orders."""
    return session.run("cohomology", algebra_path=algebra_file, flavor=flavor, window=window,
                       normalised=normalised)


@cli.command()
@algebra_argument
@structure_option
@click.option("--level", type=int, default=None, help="Level n of the C_n-structure (default: from the file)")
@click.option("--flavor", type=click.Choice(STRUCTURE_FLAVORS), default="plain", show_default=True)
@click.pass_obj
def obstruction(session, algebra_file, structure_file, level, flavor):
    """Obstruction class to extending a C_n-structure."""
    return session.run("obstruction", algebra_path=algebra_file, structure_path=structure_file,
                       level=level, flavor=flavor)


@cli.command()
@algebra_argument
@structure_option
@click.option("--level", type=int, default=None, help="Level n of the C_n-structure (default: from the file)")
@click.option("--flavor", type=click.Choice(STRUCTURE_FLAVORS), default="plain", show_default=True)
@click.pass_obj
def extend(session, algebra_file, structure_file, level, flavor):
    """Extend a C_n-structure to a C_{n+1}-structure."""
    return session.run("extend", algebra_path=algebra_file, structure_path=structure_file,
                       level=level, flavor=flavor)


@cli.command()
@algebra_argument
@structure_option
@click.option("--order", type=int, default=None, help="Truncation N (default: CINF_LIFT_DEFAULT_ORDER)")
@click.option("--synthetic", is_flag=True, help="Lift exp(gamma) m_2 exp(-gamma) for a seeded random gamma")
@seed_option
@click.option("--unital", is_flag=True, help="Keep every part normalised")
@click.option("--two-step-crosscheck", is_flag=True, help="Also run the two-step algorithm")
@click.pass_obj
def lift(session, algebra_file, structure_file, order, synthetic, seed, unital, two_step_crosscheck):
    """Lift a C-infinity structure to a symplectic one."""
    return session.run("lift", algebra_path=algebra_file, order=order, structure_path=structure_file,
                       synthetic=synthetic, seed=seed, unital=unital, two_step_crosscheck=two_step_crosscheck)


@cli.command("lift-morphism")
@algebra_argument
@structure_option
@click.option("--order", type=int, default=None, help="Truncation N (default: CINF_LIFT_DEFAULT_ORDER)")
@seed_option
@click.option("--unital", is_flag=True, help="Keep every solution normalised")
@click.pass_obj
def lift_morphism(session, algebra_file, structure_file, order, seed, unital):
    """Lift a seeded morphism between symplectic structures to a symplectic one."""
    return session.run("lift-morphism", algebra_path=algebra_file, order=order, structure_path=structure_file,
                       seed=seed, unital=unital)


@cli.command("verify-I")
@algebra_argument
@click.option("--window", default="1-4", show_default=True, help="Orders i of I: HC^{i+1} -> H^i")
@click.option("--normalised", is_flag=True, help="Use normalised cochains")
@click.pass_obj
def verify_i(session, algebra_file, window, normalised):
    """Check that I is injective, surjective and bijective in orders 1, 2 and >= 3."""
    return session.run("verify-I", algebra_path=algebra_file, window=window, normalised=normalised)


@cli.command("verify-cartan")
@algebra_argument
@click.option("--samples", type=int, default=200, show_default=True)
@seed_option
@click.option("--max-order", type=int, default=4, show_default=True, help="Truncation of the random samples")
@click.pass_obj
def verify_cartan(session, algebra_file, samples, seed, max_order):
    """Check the Cartan calculus identities on seeded random inputs."""
    return session.run("verify-cartan", algebra_path=algebra_file, samples=samples, seed=seed,
                       max_order=max_order)


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the process exit code."""
    try:
        code = cli.main(args=argv, prog_name="cinf-lift", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        console.print("[red]aborted[/red]")
        return 1
    except CinfLiftError as e:
        console.print(Panel.fit(Text(e.message, style="bold red"), title=e.code, border_style="red"))
        return e.exit_code
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
