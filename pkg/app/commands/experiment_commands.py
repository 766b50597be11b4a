"""
Command-line surface of the laboratory: one sub-command per verification pipeline.

Every command shares the dimension grids, the seed and the output options. Values
given on the command line override those read from ``--config`` (TOML or JSON).
Grids accept a single value, a comma list ``2,4,8`` or a range ``start:step:stop``.

Exit status: 0 when all non-advisory checks pass, 1 when a mathematical check
fails, 2 for configuration errors.
"""
import functools
from typing import Any, Callable, Dict, List

import click

from app.schemas.config_schema import config_parse
from app.services.experiment_service import EXIT_CONFIG_ERROR, ExperimentService
from app.utils.exceptions import ConfigError


def common_options(func: Callable) -> Callable:
    options = [
        click.option("--seed", type=int, default=None, help="Master seed (required, here or in the config file)."),
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="TOML or JSON file with default values."),
        click.option("--k", default=None, help="Output dimension grid."),
        click.option("--n", default=None, help="Environment dimension grid."),
        click.option("--l", default=None, help="Input dimension grid."),
        click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None,
                     help="Report file; defaults to <MOE_OUTPUT_DIR>/<command>-seed<seed>.<format>."),
        click.option("--format", "format", type=click.Choice(["csv", "json"]), default=None),
        click.option("--workers", type=int, default=None, help="Worker threads."),
    ]
    return functools.reduce(lambda f, option: option(f), reversed(options), func)


def _execute(command: str, config_file: str, options: Dict[str, Any]) -> None:
    ctx = click.get_current_context()
    try:
        config = config_parse({"command": command, **options}, config_file)
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_CONFIG_ERROR)
    status = ExperimentService.run(config)
    click.echo(f"{command}: exit status {status}")
    ctx.exit(status)


@click.command("moments")
@common_options
@click.option("--trials", type=int, default=None)
def moments(config_file, **options):
    """Monte Carlo moments of f against their exact and analytic values."""
    _execute("moments", config_file, options)


@click.command("tail")
@common_options
@click.option("--epsilon", default=None, help="Epsilon grid.")
@click.option("--trials", type=int, default=None)
def tail(config_file, **options):
    """Empirical tail of f above median + h against the Levy bound."""
    _execute("tail", config_file, options)


@click.command("bell")
@common_options
@click.option("--channels", type=int, default=None)
def bell(config_file, **options):
    """Top eigenvalue and entropy of Bell-input outputs of the product channel."""
    _execute("bell", config_file, options)


@click.command("net-certify")
@common_options
@click.option("--theta", type=float, default=None)
@click.option("--channels", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--phase-quotient/--no-phase-quotient", default=None)
def net_certify(config_file, **options):
    """Build a theta-net and certify its size, covering radius and correction factor."""
    _execute("net-certify", config_file, options)


@click.command("gap-scan")
@common_options
@click.option("--theta", type=float, default=None)
@click.option("--seeds", default=None, help="Per-row seed grid; the master seed when omitted.")
@click.option("--restarts", type=int, default=None)
@click.option("--phase-quotient/--no-phase-quotient", default=None)
def gap_scan(config_file, **options):
    """Certified lower bound, Bell upper bound and their gap over a dimension grid."""
    _execute("gap-scan", config_file, options)


@click.command("crossover")
@common_options
@click.option("--a", type=float, default=None, help="Ratio l / n.")
@click.option("--theta", type=float, default=None)
@click.option("--beta", type=float, default=None, help="Ratio k^2 / n.")
@click.option("--beta-zero/--no-beta-zero", default=None)
def crossover(config_file, **options):
    """Smallest k at which the certified chain proves a violation."""
    _execute("crossover", config_file, options)


@click.command("weyl")
@common_options
@click.option("--phi-copies", type=int, default=None)
@click.option("--omega-copies", type=int, default=None)
@click.option("--restarts", type=int, default=None)
def weyl(config_file, **options):
    """Holevo value of the Weyl ensemble on the extended channel."""
    _execute("weyl", config_file, options)


@click.command("typical-bound")
@common_options
@click.option("--theta", type=float, default=None)
@click.option("--samples", type=int, default=None)
def typical_bound(config_file, **options):
    """Typical-subspace bound on max f, with a sampled subspace for l <= 3."""
    _execute("typical-bound", config_file, options)


commands: List[click.Command] = [moments, tail, bell, net_certify, gap_scan, crossover, weyl, typical_bound]
