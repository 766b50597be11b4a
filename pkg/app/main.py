import click

from app import __version__
from app.commands import experiment_commands
from app.utils.common import setup_logging


@click.group(help="Numerical laboratory for minimum output entropy additivity bounds.")
@click.version_option(__version__, prog_name="moe-lab")
def cli():
    setup_logging()


for command in experiment_commands.commands:
    cli.add_command(command)


if __name__ == "__main__":
    cli()
