"""
BNRA Toolkit - Command-line entry point
"""
import sys
from typing import List, Optional

import click

from bnra import __version__
from bnra.commands.check import check
from bnra.commands.cover1 import cover1
from bnra.commands.explore import explore
from bnra.commands.generate import generate
from bnra.commands.reduce import reduce
from bnra.commands.replay import replay_abstract_command, replay_command
from bnra.commands.transform import transform
from bnra.commands.tree import tree
from bnra.exceptions import EXIT_OK


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="bnra")
def cli() -> None:
    """
    Verification toolkit for broadcast networks of register automata

    Verdicts go to stdout as one JSON object with verdict, witness and stats
    keys. Exit codes: 0 positive, 1 negative, 2 usage, 3 budget, 4 internal.
    """


cli.add_command(check)
cli.add_command(explore)
cli.add_command(cover1)
cli.add_command(replay_command)
cli.add_command(replay_abstract_command)
cli.add_command(tree)
cli.add_command(reduce)
cli.add_command(transform)
cli.add_command(generate)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Run one invocation and return its exit code instead of exiting"""
    try:
        code = cli.main(args=argv, prog_name="bnra", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
