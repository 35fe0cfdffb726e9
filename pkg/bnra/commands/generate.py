"""
Seeded test-data generation commands
"""
from typing import Optional

import click

from bnra.exceptions import EXIT_OK
from bnra.format.dsl import print_protocol
from bnra.middleware.error_handler import handle_errors
from bnra.reduce.generators import random_cnf3, random_protocol, random_signature_protocol
from bnra.reduce.sat import format_dimacs

SEED = click.option("--seed", type=int, default=None, help="Random seed; output is reproducible for a fixed seed")


@click.group("generate")
def generate() -> None:
    """Print random protocols and formulas"""


@generate.command("protocol")
@SEED
@click.option("--states", type=click.IntRange(min=1), default=4)
@click.option("--messages", type=click.IntRange(min=1), default=2)
@click.option("--registers", type=click.IntRange(min=1), default=1)
@click.option("--transitions", type=click.IntRange(min=0), default=6)
@handle_errors
def protocol(seed: Optional[int], states: int, messages: int, registers: int, transitions: int) -> int:
    click.echo(print_protocol(random_protocol(seed, states, messages, registers, transitions)), nl=False)
    return EXIT_OK


@generate.command("signature")
@SEED
@click.option("--states", type=click.IntRange(min=1), default=5)
@click.option("--messages", type=click.IntRange(min=1), default=2)
@click.option("--registers", type=click.IntRange(min=2), default=2)
@click.option("--transitions", type=click.IntRange(min=0), default=7)
@handle_errors
def signature(seed: Optional[int], states: int, messages: int, registers: int, transitions: int) -> int:
    """Random protocol that broadcasts from register 1 and receives into the others"""
    click.echo(print_protocol(random_signature_protocol(seed, states, messages, registers, transitions)), nl=False)
    return EXIT_OK


@generate.command("cnf")
@SEED
@click.option("--variables", type=click.IntRange(min=1), default=3)
@click.option("--clauses", type=click.IntRange(min=1), default=3)
@handle_errors
def cnf(seed: Optional[int], variables: int, clauses: int) -> int:
    """Random 3-CNF formula in DIMACS format"""
    click.echo(format_dimacs(random_cnf3(seed, variables, clauses)), nl=False)
    return EXIT_OK
