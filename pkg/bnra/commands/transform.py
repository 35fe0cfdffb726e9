"""
Protocol transform commands
"""
from pathlib import Path
from typing import Optional

import click

from bnra.commands.common import INPUT, OUTPUT, emit, load_protocol, write_text
from bnra.core.protocol import Protocol
from bnra.cover1.abstraction import remove_disequality
from bnra.exceptions import EXIT_OK
from bnra.format.dsl import print_protocol
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict
from bnra.reduce.local_equality import eliminate_local_equality, eliminate_with_target
from bnra.trees.validate import augment_with_final_message


@click.group("transform")
def transform() -> None:
    """Rewrite protocols into equivalent ones"""


def _emit_protocol(out_file: Path, protocol: Protocol, **stats) -> int:
    write_text(out_file, print_protocol(protocol))
    emit(Verdict.OK, stats={
        "states": len(protocol.states),
        "transitions": len(protocol.transitions),
        **stats,
    })
    return EXIT_OK


@transform.command("remove-diseq")
@click.argument("protocol_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@handle_errors
def remove_diseq(protocol_file: Path, out_file: Path) -> int:
    """Replace disequality receptions of a 1-register protocol by any-receptions"""
    return _emit_protocol(out_file, remove_disequality(load_protocol(protocol_file)))


@transform.command("eliminate-local-eq")
@click.argument("protocol_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@click.option("--target", "-t", default=None, help="Funnel the copies of this state into one target")
@handle_errors
def eliminate_local_eq(protocol_file: Path, out_file: Path, target: Optional[str]) -> int:
    """Remove local equality tests by tracking which registers share a memory slot"""
    protocol = load_protocol(protocol_file)
    if target is None:
        return _emit_protocol(out_file, eliminate_local_equality(protocol))
    transformed, funnel = eliminate_with_target(protocol, target)
    return _emit_protocol(out_file, transformed, target=funnel)


@transform.command("final-message")
@click.argument("protocol_file", type=INPUT)
@click.option("--target", "-t", required=True, help="State whose coverage the message marks")
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@handle_errors
def final_message(protocol_file: Path, target: str, out_file: Path) -> int:
    """Add a fresh message broadcast in a loop on the target state"""
    augmented, message = augment_with_final_message(load_protocol(protocol_file), target)
    return _emit_protocol(out_file, augmented, message=message)
