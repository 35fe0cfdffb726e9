"""
Protocol validation command
"""
from pathlib import Path

import click

from bnra.commands.common import INPUT, emit, load_protocol, summary
from bnra.core.protocol import is_signature_protocol
from bnra.exceptions import EXIT_OK
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict


@click.command("check")
@click.argument("protocol_file", type=INPUT)
@handle_errors
def check(protocol_file: Path) -> int:
    """
    Parse and validate a protocol file

    Parse errors and structural problems are reported with their line and
    column on stderr.
    """
    protocol = load_protocol(protocol_file)
    summary(f"{protocol.name}: {len(protocol.states)} states, {len(protocol.transitions)} transitions")
    emit(Verdict.OK, stats={
        "name": protocol.name,
        "states": len(protocol.states),
        "messages": len(protocol.messages),
        "registers": protocol.registers,
        "transitions": len(protocol.transitions),
        "signature": is_signature_protocol(protocol),
        "local_tests": protocol.local_tests,
    })
    return EXIT_OK
