"""
1-register coverability command
"""
from pathlib import Path
from typing import Optional

import click

from bnra.commands.common import INPUT, OUTPUT, as_json, emit, load_protocol, summary, write_text
from bnra.cover1.abstraction import decide_cover1
from bnra.cover1.concretize import concretize
from bnra.exceptions import EXIT_NEGATIVE, EXIT_OK
from bnra.format.codec import abstract_run_to_document, dumps, run_to_document
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict


@click.command("cover1")
@click.argument("protocol_file", type=INPUT)
@click.option("--target", "-t", required=True, help="State to cover")
@click.option("--witness", "witness_file", type=OUTPUT, default=None, help="Write the abstract run here")
@click.option(
    "--concretize",
    "budget",
    type=click.IntRange(min=1),
    default=None,
    help="Build a concrete run with at most this many agents"
)
@click.option("--run", "run_file", type=OUTPUT, default=None, help="Write the concrete run here")
@handle_errors
def cover1(
    protocol_file: Path,
    target: str,
    witness_file: Optional[Path],
    budget: Optional[int],
    run_file: Optional[Path]
) -> int:
    """
    Decide coverability in a 1-register protocol

    The abstract witness refers to the protocol with disequality tests replaced
    by any-receptions. The concrete run replays in the protocol as given.
    """
    protocol = load_protocol(protocol_file)
    result = decide_cover1(protocol, target)
    if not result.coverable:
        summary(f"{target} is not coverable")
        emit(Verdict.NOT_COVERABLE, stats=result.stats)
        return EXIT_NEGATIVE

    normalized = result.protocol
    abstract = abstract_run_to_document(normalized, result.run)
    witness = {"abstract": as_json(abstract)}
    if witness_file is not None:
        write_text(witness_file, dumps(abstract))
    if budget is not None or run_file is not None:
        run = concretize(protocol, result.run, budget)
        document = run_to_document(protocol, run)
        witness["run"] = as_json(document)
        result.stats["agents"] = len(run.agents)
        if run_file is not None:
            write_text(run_file, dumps(document))
    summary(f"{target} is coverable ({len(result.run)} abstract steps)")
    emit(Verdict.COVERABLE, witness, result.stats)
    return EXIT_OK
