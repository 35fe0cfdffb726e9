"""
Witness replay commands
"""
from pathlib import Path
from typing import Optional

import click

from bnra.commands.common import INPUT, emit, load_protocol, read_text, summary
from bnra.core.semantics import PartialRun, replay, replay_partial
from bnra.cover1.abstraction import covers_abstract, remove_disequality, replay_abstract
from bnra.exceptions import EXIT_NEGATIVE, EXIT_OK, InvalidRunException
from bnra.format.codec import configuration_to_documents, deserialize_abstract_run, deserialize_run
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict


def _invalid(exc: InvalidRunException) -> int:
    summary(f"invalid at step {exc.index}: {exc.reason}")
    emit(Verdict.INVALID, stats={"index": exc.index, "reason": exc.reason})
    return EXIT_NEGATIVE


@click.command("replay")
@click.argument("protocol_file", type=INPUT)
@click.argument("run_file", type=INPUT)
@click.option("--normalized", is_flag=True, help="Decode against the disequality-free protocol")
@click.option("--covers", "covered", default=None, help="Also require the final configuration to cover this state")
@click.option("--all-in", "all_in", default=None, help="Also require every agent to end in this state")
@handle_errors
def replay_command(
    protocol_file: Path,
    run_file: Path,
    normalized: bool,
    covered: Optional[str],
    all_in: Optional[str]
) -> int:
    """Replay a run or partial run and print its final configuration"""
    protocol = load_protocol(protocol_file)
    if normalized:
        protocol = remove_disequality(protocol)
    run = deserialize_run(protocol, read_text(run_file))
    try:
        if isinstance(run, PartialRun):
            final = replay_partial(protocol, run)
        else:
            final = replay(protocol, run)
    except InvalidRunException as exc:
        return _invalid(exc)

    stats = {"steps": len(run), "agents": len(run.agents)}
    witness = [document.model_dump() for document in configuration_to_documents(final)]
    if covered is not None and not final.covers(covered):
        summary(f"final configuration does not cover {covered}")
        emit(Verdict.INVALID, witness, stats)
        return EXIT_NEGATIVE
    if all_in is not None and not final.all_in(all_in):
        summary(f"not every agent ends in {all_in}")
        emit(Verdict.INVALID, witness, stats)
        return EXIT_NEGATIVE
    summary(f"valid: {len(run)} steps")
    emit(Verdict.VALID, witness, stats)
    return EXIT_OK


@click.command("replay-abstract")
@click.argument("protocol_file", type=INPUT)
@click.argument("run_file", type=INPUT)
@click.option("--covers", "covered", default=None, help="Also require the final abstract configuration to cover this state")
@handle_errors
def replay_abstract_command(protocol_file: Path, run_file: Path, covered: Optional[str]) -> int:
    """Check an abstract run of a 1-register protocol step by step"""
    protocol = remove_disequality(load_protocol(protocol_file))
    run = deserialize_abstract_run(protocol, read_text(run_file))
    try:
        final = replay_abstract(protocol, run)
    except InvalidRunException as exc:
        return _invalid(exc)

    witness = {"S": sorted(final.covered), "boss": final.boss, "K": sorted(final.clique)}
    stats = {"steps": len(run)}
    if covered is not None and not covers_abstract(final, covered):
        summary(f"final abstract configuration does not cover {covered}")
        emit(Verdict.INVALID, witness, stats)
        return EXIT_NEGATIVE
    summary(f"valid: {len(run)} abstract steps")
    emit(Verdict.VALID, witness, stats)
    return EXIT_OK
