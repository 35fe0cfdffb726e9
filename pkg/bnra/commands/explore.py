"""
Bounded exploration command
"""
from pathlib import Path
from typing import Optional

import click

from bnra.commands.common import INPUT, OUTPUT, as_json, emit, load_protocol, summary, write_text
from bnra.config import settings
from bnra.core.configuration import CanonicalMode
from bnra.explore.search import ExploreParams, ExploreStatus, bounded_cover, bounded_target
from bnra.exceptions import EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK
from bnra.format.codec import dumps, run_to_document
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict

_EXIT = {
    ExploreStatus.FOUND: (Verdict.FOUND, EXIT_OK),
    ExploreStatus.NOT_FOUND: (Verdict.NOT_FOUND, EXIT_NEGATIVE),
    ExploreStatus.BUDGET_EXCEEDED: (Verdict.BUDGET_EXCEEDED, EXIT_BUDGET),
}


@click.command("explore")
@click.argument("protocol_file", type=INPUT)
@click.option("--target", "-t", required=True, help="State to cover")
@click.option("--all-target", is_flag=True, help="Require every agent to end in the target")
@click.option("--agents", "-n", type=click.IntRange(min=1), required=True, help="Number of agents")
@click.option("--depth", "-d", type=click.IntRange(min=0), required=True, help="Maximum run length")
@click.option("--max-states", type=click.IntRange(min=1), default=None, help="Visited-set cap")
@click.option(
    "--canonical",
    type=click.Choice([mode.value for mode in CanonicalMode]),
    default=None,
    help="Canonicalization of visited configurations"
)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Frontier expansion threads")
@click.option("--witness", "witness_file", type=OUTPUT, default=None, help="Write the witness run here")
@handle_errors
def explore(
    protocol_file: Path,
    target: str,
    all_target: bool,
    agents: int,
    depth: int,
    max_states: Optional[int],
    canonical: Optional[str],
    workers: Optional[int],
    witness_file: Optional[Path]
) -> int:
    """
    Search runs of bounded length with a fixed number of agents

    A negative verdict only means nothing was found within the bounds.
    Witnesses are identical for every worker count.
    """
    protocol = load_protocol(protocol_file)
    params = ExploreParams(
        agents=agents,
        max_depth=depth,
        max_states=max_states if max_states is not None else settings.explore_max_states,
        canonical_mode=CanonicalMode(canonical or settings.explore_canonical_mode),
        workers=workers if workers is not None else settings.explore_workers,
    )
    search = bounded_target if all_target else bounded_cover
    result = search(protocol, target, params)
    verdict, code = _EXIT[result.status]

    witness = None
    if result.run is not None:
        document = run_to_document(protocol, result.run)
        witness = as_json(document)
        if witness_file is not None:
            write_text(witness_file, dumps(document))
    summary(f"{verdict.value}: {result.stats.get('states', 0)} states explored")
    emit(verdict, witness, result.stats)
    return code
