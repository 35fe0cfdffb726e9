"""
Reduction commands: 3SAT, lossy channel systems and Minsky machines
"""
from pathlib import Path
from typing import Optional

import click

from bnra.commands.common import INPUT, OUTPUT, emit, read_text, summary, write_text
from bnra.core.protocol import Protocol
from bnra.core.semantics import Run
from bnra.exceptions import EXIT_NEGATIVE, EXIT_OK
from bnra.format.codec import load_lcs, load_minsky, serialize_run
from bnra.format.dsl import print_protocol
from bnra.middleware.error_handler import handle_errors
from bnra.models import Verdict
from bnra.reduce.lcs import lcs_reach_bounded, lcs_to_protocol, lcs_witness_to_run
from bnra.reduce.minsky import minsky_exec_to_run, minsky_run_bounded, minsky_to_protocol
from bnra.reduce.sat import parse_dimacs, sat_to_protocol, sat_witness_run


@click.group("reduce")
def reduce() -> None:
    """Build protocols from 3SAT formulas, lossy channel systems and Minsky machines"""


def _write_protocol(out_file: Path, protocol: Protocol, target: str) -> dict:
    write_text(out_file, print_protocol(protocol))
    return {
        "target": target,
        "states": len(protocol.states),
        "transitions": len(protocol.transitions),
        "registers": protocol.registers,
    }


def _finish(protocol: Protocol, run: Optional[Run], run_file: Optional[Path], stats: dict) -> int:
    """Write the witness run if one was requested and found"""
    if run_file is None:
        emit(Verdict.OK, stats=stats)
        return EXIT_OK
    if run is None:
        summary("no witness within the bounds")
        emit(Verdict.NOT_FOUND, stats=stats)
        return EXIT_NEGATIVE
    write_text(run_file, serialize_run(protocol, run))
    stats["agents"] = len(run.agents)
    stats["steps"] = len(run)
    emit(Verdict.FOUND, stats=stats)
    return EXIT_OK


@reduce.command("sat")
@click.argument("cnf_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@click.option("--witness-run", "run_file", type=OUTPUT, default=None, help="Write a run covering the target here")
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Agent budget of the witness run")
@handle_errors
def sat(cnf_file: Path, out_file: Path, run_file: Optional[Path], budget: Optional[int]) -> int:
    """
    1-register protocol whose target is coverable iff the DIMACS formula is satisfiable

    The witness run comes from the 1-register decider, so a missing witness
    means the formula is unsatisfiable.
    """
    formula = parse_dimacs(read_text(cnf_file))
    protocol, target = sat_to_protocol(formula)
    stats = _write_protocol(out_file, protocol, target)
    run = sat_witness_run(formula, budget) if run_file is not None else None
    return _finish(protocol, run, run_file, stats)


@reduce.command("lcs")
@click.argument("lcs_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@click.option("--witness-run", "run_file", type=OUTPUT, default=None, help="Write a run covering the target here")
@click.option("--max-steps", type=click.IntRange(min=0), default=None, help="Path length bound")
@click.option("--max-channel", type=click.IntRange(min=0), default=None, help="Channel length bound")
@handle_errors
def lcs(
    lcs_file: Path,
    out_file: Path,
    run_file: Optional[Path],
    max_steps: Optional[int],
    max_channel: Optional[int]
) -> int:
    """Signature protocol whose target is coverable iff the final location is reachable"""
    system = load_lcs(read_text(lcs_file))
    protocol, target = lcs_to_protocol(system)
    stats = _write_protocol(out_file, protocol, target)
    run = None
    if run_file is not None:
        path = lcs_reach_bounded(system, max_channel, max_steps)
        run = lcs_witness_to_run(protocol, system, path) if path is not None else None
    return _finish(protocol, run, run_file, stats)


@reduce.command("minsky")
@click.argument("machine_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, required=True, help="Write the protocol here")
@click.option("--witness-run", "run_file", type=OUTPUT, default=None, help="Write a run ending with every agent in the target")
@click.option("--max-steps", type=click.IntRange(min=0), default=None, help="Execution length bound")
@click.option("--max-counter", type=click.IntRange(min=0), default=None, help="Counter value bound")
@handle_errors
def minsky(
    machine_file: Path,
    out_file: Path,
    run_file: Optional[Path],
    max_steps: Optional[int],
    max_counter: Optional[int]
) -> int:
    """2-register protocol where every agent can reach the target iff the machine halts"""
    machine = load_minsky(read_text(machine_file))
    protocol, target = minsky_to_protocol(machine)
    stats = _write_protocol(out_file, protocol, target)
    run = None
    if run_file is not None:
        execution = minsky_run_bounded(machine, max_steps, max_counter)
        run = minsky_exec_to_run(protocol, machine, execution) if execution is not None else None
    return _finish(protocol, run, run_file, stats)
