"""
Unfolding tree commands
"""
from pathlib import Path
from typing import Callable, Optional

import click

from bnra.commands.common import INPUT, OUTPUT, as_json, emit, load_protocol, read_text, summary, write_text
from bnra.core.protocol import Protocol
from bnra.core.semantics import PartialRun
from bnra.exceptions import EXIT_NEGATIVE, EXIT_OK, InvalidTreeException
from bnra.format.codec import deserialize_run, deserialize_tree, dumps, node_to_document, run_to_document
from bnra.middleware.error_handler import handle_errors
from bnra.models import TreeDocument, Verdict
from bnra.trees.compose import tree_to_run
from bnra.trees.extract import run_to_tree_signature
from bnra.trees.minimize import minimize_tree
from bnra.trees.model import TreeNode, tree_size
from bnra.trees.validate import check_tree, is_coverability_witness, violation_summary


@click.group("tree")
def tree() -> None:
    """Validate, compose, extract and minimize unfolding trees"""


def _load(protocol_file: Path, tree_file: Path):
    protocol = load_protocol(protocol_file)
    return protocol, deserialize_tree(protocol, read_text(tree_file))


def _checked(protocol: Protocol, node: TreeNode, on_valid: Callable[[], int]) -> int:
    try:
        check_tree(protocol, node)
    except InvalidTreeException as exc:
        violations = exc.details["violations"]
        for violation in violations:
            summary(f"{violation['path']}: ({violation['condition']}) {violation['message']}")
        emit(Verdict.INVALID, violations, violation_summary(violations))
        return EXIT_NEGATIVE
    return on_valid()


def _tree_document(protocol: Protocol, node: TreeNode) -> TreeDocument:
    return TreeDocument(protocol=protocol.name, root=node_to_document(protocol, node))


@tree.command("validate")
@click.argument("protocol_file", type=INPUT)
@click.argument("tree_file", type=INPUT)
@handle_errors
def validate(protocol_file: Path, tree_file: Path) -> int:
    """
    Check every node of a tree

    Boss-only trees over signature protocols use the signature conditions,
    all other trees the general ones. Violations name the node path.
    """
    protocol, node = _load(protocol_file, tree_file)

    def valid() -> int:
        summary(f"valid: {tree_size(node)} nodes")
        emit(Verdict.VALID, stats={"nodes": tree_size(node)})
        return EXIT_OK

    return _checked(protocol, node, valid)


@tree.command("witness")
@click.argument("protocol_file", type=INPUT)
@click.argument("tree_file", type=INPUT)
@click.option("--target", "-t", required=True, help="State the root should cover")
@handle_errors
def witness(protocol_file: Path, tree_file: Path, target: str) -> int:
    """Check that a valid tree witnesses coverability of a state"""
    protocol, node = _load(protocol_file, tree_file)

    def decide() -> int:
        if is_coverability_witness(protocol, node, target):
            summary(f"tree witnesses coverability of {target}")
            emit(Verdict.COVERABLE, stats={"nodes": tree_size(node)})
            return EXIT_OK
        summary(f"root does not cover {target}")
        emit(Verdict.INVALID, stats={"nodes": tree_size(node)})
        return EXIT_NEGATIVE

    return _checked(protocol, node, decide)


@tree.command("to-run")
@click.argument("protocol_file", type=INPUT)
@click.argument("tree_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, default=None, help="Write the run here")
@handle_errors
def to_run(protocol_file: Path, tree_file: Path, out_file: Optional[Path]) -> int:
    """Compose a valid tree into a run (partial run for a follower root)"""
    protocol, node = _load(protocol_file, tree_file)
    run = tree_to_run(protocol, node)
    document = run_to_document(protocol, run)
    if out_file is not None:
        write_text(out_file, dumps(document))
    summary(f"composed {len(run.agents)} agents, {len(run)} steps")
    emit(Verdict.OK, as_json(document), {
        "agents": len(run.agents),
        "steps": len(run),
        "partial": isinstance(run, PartialRun),
    })
    return EXIT_OK


@tree.command("from-run")
@click.argument("protocol_file", type=INPUT)
@click.argument("run_file", type=INPUT)
@click.option("--agent", "-a", type=int, required=True, help="Agent labelling the root")
@click.option("--value", "-v", type=int, required=True, help="Root value")
@click.option("--out", "out_file", type=OUTPUT, default=None, help="Write the tree here")
@handle_errors
def from_run(protocol_file: Path, run_file: Path, agent: int, value: int, out_file: Optional[Path]) -> int:
    """Extract the unfolding tree of an agent and value from a signature run"""
    protocol = load_protocol(protocol_file)
    run = deserialize_run(protocol, read_text(run_file))
    if isinstance(run, PartialRun):
        raise click.UsageError("tree extraction needs a complete run")
    node = run_to_tree_signature(protocol, run, agent, value)
    document = _tree_document(protocol, node)
    if out_file is not None:
        write_text(out_file, dumps(document))
    summary(f"extracted {tree_size(node)} nodes")
    emit(Verdict.OK, as_json(document), {"nodes": tree_size(node)})
    return EXIT_OK


@tree.command("minimize")
@click.argument("protocol_file", type=INPUT)
@click.argument("tree_file", type=INPUT)
@click.option("--out", "out_file", type=OUTPUT, default=None, help="Write the minimized tree here")
@handle_errors
def minimize(protocol_file: Path, tree_file: Path, out_file: Optional[Path]) -> int:
    """Shorten branches of a valid tree until no rule applies"""
    protocol, node = _load(protocol_file, tree_file)

    def shrink() -> int:
        smaller = minimize_tree(node)
        document = _tree_document(protocol, smaller)
        if out_file is not None:
            write_text(out_file, dumps(document))
        summary(f"{tree_size(node)} -> {tree_size(smaller)} nodes")
        emit(Verdict.OK, as_json(document), {
            "nodes_before": tree_size(node),
            "nodes_after": tree_size(smaller),
        })
        return EXIT_OK

    return _checked(protocol, node, shrink)
