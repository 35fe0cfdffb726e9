"""
Unfolding tree validation, signature and general
"""
from typing import Dict, List, Optional, Tuple

from bnra.core.local import LocalRun, local_segment, local_visits, received_values, replay_local, v_input, v_output
from bnra.core.protocol import Protocol, br, is_signature_protocol, signature_diagnostics
from bnra.core.words import show, subword
from bnra.exceptions import (
    InvalidRunException,
    InvalidTreeException,
    ProtocolValidationException,
    UnknownStateException,
)
from bnra.models import TreeViolation
from bnra.trees.decomposition import admits_decomposition
from bnra.trees.model import Decomposition, InitialValueAnnotation, TreeNode, iter_nodes, show_path


class _Collector:
    def __init__(self):
        self.violations: List[TreeViolation] = []

    def add(self, path: Tuple[int, ...], condition: str, message: str) -> None:
        self.violations.append(TreeViolation(path=show_path(path), condition=condition, message=message))


def _check_run(protocol: Protocol, path, node: TreeNode, collector: _Collector) -> bool:
    run = node.local_run
    if run.start.state != protocol.initial_state:
        collector.add(path, "run", f"local run starts in {run.start.state}, not {protocol.initial_state}")
        return False
    if len(set(run.start.values)) != len(run.start.values):
        collector.add(path, "run", "initial register values are not distinct")
        return False
    try:
        replay_local(protocol, run)
    except InvalidRunException as exc:
        collector.add(path, "run", exc.message)
        return False
    return True


def _supplier(node: TreeNode, value: int, accepts) -> Optional[int]:
    """Index of the child supplying value: the assigned one, or the first acceptable"""
    assigned = node.assignment_map().get(value)
    if assigned is not None:
        if assigned < len(node.children) and accepts(node.children[assigned]):
            return assigned
        return None
    for position, child in enumerate(node.children):
        if accepts(child):
            return position
    return None


def signature_violations(protocol: Protocol, tree: TreeNode) -> List[TreeViolation]:
    if not is_signature_protocol(protocol):
        raise ProtocolValidationException(signature_diagnostics(protocol))
    collector = _Collector()
    for path, node in iter_nodes(tree):
        if not node.is_boss:
            collector.add(path, "kind", "signature trees have boss nodes only")
            continue
        if not _check_run(protocol, path, node, collector):
            continue
        run = node.local_run
        initial = set(run.initial_values)
        received = received_values(run)
        for value in received:
            if value in initial:
                collector.add(path, "i", f"initial value {value} is received")
        output = v_output(run, node.value)
        if not subword(node.spec, output):
            collector.add(path, "ii", f"spec {show(node.spec)} is not a subword of {show(output)}")
        for value in received:
            if value in initial:
                continue
            needed = v_input(run, value)
            if _supplier(node, value, lambda child: child.is_boss and subword(needed, child.spec)) is None:
                collector.add(path, "iii", f"no child supplies {show(needed)} on value {value}")
    return collector.violations


def validate_signature_tree(protocol: Protocol, tree: TreeNode) -> None:
    """
    Check conditions (i) to (iii) of a signature unfolding tree at every node

    Raises:
        ProtocolValidationException: if the protocol is not a signature protocol
        InvalidTreeException: with every violation found
    """
    violations = signature_violations(protocol, tree)
    if violations:
        raise InvalidTreeException([violation.model_dump() for violation in violations])


def effective_annotation(node: TreeNode, value: int) -> InitialValueAnnotation:
    """The node's annotation for an initial value, or the trivial one-segment decomposition"""
    annotation = node.annotation_for(value)
    if annotation is not None:
        return annotation
    return InitialValueAnnotation(value, Decomposition.trivial(v_output(node.local_run, value)))


def segments(run: LocalRun, annotation: InitialValueAnnotation) -> Optional[List[LocalRun]]:
    bounds = annotation.bounds(len(run))
    if any(start > end for start, end in bounds):
        return None
    return [local_segment(run, start, end) for start, end in bounds]


def follower_for(node: TreeNode, annotation: InitialValueAnnotation, i: int) -> Optional[int]:
    decomposition = annotation.decomposition
    message = decomposition.messages[i - 1]
    prefix = decomposition.prefix(i)

    def accepts(child: TreeNode) -> bool:
        return (
            not child.is_boss
            and child.final_message == message
            and admits_decomposition(child.spec, prefix)
        )

    assigned = annotation.follower_for(i)
    if assigned is not None:
        return assigned if assigned < len(node.children) and accepts(node.children[assigned]) else None
    for position, child in enumerate(node.children):
        if accepts(child):
            return position
    return None


def _check_initial_value(path, node: TreeNode, value: int, collector: _Collector) -> None:
    run = node.local_run
    annotation = effective_annotation(node, value)
    decomposition = annotation.decomposition
    if len(annotation.split) != decomposition.length:
        collector.add(path, "ii", f"value {value}: {len(annotation.split)} cuts for {decomposition.length} messages")
        return
    parts = segments(run, annotation)
    if parts is None or any(cut < 0 for cut in annotation.split):
        collector.add(path, "ii", f"value {value}: split {annotation.split} is not a partition of the run")
        return
    for i, part in enumerate(parts):
        output = v_output(part, value)
        if not subword(decomposition.words[i], output):
            collector.add(
                path, "ii",
                f"value {value}, segment {i}: {show(decomposition.words[i])} is not a subword of {show(output)}"
            )
        allowed = set(decomposition.allowed(i))
        received = v_input(part, value)
        if any(letter not in allowed for letter in received):
            collector.add(path, "ii", f"value {value}, segment {i}: receives {show(received)}")
    for i in range(1, decomposition.length + 1):
        if follower_for(node, annotation, i) is None:
            collector.add(
                path, "ii",
                f"value {value}: no follower child for {decomposition.messages[i - 1]}"
            )


def tree_violations(protocol: Protocol, tree: TreeNode) -> List[TreeViolation]:
    collector = _Collector()
    for path, node in iter_nodes(tree):
        if not _check_run(protocol, path, node, collector):
            continue
        run = node.local_run
        initial = set(run.initial_values)

        # (i) non-initial values other than the node's own come from boss children
        for value in received_values(run):
            if value in initial or value == node.value:
                continue
            needed = v_input(run, value)
            if _supplier(node, value, lambda child: child.is_boss and subword(needed, child.spec)) is None:
                collector.add(path, "i", f"no boss child supplies {show(needed)} on value {value}")

        # (ii) initial values are split along their decompositions
        for value in dict.fromkeys(run.initial_values):
            _check_initial_value(path, node, value, collector)

        if node.is_boss:
            if node.value not in initial:
                collector.add(path, "iv", f"boss value {node.value} is not an initial value")
                continue
            decomposition = effective_annotation(node, node.value).decomposition
            if not admits_decomposition(node.spec, decomposition):
                collector.add(path, "iv", f"bw {show(node.spec)} is not in the language of its decomposition")
        else:
            if node.value in initial:
                collector.add(path, "iii", f"follower value {node.value} is an initial value")
                continue
            received = v_input(run, node.value)
            if not subword(received, node.spec):
                collector.add(path, "iii", f"receives {show(received)}, more than fw {show(node.spec)}")
            if node.final_message not in v_output(run, node.value):
                collector.add(path, "iii", f"never broadcasts {node.final_message} with value {node.value}")
    return collector.violations


def validate_tree(protocol: Protocol, tree: TreeNode) -> None:
    """
    Check conditions (i) to (iv) of a general unfolding tree at every node

    Initial values without an annotation use the one-segment decomposition
    made of their whole v-output. Children are taken from the explicit
    assignments when present, otherwise the first suitable child is used.

    Raises:
        InvalidTreeException: with every violation found
    """
    violations = tree_violations(protocol, tree)
    if violations:
        raise InvalidTreeException([violation.model_dump() for violation in violations])


def is_coverability_witness(protocol: Protocol, tree: TreeNode, target: str) -> bool:
    return tree.is_boss and local_visits(tree.local_run, target)


def uses_signature_rules(protocol: Protocol, tree: TreeNode) -> bool:
    """Boss-only trees over signature protocols are checked with the signature conditions"""
    return is_signature_protocol(protocol) and all(node.is_boss for _, node in iter_nodes(tree))


def check_tree(protocol: Protocol, tree: TreeNode) -> None:
    if uses_signature_rules(protocol, tree):
        validate_signature_tree(protocol, tree)
    else:
        validate_tree(protocol, tree)


def violation_summary(violations: List[Dict]) -> Dict[str, int]:
    summary: Dict[str, int] = {}
    for violation in violations:
        summary[violation["condition"]] = summary.get(violation["condition"], 0) + 1
    return summary


def augment_with_final_message(protocol: Protocol, target: str) -> Tuple[Protocol, str]:
    """
    Add a fresh message m_f broadcast in a loop on the target state

    A tree covers the target in the original protocol iff some tree of the
    augmented one has a root whose bw is m_f.
    """
    if target not in protocol.states:
        raise UnknownStateException(target)
    final = "m_f"
    while final in protocol.messages:
        final += "'"
    augmented = protocol.model_copy(update={
        "messages": protocol.messages + (final,),
        "transitions": protocol.transitions + (br(target, final, 1, target),),
    })
    return augmented, final
