"""
Tree minimization: specification tightening and branch shortening
"""
from typing import Dict, List, Optional, Tuple

import structlog

from bnra.core.local import LocalRun, iter_local, received_values, v_input, v_output
from bnra.core.words import Word, subword
from bnra.trees.model import NodeKind, TreeNode, iter_nodes, tree_size

logger = structlog.get_logger(__name__)


def _shortest_prefix(run: LocalRun, value: int, spec: Word) -> LocalRun:
    for length in range(len(run) + 1):
        prefix = run.prefix(length)
        if subword(spec, v_output(prefix, value)):
            return prefix
    return run


def _until_final(run: LocalRun, value: int, message: str) -> LocalRun:
    for position, (local, step) in enumerate(iter_local(run)):
        transition = step.transition
        if (
            transition.is_broadcast
            and transition.op.message == message
            and local.value(transition.op.register) == value
        ):
            return run.prefix(position + 1)
    return run


def _tighten(node: TreeNode, required: Optional[Word]) -> TreeNode:
    """
    Shrink a node to what its parent needs and drop children nothing asks for

    required is None at the root and for children serving several values,
    whose specification is kept.
    """
    if node.annotations:
        return node.with_children(_tighten(child, None) for child in node.children)

    run, spec = node.local_run, node.spec
    if node.kind == NodeKind.FOLLOWER:
        run = _until_final(run, node.value, node.final_message)
        spec = v_input(run, node.value)
    elif required is not None:
        spec = tuple(required)
        run = _shortest_prefix(run, node.value, spec)

    initial = set(run.initial_values)
    assigned = node.assignment_map()
    served: Dict[int, List[Tuple[int, Word]]] = {}
    for value in received_values(run):
        if value in initial or (node.kind == NodeKind.FOLLOWER and value == node.value):
            continue
        needed = v_input(run, value)
        candidates = [assigned[value]] if value in assigned else range(len(node.children))
        index = next(
            (i for i in candidates if node.children[i].is_boss and subword(needed, node.children[i].spec)),
            None
        )
        if index is None:
            return node.with_children(_tighten(child, None) for child in node.children)
        served.setdefault(index, []).append((value, needed))

    children: List[TreeNode] = []
    assignments: Dict[int, int] = {}
    for index, uses in served.items():
        requirement = uses[0][1] if len(uses) == 1 else None
        for value, _ in uses:
            assignments[value] = len(children)
        children.append(_tighten(node.children[index], requirement))

    return TreeNode(
        node.kind,
        run,
        node.value,
        spec,
        final_message=node.final_message,
        assignments=tuple(sorted(assignments.items())),
        children=tuple(children)
    )


def _replaceable(ancestor: TreeNode, descendant: TreeNode) -> bool:
    if ancestor.kind != descendant.kind:
        return False
    if ancestor.is_boss:
        return subword(ancestor.spec, descendant.spec)
    return ancestor.final_message == descendant.final_message and subword(descendant.spec, ancestor.spec)


def _replace_at(node: TreeNode, path: Tuple[int, ...], replacement: TreeNode) -> TreeNode:
    if not path:
        return replacement
    children = list(node.children)
    children[path[0]] = _replace_at(children[path[0]], path[1:], replacement)
    return node.with_children(children)


def _shorten_once(tree: TreeNode) -> Optional[TreeNode]:
    for path, ancestor in iter_nodes(tree):
        if not path:
            continue
        for inner, descendant in iter_nodes(ancestor):
            if inner and _replaceable(ancestor, descendant):
                return _replace_at(tree, path, descendant)
    return None


def minimize_tree(tree: TreeNode) -> TreeNode:
    """
    Shrink a valid tree while keeping it valid

    Non-root nodes without decomposition annotations get the specification
    their parent needs and the shortest local run meeting it. A non-root node
    is replaced by a descendant of the same kind whose specification serves
    at least as well. Both rules are repeated until neither applies.
    """
    before = tree_size(tree)
    current = _tighten(tree, None)
    while True:
        shortened = _shorten_once(current)
        if shortened is None:
            break
        current = _tighten(shortened, None)
    logger.info("tree_minimized", nodes_before=before, nodes_after=tree_size(current))
    return current
