"""
Signature unfolding trees from runs
"""
from typing import Dict, List, Tuple

from bnra.core.local import LocalRun, LocalStep
from bnra.core.protocol import Protocol, is_signature_protocol, signature_diagnostics
from bnra.core.semantics import Run, replay, step_value, trace
from bnra.exceptions import InvalidRunException, ProtocolValidationException
from bnra.trees.model import TreeNode, boss


def run_to_tree_signature(protocol: Protocol, run: Run, agent: int, value: int) -> TreeNode:
    """
    Unfolding tree for an agent of a run and a value

    The root follows the agent's local run and its spec is the v-output of
    the agent. Built by induction on the run: a reception of (m, v') from a'
    attaches the tree of a' for v' up to that step, extended with the broadcast.
    Only the child built from the last reception of each value is kept.

    Raises:
        ProtocolValidationException: if the protocol is not a signature protocol
        InvalidRunException: if the run does not replay or the agent is unknown
    """
    if not is_signature_protocol(protocol):
        raise ProtocolValidationException(signature_diagnostics(protocol))
    replay(protocol, run)
    if agent not in run.initial:
        raise InvalidRunException(0, f"agent {agent} is not in the run")

    configurations = trace(run.initial, run.steps)
    memo: Dict[Tuple[int, int, int], TreeNode] = {}

    def involving(length: int, who: int) -> int:
        """Length of the longest prefix not longer than length whose last step involves who"""
        while length > 0:
            step = run.steps[length - 1]
            if step.broadcaster == who or step.reception_of(who) is not None:
                return length
            length -= 1
        return 0

    def extract(length: int, who: int, v: int) -> TreeNode:
        length = involving(length, who)
        key = (length, who, v)
        if key in memo:
            return memo[key]
        if length == 0:
            node = boss(LocalRun(run.initial.local(who)), v)
            memo[key] = node
            return node

        step = run.steps[length - 1]
        before = extract(length - 1, who, v)
        carried = step_value(configurations[length - 1], step)
        if step.broadcaster == who:
            spec = before.spec + ((step.message,) if carried == v else ())
            node = _replace(before, before.local_run.extended(LocalStep(step.transition)), spec)
        else:
            supplier = extract(length - 1, step.broadcaster, carried)
            child = _replace(
                supplier,
                supplier.local_run.extended(LocalStep(step.transition)),
                supplier.spec + (step.message,)
            )
            extended = before.local_run.extended(LocalStep(step.reception_of(who), carried))
            node = _attach(_replace(before, extended, before.spec), carried, child)
        memo[key] = node
        return node

    return extract(len(run.steps), agent, value)


def _replace(node: TreeNode, local_run: LocalRun, spec) -> TreeNode:
    return boss(local_run, node.value, spec, node.children, assignments=node.assignments)


def _attach(node: TreeNode, value: int, child: TreeNode) -> TreeNode:
    """Attach child as the supplier of value, replacing an earlier supplier"""
    assignments = node.assignment_map()
    children: List[TreeNode] = list(node.children)
    if value in assignments:
        children[assignments[value]] = child
    else:
        assignments[value] = len(children)
        children.append(child)
    return boss(node.local_run, node.value, node.spec, children, assignments=tuple(sorted(assignments.items())))
