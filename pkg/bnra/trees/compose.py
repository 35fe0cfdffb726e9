"""
Composition of an unfolding tree into a run

Every node is turned into a fragment: a partial run over fresh agents where
the node's agent follows its local run. Receptions on non-initial values are
matched against broadcasts of a copy of the boss child supplying them. Receptions
on an initial value are matched against broadcasts of follower copies, each copy
receiving its own prompt from the node's broadcasts or from further copies,
most recent message of the decomposition first.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import structlog

from bnra.core.configuration import Configuration, LocalConfiguration
from bnra.core.local import iter_local, received_values, v_input
from bnra.core.protocol import Protocol, Transition
from bnra.core.semantics import PartialRun, Run, StepDescriptor, UnmatchedReception, replay_partial
from bnra.core.words import subword, subword_embedding
from bnra.exceptions import InternalInvariantFailure, InvalidRunException
from bnra.trees.decomposition import decomposition_witness
from bnra.trees.model import InitialValueAnnotation, TreeNode, tree_size
from bnra.trees.validate import check_tree, effective_annotation, follower_for

logger = structlog.get_logger(__name__)


class _Item:
    """A mutable step; unmatched receptions have no broadcaster, markers carry (value, segment)"""
    __slots__ = ("broadcaster", "transition", "message", "value", "receptions", "marker")

    def __init__(
        self,
        broadcaster: Optional[int] = None,
        transition: Optional[Transition] = None,
        message: Optional[str] = None,
        value: Optional[int] = None,
        receptions: Optional[Dict[int, Transition]] = None,
        marker: Optional[Tuple[int, int]] = None
    ):
        self.broadcaster = broadcaster
        self.transition = transition
        self.message = message
        self.value = value
        self.receptions = dict(receptions or {})
        self.marker = marker

    @property
    def is_unmatched(self) -> bool:
        return self.broadcaster is None and self.marker is None

    @property
    def is_broadcast(self) -> bool:
        return self.broadcaster is not None and self.transition.is_broadcast

    def renamed(self, agents: Dict[int, int], values: Dict[int, int]) -> "_Item":
        return _Item(
            agents.get(self.broadcaster) if self.broadcaster is not None else None,
            self.transition,
            self.message,
            values.get(self.value, self.value) if self.value is not None else None,
            {agents[agent]: transition for agent, transition in self.receptions.items()},
            self.marker
        )


@dataclass
class _Fragment:
    initial: Dict[int, LocalConfiguration]
    items: List[_Item]
    agent: int
    value: int

    def rename_value(self, old: int, new: int) -> None:
        for agent, local in self.initial.items():
            if old in local.values:
                values = tuple(new if v == old else v for v in local.values)
                self.initial[agent] = LocalConfiguration(local.state, values)
        for item in self.items:
            if item.value == old:
                item.value = new
        if self.value == old:
            self.value = new

    def position(self, item: _Item) -> int:
        for position, candidate in enumerate(self.items):
            if candidate is item:
                return position
        raise InternalInvariantFailure("step vanished during composition")

    def absorb(self, other: "_Fragment") -> None:
        self.initial.update(other.initial)


class _Composer:
    def __init__(self, protocol: Protocol):
        self.protocol = protocol
        self.next_agent = 0
        self.next_value = 0
        self.built: Dict[int, _Fragment] = {}

    def fresh_agent(self) -> int:
        self.next_agent += 1
        return self.next_agent - 1

    def fresh_value(self) -> int:
        self.next_value += 1
        return self.next_value - 1

    # Fragments
    def copy_of(self, node: TreeNode) -> _Fragment:
        """A fresh copy of the node's fragment; built fragments are never mutated"""
        key = id(node)
        if key not in self.built:
            self.built[key] = self.build(node)
        original = self.built[key]
        agents = {agent: self.fresh_agent() for agent in original.initial}
        values: Dict[int, int] = {}
        for local in original.initial.values():
            for value in local.values:
                values.setdefault(value, self.fresh_value())
        for item in original.items:
            if item.value is not None:
                values.setdefault(item.value, self.fresh_value())
        values.setdefault(original.value, self.fresh_value())
        return _Fragment(
            {
                agents[agent]: LocalConfiguration(local.state, tuple(values[v] for v in local.values))
                for agent, local in original.initial.items()
            },
            [item.renamed(agents, values) for item in original.items],
            agents[original.agent],
            values[original.value]
        )

    def build(self, node: TreeNode) -> _Fragment:
        run = node.local_run
        agent = self.fresh_agent()
        values: Dict[int, int] = {}
        for value in list(run.initial_values) + received_values(run) + [node.value]:
            values.setdefault(value, self.fresh_value())

        annotations = [effective_annotation(node, value) for value in dict.fromkeys(run.initial_values)]
        cuts: Dict[int, List[_Item]] = {}
        for annotation in annotations:
            for segment, cut in enumerate(annotation.split, start=1):
                cuts.setdefault(cut, []).append(_Item(marker=(values[annotation.value], segment)))

        items: List[_Item] = []
        for position, (local, step) in enumerate(iter_local(run)):
            items.extend(cuts.get(position, []))
            transition = step.transition
            if transition.is_reception:
                items.append(_Item(
                    message=transition.op.message,
                    value=values[step.value],
                    receptions={agent: transition}
                ))
            elif transition.is_broadcast:
                carried = values[local.value(transition.op.register)]
                items.append(_Item(agent, transition, transition.op.message, carried))
            else:
                items.append(_Item(agent, transition))
        items.extend(cuts.get(len(run), []))

        host = _Fragment(
            {agent: LocalConfiguration(run.start.state, tuple(values[v] for v in run.start.values))},
            items,
            agent,
            values[node.value]
        )

        initial = set(run.initial_values)
        for value in received_values(run):
            if value in initial or (not node.is_boss and value == node.value):
                continue
            self.supply_from_boss(node, host, value, values[value])

        for annotation in annotations:
            extend = node.is_boss and annotation.value == node.value
            self.supply_from_followers(node, host, annotation, values[annotation.value], extend)

        host.items = [item for item in host.items if item.marker is None]
        if not node.is_boss:
            self.cut_after_final(node, host)
        return host

    # Non-initial values
    def supply_from_boss(self, node: TreeNode, host: _Fragment, original: int, value: int) -> None:
        needed = v_input(node.local_run, original)
        assigned = node.assignment_map().get(original)
        candidates = [assigned] if assigned is not None else range(len(node.children))
        index = next(
            (i for i in candidates if node.children[i].is_boss and subword(needed, node.children[i].spec)),
            None
        )
        if index is None:
            raise InternalInvariantFailure("no boss child for a received value", {"value": original})

        child = self.copy_of(node.children[index])
        child.rename_value(child.value, value)
        needs = [item for item in host.items if item.is_unmatched and item.value == value]
        supplies = [item for item in child.items if item.is_broadcast and item.value == value]
        embedding = subword_embedding([item.message for item in needs], [item.message for item in supplies])
        if embedding is None:
            raise InternalInvariantFailure("boss copy does not broadcast what is received", {"value": original})

        partner = {id(need): supplies[position] for need, position in zip(needs, embedding)}
        merged: List[_Item] = []
        cursor = 0
        for item in host.items:
            target = partner.get(id(item))
            if target is None:
                merged.append(item)
                continue
            stop = child.position(target)
            merged.extend(child.items[cursor:stop])
            target.receptions.update(item.receptions)
            merged.append(target)
            cursor = stop + 1
        merged.extend(child.items[cursor:])
        host.items = merged
        host.absorb(child)

    # Initial values
    def supply_from_followers(
        self,
        node: TreeNode,
        host: _Fragment,
        annotation: InitialValueAnnotation,
        value: int,
        extend: bool
    ) -> None:
        decomposition = annotation.decomposition
        markers = {item.marker[1]: item for item in host.items if item.marker and item.marker[0] == value}

        def segment_start(segment: int) -> int:
            return 0 if segment == 0 else host.position(markers[segment]) + 1

        anchors: List[List[_Item]] = []
        for segment, w in enumerate(decomposition.words):
            end = len(host.items) if segment == decomposition.length else host.position(markers[segment + 1])
            own = [
                item for item in host.items[segment_start(segment):end]
                if item.is_broadcast and item.broadcaster == host.agent and item.value == value
            ]
            embedding = subword_embedding(w, [item.message for item in own])
            if embedding is None:
                raise InternalInvariantFailure("segment word is not broadcast", {"segment": segment})
            anchors.append([own[position] for position in embedding])

        def follower_copy(i: int) -> Tuple[_Fragment, List]:
            index = follower_for(node, annotation, i)
            if index is None:
                raise InternalInvariantFailure("no follower child", {"message": decomposition.messages[i - 1]})
            copy = self.copy_of(node.children[index])
            copy.rename_value(copy.value, value)
            prompt = [item.message for item in copy.items if item.is_unmatched and item.value == value]
            witness = decomposition_witness(prompt, decomposition.prefix(i))
            if witness is None:
                raise InternalInvariantFailure("follower prompt outside its decomposition", {"message": i})
            return copy, witness

        def place(copy: _Fragment, witness: List, target: Optional[_Item], floor: Optional[_Item]) -> _Item:
            at = 0
            explanations = iter(witness)
            for item in copy.items[:-1]:
                if item.is_unmatched and item.value == value:
                    explanation = next(explanations)
                    if explanation[0] == "match":
                        anchor = anchors[explanation[1]][explanation[2]]
                        where = host.position(anchor)
                        if where < at:
                            raise InternalInvariantFailure("follower prompt out of order")
                        anchor.receptions.update(item.receptions)
                        at = where + 1
                        continue
                    at = max(at, segment_start(explanation[1]))
                host.items.insert(at, item)
                at += 1
            final = copy.items[-1]
            host.absorb(copy)
            if target is None:
                host.items.insert(max(at, host.position(floor) + 1 if floor is not None else 0), final)
                return final
            where = host.position(target)
            if where < at:
                raise InternalInvariantFailure("follower answer after its request")
            final.receptions.update(target.receptions)
            host.items[where] = final
            return final

        if extend:
            witness = decomposition_witness(node.spec, decomposition)
            if witness is None:
                raise InternalInvariantFailure("boss word outside its decomposition")
            last: Optional[_Item] = None
            for letter, explanation in zip(node.spec, witness):
                if explanation[0] == "match":
                    last = anchors[explanation[1]][explanation[2]]
                    continue
                copy, prompt_witness = follower_copy(decomposition.messages.index(letter) + 1)
                segment = explanation[1]
                floor = last
                if segment > 0 and (floor is None or host.position(floor) < host.position(markers[segment])):
                    floor = markers[segment]
                last = place(copy, prompt_witness, None, floor)

        def rank(item: _Item) -> int:
            if item.message not in decomposition.messages:
                raise InternalInvariantFailure("received letter outside the decomposition", {"message": item.message})
            return decomposition.messages.index(item.message) + 1

        while True:
            needs = [item for item in host.items if item.is_unmatched and item.value == value]
            if not needs:
                return
            need = max(needs, key=rank)
            copy, witness = follower_copy(rank(need))
            place(copy, witness, need, None)

    def cut_after_final(self, node: TreeNode, host: _Fragment) -> None:
        for position, item in enumerate(host.items):
            if (
                item.broadcaster == host.agent
                and item.is_broadcast
                and item.message == node.final_message
                and item.value == host.value
            ):
                host.items = host.items[:position + 1]
                return
        raise InternalInvariantFailure("follower never broadcasts its final message")


def _to_partial_run(fragment: _Fragment) -> PartialRun:
    agents = {agent: position for position, agent in enumerate(sorted(fragment.initial))}
    values: Dict[int, int] = {}
    for agent in sorted(fragment.initial):
        for value in fragment.initial[agent].values:
            values.setdefault(value, len(values))
    for item in fragment.items:
        if item.value is not None:
            values.setdefault(item.value, len(values))

    initial = Configuration.from_mapping({
        agents[agent]: LocalConfiguration(local.state, tuple(values[v] for v in local.values))
        for agent, local in fragment.initial.items()
    })
    steps = []
    for item in fragment.items:
        receptions = {agents[agent]: transition for agent, transition in item.receptions.items()}
        if item.broadcaster is None:
            steps.append(UnmatchedReception.of(item.message, values[item.value], receptions))
        else:
            steps.append(StepDescriptor.of(agents[item.broadcaster], item.transition, receptions))
    return PartialRun(initial, tuple(steps))


def tree_to_run(protocol: Protocol, tree: TreeNode) -> Union[Run, PartialRun]:
    """
    Compose a valid unfolding tree into an initial run

    A boss root yields a complete run whose output on the root value contains
    bw; a follower root yields a partial run whose unmatched receptions all
    carry the root value and which ends with the broadcast of fm.

    Raises:
        InvalidTreeException: if the tree does not validate
        InternalInvariantFailure: if the composed run does not replay
    """
    check_tree(protocol, tree)
    composer = _Composer(protocol)
    fragment = composer.copy_of(tree)
    partial = _to_partial_run(fragment)
    try:
        replay_partial(protocol, partial)
    except InvalidRunException as exc:
        raise InternalInvariantFailure("composed run does not replay", exc.details)

    logger.info(
        "tree_composed",
        nodes=tree_size(tree),
        agents=len(partial.agents),
        steps=len(partial.steps),
        complete=partial.is_complete
    )
    if tree.is_boss:
        if not partial.is_complete:
            raise InternalInvariantFailure("boss tree left unmatched receptions")
        return partial.to_run()
    return partial
