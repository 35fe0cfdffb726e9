"""
Concrete runs from abstract 1-register witnesses

Agents are spawned lazily. A clique agent holding the gang value is obtained
by adding a reception to the step that first brought its state into the clique
(or by repeating a clique broadcast); an agent in a covered state is borrowed
from the segment that covered it, or is a copy of the causal cone of the boss
that reached it, renamed onto fresh agents and values.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import structlog

from bnra.config import settings
from bnra.core.configuration import Configuration, LocalConfiguration
from bnra.core.protocol import Action, Operation, Protocol, Transition, get_index
from bnra.core.semantics import Run, StepDescriptor, replay, trace
from bnra.cover1.abstraction import (
    CLIQUE_ACTIONS,
    AbstractConfig,
    AbstractRun,
    StepKind,
    remove_disequality,
    replay_abstract,
)
from bnra.exceptions import BudgetExceededException, InternalInvariantFailure, InvalidRunException

logger = structlog.get_logger(__name__)


class _Slot:
    """A mutable step of the run under construction; a slot without broadcaster is a marker"""
    __slots__ = ("broadcaster", "transition", "receptions")

    def __init__(self, broadcaster: Optional[int] = None, transition: Optional[Transition] = None):
        self.broadcaster = broadcaster
        self.transition = transition
        self.receptions: Dict[int, Transition] = {}


@dataclass
class _Segment:
    """Concrete trace of the gang between two resets"""
    value: int
    boss: int
    # clique state -> (producing slot, ways to join it there)
    entries: Dict[str, Tuple[_Slot, List[Tuple]]] = field(default_factory=dict)
    boss_arrivals: Dict[str, _Slot] = field(default_factory=dict)
    # idle agents holding the gang value: state -> [(agent, arrival slot)]
    idle: Dict[str, List[Tuple[int, Optional[_Slot]]]] = field(default_factory=dict)
    end: Optional[_Slot] = None


class _Builder:
    def __init__(self, protocol: Protocol, budget: int):
        self.protocol = protocol
        self.index = get_index(protocol)
        self.budget = budget
        self.slots: List[_Slot] = []
        self.initial: Dict[int, LocalConfiguration] = {}
        self.next_value = 0
        self.segments: List[_Segment] = []
        self.origins: Dict[str, Tuple[int, str]] = {}

    # Agents
    def fresh_agent(self) -> Tuple[int, int]:
        agent, value = len(self.initial), self.next_value
        self.next_value += 1
        self.initial[agent] = LocalConfiguration(self.protocol.initial_state, (value,))
        if len(self.initial) > self.budget:
            raise BudgetExceededException("concretize agents", self.budget)
        return agent, value

    def position(self, slot: Optional[_Slot]) -> int:
        return len(self.slots) if slot is None else self.slots.index(slot)

    def insert(self, slot: _Slot, before: Optional[_Slot]) -> None:
        self.slots.insert(self.position(before), slot)

    # Clique agents
    def obtain_clique(self, segment: _Segment, state: str, before: Optional[_Slot]) -> int:
        """An otherwise idle agent at state holding the gang value before the given slot"""
        limit = self.position(before)
        pool = segment.idle.get(state, [])
        for entry in pool:
            agent, arrival = entry
            if arrival is None or self.position(arrival) < limit:
                pool.remove(entry)
                return agent

        slot, ways = segment.entries[state]
        kind, source, transition = ways[0]
        if kind == "store":
            agent = self.provide(source, slot)
        elif kind == "clique":
            agent = self.obtain_clique(segment, source, slot)
        else:
            agent = self.obtain_clique(segment, transition.source, before)
            self.insert(_Slot(agent, transition), before)
            return agent
        slot.receptions[agent] = transition
        return agent

    # Covered-state agents
    def provide(self, state: str, before: Optional[_Slot]) -> int:
        """An otherwise idle agent at a covered state, holding a value foreign to the current gang"""
        if state == self.protocol.initial_state:
            agent, _ = self.fresh_agent()
            return agent
        origin, how = self.origins[state]
        segment = self.segments[origin]
        if how == "clique":
            return self.obtain_clique(segment, state, segment.end)
        logger.debug("concretize_spawn", state=state, segment=origin)
        return self.clone_cone(segment.boss, segment.boss_arrivals[state], before)

    def clone_cone(self, agent: int, slot: _Slot, before: Optional[_Slot]) -> int:
        """Copy every step the agent depends on up to slot onto fresh agents and values"""
        last = self.position(slot)
        need = {agent: last}
        kept: List[Tuple[_Slot, List[int]]] = []
        for position in range(last, -1, -1):
            step = self.slots[position]
            if step.broadcaster is None:
                continue
            receivers = [r for r in step.receptions if need.get(r, -1) >= position]
            if receivers:
                need[step.broadcaster] = max(need.get(step.broadcaster, -1), position)
            if need.get(step.broadcaster, -1) >= position:
                kept.append((step, receivers))
        kept.reverse()

        agents = {original: self.fresh_agent()[0] for original in sorted(need)}
        for step, receivers in kept:
            copy = _Slot(agents[step.broadcaster], step.transition)
            copy.receptions = {agents[r]: step.receptions[r] for r in receivers}
            self.insert(copy, before)
        return agents[agent]

    # Abstract steps
    def start_segment(self) -> _Segment:
        boss, value = self.fresh_agent()
        segment = _Segment(value, boss)
        self.segments.append(segment)
        return segment

    def boss_reception(self, state: str, message: str, target: Optional[str], actions) -> Transition:
        for transition in self.index.receptions_from(state, message):
            if transition.op.action in actions and (target is None or transition.target == target):
                return transition
        raise InternalInvariantFailure(
            "no boss reception for an abstract move",
            {"state": state, "message": message, "target": target}
        )

    def record_entries(
        self,
        segment: _Segment,
        slot: _Slot,
        before: AbstractConfig,
        after: AbstractConfig,
        clique_actions,
        stores: bool,
        rebroadcast: Optional[Transition]
    ) -> None:
        message = slot.transition.op.message
        for state in self.protocol.states:
            if state not in after.clique or state in before.clique:
                continue
            ways: List[Tuple] = []
            for source in self.protocol.states:
                for transition in self.index.receptions_from(source, message):
                    if transition.target != state:
                        continue
                    if source in before.covered and stores and transition.op.action == Action.DOWN:
                        ways.append(("store", source, transition))
                    if source in before.clique and transition.op.action in clique_actions:
                        ways.append(("clique", source, transition))
            ways.sort(key=lambda way: way[0] != "store")
            if rebroadcast is not None and rebroadcast.target == state:
                ways.append(("rebroadcast", None, rebroadcast))
            if not ways:
                raise InternalInvariantFailure("clique state without a producer", {"state": state})
            segment.entries[state] = (slot, ways)

    def move_boss(self, segment: _Segment, slot: _Slot, before, after, actions) -> None:
        if after.boss == before.boss:
            return
        message = slot.transition.op.message
        transition = self.boss_reception(before.boss, message, after.boss, actions)
        slot.receptions[segment.boss] = transition
        if after.boss is not None:
            segment.boss_arrivals.setdefault(after.boss, slot)

    def apply(self, segment: _Segment, before: AbstractConfig, step) -> _Segment:
        after = step.target
        transition = step.transition
        if step.kind == StepKind.GANG_RESET:
            segment.end = _Slot()
            self.slots.append(segment.end)
            number = len(self.segments) - 1
            for state in self.protocol.states:
                if state in after.covered and state not in before.covered:
                    how = "clique" if state in before.clique else "boss"
                    self.origins[state] = (number, how)
            return self.start_segment()

        slot = _Slot(transition=transition)
        self.slots.append(slot)
        if step.kind == StepKind.BOSS_BROADCAST:
            slot.broadcaster = segment.boss
            segment.boss_arrivals.setdefault(transition.target, slot)
            self.record_entries(segment, slot, before, after, CLIQUE_ACTIONS, True, None)
        elif step.kind == StepKind.CLIQUE_BROADCAST:
            slot.broadcaster = self.obtain_clique(segment, transition.source, slot)
            self.move_boss(segment, slot, before, after, CLIQUE_ACTIONS)
            self.record_entries(segment, slot, before, after, CLIQUE_ACTIONS, True, transition)
            segment.idle.setdefault(transition.target, []).append((slot.broadcaster, slot))
        else:
            slot.broadcaster = self.provide(transition.source, slot)
            actions = {Action.DOWN} if after.boss is None else {Action.ANY}
            self.move_boss(segment, slot, before, after, actions)
            self.record_entries(segment, slot, before, after, {Action.ANY}, False, None)
        return segment

    # Output
    def run(self) -> Run:
        steps = tuple(
            StepDescriptor.of(slot.broadcaster, slot.transition, slot.receptions)
            for slot in self.slots
            if slot.broadcaster is not None
        )
        return Run(Configuration.from_mapping(self.initial), steps)


def concretize(protocol: Protocol, run: AbstractRun, budget: Optional[int] = None) -> Run:
    """
    Build a concrete initial run from an abstract run

    The run is built in the disequality-free version of the protocol, then its
    disequality tests are restored so that it replays in protocol itself. Its
    final configuration covers every state of S, the clique and the boss at the end.

    Raises:
        InvalidRunException: if the abstract run does not replay
        BudgetExceededException: when more agents than budget are needed
    """
    budget = budget if budget is not None else settings.concretize_budget
    normalized = remove_disequality(protocol)
    final = replay_abstract(normalized, run)

    builder = _Builder(normalized, budget)
    segment = builder.start_segment()
    configurations = run.configurations(normalized)
    for before, step in zip(configurations, run.steps):
        segment = builder.apply(segment, before, step)

    try:
        reached = replay(normalized, builder.run())
    except InvalidRunException as exc:
        raise InternalInvariantFailure("concretized run does not replay", exc.details)
    for state in normalized.states:
        if reached.covers(state):
            continue
        if state in final.clique:
            builder.obtain_clique(segment, state, None)
        elif state in final.covered:
            builder.provide(state, None)
        elif state == final.boss:
            raise InternalInvariantFailure("boss left its abstract state", {"state": state})

    result = restore_disequality(protocol, builder.run(), budget)
    try:
        replay(protocol, result)
    except InvalidRunException as exc:
        raise InternalInvariantFailure("concretized run does not replay", exc.details)
    logger.info(
        "concretize_finished",
        abstract_steps=len(run),
        agents=len(result.agents),
        steps=len(result.steps)
    )
    return result


def _cone(steps: List[list], agent: int, last: int) -> Tuple[Dict[int, int], List[Tuple[int, List[int]]]]:
    """Agents and steps the agent depends on up to position last, receivers per step"""
    need = {agent: last}
    kept: List[Tuple[int, List[int]]] = []
    for position in range(last, -1, -1):
        broadcaster, _, receptions = steps[position]
        receivers = [r for r in receptions if need.get(r, -1) >= position]
        if receivers:
            need[broadcaster] = max(need.get(broadcaster, -1), position)
        if need.get(broadcaster, -1) >= position:
            kept.append((position, receivers))
    kept.reverse()
    return need, kept


def restore_disequality(protocol: Protocol, run: Run, budget: Optional[int] = None) -> Run:
    """
    Turn a run of the disequality-free protocol into a run of protocol

    An any-reception that stands for rec(m,1,!=) gets its test back when the
    broadcast value differs from the receiver's register. Otherwise the receiver
    takes the message from a copy of the broadcaster's causal cone, replayed on
    fresh agents and values just before the original broadcast.

    Raises:
        BudgetExceededException: when the copies need more than budget agents
    """
    budget = budget if budget is not None else settings.concretize_budget
    present = set(protocol.transitions)
    tested: Dict[Transition, Transition] = {}
    for transition in protocol.transitions:
        if transition.is_reception and transition.op.action == Action.NEQ:
            relaxed = Transition(
                source=transition.source,
                op=Operation.rec(transition.op.message, transition.op.register, Action.ANY),
                target=transition.target
            )
            if relaxed not in present:
                tested[relaxed] = transition
    if not tested:
        return run

    initial = dict(run.initial.items())
    steps = [[step.broadcaster, step.transition, dict(step.receptions)] for step in run.steps]
    next_value = max(run.initial.values_used(), default=-1) + 1
    copies = 0
    while True:
        configurations = trace(
            Configuration.from_mapping(initial),
            tuple(StepDescriptor.of(*step) for step in steps)
        )
        clash = None
        for position, (broadcaster, transition, receptions) in enumerate(steps):
            value = configurations[position].value(broadcaster, transition.op.register)
            for receiver, reception in receptions.items():
                if reception not in tested:
                    continue
                if configurations[position].value(receiver, reception.op.register) != value:
                    receptions[receiver] = tested[reception]
                elif clash is None:
                    clash = (position, receiver)
            if clash is not None:
                break
        if clash is None:
            break

        position, receiver = clash
        broadcaster, transition, receptions = steps[position]
        need, kept = _cone(steps, broadcaster, position)
        agents: Dict[int, int] = {}
        for original in sorted(need):
            agents[original] = max(initial) + 1
            local = initial[original]
            initial[agents[original]] = LocalConfiguration(
                local.state, tuple(range(next_value, next_value + len(local.values)))
            )
            next_value += len(local.values)
        if len(initial) > budget:
            raise BudgetExceededException("concretize agents", budget)
        clone = [
            [agents[steps[p][0]], steps[p][1], {agents[r]: steps[p][2][r] for r in receivers}]
            for p, receivers in kept
        ]
        clone[-1][2][receiver] = tested[receptions.pop(receiver)]
        steps[position:position] = clone
        copies += 1

    logger.debug("disequality_restored", copies=copies, agents=len(initial))
    return Run(
        Configuration.from_mapping(initial),
        tuple(StepDescriptor.of(*step) for step in steps)
    )
