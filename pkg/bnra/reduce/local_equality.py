"""
Elimination of local equality tests

Each state carries a map from registers to memory slots; registers known to
hold the same value share a slot. A local equality test becomes a dummy
broadcast when both registers share a slot, and disappears otherwise.
"""
from itertools import product
from typing import List, Tuple

import structlog

from bnra.config import settings
from bnra.core.protocol import Action, OpKind, Protocol, Transition, br, dedupe_transitions, loc, rec
from bnra.exceptions import RegisterBoundExceededException, UnknownStateException

logger = structlog.get_logger(__name__)

SlotMap = Tuple[int, ...]

DUMMY = "dummy"


def slotted_state(state: str, slots: SlotMap) -> str:
    return f"q.{state}@m" + "".join(str(slot) for slot in slots)


def _dummy_message(protocol: Protocol) -> str:
    name = DUMMY
    while name in protocol.messages:
        name += "_"
    return name


def _rewrite(transition: Transition, slots: SlotMap, registers: int, dummy: str) -> List[Transition]:
    op = transition.op
    source = slotted_state(transition.source, slots)

    def to(new_slots: SlotMap = slots) -> str:
        return slotted_state(transition.target, new_slots)

    def moved(register: int, slot: int) -> SlotMap:
        return slots[:register - 1] + (slot,) + slots[register:]

    if op.kind == OpKind.BROADCAST:
        return [br(source, op.message, slots[op.register - 1], to())]

    if op.kind == OpKind.RECEIVE:
        register = op.register
        if op.action == Action.DOWN:
            rewritten = []
            for slot in range(1, registers + 1):
                sharing = {r for r in range(1, registers + 1) if slots[r - 1] == slot}
                if sharing <= {register}:
                    rewritten.append(rec(source, op.message, slot, Action.DOWN, to(moved(register, slot))))
                rewritten.append(rec(source, op.message, slot, Action.EQ, to(moved(register, slot))))
            return rewritten
        if op.action == Action.ANY:
            return [rec(source, op.message, slots[register - 1], Action.ANY, to())]
        return [rec(source, op.message, slots[register - 1], op.action, to())]

    left, right = slots[op.register - 1], slots[op.other_register - 1]
    if op.action == Action.NEQ:
        return [loc(source, left, right, Action.NEQ, to())]
    if left == right:
        return [br(source, dummy, 1, to())]
    return []


def eliminate_local_equality(protocol: Protocol) -> Protocol:
    """
    Equivalent protocol without local equality tests

    q is coverable in the input iff some slotted copy of q is coverable in the
    output. The dummy message is never received.

    Raises:
        RegisterBoundExceededException: above local_equality_max_registers registers
    """
    registers = protocol.registers
    bound = settings.local_equality_max_registers
    if registers > bound:
        raise RegisterBoundExceededException(registers, bound)

    dummy = _dummy_message(protocol)
    maps: List[SlotMap] = list(product(range(1, registers + 1), repeat=registers))
    identity: SlotMap = tuple(range(1, registers + 1))
    maps.remove(identity)
    maps.insert(0, identity)

    transitions: List[Transition] = []
    for slots in maps:
        for transition in protocol.transitions:
            transitions.extend(_rewrite(transition, slots, registers, dummy))
    transitions = list(dedupe_transitions(transitions))

    initial = slotted_state(protocol.initial_state, identity)
    states = [initial] + [
        slotted_state(state, slots)
        for slots in maps
        for state in protocol.states
        if slotted_state(state, slots) != initial
    ]
    result = Protocol(
        name=f"{protocol.name}_noloceq",
        states=tuple(states),
        initial_state=initial,
        messages=protocol.messages + (dummy,),
        registers=registers,
        transitions=tuple(transitions),
        local_tests=any(transition.is_local for transition in transitions)
    )
    logger.debug("reduction_built", reduction="local-equality", states=len(result.states))
    return result


def lifted_targets(protocol: Protocol, state: str) -> Tuple[str, ...]:
    """All slotted copies of a state of the original protocol"""
    if state not in protocol.states:
        raise UnknownStateException(state)
    registers = protocol.registers
    return tuple(
        slotted_state(state, slots)
        for slots in product(range(1, registers + 1), repeat=registers)
    )


def funnel_targets(protocol: Protocol, targets: Tuple[str, ...], name: str, dummy: str) -> Tuple[Protocol, str]:
    """Add one state reached from every target by a broadcast of a message nobody receives"""
    funnel = name
    while funnel in protocol.states:
        funnel += "_"
    extra = tuple(br(target, dummy, 1, funnel) for target in targets if target in protocol.states)
    funnelled = protocol.model_copy(update={
        "states": protocol.states + (funnel,),
        "messages": protocol.messages if dummy in protocol.messages else protocol.messages + (dummy,),
        "transitions": dedupe_transitions(protocol.transitions + extra),
    })
    return funnelled, funnel


def eliminate_with_target(protocol: Protocol, state: str) -> Tuple[Protocol, str]:
    """Transform and funnel the slotted copies of state into a single target"""
    transformed = eliminate_local_equality(protocol)
    dummy = transformed.messages[-1]
    return funnel_targets(transformed, lifted_targets(protocol, state), f"{state}@any", dummy)
