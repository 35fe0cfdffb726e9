"""
Protocols: states, message types, registers and transitions
"""
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from bnra.exceptions import WrongRegisterCountException


# Enums
class OpKind(str, Enum):
    BROADCAST = "br"
    RECEIVE = "rec"
    LOCAL = "loc"


class Action(str, Enum):
    EQ = "="
    NEQ = "!="
    DOWN = "down"
    ANY = "any"


# Transition Models
class Operation(BaseModel):
    """br(m,i), rec(m,i,a) or loc(i,j,a)"""
    kind: OpKind
    message: Optional[str] = None
    register: int
    action: Optional[Action] = None
    other_register: Optional[int] = None
    
    class Config:
        frozen = True
    
    @classmethod
    def br(cls, message: str, register: int) -> "Operation":
        return cls(kind=OpKind.BROADCAST, message=message, register=register)
    
    @classmethod
    def rec(cls, message: str, register: int, action: Action) -> "Operation":
        return cls(kind=OpKind.RECEIVE, message=message, register=register, action=action)
    
    @classmethod
    def loc(cls, register: int, other_register: int, action: Action) -> "Operation":
        return cls(
            kind=OpKind.LOCAL,
            register=register,
            other_register=other_register,
            action=action
        )
    
    def __str__(self) -> str:
        if self.kind == OpKind.BROADCAST:
            return f"br({self.message},{self.register})"
        if self.kind == OpKind.RECEIVE:
            return f"rec({self.message},{self.register},{self.action.value})"
        return f"loc({self.register},{self.other_register},{self.action.value})"


class Transition(BaseModel):
    """A transition (source, operation, target)"""
    source: str = Field(..., alias="from")
    op: Operation
    target: str = Field(..., alias="to")
    
    class Config:
        frozen = True
        populate_by_name = True
    
    @property
    def is_broadcast(self) -> bool:
        return self.op.kind == OpKind.BROADCAST
    
    @property
    def is_reception(self) -> bool:
        return self.op.kind == OpKind.RECEIVE
    
    @property
    def is_local(self) -> bool:
        return self.op.kind == OpKind.LOCAL
    
    def __str__(self) -> str:
        return f"{self.source} {self.op} {self.target}"


def br(source: str, message: str, register: int, target: str) -> Transition:
    """Shorthand for a broadcast transition"""
    return Transition(source=source, op=Operation.br(message, register), target=target)


def rec(source: str, message: str, register: int, action: Action, target: str) -> Transition:
    """Shorthand for a reception transition"""
    return Transition(source=source, op=Operation.rec(message, register, action), target=target)


def loc(source: str, register: int, other_register: int, action: Action, target: str) -> Transition:
    """Shorthand for a local-test transition"""
    return Transition(
        source=source,
        op=Operation.loc(register, other_register, action),
        target=target
    )


# Protocol Model
class Protocol(BaseModel):
    """A register protocol (Q, M, Delta, q0, r)"""
    name: str = "protocol"
    states: Tuple[str, ...]
    initial_state: str
    messages: Tuple[str, ...] = ()
    registers: int = 1
    transitions: Tuple[Transition, ...] = ()
    local_tests: bool = False
    
    class Config:
        frozen = True


def dedupe_transitions(transitions) -> Tuple[Transition, ...]:
    """Drop repeated transitions, keeping first occurrences in order"""
    seen = set()
    unique = []
    for transition in transitions:
        if transition not in seen:
            seen.add(transition)
            unique.append(transition)
    return tuple(unique)


def validate_protocol(protocol: Protocol) -> List[str]:
    """
    Check every structural invariant of a protocol
    
    Returns:
        One diagnostic per violation; an empty list means the protocol is well formed
    """
    diagnostics: List[str] = []
    states = set(protocol.states)
    messages = set(protocol.messages)
    
    if protocol.registers < 1:
        diagnostics.append(f"registers: register count must be positive, got {protocol.registers}")
    if len(states) != len(protocol.states):
        diagnostics.append("states: duplicate state id")
    if len(messages) != len(protocol.messages):
        diagnostics.append("messages: duplicate message type")
    if protocol.initial_state not in states:
        diagnostics.append(f"init: unknown initial state {protocol.initial_state}")
    
    def in_range(register: Optional[int]) -> bool:
        return register is not None and 1 <= register <= protocol.registers
    
    for index, transition in enumerate(protocol.transitions):
        where = f"transition {index} ({transition})"
        for endpoint in (transition.source, transition.target):
            if endpoint not in states:
                diagnostics.append(f"{where}: unknown state {endpoint}")
        op = transition.op
        if op.kind == OpKind.LOCAL:
            if not protocol.local_tests:
                diagnostics.append(f"{where}: local tests are not enabled")
            if op.action not in (Action.EQ, Action.NEQ):
                diagnostics.append(f"{where}: local tests take = or !=")
            if not (in_range(op.register) and in_range(op.other_register)):
                diagnostics.append(f"{where}: register index out of range")
            continue
        if op.message not in messages:
            diagnostics.append(f"{where}: unknown message {op.message}")
        if not in_range(op.register):
            diagnostics.append(f"{where}: register index out of range")
        if op.kind == OpKind.BROADCAST and op.action is not None:
            diagnostics.append(f"{where}: broadcasts carry no action")
        if op.kind == OpKind.RECEIVE and op.action is None:
            diagnostics.append(f"{where}: reception without action")
    return diagnostics


def signature_diagnostics(protocol: Protocol) -> List[str]:
    """Register 1 is broadcast-only, the other registers are reception-only"""
    diagnostics = []
    for index, transition in enumerate(protocol.transitions):
        op = transition.op
        if op.kind == OpKind.LOCAL:
            diagnostics.append(f"transition {index} ({transition}): local test in a signature protocol")
        elif op.kind == OpKind.BROADCAST and op.register != 1:
            diagnostics.append(f"transition {index} ({transition}): broadcast from register {op.register}")
        elif op.kind == OpKind.RECEIVE and op.register == 1:
            diagnostics.append(f"transition {index} ({transition}): reception into register 1")
    return diagnostics


def is_signature_protocol(protocol: Protocol) -> bool:
    return not signature_diagnostics(protocol)


def require_registers(protocol: Protocol, expected: int) -> None:
    """Raise unless the protocol has exactly the expected register count"""
    if protocol.registers != expected:
        raise WrongRegisterCountException(expected, protocol.registers)


class ProtocolIndex:
    """Transition lookup tables for a protocol"""
    
    def __init__(self, protocol: Protocol):
        self.protocol = protocol
        self.broadcasts: Dict[str, List[Transition]] = {}
        self.receptions: Dict[Tuple[str, str], List[Transition]] = {}
        self.local_tests: Dict[str, List[Transition]] = {}
        self.transition_ids: Dict[Transition, int] = {}
        
        for index, transition in enumerate(protocol.transitions):
            self.transition_ids.setdefault(transition, index)
            if transition.is_broadcast:
                self.broadcasts.setdefault(transition.source, []).append(transition)
            elif transition.is_reception:
                key = (transition.source, transition.op.message)
                self.receptions.setdefault(key, []).append(transition)
            else:
                self.local_tests.setdefault(transition.source, []).append(transition)
    
    def broadcasts_from(self, state: str) -> List[Transition]:
        return self.broadcasts.get(state, [])
    
    def receptions_from(self, state: str, message: str) -> List[Transition]:
        return self.receptions.get((state, message), [])
    
    def local_tests_from(self, state: str) -> List[Transition]:
        return self.local_tests.get(state, [])
    
    def __contains__(self, transition: Transition) -> bool:
        return transition in self.transition_ids
    
    def index_of(self, transition: Transition) -> int:
        return self.transition_ids[transition]


@lru_cache(maxsize=128)
def get_index(protocol: Protocol) -> ProtocolIndex:
    """
    Get the lookup index for a protocol
    
    This is cached so repeated semantic calls share one index per protocol.
    """
    return ProtocolIndex(protocol)
