"""
Seeded random instances for property checks and the generate command
"""
import random
from typing import List, Optional

from bnra.core.protocol import Action, Protocol, Transition, br, dedupe_transitions, loc, rec
from bnra.reduce.sat import Cnf3

_ACTIONS = (Action.EQ, Action.NEQ, Action.DOWN, Action.ANY)


def _rng(seed: Optional[int]) -> random.Random:
    return random.Random(seed)


def random_cnf3(seed: Optional[int] = None, variables: int = 3, clauses: int = 3) -> Cnf3:
    rng = _rng(seed)
    return Cnf3(
        variables=variables,
        clauses=tuple(
            tuple(rng.choice((1, -1)) * rng.randint(1, variables) for _ in range(3))
            for _ in range(clauses)
        )
    )


def random_protocol(
    seed: Optional[int] = None,
    states: int = 4,
    messages: int = 2,
    registers: int = 1,
    transitions: int = 6,
    actions=_ACTIONS,
    local_tests: int = 0
) -> Protocol:
    """
    Protocol over q0..q{states-1} and m1..m{messages} with random broadcasts and receptions

    local_tests extra loc transitions are drawn after the others, so a seed keeps
    its broadcasts and receptions whatever the count.
    """
    rng = _rng(seed)
    names = [f"q{i}" for i in range(states)]
    alphabet = [f"m{i}" for i in range(1, messages + 1)]
    chosen: List[Transition] = []
    for _ in range(transitions):
        source, target = rng.choice(names), rng.choice(names)
        message, register = rng.choice(alphabet), rng.randint(1, registers)
        if rng.random() < 0.5:
            chosen.append(br(source, message, register, target))
        else:
            chosen.append(rec(source, message, register, rng.choice(actions), target))
    for _ in range(local_tests):
        source, target = rng.choice(names), rng.choice(names)
        left, right = rng.randint(1, registers), rng.randint(1, registers)
        chosen.append(loc(source, left, right, rng.choice((Action.EQ, Action.NEQ)), target))
    return Protocol(
        name=f"random_{seed}",
        states=tuple(names),
        initial_state=names[0],
        messages=tuple(alphabet),
        registers=registers,
        transitions=dedupe_transitions(chosen),
        local_tests=local_tests > 0
    )


def random_signature_protocol(
    seed: Optional[int] = None,
    states: int = 5,
    messages: int = 2,
    registers: int = 2,
    transitions: int = 7
) -> Protocol:
    """Broadcasts use register 1 only, receptions registers 2..r only"""
    if registers < 2:
        raise ValueError("signature protocols need at least two registers")
    rng = _rng(seed)
    names = [f"q{i}" for i in range(states)]
    alphabet = [f"m{i}" for i in range(1, messages + 1)]
    chosen: List[Transition] = []
    for _ in range(transitions):
        source, target = rng.choice(names), rng.choice(names)
        message = rng.choice(alphabet)
        if rng.random() < 0.5:
            chosen.append(br(source, message, 1, target))
        else:
            chosen.append(rec(source, message, rng.randint(2, registers), rng.choice(_ACTIONS), target))
    return Protocol(
        name=f"signature_{seed}",
        states=tuple(names),
        initial_state=names[0],
        messages=tuple(alphabet),
        registers=registers,
        transitions=dedupe_transitions(chosen)
    )
