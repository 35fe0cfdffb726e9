"""
Abstract gang semantics for 1-register protocols

An abstract configuration (S, boss, clique) tracks the states covered so far
together with the gang of one value: the state of the agent that owns it and
the states other agents have visited while holding it.
"""
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import structlog

from bnra.core.protocol import (
    Action,
    Operation,
    OpKind,
    Protocol,
    Transition,
    dedupe_transitions,
    get_index,
    require_registers,
)
from bnra.exceptions import (
    InternalInvariantFailure,
    InvalidRunException,
    ProtocolNotNormalizedException,
    UnknownStateException,
)

logger = structlog.get_logger(__name__)

# Action groups used by the clique successor
CLIQUE_ACTIONS = frozenset({Action.EQ, Action.ANY, Action.DOWN})
STORE_ACTIONS = frozenset({Action.DOWN})
IGNORE_ACTIONS = frozenset({Action.ANY})


class StepKind(str, Enum):
    CLIQUE_BROADCAST = "clique-broadcast"
    BOSS_BROADCAST = "boss-broadcast"
    EXTERNAL_BROADCAST = "external-broadcast"
    GANG_RESET = "gang-reset"


@dataclass(frozen=True)
class AbstractConfig:
    covered: FrozenSet[str]
    boss: Optional[str]
    clique: FrozenSet[str]

    @classmethod
    def initial(cls, protocol: Protocol) -> "AbstractConfig":
        return cls(frozenset({protocol.initial_state}), protocol.initial_state, frozenset())

    def reset(self, protocol: Protocol) -> "AbstractConfig":
        folded = self.covered | self.clique
        if self.boss is not None:
            folded = folded | {self.boss}
        return AbstractConfig(frozenset(folded), protocol.initial_state, frozenset())


@dataclass(frozen=True)
class AbstractStep:
    kind: StepKind
    transition: Optional[Transition]
    target: AbstractConfig


@dataclass(frozen=True)
class AbstractRun:
    steps: Tuple[AbstractStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def configurations(self, protocol: Protocol) -> List[AbstractConfig]:
        return [AbstractConfig.initial(protocol)] + [step.target for step in self.steps]

    @property
    def final(self) -> Optional[AbstractConfig]:
        return self.steps[-1].target if self.steps else None


def covers_abstract(config: AbstractConfig, state: str) -> bool:
    """state is in S, in the clique or is the boss"""
    return state in config.covered or state in config.clique or state == config.boss


def abstract_run_bound(protocol: Protocol) -> int:
    """Length bound of shortest abstract witnesses"""
    return (len(protocol.states) + 2) ** 3


def remove_disequality(protocol: Protocol) -> Protocol:
    """
    Rewrite every rec(m,1,!=) into rec(m,1,any)

    Raises:
        WrongRegisterCountException: unless the protocol has one register
        ProtocolNotNormalizedException: when the protocol carries local tests
    """
    require_registers(protocol, 1)
    if any(t.is_local for t in protocol.transitions):
        raise ProtocolNotNormalizedException("local tests in a 1-register protocol")
    rewritten = []
    for transition in protocol.transitions:
        if transition.is_reception and transition.op.action == Action.NEQ:
            transition = Transition(
                source=transition.source,
                op=Operation.rec(transition.op.message, transition.op.register, Action.ANY),
                target=transition.target
            )
        rewritten.append(transition)
    return protocol.model_copy(update={"transitions": dedupe_transitions(rewritten)})


def _require_normalized(protocol: Protocol) -> None:
    require_registers(protocol, 1)
    for transition in protocol.transitions:
        if transition.is_local:
            raise ProtocolNotNormalizedException(f"local test {transition}")
        if transition.is_reception and transition.op.action == Action.NEQ:
            raise ProtocolNotNormalizedException(f"disequality reception {transition}")


def clique_succ(
    protocol: Protocol,
    states: Iterable[str],
    message: str,
    actions: Iterable[Action]
) -> FrozenSet[str]:
    """States reached from states by receiving message with one of the actions"""
    index = get_index(protocol)
    actions = set(actions)
    return frozenset(
        transition.target
        for state in states
        for transition in index.receptions_from(state, message)
        if transition.op.action in actions
    )


class AbstractSemantics:
    """
    Bitmask encoding of abstract configurations for one protocol

    State i of the protocol is bit i; the boss is a state position or -1.
    """

    def __init__(self, protocol: Protocol):
        _require_normalized(protocol)
        self.protocol = protocol
        self.states = protocol.states
        self.position = {state: i for i, state in enumerate(protocol.states)}
        self.initial = self.position[protocol.initial_state]
        self.broadcasts = [t for t in protocol.transitions if t.is_broadcast]

        # succ[(message, group)][state] -> bitmask of targets
        self._succ: Dict[Tuple[str, str], List[int]] = {}
        # boss moves: (message, group) -> state -> ordered target positions
        self._moves: Dict[Tuple[str, str], List[List[int]]] = {}
        groups = {"clique": CLIQUE_ACTIONS, "store": STORE_ACTIONS, "ignore": IGNORE_ACTIONS}
        for message in protocol.messages:
            for name, actions in groups.items():
                masks = [0] * len(self.states)
                moves: List[List[int]] = [[] for _ in self.states]
                for transition in protocol.transitions:
                    op = transition.op
                    if op.kind == OpKind.RECEIVE and op.message == message and op.action in actions:
                        source = self.position[transition.source]
                        target = self.position[transition.target]
                        masks[source] |= 1 << target
                        if target not in moves[source]:
                            moves[source].append(target)
                self._succ[(message, name)] = masks
                self._moves[(message, name)] = moves

    def succ(self, mask: int, message: str, group: str) -> int:
        masks = self._succ[(message, group)]
        result = 0
        while mask:
            low = mask & -mask
            result |= masks[low.bit_length() - 1]
            mask ^= low
        return result

    def moves(self, boss: int, message: str, group: str) -> List[int]:
        if boss < 0:
            return []
        return self._moves[(message, group)][boss]

    def encode(self, config: AbstractConfig) -> Tuple[int, int, int]:
        covered = sum(1 << self.position[s] for s in config.covered)
        clique = sum(1 << self.position[s] for s in config.clique)
        boss = self.position[config.boss] if config.boss is not None else -1
        return covered, boss, clique

    def decode(self, covered: int, boss: int, clique: int) -> AbstractConfig:
        return AbstractConfig(
            frozenset(s for i, s in enumerate(self.states) if covered >> i & 1),
            self.states[boss] if boss >= 0 else None,
            frozenset(s for i, s in enumerate(self.states) if clique >> i & 1)
        )

    def successors(self, covered: int, boss: int, clique: int) -> List[Tuple[StepKind, Optional[Transition], Tuple[int, int, int]]]:
        """One-step successors in a fixed order: transitions by index, then the reset"""
        result = []
        seen = set()

        def emit(kind, transition, target):
            if (kind, target) not in seen:
                seen.add((kind, target))
                result.append((kind, transition, target))

        for transition in self.broadcasts:
            message = transition.op.message
            source = self.position[transition.source]
            gained = self.succ(clique, message, "clique") | self.succ(covered, message, "store")
            if clique >> source & 1:
                new_clique = clique | gained | 1 << self.position[transition.target]
                emit(StepKind.CLIQUE_BROADCAST, transition, (covered, boss, new_clique))
                for move in self.moves(boss, message, "clique"):
                    emit(StepKind.CLIQUE_BROADCAST, transition, (covered, move, new_clique))
            if boss == source:
                emit(
                    StepKind.BOSS_BROADCAST,
                    transition,
                    (covered, self.position[transition.target], clique | gained)
                )
            if covered >> source & 1:
                new_clique = clique | self.succ(clique, message, "ignore")
                emit(StepKind.EXTERNAL_BROADCAST, transition, (covered, boss, new_clique))
                for move in self.moves(boss, message, "ignore"):
                    emit(StepKind.EXTERNAL_BROADCAST, transition, (covered, move, new_clique))
                if self.moves(boss, message, "store"):
                    emit(StepKind.EXTERNAL_BROADCAST, transition, (covered, -1, new_clique))

        folded = covered | clique | (1 << boss if boss >= 0 else 0)
        emit(StepKind.GANG_RESET, None, (folded, self.initial, 0))
        return result


def abstract_successors(protocol: Protocol, config: AbstractConfig) -> List[AbstractStep]:
    """
    Every abstract step from config, in a deterministic order

    Raises:
        ProtocolNotNormalizedException: if disequality receptions or local tests remain
    """
    semantics = AbstractSemantics(protocol)
    return [
        AbstractStep(kind, transition, semantics.decode(*target))
        for kind, transition, target in semantics.successors(*semantics.encode(config))
    ]


@dataclass
class Cover1Result:
    coverable: bool
    run: Optional[AbstractRun] = None
    protocol: Optional[Protocol] = None  # the disequality-free protocol the run lives in
    stats: Dict[str, int] = field(default_factory=dict)


def decide_cover1(protocol: Protocol, target: str) -> Cover1Result:
    """
    Decide coverability of target in a 1-register protocol

    Breadth-first search over the whole abstract space after removing disequality
    tests; a positive verdict carries a shortest abstract run whose final
    configuration covers target in S, the clique or the boss.

    Raises:
        WrongRegisterCountException: unless the protocol has one register
        UnknownStateException: if target is not a state of the protocol
    """
    normalized = remove_disequality(protocol)
    if target not in normalized.states:
        raise UnknownStateException(target)
    semantics = AbstractSemantics(normalized)
    goal = 1 << semantics.position[target]

    start = semantics.encode(AbstractConfig.initial(normalized))
    parents: Dict[Tuple[int, int, int], Optional[Tuple]] = {start: None}
    queue = deque([start])
    found: Optional[Tuple[int, int, int]] = None

    def hit(config: Tuple[int, int, int]) -> bool:
        covered, boss, clique = config
        return bool((covered | clique | (1 << boss if boss >= 0 else 0)) & goal)

    if hit(start):
        found = start
    while queue and found is None:
        config = queue.popleft()
        for kind, transition, successor in semantics.successors(*config):
            if successor in parents:
                continue
            parents[successor] = (config, kind, transition)
            if hit(successor):
                found = successor
                break
            queue.append(successor)

    stats = {"abstract_states": len(parents)}
    if found is None:
        logger.info("cover1_decided", target=target, coverable=False, **stats)
        return Cover1Result(False, None, normalized, stats)

    steps: List[AbstractStep] = []
    config = found
    while parents[config] is not None:
        previous, kind, transition = parents[config]
        steps.append(AbstractStep(kind, transition, semantics.decode(*config)))
        config = previous
    steps.reverse()
    run = AbstractRun(tuple(steps))

    bound = abstract_run_bound(normalized)
    if len(run) > bound:
        raise InternalInvariantFailure(
            "abstract witness longer than its bound",
            {"length": len(run), "bound": bound}
        )
    stats["length"] = len(run)
    logger.info("cover1_decided", target=target, coverable=True, **stats)
    return Cover1Result(True, run, normalized, stats)


def _step_problem(protocol: Protocol, before: AbstractConfig, step: AbstractStep) -> Optional[str]:
    after = step.target
    if step.kind == StepKind.GANG_RESET:
        if step.transition is not None:
            return "a gang reset takes no transition"
        if after != before.reset(protocol):
            return "gang reset must fold the gang into S and restart at the initial state"
        return None

    transition = step.transition
    if transition is None or not transition.is_broadcast or transition not in get_index(protocol):
        return f"{step.kind.value} needs a broadcast transition of the protocol"
    if after.covered != before.covered:
        return "S changes outside a gang reset"
    if not before.clique <= after.clique:
        return "the clique shrinks outside a gang reset"

    message = transition.op.message
    gained = clique_succ(protocol, before.clique, message, CLIQUE_ACTIONS) | clique_succ(
        protocol, before.covered, message, STORE_ACTIONS
    )
    index = get_index(protocol)

    def boss_moves(actions) -> List[str]:
        if before.boss is None:
            return []
        return [
            t.target for t in index.receptions_from(before.boss, message) if t.op.action in actions
        ]

    if step.kind == StepKind.CLIQUE_BROADCAST:
        if transition.source not in before.clique:
            return f"broadcaster state {transition.source} is not in the clique"
        if after.clique != before.clique | gained | {transition.target}:
            return "clique does not match the clique-broadcast update"
        if after.boss != before.boss and after.boss not in boss_moves(CLIQUE_ACTIONS):
            return "boss move is not a reception of the broadcast"
        return None
    if step.kind == StepKind.BOSS_BROADCAST:
        if before.boss is None or transition.source != before.boss:
            return f"boss is {before.boss}, not {transition.source}"
        if after.boss != transition.target:
            return "boss does not follow its broadcast"
        if after.clique != before.clique | gained:
            return "clique does not match the boss-broadcast update"
        return None

    if transition.source not in before.covered:
        return f"broadcaster state {transition.source} is not in S"
    if after.clique != before.clique | clique_succ(protocol, before.clique, message, IGNORE_ACTIONS):
        return "clique does not match the external-broadcast update"
    if after.boss == before.boss:
        return None
    if after.boss is None:
        if not boss_moves(STORE_ACTIONS):
            return "boss cannot lose its value on this broadcast"
        return None
    if after.boss not in boss_moves(IGNORE_ACTIONS):
        return "boss move is not an any-reception of the broadcast"
    return None


def replay_abstract(protocol: Protocol, run: AbstractRun) -> AbstractConfig:
    """
    Check every step of an abstract run against its tagged case

    Returns:
        The final abstract configuration

    Raises:
        InvalidRunException: with the 1-based index of the first invalid step
    """
    normalized = remove_disequality(protocol)
    current = AbstractConfig.initial(normalized)
    for position, step in enumerate(run.steps, start=1):
        problem = _step_problem(normalized, current, step)
        if problem:
            raise InvalidRunException(position, problem)
        if not current.covered <= step.target.covered:
            raise InvalidRunException(position, "S shrinks")
        current = step.target
    return current
