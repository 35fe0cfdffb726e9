"""
Lossy channel systems as signature protocols

Agents organise themselves in a chain: each link stores the identifier of
its predecessor from an init broadcast, listens to the location and channel
contents the predecessor relays, applies one rule and relays the result.
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import structlog

from bnra.config import settings
from bnra.core.configuration import Configuration, LocalConfiguration
from bnra.core.protocol import Action, Protocol, Transition, br, dedupe_transitions, rec
from bnra.core.semantics import Run, StepDescriptor, replay
from bnra.exceptions import InternalInvariantFailure, InvalidRunException
from bnra.models import LcsDocument, LcsRuleDocument

logger = structlog.get_logger(__name__)

Lcs = LcsDocument
Channel = Tuple[str, ...]

INIT = "init"
END = "end"
ROOT_INIT = "root_init"
ROOT_LOCATION = "root_loc"
LINK = "link"
WAIT = "wait"


def location_message(location: str) -> str:
    return f"loc_{location}"


def symbol_message(symbol: str) -> str:
    return f"sym_{symbol}"


def start_state(location: str) -> str:
    return f"start_{location}"


def fin_state(location: str) -> str:
    return f"fin_{location}"


@dataclass(frozen=True)
class _RuleStates:
    first: str
    second: str
    end: str

    @classmethod
    def of(cls, number: int) -> "_RuleStates":
        return cls(f"tr1_d{number}", f"tr2_d{number}", f"end_d{number}")

    def copy(self, number: int, symbol: str) -> str:
        return f"copy_d{number}_{symbol}"


def lcs_to_protocol(lcs: Lcs) -> Tuple[Protocol, str]:
    """Signature protocol whose state fin(l_f) is coverable iff l_f is reachable"""
    states: List[str] = ["q0", ROOT_INIT, ROOT_LOCATION, LINK, WAIT]
    states += [start_state(location) for location in lcs.locations]
    states += [fin_state(location) for location in lcs.locations]
    transitions: List[Transition] = [
        br("q0", INIT, 1, ROOT_INIT),
        br(ROOT_INIT, location_message(lcs.initial), 1, ROOT_LOCATION),
        br(ROOT_LOCATION, END, 1, fin_state(lcs.initial)),
        rec("q0", INIT, 2, Action.DOWN, LINK),
        br(LINK, INIT, 1, WAIT),
    ]
    for location in lcs.locations:
        transitions.append(rec(WAIT, location_message(location), 2, Action.EQ, start_state(location)))

    for number, rule in enumerate(lcs.rules, start=1):
        names = _RuleStates.of(number)
        states += [names.first, names.second, names.end]
        transitions.append(br(start_state(rule.source), location_message(rule.target), 1, names.first))
        loop = names.first if rule.op == "push" else names.second
        for symbol in lcs.alphabet:
            copy = names.copy(number, symbol)
            states.append(copy)
            transitions.append(rec(loop, symbol_message(symbol), 2, Action.EQ, copy))
            transitions.append(br(copy, symbol_message(symbol), 1, loop))
        if rule.op == "push":
            transitions.append(br(names.first, symbol_message(rule.symbol), 1, names.second))
        else:
            transitions.append(rec(names.first, symbol_message(rule.symbol), 2, Action.EQ, names.second))
        transitions.append(rec(names.second, END, 2, Action.EQ, names.end))
        transitions.append(br(names.end, END, 1, fin_state(rule.target)))

    messages = [INIT, END] + [location_message(l) for l in lcs.locations] + [symbol_message(x) for x in lcs.alphabet]
    protocol = Protocol(
        name="lcs",
        states=tuple(dict.fromkeys(states)),
        initial_state="q0",
        messages=tuple(messages),
        registers=2,
        transitions=dedupe_transitions(transitions)
    )
    logger.debug("reduction_built", reduction="lcs", states=len(protocol.states))
    return protocol, fin_state(lcs.final)


@dataclass(frozen=True)
class LcsPath:
    """Rule indices taken and the channel contents before and after each of them"""
    rules: Tuple[int, ...]
    channels: Tuple[Channel, ...]

    def __len__(self) -> int:
        return len(self.rules)


def lossy_step(rule: LcsRuleDocument, channel: Channel) -> Optional[Channel]:
    """
    Largest channel reachable by the rule, None if it is blocked

    A push appends the symbol; a pop drops everything up to and including the
    first occurrence of the symbol.
    """
    if rule.op == "push":
        return channel + (rule.symbol,)
    if rule.symbol not in channel:
        return None
    return channel[channel.index(rule.symbol) + 1:]


def lcs_reach_bounded(
    lcs: Lcs,
    max_channel: Optional[int] = None,
    max_steps: Optional[int] = None
) -> Optional[LcsPath]:
    """Shortest path from (l_s, empty) to l_f within the bounds, or None"""
    max_channel = max_channel if max_channel is not None else settings.lcs_max_channel
    max_steps = max_steps if max_steps is not None else settings.lcs_max_steps
    start = (lcs.initial, ())
    parents: Dict[Tuple[str, Channel], Optional[Tuple[Tuple[str, Channel], int]]] = {start: None}
    queue = deque([(start, 0)])
    while queue:
        current, depth = queue.popleft()
        location, channel = current
        if location == lcs.final:
            rules: List[int] = []
            channels: List[Channel] = [channel]
            while parents[current] is not None:
                current, number = parents[current]
                rules.append(number)
                channels.append(current[1])
            return LcsPath(tuple(reversed(rules)), tuple(reversed(channels)))
        if depth == max_steps:
            continue
        for number, rule in enumerate(lcs.rules):
            if rule.source != location:
                continue
            following = lossy_step(rule, channel)
            if following is None or len(following) > max_channel:
                continue
            state = (rule.target, following)
            if state not in parents:
                parents[state] = (current, number)
                queue.append((state, depth + 1))
    return None


class _Slot:
    __slots__ = ("broadcaster", "transition", "receptions")

    def __init__(self, broadcaster: int, transition: Transition):
        self.broadcaster = broadcaster
        self.transition = transition
        self.receptions: Dict[int, Transition] = {}


def lcs_witness_to_run(protocol: Protocol, lcs: Lcs, path: LcsPath) -> Run:
    """
    Run covering fin(l_f): agent 0 is the root, agent i links to agent i-1 and takes rule i

    Raises:
        InvalidRunException: if the path does not follow the rules
    """
    for position, number in enumerate(path.rules):
        rule = lcs.rules[number]
        expected = lossy_step(rule, path.channels[position])
        if expected is None or expected != path.channels[position + 1]:
            raise InvalidRunException(position + 1, f"rule {number} does not lead to the recorded channel")
    agents = len(path) + 1
    slots: List[_Slot] = []

    def emit(slot: _Slot, after: Optional[_Slot] = None) -> _Slot:
        slots.insert(len(slots) if after is None else slots.index(after) + 1, slot)
        return slot

    previous = emit(_Slot(0, br("q0", INIT, 1, ROOT_INIT)))
    for agent in range(1, agents):
        previous.receptions[agent] = rec("q0", INIT, 2, Action.DOWN, LINK)
        previous = emit(_Slot(agent, br(LINK, INIT, 1, WAIT)))

    relayed = [
        emit(_Slot(0, br(ROOT_INIT, location_message(lcs.initial), 1, ROOT_LOCATION))),
        emit(_Slot(0, br(ROOT_LOCATION, END, 1, fin_state(lcs.initial)))),
    ]
    for agent in range(1, agents):
        number = path.rules[agent - 1]
        rule = lcs.rules[number]
        names = _RuleStates.of(number + 1)
        channel = path.channels[agent - 1]
        heard, letters, end = relayed[0], relayed[1:-1], relayed[-1]

        heard.receptions[agent] = rec(WAIT, location_message(rule.source), 2, Action.EQ, start_state(rule.source))
        own = [emit(_Slot(agent, br(start_state(rule.source), location_message(rule.target), 1, names.first)), heard)]
        if rule.op == "push":
            loop, copied = names.first, list(zip(channel, letters))
        else:
            skip = channel.index(rule.symbol)
            letters[skip].receptions[agent] = rec(
                names.first, symbol_message(rule.symbol), 2, Action.EQ, names.second
            )
            loop, copied = names.second, list(zip(channel[skip + 1:], letters[skip + 1:]))
        for symbol, slot in copied:
            copy = names.copy(number + 1, symbol)
            slot.receptions[agent] = rec(loop, symbol_message(symbol), 2, Action.EQ, copy)
            own.append(emit(_Slot(agent, br(copy, symbol_message(symbol), 1, loop)), slot))
        if rule.op == "push":
            anchor = own[-1]
            own.append(emit(_Slot(agent, br(names.first, symbol_message(rule.symbol), 1, names.second)), anchor))
        end.receptions[agent] = rec(names.second, END, 2, Action.EQ, names.end)
        own.append(emit(_Slot(agent, br(names.end, END, 1, fin_state(rule.target))), end))
        relayed = own

    initial = Configuration.from_mapping({
        agent: LocalConfiguration("q0", (2 * agent, 2 * agent + 1)) for agent in range(agents)
    })
    steps = tuple(StepDescriptor.of(slot.broadcaster, slot.transition, slot.receptions) for slot in slots)
    run = Run(initial, steps)
    try:
        replay(protocol, run)
    except InvalidRunException as exc:
        raise InternalInvariantFailure("channel simulation does not replay", exc.details)
    return run
