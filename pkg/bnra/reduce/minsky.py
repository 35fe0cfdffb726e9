"""
Two-counter machines as a TARGET instance

One leader simulates the control, the other agents each hold one bit of
one counter. Everybody stores the identifier of a predecessor during an
init phase; messages then travel around the predecessor cycle, and the
agent holding the right bit turns a rule message into its acknowledgment.
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
from bnra.models import MinskyDocument, MinskyRuleDocument

logger = structlog.get_logger(__name__)

MinskyMachine = MinskyDocument

INIT = "init"
END = "end"
TARGET = "q_f"
DEAD = "dead"
LEADER_INIT = "lead_init"
LEADER_END = "wait_end"
COUNTER_INIT = "cnt_init"


def rule_message(number: int) -> str:
    return f"d{number}"


def ack_message(rule: MinskyRuleDocument, number: int) -> str:
    """Zero tests are acknowledged by the rule message itself"""
    return rule_message(number) if rule.op == "testz" else f"ack_d{number}"


def location_state(location: str) -> str:
    return f"loc_{location}"


def bit_state(counter: int, bit: int) -> str:
    return f"x{counter}_{bit}"


def relay_state(counter: int, bit: int, message: str) -> str:
    return f"x{counter}_{bit}_{message}"


def _counter_reaction(rule: MinskyRuleDocument, counter: int, bit: int) -> Optional[int]:
    """New bit when the agent consumes the rule, None when it passes the message on"""
    if rule.counter != counter:
        return None
    if rule.op == "inc" and bit == 0:
        return 1
    if rule.op == "dec" and bit == 1:
        return 0
    return None


def minsky_to_protocol(machine: MinskyMachine) -> Tuple[Protocol, str]:
    """2-register protocol where all agents can reach q_f together iff the machine halts"""
    states: List[str] = ["q0", LEADER_INIT, LEADER_END, COUNTER_INIT, DEAD, TARGET]
    states += [location_state(location) for location in machine.locations]
    transitions: List[Transition] = [
        br("q0", INIT, 1, LEADER_INIT),
        rec(LEADER_INIT, INIT, 2, Action.DOWN, location_state(machine.initial)),
        br(location_state(machine.final), END, 1, LEADER_END),
        rec(LEADER_END, END, 2, Action.EQ, TARGET),
        rec("q0", INIT, 2, Action.DOWN, COUNTER_INIT),
        br(COUNTER_INIT, INIT, 1, bit_state(1, 0)),
        br(COUNTER_INIT, INIT, 1, bit_state(2, 0)),
    ]
    messages: List[str] = [INIT, END]

    for number, rule in enumerate(machine.rules, start=1):
        waiting = f"wait_d{number}"
        states.append(waiting)
        messages.append(rule_message(number))
        if rule.op != "testz":
            messages.append(ack_message(rule, number))
        transitions.append(br(location_state(rule.source), rule_message(number), 1, waiting))
        transitions.append(rec(waiting, ack_message(rule, number), 2, Action.EQ, location_state(rule.target)))

    for counter in (1, 2):
        for bit in (0, 1):
            here = bit_state(counter, bit)
            states.append(here)
            relayed: List[Tuple[str, str, str]] = []
            for number, rule in enumerate(machine.rules, start=1):
                message = rule_message(number)
                if rule.op == "testz" and rule.counter == counter and bit == 1:
                    transitions.append(rec(here, message, 2, Action.EQ, DEAD))
                    continue
                reaction = _counter_reaction(rule, counter, bit)
                if reaction is None:
                    relayed.append((message, message, here))
                else:
                    relayed.append((message, ack_message(rule, number), bit_state(counter, reaction)))
                if rule.op != "testz":
                    ack = ack_message(rule, number)
                    relayed.append((ack, ack, here))
            relayed.append((END, END, TARGET))
            for heard, answer, target in relayed:
                relay = relay_state(counter, bit, heard)
                states.append(relay)
                transitions.append(rec(here, heard, 2, Action.EQ, relay))
                transitions.append(br(relay, answer, 1, target))

    protocol = Protocol(
        name="minsky",
        states=tuple(dict.fromkeys(states)),
        initial_state="q0",
        messages=tuple(dict.fromkeys(messages)),
        registers=2,
        transitions=dedupe_transitions(transitions)
    )
    logger.debug("reduction_built", reduction="minsky", states=len(protocol.states))
    return protocol, TARGET


@dataclass(frozen=True)
class Execution:
    """Rule indices taken and the (location, x1, x2) configurations visited"""
    rules: Tuple[int, ...]
    configurations: Tuple[Tuple[str, int, int], ...]

    @property
    def max_counter(self) -> int:
        return max(max(x1, x2) for _, x1, x2 in self.configurations)


def _apply(rule: MinskyRuleDocument, counters: Tuple[int, int]) -> Optional[Tuple[int, int]]:
    values = list(counters)
    index = rule.counter - 1
    if rule.op == "inc":
        values[index] += 1
    elif rule.op == "dec":
        if values[index] == 0:
            return None
        values[index] -= 1
    elif values[index] != 0:
        return None
    return values[0], values[1]


def minsky_run_bounded(
    machine: MinskyMachine,
    max_steps: Optional[int] = None,
    max_counter: Optional[int] = None
) -> Optional[Execution]:
    """Shortest halting execution within the bounds, or None"""
    max_steps = max_steps if max_steps is not None else settings.minsky_max_steps
    max_counter = max_counter if max_counter is not None else settings.minsky_max_counter
    start = (machine.initial, 0, 0)
    parents: Dict[Tuple[str, int, int], Optional[Tuple[Tuple[str, int, int], int]]] = {start: None}
    queue = deque([(start, 0)])
    while queue:
        current, depth = queue.popleft()
        if current[0] == machine.final:
            rules: List[int] = []
            configurations = [current]
            while parents[current] is not None:
                current, number = parents[current]
                rules.append(number)
                configurations.append(current)
            return Execution(tuple(reversed(rules)), tuple(reversed(configurations)))
        if depth == max_steps:
            continue
        location, x1, x2 = current
        for number, rule in enumerate(machine.rules):
            if rule.source != location:
                continue
            counters = _apply(rule, (x1, x2))
            if counters is None or max(counters) > max_counter:
                continue
            state = (rule.target, counters[0], counters[1])
            if state not in parents:
                parents[state] = (current, number)
                queue.append((state, depth + 1))
    return None


def minsky_exec_to_run(protocol: Protocol, machine: MinskyMachine, execution: Execution) -> Run:
    """
    Run over one leader and max(N, 1) agents per counter leaving every agent in q_f

    Agent 0 leads; agents 1..2K hold the bits of x1 then x2, and the
    predecessor of agent i is i - 1 (agent 2K for the leader).

    Raises:
        InvalidRunException: if the execution does not follow the machine
    """
    for position, number in enumerate(execution.rules):
        rule = machine.rules[number]
        location, x1, x2 = execution.configurations[position]
        expected = _apply(rule, (x1, x2))
        if rule.source != location or expected is None or (rule.target,) + expected != execution.configurations[position + 1]:
            raise InvalidRunException(position + 1, f"rule {number} does not match the execution")
    if execution.configurations[-1][0] != machine.final:
        raise InvalidRunException(len(execution.rules), "execution does not halt")

    width = max(execution.max_counter, 1)
    agents = 1 + 2 * width
    counter_of = {agent: 1 if agent <= width else 2 for agent in range(1, agents)}
    bits = {agent: 0 for agent in range(1, agents)}
    steps: List[StepDescriptor] = []

    # init phase around the cycle
    steps.append(StepDescriptor.of(0, br("q0", INIT, 1, LEADER_INIT), {1: rec("q0", INIT, 2, Action.DOWN, COUNTER_INIT)}))
    for agent in range(1, agents):
        receiver = (agent + 1) % agents
        reception = (
            rec(LEADER_INIT, INIT, 2, Action.DOWN, location_state(machine.initial))
            if receiver == 0
            else rec("q0", INIT, 2, Action.DOWN, COUNTER_INIT)
        )
        steps.append(StepDescriptor.of(
            agent, br(COUNTER_INIT, INIT, 1, bit_state(counter_of[agent], 0)), {receiver: reception}
        ))

    def circulate(message: str, leader_reception: Transition, rule: Optional[MinskyRuleDocument], number: int) -> None:
        for agent in range(1, agents):
            counter, bit = counter_of[agent], bits[agent]
            here = bit_state(counter, bit)
            relay = relay_state(counter, bit, message)
            steps[-1] = StepDescriptor.of(
                steps[-1].broadcaster,
                steps[-1].transition,
                {agent: rec(here, message, 2, Action.EQ, relay)}
            )
            answer, target = message, here
            if message == END:
                target = TARGET
            elif rule is not None and message == rule_message(number):
                reaction = _counter_reaction(rule, counter, bit)
                if reaction is not None:
                    answer, target = ack_message(rule, number), bit_state(counter, reaction)
                    bits[agent] = reaction
            steps.append(StepDescriptor.of(agent, br(relay, answer, 1, target)))
            message = answer
        steps[-1] = StepDescriptor.of(steps[-1].broadcaster, steps[-1].transition, {0: leader_reception})

    for rule_index in execution.rules:
        rule = machine.rules[rule_index]
        label = rule_index + 1
        waiting = f"wait_d{label}"
        steps.append(StepDescriptor.of(0, br(location_state(rule.source), rule_message(label), 1, waiting)))
        circulate(
            rule_message(label),
            rec(waiting, ack_message(rule, label), 2, Action.EQ, location_state(rule.target)),
            rule,
            label
        )

    steps.append(StepDescriptor.of(0, br(location_state(machine.final), END, 1, LEADER_END)))
    circulate(END, rec(LEADER_END, END, 2, Action.EQ, TARGET), None, 0)

    initial = Configuration.from_mapping({
        agent: LocalConfiguration("q0", (2 * agent, 2 * agent + 1)) for agent in range(agents)
    })
    run = Run(initial, tuple(steps))
    _check(protocol, run)
    return run


def _check(protocol: Protocol, run: Run) -> None:
    try:
        final = replay(protocol, run)
    except InvalidRunException as exc:
        raise InternalInvariantFailure("cycle simulation does not replay", exc.details)
    if not final.all_in(TARGET):
        raise InternalInvariantFailure("cycle simulation leaves agents outside q_f")
