"""
Concrete semantics: steps, runs, partial runs and replay
"""
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from bnra.core.configuration import Configuration, LocalConfiguration, is_initial
from bnra.core.protocol import Action, Protocol, ProtocolIndex, Transition, get_index
from bnra.exceptions import InvalidRunException, NotEnabledException

Receptions = Tuple[Tuple[int, Transition], ...]


def _sorted_receptions(receptions: Union[Mapping[int, Transition], Receptions]) -> Receptions:
    items = receptions.items() if isinstance(receptions, Mapping) else receptions
    return tuple(sorted(items, key=lambda item: item[0]))


@dataclass(frozen=True)
class StepDescriptor:
    """One broadcast (or local test) with the receptions it triggers; absent agents idle"""
    broadcaster: int
    transition: Transition
    receptions: Receptions = ()
    
    @classmethod
    def of(
        cls,
        broadcaster: int,
        transition: Transition,
        receptions: Optional[Mapping[int, Transition]] = None
    ) -> "StepDescriptor":
        return cls(broadcaster, transition, _sorted_receptions(receptions or {}))
    
    @property
    def message(self) -> Optional[str]:
        return self.transition.op.message
    
    @property
    def receivers(self) -> Tuple[int, ...]:
        return tuple(agent for agent, _ in self.receptions)
    
    def reception_of(self, agent: int) -> Optional[Transition]:
        for receiver, transition in self.receptions:
            if receiver == agent:
                return transition
        return None


@dataclass(frozen=True)
class UnmatchedReception:
    """A reception of (message, value) that no agent of the run broadcasts"""
    message: str
    value: int
    receptions: Receptions = ()
    
    @classmethod
    def of(
        cls,
        message: str,
        value: int,
        receptions: Optional[Mapping[int, Transition]] = None
    ) -> "UnmatchedReception":
        return cls(message, value, _sorted_receptions(receptions or {}))
    
    @property
    def receivers(self) -> Tuple[int, ...]:
        return tuple(agent for agent, _ in self.receptions)
    
    def reception_of(self, agent: int) -> Optional[Transition]:
        for receiver, transition in self.receptions:
            if receiver == agent:
                return transition
        return None


Step = Union[StepDescriptor, UnmatchedReception]


@dataclass(frozen=True)
class Run:
    """An initial configuration and a sequence of steps"""
    initial: Configuration
    steps: Tuple[StepDescriptor, ...] = ()
    
    @property
    def agents(self) -> Tuple[int, ...]:
        return self.initial.agents
    
    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PartialRun:
    """A run whose steps may also be unmatched receptions"""
    initial: Configuration
    steps: Tuple[Step, ...] = ()
    
    @property
    def agents(self) -> Tuple[int, ...]:
        return self.initial.agents
    
    @property
    def is_complete(self) -> bool:
        return not any(isinstance(step, UnmatchedReception) for step in self.steps)
    
    def to_run(self) -> Run:
        if not self.is_complete:
            raise ValueError("partial run still has unmatched receptions")
        return Run(self.initial, tuple(self.steps))
    
    @classmethod
    def from_run(cls, run: Run) -> "PartialRun":
        return cls(run.initial, tuple(run.steps))
    
    def __len__(self) -> int:
        return len(self.steps)


def action_holds(action: Action, current: int, value: int) -> bool:
    """Whether a reception with this action accepts value against the register content"""
    if action == Action.EQ:
        return current == value
    if action == Action.NEQ:
        return current != value
    return True


def broadcast_value(configuration: Configuration, step: StepDescriptor) -> int:
    return configuration.value(step.broadcaster, step.transition.op.register)


def _receive(local: LocalConfiguration, transition: Transition, value: int) -> LocalConfiguration:
    if transition.op.action == Action.DOWN:
        return local.stored(transition.target, transition.op.register, value)
    return local.moved(transition.target)


def _reception_problem(
    index: ProtocolIndex,
    configuration: Configuration,
    agent: int,
    transition: Transition,
    message: str,
    value: int
) -> Optional[str]:
    if agent not in configuration:
        return f"unknown receiving agent {agent}"
    if transition not in index:
        return f"transition {transition} is not in the protocol"
    if not transition.is_reception:
        return f"agent {agent} answers with non-reception {transition}"
    local = configuration.local(agent)
    if transition.source != local.state:
        return f"agent {agent} is in {local.state}, not {transition.source}"
    if transition.op.message != message:
        return f"agent {agent} expects {transition.op.message}, got {message}"
    current = local.value(transition.op.register)
    if not action_holds(transition.op.action, current, value):
        return (
            f"agent {agent} test {transition.op.action.value} fails: "
            f"register {transition.op.register} holds {current}, received {value}"
        )
    return None


def successor(configuration: Configuration, step: Step) -> Configuration:
    """Apply a step without checking it"""
    changes: Dict[int, LocalConfiguration] = {}
    if isinstance(step, UnmatchedReception):
        value = step.value
    else:
        local = configuration.local(step.broadcaster)
        changes[step.broadcaster] = local.moved(step.transition.target)
        if step.transition.is_local:
            return configuration.updated(changes)
        value = local.value(step.transition.op.register)
    for agent, transition in step.receptions:
        changes[agent] = _receive(configuration.local(agent), transition, value)
    return configuration.updated(changes)


def step_problem(
    protocol: Protocol,
    configuration: Configuration,
    step: Step,
    index: Optional[ProtocolIndex] = None
) -> Optional[str]:
    """First violated constraint of a step, or None when it is enabled"""
    index = index or get_index(protocol)
    if isinstance(step, UnmatchedReception):
        message, value, broadcaster = step.message, step.value, None
    else:
        broadcaster = step.broadcaster
        transition = step.transition
        if broadcaster not in configuration:
            return f"unknown broadcaster {broadcaster}"
        if transition not in index:
            return f"transition {transition} is not in the protocol"
        local = configuration.local(broadcaster)
        if transition.source != local.state:
            return f"agent {broadcaster} is in {local.state}, not {transition.source}"
        if transition.is_reception:
            return f"agent {broadcaster} cannot fire reception {transition} on its own"
        if transition.is_local:
            if step.receptions:
                return "local tests admit no receptions"
            left = local.value(transition.op.register)
            right = local.value(transition.op.other_register)
            if (left == right) != (transition.op.action == Action.EQ):
                return f"agent {broadcaster} local test {transition.op} fails"
            return None
        message = transition.op.message
        value = local.value(transition.op.register)
    seen = set()
    for agent, reception in step.receptions:
        if agent == broadcaster:
            return f"agent {agent} cannot receive its own broadcast"
        if agent in seen:
            return f"agent {agent} receives twice"
        seen.add(agent)
        problem = _reception_problem(index, configuration, agent, reception, message, value)
        if problem:
            return problem
    return None


def apply_step(
    protocol: Protocol,
    configuration: Configuration,
    step: Step,
    index: Optional[ProtocolIndex] = None
) -> Configuration:
    """
    Apply an enabled step
    
    Raises:
        NotEnabledException: naming the first violated constraint
    """
    problem = step_problem(protocol, configuration, step, index)
    if problem:
        raise NotEnabledException(problem)
    return successor(configuration, step)


def enabled_steps(
    protocol: Protocol,
    configuration: Configuration,
    index: Optional[ProtocolIndex] = None
) -> List[StepDescriptor]:
    """
    Enumerate every enabled step descriptor
    
    Each non-broadcasting agent either idles or takes one enabled reception; the
    options are combined as a cross product, broadcasters and transitions in order.
    """
    index = index or get_index(protocol)
    steps: List[StepDescriptor] = []
    for broadcaster, local in configuration.items():
        for transition in index.broadcasts_from(local.state):
            value = local.value(transition.op.register)
            message = transition.op.message
            receivers: List[int] = []
            options: List[List[Optional[Transition]]] = []
            for agent, other in configuration.items():
                if agent == broadcaster:
                    continue
                enabled = [
                    reception
                    for reception in index.receptions_from(other.state, message)
                    if action_holds(reception.op.action, other.value(reception.op.register), value)
                ]
                if enabled:
                    receivers.append(agent)
                    options.append([None] + enabled)
            for choice in product(*options):
                receptions = tuple(
                    (agent, reception)
                    for agent, reception in zip(receivers, choice)
                    if reception is not None
                )
                steps.append(StepDescriptor(broadcaster, transition, receptions))
        for transition in index.local_tests_from(local.state):
            left = local.value(transition.op.register)
            right = local.value(transition.op.other_register)
            if (left == right) == (transition.op.action == Action.EQ):
                steps.append(StepDescriptor(broadcaster, transition))
    return steps


def iter_configurations(
    protocol: Protocol,
    steps: Tuple[Step, ...],
    initial: Configuration,
    require_initial: bool = True
) -> Iterator[Configuration]:
    """
    Yield the initial configuration and the configuration after each step
    
    Raises:
        InvalidRunException: with the 1-based index of the first disabled step
    """
    if require_initial and not is_initial(protocol, initial):
        raise InvalidRunException(0, "not an initial configuration")
    index = get_index(protocol)
    configuration = initial
    yield configuration
    for position, step in enumerate(steps, start=1):
        problem = step_problem(protocol, configuration, step, index)
        if problem:
            raise InvalidRunException(position, problem)
        configuration = successor(configuration, step)
        yield configuration


def replay(protocol: Protocol, run: Run, require_initial: bool = True) -> Configuration:
    """Replay a run and return its final configuration"""
    for position, step in enumerate(run.steps, start=1):
        if isinstance(step, UnmatchedReception):
            raise InvalidRunException(position, "unmatched reception in a run")
    configuration = run.initial
    for configuration in iter_configurations(protocol, run.steps, run.initial, require_initial):
        pass
    return configuration


def replay_partial(
    protocol: Protocol,
    partial: PartialRun,
    require_initial: bool = True
) -> Configuration:
    """Replay a partial run, checking unmatched receptions against their carried value"""
    configuration = partial.initial
    for configuration in iter_configurations(
        protocol, partial.steps, partial.initial, require_initial
    ):
        pass
    return configuration


def trace(initial: Configuration, steps: Tuple[Step, ...]) -> List[Configuration]:
    """Configurations before each step and at the end, without checking the steps"""
    configurations = [initial]
    for step in steps:
        configurations.append(successor(configurations[-1], step))
    return configurations


def step_value(configuration: Configuration, step: Step) -> Optional[int]:
    """Value carried by a step, None for local tests"""
    if isinstance(step, UnmatchedReception):
        return step.value
    if step.transition.is_local:
        return None
    return broadcast_value(configuration, step)


def double_run(run: Run) -> Run:
    """
    Copycat doubling: a second copy of the run on fresh agents and values
    
    Steps of the two copies are interleaved; the result covers every state the
    original covers, with twice as many agents.
    """
    agent_offset = max(run.agents) + 1
    value_offset = max(run.initial.values_used(), default=-1) + 1
    copy = Configuration(
        tuple(agent + agent_offset for agent in run.agents),
        tuple(
            LocalConfiguration(local.state, tuple(v + value_offset for v in local.values))
            for local in run.initial.entries
        )
    )
    steps: List[StepDescriptor] = []
    for step in run.steps:
        steps.append(step)
        steps.append(StepDescriptor(
            step.broadcaster + agent_offset,
            step.transition,
            tuple((agent + agent_offset, t) for agent, t in step.receptions)
        ))
    return Run(run.initial.merged(copy), tuple(steps))


def final_configuration(run: Union[Run, PartialRun]) -> Configuration:
    """Final configuration of a run, without checking it"""
    return trace(run.initial, run.steps)[-1]
