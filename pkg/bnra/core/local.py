"""
Local runs and value inputs/outputs
"""
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

from bnra.core.configuration import LocalConfiguration
from bnra.core.protocol import Action, Protocol, Transition, get_index
from bnra.core.semantics import (
    PartialRun,
    Run,
    StepDescriptor,
    UnmatchedReception,
    action_holds,
    step_value,
    trace,
)
from bnra.core.words import Word
from bnra.exceptions import InvalidRunException


@dataclass(frozen=True)
class LocalStep:
    """Internal step (broadcast or local test) or reception of a value"""
    transition: Transition
    value: Optional[int] = None
    
    @property
    def is_reception(self) -> bool:
        return self.transition.is_reception


@dataclass(frozen=True)
class LocalRun:
    start: LocalConfiguration
    steps: Tuple[LocalStep, ...] = ()
    
    def __len__(self) -> int:
        return len(self.steps)
    
    def prefix(self, length: int) -> "LocalRun":
        return LocalRun(self.start, self.steps[:length])
    
    def extended(self, *steps: LocalStep) -> "LocalRun":
        return LocalRun(self.start, self.steps + tuple(steps))
    
    @property
    def initial_values(self) -> Tuple[int, ...]:
        return self.start.values


def _advance(local: LocalConfiguration, step: LocalStep) -> LocalConfiguration:
    transition = step.transition
    if transition.is_reception and transition.op.action == Action.DOWN:
        return local.stored(transition.target, transition.op.register, step.value)
    return local.moved(transition.target)


def iter_local(run: LocalRun) -> Iterator[Tuple[LocalConfiguration, LocalStep]]:
    """Pairs (configuration before the step, step), without checking"""
    local = run.start
    for step in run.steps:
        yield local, step
        local = _advance(local, step)


def local_trace(run: LocalRun) -> List[LocalConfiguration]:
    configurations = [run.start]
    for _, step in iter_local(run):
        configurations.append(_advance(configurations[-1], step))
    return configurations


def replay_local(protocol: Protocol, run: LocalRun) -> LocalConfiguration:
    """
    Replay a local run and return its final local configuration
    
    Raises:
        InvalidRunException: with the 1-based index of the first invalid step
    """
    index = get_index(protocol)
    local = run.start
    if len(local.values) != protocol.registers:
        raise InvalidRunException(0, "valuation does not match the register count")
    for position, step in enumerate(run.steps, start=1):
        transition = step.transition
        if transition not in index:
            raise InvalidRunException(position, f"transition {transition} is not in the protocol")
        if transition.source != local.state:
            raise InvalidRunException(position, f"in {local.state}, not {transition.source}")
        if transition.is_reception:
            if step.value is None:
                raise InvalidRunException(position, "reception without a value")
            current = local.value(transition.op.register)
            if not action_holds(transition.op.action, current, step.value):
                raise InvalidRunException(
                    position,
                    f"test {transition.op.action.value} fails: register holds {current}, "
                    f"received {step.value}"
                )
        elif transition.is_local:
            left = local.value(transition.op.register)
            right = local.value(transition.op.other_register)
            if (left == right) != (transition.op.action == Action.EQ):
                raise InvalidRunException(position, f"local test {transition.op} fails")
        local = _advance(local, step)
    return local


def local_visits(run: LocalRun, state: str) -> bool:
    return any(local.state == state for local in local_trace(run))


def received_values(run: LocalRun) -> List[int]:
    """Values received along the run, in order of first reception"""
    seen: List[int] = []
    for step in run.steps:
        if step.is_reception and step.value not in seen:
            seen.append(step.value)
    return seen


def _local_v_input(run: LocalRun, v: int) -> Word:
    return tuple(step.transition.op.message for step in run.steps if step.is_reception and step.value == v)


def _local_v_output(run: LocalRun, v: int) -> Word:
    return tuple(
        step.transition.op.message
        for local, step in iter_local(run)
        if step.transition.is_broadcast and local.value(step.transition.op.register) == v
    )


def v_input(run: Union[LocalRun, PartialRun, Run], v: int) -> Word:
    """
    Message types received with value v
    
    For partial runs only unmatched receptions count, one letter per step.
    """
    if isinstance(run, LocalRun):
        return _local_v_input(run, v)
    return tuple(
        step.message
        for step in run.steps
        if isinstance(step, UnmatchedReception) and step.value == v
    )


def v_output(run: Union[LocalRun, PartialRun, Run], v: int) -> Word:
    """Message types broadcast with value v"""
    if isinstance(run, LocalRun):
        return _local_v_output(run, v)
    configurations = trace(run.initial, run.steps)
    return tuple(
        step.transition.op.message
        for configuration, step in zip(configurations, run.steps)
        if isinstance(step, StepDescriptor)
        and step.transition.is_broadcast
        and step_value(configuration, step) == v
    )


def project_local_run(run: Union[Run, PartialRun], agent: int) -> LocalRun:
    """The local run followed by one agent of a (partial) run"""
    configurations = trace(run.initial, run.steps)
    steps: List[LocalStep] = []
    for configuration, step in zip(configurations, run.steps):
        if isinstance(step, StepDescriptor) and step.broadcaster == agent:
            steps.append(LocalStep(step.transition))
            continue
        reception = step.reception_of(agent)
        if reception is not None:
            steps.append(LocalStep(reception, step_value(configuration, step)))
    return LocalRun(run.initial.local(agent), tuple(steps))


def local_segment(run: LocalRun, start: int, end: int) -> LocalRun:
    """Steps start..end-1 of a local run, starting from the configuration reached before start"""
    return LocalRun(local_trace(run)[start], run.steps[start:end])
