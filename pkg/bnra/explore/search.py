"""
Bounded explicit-state exploration over canonical configurations
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import structlog
from pydantic import BaseModel, Field

from bnra.config import settings
from bnra.core.configuration import (
    CanonicalMode,
    Configuration,
    canonicalize,
    initial_configuration,
)
from bnra.core.protocol import Protocol, get_index
from bnra.core.semantics import Run, StepDescriptor, enabled_steps, successor
from bnra.exceptions import UnknownStateException

logger = structlog.get_logger(__name__)


class ExploreStatus(str, Enum):
    FOUND = "found"
    NOT_FOUND = "not-found-within-bounds"
    BUDGET_EXCEEDED = "budget-exceeded"


class ExploreParams(BaseModel):
    """Bounds of one exploration"""
    agents: int = Field(..., ge=1)
    max_depth: int = Field(..., ge=0)
    max_states: int = Field(default_factory=lambda: settings.explore_max_states, ge=1)
    canonical_mode: CanonicalMode = Field(
        default_factory=lambda: CanonicalMode(settings.explore_canonical_mode)
    )
    workers: int = Field(default_factory=lambda: settings.explore_workers, ge=1)


@dataclass
class ExploreResult:
    status: ExploreStatus
    run: Optional[Run] = None
    stats: Dict[str, int] = field(default_factory=dict)
    
    @property
    def found(self) -> bool:
        return self.status == ExploreStatus.FOUND


Goal = Callable[[Configuration], bool]


class Explorer:
    """
    Breadth-first search by depth with a canonical visited set
    
    Each visited canonical key keeps the concrete configuration it was first
    reached with, so witnesses are rebuilt from parent pointers and replay
    without renaming. With several workers a layer is expanded in a thread pool
    and merged in frontier order, which keeps verdicts and witnesses identical
    for every worker count.
    """
    
    def __init__(self, protocol: Protocol, params: ExploreParams):
        self.protocol = protocol
        self.params = params
        self.index = get_index(protocol)
    
    def _key(self, configuration: Configuration) -> Tuple:
        canonical = canonicalize(configuration, self.params.canonical_mode)
        return canonical.agents, canonical.entries
    
    def _expand(self, configuration: Configuration) -> List[Tuple[StepDescriptor, Configuration]]:
        return [
            (step, successor(configuration, step))
            for step in enabled_steps(self.protocol, configuration, self.index)
        ]
    
    def search(self, goal: Goal) -> ExploreResult:
        initial = initial_configuration(self.protocol, self.params.agents)
        stats = {"states": 1, "depth": 0, "transitions": 0, "frontier_peak": 1}
        if goal(initial):
            return ExploreResult(ExploreStatus.FOUND, Run(initial, ()), stats)
        
        start = self._key(initial)
        parents: Dict[Tuple, Tuple[Optional[Tuple], Optional[StepDescriptor]]] = {start: (None, None)}
        representatives: Dict[Tuple, Configuration] = {start: initial}
        frontier = [start]
        
        executor = ThreadPoolExecutor(self.params.workers) if self.params.workers > 1 else None
        try:
            for depth in range(1, self.params.max_depth + 1):
                configurations = [representatives[key] for key in frontier]
                if executor is not None:
                    expansions = list(executor.map(self._expand, configurations))
                else:
                    expansions = [self._expand(c) for c in configurations]
                
                layer: List[Tuple] = []
                for parent, successors in zip(frontier, expansions):
                    for step, child in successors:
                        stats["transitions"] += 1
                        key = self._key(child)
                        if key in parents:
                            continue
                        if len(parents) >= self.params.max_states:
                            stats["depth"] = depth
                            logger.info("explore_budget_exceeded", **stats)
                            return ExploreResult(ExploreStatus.BUDGET_EXCEEDED, None, stats)
                        parents[key] = (parent, step)
                        representatives[key] = child
                        stats["states"] += 1
                        if goal(child):
                            stats["depth"] = depth
                            logger.info("explore_finished", status="found", **stats)
                            return ExploreResult(
                                ExploreStatus.FOUND,
                                self._rebuild(initial, key, parents),
                                stats
                            )
                        layer.append(key)
                
                stats["depth"] = depth
                stats["frontier_peak"] = max(stats["frontier_peak"], len(layer))
                logger.debug("explore_layer", depth=depth, frontier=len(layer), states=stats["states"])
                frontier = layer
                if not frontier:
                    break
        finally:
            if executor is not None:
                executor.shutdown()
        
        logger.info("explore_finished", status="not-found", **stats)
        return ExploreResult(ExploreStatus.NOT_FOUND, None, stats)
    
    def _rebuild(self, initial: Configuration, key: Tuple, parents) -> Run:
        steps: List[StepDescriptor] = []
        while True:
            parent, step = parents[key]
            if parent is None:
                break
            steps.append(step)
            key = parent
        steps.reverse()
        return Run(initial, tuple(steps))


def _check_state(protocol: Protocol, state: str) -> None:
    if state not in protocol.states:
        raise UnknownStateException(state)


def bounded_cover(protocol: Protocol, target: str, params: ExploreParams) -> ExploreResult:
    """Search for a run whose final configuration has some agent in target"""
    _check_state(protocol, target)
    return Explorer(protocol, params).search(lambda configuration: configuration.covers(target))


def bounded_target(protocol: Protocol, target: str, params: ExploreParams) -> ExploreResult:
    """Search for a run whose final configuration has every agent in target"""
    _check_state(protocol, target)
    return Explorer(protocol, params).search(lambda configuration: configuration.all_in(target))
