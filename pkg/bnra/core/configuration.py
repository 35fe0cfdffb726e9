"""
Configurations: per-agent states and register valuations
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Tuple

from bnra.core.protocol import Protocol
from bnra.exceptions import InvalidAgentCountException


class CanonicalMode(str, Enum):
    VALUES_ONLY = "values-only"
    VALUES_AND_AGENTS = "values-and-agents"


@dataclass(frozen=True)
class LocalConfiguration:
    """State and register valuation of one agent; registers are 1-based"""
    state: str
    values: Tuple[int, ...]
    
    def value(self, register: int) -> int:
        return self.values[register - 1]
    
    def moved(self, state: str) -> "LocalConfiguration":
        return LocalConfiguration(state, self.values)
    
    def stored(self, state: str, register: int, value: int) -> "LocalConfiguration":
        values = list(self.values)
        values[register - 1] = value
        return LocalConfiguration(state, tuple(values))


@dataclass(frozen=True)
class Configuration:
    """Agents in id order with their local configurations"""
    agents: Tuple[int, ...]
    entries: Tuple[LocalConfiguration, ...]
    
    def __post_init__(self):
        if len(self.agents) != len(self.entries):
            raise ValueError("agents and entries differ in length")
    
    @cached_property
    def _positions(self) -> Dict[int, int]:
        return {agent: position for position, agent in enumerate(self.agents)}
    
    @classmethod
    def from_mapping(cls, mapping: Mapping[int, LocalConfiguration]) -> "Configuration":
        agents = tuple(sorted(mapping))
        return cls(agents, tuple(mapping[agent] for agent in agents))
    
    def __contains__(self, agent: int) -> bool:
        return agent in self._positions
    
    def local(self, agent: int) -> LocalConfiguration:
        return self.entries[self._positions[agent]]
    
    def state_of(self, agent: int) -> str:
        return self.local(agent).state
    
    def value(self, agent: int, register: int) -> int:
        return self.local(agent).value(register)
    
    def items(self) -> Iterable[Tuple[int, LocalConfiguration]]:
        return zip(self.agents, self.entries)
    
    def updated(self, changes: Mapping[int, LocalConfiguration]) -> "Configuration":
        if not changes:
            return self
        entries = list(self.entries)
        for agent, local in changes.items():
            entries[self._positions[agent]] = local
        return Configuration(self.agents, tuple(entries))
    
    def merged(self, other: "Configuration") -> "Configuration":
        """Disjoint union of two configurations"""
        mapping = dict(self.items())
        for agent, local in other.items():
            if agent in mapping:
                raise ValueError(f"agent {agent} present in both configurations")
            mapping[agent] = local
        return Configuration.from_mapping(mapping)
    
    def covers(self, state: str) -> bool:
        return any(local.state == state for local in self.entries)
    
    def all_in(self, state: str) -> bool:
        return all(local.state == state for local in self.entries)
    
    def states(self) -> List[str]:
        return [local.state for local in self.entries]
    
    def values_used(self) -> List[int]:
        return sorted({value for local in self.entries for value in local.values})


def initial_configuration(protocol: Protocol, n: int) -> Configuration:
    """
    Build the canonical initial configuration over agents 0..n-1
    
    Register i of agent a holds a*r + (i-1), so all values are distinct.
    """
    if n < 1:
        raise InvalidAgentCountException(n)
    r = protocol.registers
    return Configuration(
        tuple(range(n)),
        tuple(
            LocalConfiguration(protocol.initial_state, tuple(a * r + i for i in range(r)))
            for a in range(n)
        )
    )


def is_initial(protocol: Protocol, configuration: Configuration) -> bool:
    """All agents at the initial state and all (agent, register) values pairwise distinct"""
    seen = set()
    for local in configuration.entries:
        if local.state != protocol.initial_state or len(local.values) != protocol.registers:
            return False
        for value in local.values:
            if value in seen:
                return False
            seen.add(value)
    return True


def _rename_values(entries: Iterable[LocalConfiguration]) -> Tuple[LocalConfiguration, ...]:
    names: Dict[int, int] = {}
    renamed = []
    for local in entries:
        values = []
        for value in local.values:
            if value not in names:
                names[value] = len(names)
            values.append(names[value])
        renamed.append(LocalConfiguration(local.state, tuple(values)))
    return tuple(renamed)


def _value_pattern(local: LocalConfiguration) -> Tuple[int, ...]:
    first: Dict[int, int] = {}
    return tuple(first.setdefault(value, len(first)) for value in local.values)


def canonicalize(
    configuration: Configuration,
    mode: CanonicalMode = CanonicalMode.VALUES_ONLY
) -> Configuration:
    """
    Rename values (and optionally agents) to a canonical representative
    
    Values are renamed 0, 1, 2, ... in order of first occurrence, scanning agents in
    order and registers by index. In values-and-agents mode agents are first sorted by
    (state, local value pattern) with stable tie-breaking and renumbered 0..n-1.
    """
    if mode == CanonicalMode.VALUES_AND_AGENTS:
        ordered = sorted(
            configuration.entries,
            key=lambda local: (local.state, _value_pattern(local))
        )
        return Configuration(tuple(range(len(ordered))), _rename_values(ordered))
    return Configuration(configuration.agents, _rename_values(configuration.entries))
