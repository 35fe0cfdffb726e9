"""
Pydantic models for JSON documents
"""
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

FORMAT_VERSION = 1


# Enums
class Verdict(str, Enum):
    FOUND = "found"
    NOT_FOUND = "not-found-within-bounds"
    BUDGET_EXCEEDED = "budget-exceeded"
    COVERABLE = "coverable"
    NOT_COVERABLE = "not-coverable"
    VALID = "valid"
    INVALID = "invalid"
    OK = "ok"


# Run Models
class AgentDocument(BaseModel):
    agent: int
    state: str
    values: List[int]


class StepDocument(BaseModel):
    """Broadcast step, or unmatched reception when broadcaster is null"""
    broadcaster: Optional[int] = None
    transition: Optional[int] = None
    message: Optional[str] = None
    value: Optional[int] = None
    receptions: Dict[int, int] = Field(default_factory=dict)


class RunDocument(BaseModel):
    format: int = FORMAT_VERSION
    kind: Literal["run", "partial-run"] = "run"
    protocol: str = ""
    initial: List[AgentDocument]
    steps: List[StepDocument] = Field(default_factory=list)


# Tree Models
class LocalStepDocument(BaseModel):
    transition: int
    value: Optional[int] = None


class DecompositionDocument(BaseModel):
    words: List[List[str]]
    messages: List[str] = Field(default_factory=list)


class AnnotationDocument(BaseModel):
    value: int
    decomposition: DecompositionDocument
    split: List[int] = Field(default_factory=list)
    followers: Dict[int, int] = Field(default_factory=dict)


class NodeDocument(BaseModel):
    kind: Literal["boss", "follower"] = "boss"
    value: int
    spec: List[str] = Field(default_factory=list)
    final_message: Optional[str] = None
    start: AgentDocument
    steps: List[LocalStepDocument] = Field(default_factory=list)
    annotations: List[AnnotationDocument] = Field(default_factory=list)
    assignments: Dict[int, int] = Field(default_factory=dict)
    children: List["NodeDocument"] = Field(default_factory=list)


NodeDocument.model_rebuild()


class TreeDocument(BaseModel):
    format: int = FORMAT_VERSION
    kind: Literal["tree"] = "tree"
    protocol: str = ""
    root: NodeDocument


# Abstract Run Models
class AbstractStepDocument(BaseModel):
    tag: str
    transition: Optional[int] = None
    S: List[str]
    boss: Optional[str] = None
    K: List[str]


class AbstractRunDocument(BaseModel):
    format: int = FORMAT_VERSION
    kind: Literal["abstract-run"] = "abstract-run"
    protocol: str = ""
    steps: List[AbstractStepDocument] = Field(default_factory=list)


# Machine Models
class LcsRuleDocument(BaseModel):
    source: str = Field(..., alias="from")
    op: Literal["push", "pop"]
    symbol: str
    target: str = Field(..., alias="to")
    
    class Config:
        populate_by_name = True


class LcsDocument(BaseModel):
    format: int = FORMAT_VERSION
    kind: Literal["lcs"] = "lcs"
    locations: List[str]
    alphabet: List[str]
    rules: List[LcsRuleDocument] = Field(default_factory=list)
    initial: str
    final: str
    
    @model_validator(mode="after")
    def check_endpoints(self) -> "LcsDocument":
        """Rules and endpoints must use declared locations and symbols"""
        locations = set(self.locations)
        for name in [self.initial, self.final] + [end for rule in self.rules for end in (rule.source, rule.target)]:
            if name not in locations:
                raise ValueError(f"unknown location {name}")
        for rule in self.rules:
            if rule.symbol not in self.alphabet:
                raise ValueError(f"unknown symbol {rule.symbol}")
        return self


class MinskyRuleDocument(BaseModel):
    source: str = Field(..., alias="from")
    op: Literal["inc", "dec", "testz"]
    counter: int = Field(..., ge=1, le=2)
    target: str = Field(..., alias="to")
    
    class Config:
        populate_by_name = True


class MinskyDocument(BaseModel):
    format: int = FORMAT_VERSION
    kind: Literal["minsky"] = "minsky"
    locations: List[str]
    rules: List[MinskyRuleDocument] = Field(default_factory=list)
    initial: str
    final: str
    
    @model_validator(mode="after")
    def check_endpoints(self) -> "MinskyDocument":
        locations = set(self.locations)
        for name in [self.initial, self.final] + [end for rule in self.rules for end in (rule.source, rule.target)]:
            if name not in locations:
                raise ValueError(f"unknown location {name}")
        return self


# Tree Validation Models
class TreeViolation(BaseModel):
    """One failed condition at one node; path is root.i.j..."""
    path: str
    condition: str
    message: str


# Result Models
class CommandResult(BaseModel):
    """Single JSON object written to stdout by verdict-bearing commands"""
    verdict: Verdict
    witness: Optional[Any] = None
    stats: Dict[str, Any] = Field(default_factory=dict)
