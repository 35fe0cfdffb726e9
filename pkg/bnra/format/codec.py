"""
JSON serialization of runs, partial runs, unfolding trees and abstract runs
"""
import json
from typing import Any, Dict, List, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from bnra.core.configuration import Configuration, LocalConfiguration
from bnra.core.local import LocalRun, LocalStep
from bnra.core.protocol import Protocol, Transition, get_index
from bnra.core.semantics import PartialRun, Run, StepDescriptor, UnmatchedReception
from bnra.cover1.abstraction import AbstractConfig, AbstractRun, AbstractStep, StepKind
from bnra.exceptions import DocumentParseException
from bnra.models import (
    AbstractRunDocument,
    AbstractStepDocument,
    AgentDocument,
    AnnotationDocument,
    DecompositionDocument,
    LcsDocument,
    LocalStepDocument,
    MinskyDocument,
    NodeDocument,
    RunDocument,
    StepDocument,
    TreeDocument,
)
from bnra.trees.model import Decomposition, InitialValueAnnotation, NodeKind, TreeNode

Model = TypeVar("Model", bound=BaseModel)


def dumps(document: Union[BaseModel, Dict[str, Any]]) -> str:
    """Deterministic JSON text: sorted keys, two-space indent"""
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json", by_alias=True)
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str, model: Type[Model]) -> Model:
    """
    Parse JSON text into a document model
    
    Raises:
        DocumentParseException: positioned for syntax errors, field path for schema errors
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseException(exc.msg, exc.lineno, exc.colno)
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise DocumentParseException(f"{field}: {first['msg']}")


def _transition(protocol: Protocol, index: int) -> Transition:
    if not 0 <= index < len(protocol.transitions):
        raise DocumentParseException(f"transition index {index} out of range")
    return protocol.transitions[index]


# Configurations
def configuration_to_documents(configuration: Configuration) -> List[AgentDocument]:
    return [
        AgentDocument(agent=agent, state=local.state, values=list(local.values))
        for agent, local in configuration.items()
    ]


def configuration_from_documents(documents: List[AgentDocument]) -> Configuration:
    mapping = {}
    for document in documents:
        if document.agent in mapping:
            raise DocumentParseException(f"agent {document.agent} listed twice")
        mapping[document.agent] = LocalConfiguration(document.state, tuple(document.values))
    return Configuration.from_mapping(mapping)


# Runs
def run_to_document(protocol: Protocol, run: Union[Run, PartialRun]) -> RunDocument:
    index = get_index(protocol)
    steps = []
    for step in run.steps:
        receptions = {agent: index.index_of(t) for agent, t in step.receptions}
        if isinstance(step, UnmatchedReception):
            steps.append(StepDocument(message=step.message, value=step.value, receptions=receptions))
        else:
            steps.append(StepDocument(
                broadcaster=step.broadcaster,
                transition=index.index_of(step.transition),
                receptions=receptions
            ))
    return RunDocument(
        kind="partial-run" if isinstance(run, PartialRun) else "run",
        protocol=protocol.name,
        initial=configuration_to_documents(run.initial),
        steps=steps
    )


def run_from_document(protocol: Protocol, document: RunDocument) -> Union[Run, PartialRun]:
    steps = []
    for position, step in enumerate(document.steps, start=1):
        receptions = {agent: _transition(protocol, t) for agent, t in step.receptions.items()}
        if step.broadcaster is None:
            if step.message is None or step.value is None:
                raise DocumentParseException(f"step {position}: unmatched reception needs message and value")
            steps.append(UnmatchedReception.of(step.message, step.value, receptions))
        else:
            if step.transition is None:
                raise DocumentParseException(f"step {position}: broadcast step needs a transition")
            steps.append(StepDescriptor.of(
                step.broadcaster, _transition(protocol, step.transition), receptions
            ))
    initial = configuration_from_documents(document.initial)
    if document.kind == "partial-run":
        return PartialRun(initial, tuple(steps))
    if any(isinstance(step, UnmatchedReception) for step in steps):
        raise DocumentParseException("a run cannot contain unmatched receptions")
    return Run(initial, tuple(steps))


def serialize_run(protocol: Protocol, run: Union[Run, PartialRun]) -> str:
    return dumps(run_to_document(protocol, run))


def deserialize_run(protocol: Protocol, text: str) -> Union[Run, PartialRun]:
    return run_from_document(protocol, loads(text, RunDocument))


# Trees
def _local_run_documents(protocol: Protocol, run: LocalRun):
    index = get_index(protocol)
    start = AgentDocument(agent=0, state=run.start.state, values=list(run.start.values))
    steps = [
        LocalStepDocument(transition=index.index_of(step.transition), value=step.value)
        for step in run.steps
    ]
    return start, steps


def node_to_document(protocol: Protocol, node: TreeNode) -> NodeDocument:
    start, steps = _local_run_documents(protocol, node.local_run)
    return NodeDocument(
        kind=node.kind.value,
        value=node.value,
        spec=list(node.spec),
        final_message=node.final_message,
        start=start,
        steps=steps,
        annotations=[
            AnnotationDocument(
                value=annotation.value,
                decomposition=DecompositionDocument(
                    words=[list(w) for w in annotation.decomposition.words],
                    messages=list(annotation.decomposition.messages)
                ),
                split=list(annotation.split),
                followers=dict(annotation.followers)
            )
            for annotation in node.annotations
        ],
        assignments=dict(node.assignments),
        children=[node_to_document(protocol, child) for child in node.children]
    )


def node_from_document(protocol: Protocol, document: NodeDocument) -> TreeNode:
    run = LocalRun(
        LocalConfiguration(document.start.state, tuple(document.start.values)),
        tuple(
            LocalStep(_transition(protocol, step.transition), step.value)
            for step in document.steps
        )
    )
    try:
        annotations = tuple(
            InitialValueAnnotation(
                value=annotation.value,
                decomposition=Decomposition(
                    tuple(tuple(w) for w in annotation.decomposition.words),
                    tuple(annotation.decomposition.messages)
                ),
                split=tuple(annotation.split),
                followers=tuple(sorted(annotation.followers.items()))
            )
            for annotation in document.annotations
        )
    except ValueError as exc:
        raise DocumentParseException(str(exc))
    return TreeNode(
        kind=NodeKind(document.kind),
        local_run=run,
        value=document.value,
        spec=tuple(document.spec),
        final_message=document.final_message,
        annotations=annotations,
        assignments=tuple(sorted(document.assignments.items())),
        children=tuple(node_from_document(protocol, child) for child in document.children)
    )


def serialize_tree(protocol: Protocol, node: TreeNode) -> str:
    return dumps(TreeDocument(protocol=protocol.name, root=node_to_document(protocol, node)))


def deserialize_tree(protocol: Protocol, text: str) -> TreeNode:
    return node_from_document(protocol, loads(text, TreeDocument).root)


# Abstract runs
def abstract_run_to_document(protocol: Protocol, run: AbstractRun) -> AbstractRunDocument:
    """Transition indices refer to the disequality-free protocol the run lives in"""
    index = get_index(protocol)
    return AbstractRunDocument(
        protocol=protocol.name,
        steps=[
            AbstractStepDocument(
                tag=step.kind.value,
                transition=index.index_of(step.transition) if step.transition is not None else None,
                S=sorted(step.target.covered),
                boss=step.target.boss,
                K=sorted(step.target.clique)
            )
            for step in run.steps
        ]
    )


def abstract_run_from_document(protocol: Protocol, document: AbstractRunDocument) -> AbstractRun:
    steps = []
    for position, step in enumerate(document.steps, start=1):
        try:
            kind = StepKind(step.tag)
        except ValueError:
            raise DocumentParseException(f"step {position}: unknown tag {step.tag}")
        if kind != StepKind.GANG_RESET and step.transition is None:
            raise DocumentParseException(f"step {position}: {step.tag} needs a transition")
        transition = _transition(protocol, step.transition) if step.transition is not None else None
        target = AbstractConfig(frozenset(step.S), step.boss, frozenset(step.K))
        steps.append(AbstractStep(kind, transition, target))
    return AbstractRun(tuple(steps))


def serialize_abstract_run(protocol: Protocol, run: AbstractRun) -> str:
    return dumps(abstract_run_to_document(protocol, run))


def deserialize_abstract_run(protocol: Protocol, text: str) -> AbstractRun:
    return abstract_run_from_document(protocol, loads(text, AbstractRunDocument))


# Machines
def load_lcs(text: str) -> LcsDocument:
    return loads(text, LcsDocument)


def load_minsky(text: str) -> MinskyDocument:
    return loads(text, MinskyDocument)
