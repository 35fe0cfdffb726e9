"""
Unfolding trees: boss and follower nodes with decomposition annotations
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from bnra.core.local import LocalRun
from bnra.core.words import Word


class NodeKind(str, Enum):
    BOSS = "boss"
    FOLLOWER = "follower"


@dataclass(frozen=True)
class Decomposition:
    """(w0, m1, w1, ..., ml, wl) with pairwise distinct mi"""
    words: Tuple[Word, ...]
    messages: Tuple[str, ...] = ()
    
    def __post_init__(self):
        if len(self.words) != len(self.messages) + 1:
            raise ValueError("a decomposition has one more word than messages")
        if len(set(self.messages)) != len(self.messages):
            raise ValueError("decomposition messages must be pairwise distinct")
    
    @property
    def length(self) -> int:
        return len(self.messages)
    
    def allowed(self, segment: int) -> Tuple[str, ...]:
        """Letters that may be inserted in a segment: m1..m_segment"""
        return self.messages[:segment]
    
    def prefix(self, i: int) -> "Decomposition":
        """dec_i = (w0, m1, ..., m_{i-1}, w_{i-1}) for 1 <= i <= l"""
        return Decomposition(self.words[:i], self.messages[:i - 1])
    
    @classmethod
    def trivial(cls, w: Word) -> "Decomposition":
        return cls((tuple(w),))


@dataclass(frozen=True)
class InitialValueAnnotation:
    """
    Decomposition of one initial value with its split of the local run
    
    split holds l cut points; segment i is steps[split[i-1]:split[i]] with
    split[-1] = 0 and split[l] = |u|. followers maps i (1..l) to a child index.
    """
    value: int
    decomposition: Decomposition
    split: Tuple[int, ...] = ()
    followers: Tuple[Tuple[int, int], ...] = ()
    
    def bounds(self, length: int) -> List[Tuple[int, int]]:
        cuts = (0,) + tuple(self.split) + (length,)
        return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]
    
    def follower_for(self, i: int) -> Optional[int]:
        return dict(self.followers).get(i)


@dataclass(frozen=True)
class TreeNode:
    """
    Node of an unfolding tree
    
    spec is bw for boss nodes and fw for follower nodes, whose message fm is
    final_message. assignments maps non-initial values to the child supplying them.
    """
    kind: NodeKind
    local_run: LocalRun
    value: int
    spec: Word = ()
    final_message: Optional[str] = None
    annotations: Tuple[InitialValueAnnotation, ...] = ()
    assignments: Tuple[Tuple[int, int], ...] = ()
    children: Tuple["TreeNode", ...] = ()
    
    @property
    def is_boss(self) -> bool:
        return self.kind == NodeKind.BOSS
    
    def annotation_for(self, value: int) -> Optional[InitialValueAnnotation]:
        for annotation in self.annotations:
            if annotation.value == value:
                return annotation
        return None
    
    def assignment_map(self) -> Dict[int, int]:
        return dict(self.assignments)
    
    def with_children(self, children) -> "TreeNode":
        return replace(self, children=tuple(children))


def boss(local_run: LocalRun, value: int, spec: Word = (), children=(), **extra) -> TreeNode:
    return TreeNode(NodeKind.BOSS, local_run, value, tuple(spec), children=tuple(children), **extra)


def follower(
    local_run: LocalRun,
    value: int,
    spec: Word,
    final_message: str,
    children=(),
    **extra
) -> TreeNode:
    return TreeNode(
        NodeKind.FOLLOWER,
        local_run,
        value,
        tuple(spec),
        final_message=final_message,
        children=tuple(children),
        **extra
    )


def iter_nodes(node: TreeNode, path: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], TreeNode]]:
    """Depth-first (path, node) pairs; the root has the empty path"""
    yield path, node
    for position, child in enumerate(node.children):
        yield from iter_nodes(child, path + (position,))


def tree_size(node: TreeNode) -> int:
    return sum(1 for _ in iter_nodes(node))


def show_path(path: Tuple[int, ...]) -> str:
    return "root" + "".join(f".{step}" for step in path)


def tree_paths(node: TreeNode) -> List[str]:
    """Paths of all leaves, depth-first"""
    return [show_path(path) for path, current in iter_nodes(node) if not current.children]
