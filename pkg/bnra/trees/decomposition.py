"""
Membership in the language of a decomposition

A word belongs to L(w0, m1, w1, ..., ml, wl) when it is a subword of some
w0' w1' ... wl' where wi' is wi with letters of {m1..mi} inserted anywhere.
"""
from typing import Dict, List, Optional, Sequence, Tuple

from bnra.core.words import Word
from bnra.trees.model import Decomposition

# ("match", segment, index in the segment word) or ("insert", segment)
WitnessLetter = Tuple


def decomposition_witness(w: Sequence[str], decomposition: Decomposition) -> Optional[List[WitnessLetter]]:
    """
    Explain each letter of w as a matched letter of some wj or an insertion in segment j

    Segments are non-decreasing along the witness and matched indices increase
    inside a segment. Returns None when w is not in the language.
    """
    words = decomposition.words
    # (segment, next unread index in that segment word) -> (previous state, letter explanation)
    layer: Dict[Tuple[int, int], Optional[Tuple]] = {(0, 0): None}
    history: List[Dict[Tuple[int, int], Optional[Tuple]]] = [layer]

    for letter in w:
        following: Dict[Tuple[int, int], Optional[Tuple]] = {}
        for (segment, cursor) in layer:
            for target in range(segment, len(words)):
                start = cursor if target == segment else 0
                segment_word: Word = words[target]
                try:
                    position = segment_word.index(letter, start)
                except ValueError:
                    position = None
                if position is not None:
                    following.setdefault((target, position + 1), ((segment, cursor), ("match", target, position)))
                if letter in decomposition.allowed(target):
                    following.setdefault((target, start), ((segment, cursor), ("insert", target)))
        if not following:
            return None
        history.append(following)
        layer = following

    state = next(iter(layer))
    witness: List[WitnessLetter] = []
    for step in range(len(w), 0, -1):
        previous, explanation = history[step][state]
        witness.append(explanation)
        state = previous
    witness.reverse()
    return witness


def admits_decomposition(w: Sequence[str], decomposition: Decomposition) -> bool:
    """w in L(decomposition)"""
    return decomposition_witness(w, decomposition) is not None
