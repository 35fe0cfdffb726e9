"""
Words over message types and the subword order
"""
from typing import List, Optional, Sequence, Tuple

Word = Tuple[str, ...]

EMPTY: Word = ()


def subword_embedding(small: Sequence[str], large: Sequence[str]) -> Optional[List[int]]:
    """Leftmost positions of large matching small letter by letter, or None"""
    positions: List[int] = []
    cursor = 0
    for letter in small:
        while cursor < len(large) and large[cursor] != letter:
            cursor += 1
        if cursor == len(large):
            return None
        positions.append(cursor)
        cursor += 1
    return positions


def subword(small: Sequence[str], large: Sequence[str]) -> bool:
    """small can be obtained from large by erasing letters"""
    return subword_embedding(small, large) is not None


def word(text: str) -> Word:
    """Parse a dot- or space-separated word; the empty string is the empty word"""
    cleaned = text.replace(".", " ").replace("·", " ").split()
    return tuple(letter for letter in cleaned if letter not in ("ε", "eps"))


def show(w: Sequence[str]) -> str:
    return "·".join(w) if w else "ε"
