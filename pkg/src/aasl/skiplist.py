"""Index arithmetic of the deterministic skip list.

Element ``i`` sits on linked lists ``0 .. max_level(i)``; the list at level
``l`` links every multiple of ``2**l`` to the next one.  Traversals always
take the longest link that does not overshoot the destination.
"""

from __future__ import annotations

from typing import NamedTuple

MAX_LEVEL = 63
MAX_INDEX = 1 << 63


class Hop(NamedTuple):
    source: int
    level: int
    destination: int


def check_index(i: int, name: str = "index") -> int:
    if isinstance(i, bool) or not isinstance(i, int):
        raise TypeError(f"{name} must be an int, got {type(i).__name__}")
    if i < 0 or i > MAX_INDEX:
        raise ValueError(f"{name} {i} outside [0, 2**63]")
    return i


def max_level(i: int) -> int:
    """Return the highest list level element ``i`` participates in.

    This is the number of trailing zero bits of ``i``.  Element 0 is the
    genesis sentinel and has no level.
    """
    check_index(i)
    if i == 0:
        raise ValueError("max_level is undefined for element 0")
    return (i & -i).bit_length() - 1


def hop_level(i: int, n: int) -> int:
    """Level of the single hop a traversal from ``i`` toward ``n`` takes next.

    The largest ``L`` with ``2**L`` dividing ``i`` and ``i + 2**L <= n``.
    Zero is divisible by every power of two.
    """
    check_index(i, "source")
    check_index(n, "destination")
    if i >= n:
        raise ValueError(f"hop_level needs source < destination, got {i} >= {n}")
    level = 0
    l = 1
    while l <= MAX_LEVEL and i % (1 << l) == 0 and i + (1 << l) <= n:
        level = l
        l += 1
    return level


def traversal_path(i: int, n: int) -> list[Hop]:
    """Hops of the greedy traversal from ``i`` to ``n``; empty when ``i == n``."""
    check_index(i, "source")
    check_index(n, "destination")
    if i > n:
        raise ValueError(f"cannot traverse backwards from {i} to {n}")
    hops = []
    j = i
    while j < n:
        level = hop_level(j, n)
        nxt = j + (1 << level)
        hops.append(Hop(j, level, nxt))
        j = nxt
    return hops


def path_elements(i: int, n: int) -> list[int]:
    """Every element visited from ``i`` to ``n``, both ends included."""
    return [i] + [hop.destination for hop in traversal_path(i, n)]
