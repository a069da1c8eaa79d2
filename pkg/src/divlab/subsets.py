"""Bitmask helpers for subsets of a small ground set.

A subset of points indexed 0..n-1 is an int whose bit i is set iff point i
belongs to the subset.  All tables in this package are tuples indexed by
these masks.
"""
from __future__ import annotations

from typing import Iterator, Sequence


def popcount(mask: int) -> int:
    return mask.bit_count()


def iter_indices(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def proper_nonempty_submasks(mask: int) -> Iterator[int]:
    sub = (mask - 1) & mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def format_key(mask: int, points: Sequence[str]) -> str:
    """Space-separated labels of ``mask`` in ground-set order.  Empty set -> ''."""
    return " ".join(points[i] for i in iter_indices(mask))


def parse_key(key: str, index_of: dict) -> int:
    """Parse a space-separated label key into a mask.

    Labels must be known and may not repeat.  The empty string is the
    empty set.
    """
    from .errors import StructuralError

    mask = 0
    for label in key.split():
        i = index_of.get(label)
        if i is None:
            raise StructuralError(f"unknown point label {label!r} in subset key {key!r}")
        bit = 1 << i
        if mask & bit:
            raise StructuralError(f"repeated label {label!r} in subset key {key!r}")
        mask |= bit
    return mask


def descending_cardinality_order(n: int) -> tuple[int, ...]:
    """Nonempty subsets of an n-set ordered largest-first.

    Within one cardinality the order is by ascending mask value.  Any proper
    subset appears strictly later than its supersets.
    """
    masks = range(1, 1 << n)
    return tuple(sorted(masks, key=lambda m: (-popcount(m), m)))


def is_superset_first(order: Sequence[int]) -> bool:
    """True iff in ``order`` every subset appears no earlier than each of its
    supersets (the empty set must not appear)."""
    position = {}
    for pos, mask in enumerate(order):
        if mask == 0 or mask in position:
            return False
        position[mask] = pos
    for mask in order:
        for sub in proper_nonempty_submasks(mask):
            if sub in position and position[sub] < position[mask]:
                return False
    return True
