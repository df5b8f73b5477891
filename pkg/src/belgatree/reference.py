"""The fixed reference tree over the key universe and its preferred paths.

The tree is the complete BST over ``1 .. 2**height - 1`` and is never
materialized: depth, parent and children of a key follow from its lowest set
bit.  Each internal key remembers which side was searched last (its
preferred child).  A search for ``x`` lands in the left region of every
ancestor ``a >= x`` (the region is ``a`` plus its left subtree) and in the
right region otherwise, and that includes ``x`` itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _backend

NONE, LEFT, RIGHT = 0, 1, 2


class OutOfUniverse(ValueError):
    pass


def height_for(n: int) -> int:
    """Smallest ``i`` with ``2**i - 1 >= n``."""
    if n < 1:
        raise ValueError("universe must be non-empty")
    return n.bit_length() if n & (n + 1) else (n + 1).bit_length() - 1


def ref_depth(x: int, i: int) -> int:
    """Depth of ``x`` in the complete BST over ``[1, 2**i - 1]``."""
    if not 1 <= x < (1 << i):
        raise OutOfUniverse(f"{x} not in [1, {(1 << i) - 1}]")
    return i - (x & -x).bit_length()


def ref_parent(x: int) -> int:
    low = x & -x
    return x - low if x & (low << 1) else x + low


def ref_children(x: int) -> tuple[int, int] | None:
    low = x & -x
    if low == 1:
        return None
    half = low >> 1
    return x - half, x + half


@dataclass
class PreferredPath:
    keys: list
    depths: list

    @property
    def top(self) -> int:
        return self.keys[0]


class RefTree:
    """Preferred-child state over the implicit reference tree."""

    def __init__(self, height: int):
        if height < 1:
            raise ValueError("height must be at least 1")
        self.height = height
        self.n = (1 << height) - 1
        self.preferred = bytearray(self.n + 1)
        self.flips = 0
        self.fresh = 0
        self.last_fresh = 0

    @classmethod
    def for_universe(cls, n: int) -> "RefTree":
        return cls(height_for(n))

    @property
    def root(self) -> int:
        return 1 << (self.height - 1)

    def depth(self, x: int) -> int:
        return ref_depth(x, self.height)

    def record_search(self, x: int) -> int:
        """Update preferred children along the search for ``x``.

        Returns the number of left/right flips.  First-time assignments from
        the no-preference state are kept in ``last_fresh``.
        """
        if not 1 <= x <= self.n:
            raise OutOfUniverse(x)
        pref = self.preferred
        a = self.root
        step = a >> 1
        flips = fresh = 0
        while True:
            d = LEFT if x <= a else RIGHT
            if step == 0:
                # leaves have no children to prefer
                break
            old = pref[a]
            if old != d:
                if old == NONE:
                    fresh += 1
                else:
                    flips += 1
                pref[a] = d
            if x == a:
                break
            a = a - step if x < a else a + step
            step >>= 1
        self.flips += flips
        self.fresh += fresh
        self.last_fresh = fresh
        return flips

    def preferred_child(self, x: int) -> int | None:
        p = self.preferred[x]
        if p == NONE:
            return None
        kids = ref_children(x)
        return kids[0] if p == LEFT else kids[1]

    def is_preferred_child(self, x: int) -> bool:
        if x == self.root:
            return False
        return self.preferred_child(ref_parent(x)) == x

    def path_of(self, x: int) -> PreferredPath:
        """The maximal preferred path through ``x``."""
        if not 1 <= x <= self.n:
            raise OutOfUniverse(x)
        top = x
        while self.is_preferred_child(top):
            top = ref_parent(top)
        keys = [top]
        v = self.preferred_child(top)
        while v is not None:
            keys.append(v)
            v = self.preferred_child(v)
        return PreferredPath(keys, [self.depth(k) for k in keys])

    def paths(self) -> list[PreferredPath]:
        """All preferred paths, ordered by their top key."""
        return [self.path_of(x) for x in range(1, self.n + 1) if not self.is_preferred_child(x)]


def interleave_bound(xs: Iterable[int], height: int) -> int:
    """Total left/right preferred-child flips of ``xs`` from the empty state."""
    return replay(xs, height)[0]


def replay(xs: Iterable[int], height: int) -> tuple[int, int]:
    """``(flips, first assignments)`` over the whole sequence."""
    xs = list(xs)
    n = (1 << height) - 1
    for x in xs:
        if not 1 <= x <= n:
            raise OutOfUniverse(x)
    return _backend.kernels.replay_interleave(xs, height)


def per_search_changes(xs: Sequence[int], height: int) -> tuple[list, list]:
    """Per-search flips and first assignments."""
    rt = RefTree(height)
    flips, fresh = [], []
    for x in xs:
        flips.append(rt.record_search(x))
        fresh.append(rt.last_fresh)
    return flips, fresh
