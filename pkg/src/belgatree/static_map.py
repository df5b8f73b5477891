"""Static mappings of a BST into B-tree blocks, and walks over them.

A block-connected mapping stores connected pieces of a fixed BST in B-tree
nodes.  The slab mapping cuts the tree into horizontal slabs of
``s = floor(log2 B)`` levels below a root block of ``h`` levels; with ``h``
drawn uniformly from ``[0, s - 1]`` every edge is cut for exactly one ``h``,
so a walk of ``k`` steps crosses ``k / s`` block boundaries in expectation.

The adversary runs the in-order traversal that stops descending at any node
sharing a block with a leaf.  It touches few nodes but a new block at almost
every step, so a deterministic mapping gains nothing on it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence, Union

from . import _backend
from .model import ModelTree, Report, validate as validate_model


class BTooSmall(ValueError):
    pass


class IllegalWalk(ValueError):
    pass


class StaticBST:
    """An immutable BST given by child links over distinct keys."""

    def __init__(self, root, left: dict, right: dict):
        self.root = root
        self.left = left
        self.right = right
        self.parent: dict = {root: None}
        self.depth: dict = {root: 0}
        order = [root]
        for v in order:
            for c in (left.get(v), right.get(v)):
                if c is not None:
                    if c in self.parent:
                        raise ValueError(f"{c} reachable twice")
                    self.parent[c] = v
                    self.depth[c] = self.depth[v] + 1
                    order.append(c)
        self.keys = sorted(order)

    def __len__(self):
        return len(self.keys)

    @classmethod
    def from_keys(cls, keys: Iterable) -> "StaticBST":
        """Balanced BST over ``keys`` (middle element at every root)."""
        ks = sorted(set(keys))
        if not ks:
            raise ValueError("no keys")
        left: dict = {}
        right: dict = {}

        def mk(lo, hi):
            if lo >= hi:
                return None
            mid = (lo + hi) // 2
            k = ks[mid]
            left[k] = mk(lo, mid)
            right[k] = mk(mid + 1, hi)
            return k

        return cls(mk(0, len(ks)), left, right)

    @classmethod
    def perfect(cls, height: int) -> "StaticBST":
        """The perfect BST over ``1 .. 2**height - 1``."""
        return cls.from_keys(range(1, 1 << height))

    @classmethod
    def random(cls, n: int, seed: int = 0) -> "StaticBST":
        """BST from inserting a random permutation of ``1..n``."""
        rng = random.Random(seed)
        order = list(range(1, n + 1))
        rng.shuffle(order)
        left: dict = {}
        right: dict = {}
        root = order[0]
        for k in order[1:]:
            v = root
            while True:
                side = left if k < v else right
                nxt = side.get(v)
                if nxt is None:
                    side[v] = k
                    break
                v = nxt
        return cls(root, left, right)

    def children(self, v) -> list:
        return [c for c in (self.left.get(v), self.right.get(v)) if c is not None]

    def is_leaf(self, v) -> bool:
        return not self.children(v)

    def leaves(self) -> list:
        return [v for v in self.keys if self.is_leaf(v)]

    def height(self) -> int:
        return max(self.depth.values()) + 1

    def inorder(self) -> list:
        return list(self.keys)

    def path_to(self, v) -> list:
        out = []
        while v is not None:
            out.append(v)
            v = self.parent[v]
        return out[::-1]


@dataclass
class Walk:
    """Pointer positions, starting at the root, each adjacent to the last."""

    nodes: list

    @property
    def steps(self) -> int:
        return max(0, len(self.nodes) - 1)

    def check(self, T: StaticBST) -> None:
        if not self.nodes or self.nodes[0] != T.root:
            raise IllegalWalk("a walk starts at the root")
        for a, b in zip(self.nodes, self.nodes[1:]):
            if b not in T.parent or not (T.parent.get(b) == a or T.parent.get(a) == b):
                raise IllegalWalk(f"{a} -> {b} is not an edge")

    @classmethod
    def to_node(cls, T: StaticBST, v) -> "Walk":
        return cls(T.path_to(v))

    @classmethod
    def random(cls, T: StaticBST, k: int, rng: random.Random) -> "Walk":
        """``k`` uniformly random steps to a neighbour."""
        v = T.root
        nodes = [v]
        for _ in range(k):
            nbrs = T.children(v)
            if T.parent[v] is not None:
                nbrs.append(T.parent[v])
            if not nbrs:
                break
            v = rng.choice(nbrs)
            nodes.append(v)
        return cls(nodes)


@dataclass
class BlockMapping:
    """Assignment of BST keys to B-tree blocks (blocks are named by their top key)."""

    T: StaticBST
    B: int
    assignment: dict
    h: Optional[int] = None
    s: Optional[int] = None
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.blocks:
            for k, b in self.assignment.items():
                self.blocks.setdefault(b, []).append(k)
            for ks in self.blocks.values():
                ks.sort()

    def __call__(self, key) -> Hashable:
        return self.assignment[key]

    @classmethod
    def singletons(cls, T: StaticBST, B: int = 2) -> "BlockMapping":
        return cls(T, B, {k: k for k in T.keys})

    @classmethod
    def from_function(cls, T: StaticBST, B: int, f: Callable) -> "BlockMapping":
        return cls(T, B, {k: f(k) for k in T.keys})

    def validate(self) -> Report:
        """Block-connectedness and block sizes."""
        T = self.T
        for b, ks in self.blocks.items():
            if len(ks) > self.B - 1:
                return Report(False, f"block {b} holds {len(ks)} > {self.B - 1} keys")
            tops = [k for k in ks if T.parent[k] is None or self.assignment[T.parent[k]] != b]
            if len(tops) != 1:
                return Report(False, f"block {b} is not connected ({len(tops)} tops)")
        return Report(True)

    def to_btree(self) -> ModelTree:
        """The static B-tree whose nodes are the blocks."""
        T = self.T
        kids: dict = {b: [] for b in self.blocks}
        root_block = self.assignment[T.root]
        for b, ks in self.blocks.items():
            top = next(k for k in ks if T.parent[k] is None or self.assignment[T.parent[k]] != b)
            if b != root_block:
                kids[self.assignment[T.parent[top]]].append((top, b))

        def snap(b):
            ks = self.blocks[b]
            slots: list = [None] * (len(ks) + 1)
            for top, c in kids[b]:
                i = sum(1 for k in ks if k < top)
                if slots[i] is not None:
                    raise ValueError(f"two child blocks share gap {i} of block {b}")
                slots[i] = snap(c)
            return (list(ks), slots)

        return ModelTree.from_nested(self.B, snap(root_block))


def slab_height(B: int) -> int:
    if B < 3:
        raise BTooSmall(f"B={B}: need B >= 3")
    return B.bit_length() - 1


def build_slabs(T: StaticBST, B: int, h: int) -> BlockMapping:
    """Root block of the top ``h`` levels, then slabs of ``floor(log2 B)`` levels."""
    s = slab_height(B)
    if not 0 <= h < s:
        raise ValueError(f"h={h} outside [0, {s - 1}]")
    assign: dict = {}
    for v in sorted(T.keys, key=T.depth.__getitem__):
        d = T.depth[v]
        if d < h:
            assign[v] = T.root
        elif (d - h) % s == 0:
            assign[v] = v
        else:
            assign[v] = assign[T.parent[v]]
    return BlockMapping(T, B, assign, h=h, s=s)


def build_randomized(T: StaticBST, B: int, seed: Union[int, random.Random, None] = None) -> BlockMapping:
    """Slab mapping with the root-block height drawn uniformly from ``[0, s - 1]``."""
    s = slab_height(B)
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return build_slabs(T, B, rng.randrange(s))


def walk_cost(mapping: Union[BlockMapping, Callable], walk: Walk, T: Optional[StaticBST] = None) -> int:
    """One for initialization plus one per step between different blocks."""
    T = T if T is not None else mapping.T
    walk.check(T)
    f = mapping
    nodes = walk.nodes
    return 1 + sum(1 for a, b in zip(nodes, nodes[1:]) if f(a) != f(b))


def exact_expected_cost(T: StaticBST, B: int, walk: Walk) -> Fraction:
    """Expected walk cost over all root-block heights, summed exactly."""
    s = slab_height(B)
    walk.check(T)
    dep = [T.depth[v] for v in walk.nodes]
    total = sum(_backend.kernels.slab_crossings(dep[:-1], dep[1:], s, h) for h in range(s))
    return 1 + Fraction(total, s)


def expected_cost_by_mapping(T: StaticBST, B: int, walk: Walk) -> Fraction:
    """Same expectation, but built from the block assignments of every ``h``."""
    s = slab_height(B)
    return Fraction(sum(walk_cost(build_slabs(T, B, h), walk) for h in range(s)), s)


@dataclass
class AdversaryResult:
    sequence: list
    walk: Walk
    bst_cost: int
    btree_cost: int
    leaf_blocks: int
    visited_blocks: int

    @property
    def ratio(self) -> float:
        return self.btree_cost / self.bst_cost


def adversary_sequence(f: Union[BlockMapping, Callable], T: Optional[StaticBST] = None) -> AdversaryResult:
    """The pruned in-order traversal against a deterministic mapping ``f``.

    The traversal does not descend below a node that shares a block with a
    leaf.  Its BST cost is its length (one per visited key); its B-tree cost
    is the cost under ``f`` of the pointer walk that performs it.
    """
    T = T if T is not None else f.T
    leafy = {f(v) for v in T.leaves()}
    seq: list = []
    nodes: list = [T.root]
    visited: set = set()

    def go(v):
        if f(v) in leafy:
            seq.append(v)
            visited.add(f(v))
            return
        for c, is_left in ((T.left.get(v), True), (T.right.get(v), False)):
            if c is not None:
                nodes.append(c)
                go(c)
                nodes.append(v)
            if is_left:
                seq.append(v)

    go(T.root)
    walk = Walk(nodes)
    return AdversaryResult(seq, walk, len(seq), walk_cost(f, walk, T), len(leafy), len(visited))
