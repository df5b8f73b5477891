"""The B-tree model of computation.

A tree of multi-key nodes, a single cursor, and four families of unit-cost
operations: moving the cursor, rotating the edge above the cursor, splitting
a node and joining two siblings.  Every successful operation charges exactly
one unit to the tree's :class:`CostMeter`; illegal operations raise before
anything is charged.
"""
from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass, fields
from typing import Iterator, Optional


class ModelError(Exception):
    """Base class for rejected model operations."""


class NoSuchChild(ModelError):
    pass


class AtRoot(ModelError):
    pass


class Overflow(ModelError):
    pass


class Underflow(ModelError):
    pass


class TooFewKeys(ModelError):
    pass


class BadSplitKey(ModelError):
    pass


class ParentFull(ModelError):
    pass


class NotSiblings(ModelError):
    pass


class TooManyKeys(ModelError):
    pass


_ids = itertools.count(1)


class Node:
    """A node of a multiway search tree.

    ``children`` always has ``len(keys) + 1`` slots; a slot is ``None`` when
    the child is absent.  ``aug`` is free for higher layers.
    """

    __slots__ = ("nid", "keys", "children", "parent", "aug")

    def __init__(self, keys=None, children=None, parent=None):
        self.nid = next(_ids)
        self.keys = list(keys) if keys is not None else []
        if children is None:
            children = [None] * (len(self.keys) + 1)
        self.children = list(children)
        self.parent = parent
        self.aug = None

    def __repr__(self):
        return f"Node#{self.nid}({self.keys})"

    def child_index(self, child: "Node") -> int:
        for i, c in enumerate(self.children):
            if c is child:
                return i
        raise NotSiblings(f"{child!r} is not a child of {self!r}")


@dataclass
class CostMeter:
    moves: int = 0
    rotations: int = 0
    splits: int = 0
    joins: int = 0
    inits: int = 0

    def total(self) -> int:
        return self.moves + self.rotations + self.splits + self.joins + self.inits

    def snapshot(self) -> "CostMeter":
        return CostMeter(**{f.name: getattr(self, f.name) for f in fields(self)})

    def since(self, earlier: "CostMeter") -> "CostMeter":
        return CostMeter(
            **{f.name: getattr(self, f.name) - getattr(earlier, f.name) for f in fields(self)}
        )


@dataclass(frozen=True)
class RotationSpec:
    """Re-cut of the child's key interval inside ``keys(child) | keys(parent)``.

    ``left`` and ``right`` are signed shifts: on the left, a positive count
    promotes that many of the child's smallest keys and a negative count
    demotes parent keys into the child; on the right, a positive count
    promotes the child's largest keys and a negative count demotes parent
    keys.  Use the constructors for the four named types.
    """

    left: int = 0
    right: int = 0

    @classmethod
    def demote_left_promote_right(cls, ell: int, k: int) -> "RotationSpec":
        return cls(left=-ell, right=k)

    @classmethod
    def promote_left_demote_right(cls, k: int, k2: int) -> "RotationSpec":
        return cls(left=k, right=-k2)

    @classmethod
    def promote_left_promote_right(cls, k: int, k2: int) -> "RotationSpec":
        return cls(left=k, right=k2)

    @classmethod
    def demote_left_demote_right(cls, ell: int, k2: int) -> "RotationSpec":
        return cls(left=-ell, right=-k2)


def _flatten(node: Node) -> list:
    """Interleave children and keys: [c0, k0, c1, ..., k_{n-1}, c_n]."""
    out = [node.children[0]]
    for k, c in zip(node.keys, node.children[1:]):
        out.append(k)
        out.append(c)
    return out


def _unflatten(seq: list) -> tuple[list, list]:
    return seq[1::2], seq[0::2]


class ModelTree:
    """A B-tree model instance: node arena, root, meter and one cursor."""

    def __init__(self, B: int, root: Optional[Node] = None):
        if B < 2:
            raise ValueError("B must be at least 2")
        self.B = B
        self.meter = CostMeter()
        self.arena: dict[int, Node] = {}
        self.root = root
        if root is not None:
            self._adopt(root)
        self.cursor = Cursor(self)

    @classmethod
    def from_nested(cls, B: int, spec) -> "ModelTree":
        """Build from ``(keys, [child specs])`` tuples; ``None`` is an absent child."""

        def build(s):
            if s is None:
                return None
            keys, kids = s if isinstance(s, tuple) else (s, None)
            kids = kids if kids is not None else [None] * (len(keys) + 1)
            node = Node(keys, [build(k) for k in kids])
            for c in node.children:
                if c is not None:
                    c.parent = node
            return node

        return cls(B, build(spec))

    def _adopt(self, node: Node) -> None:
        stack = [node]
        while stack:
            v = stack.pop()
            self.arena[v.nid] = v
            stack.extend(c for c in v.children if c is not None)

    def _register(self, node: Node) -> None:
        self.arena[node.nid] = node

    def _retire(self, node: Node) -> None:
        self.arena.pop(node.nid, None)

    def nodes(self) -> Iterator[Node]:
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(c for c in reversed(v.children) if c is not None)

    def inorder(self) -> list:
        out: list = []

        def walk(v):
            if v is None:
                return
            for c, k in zip(v.children, v.keys):
                walk(c)
                out.append(k)
            walk(v.children[-1])

        walk(self.root)
        return out

    def nested(self):
        """Shape snapshot as nested ``(keys, [children])`` tuples."""

        def snap(v):
            if v is None:
                return None
            return (tuple(v.keys), tuple(snap(c) for c in v.children))

        return snap(self.root)

    def validate(self) -> "Report":
        return validate(self)


class Cursor:
    """The single pointer of the model; all unit-cost operations go through it."""

    def __init__(self, tree: ModelTree):
        self.tree = tree
        self.meter = tree.meter
        self.at: Optional[Node] = tree.root

    def init(self) -> "Cursor":
        """Re-initialize at the root (one unit, once per search)."""
        self.at = self.tree.root
        self.meter.inits += 1
        return self

    # -- moves ----------------------------------------------------------

    def move_to_child(self, i: int) -> "Cursor":
        v = self.at
        if not 0 <= i < len(v.children) or v.children[i] is None:
            raise NoSuchChild(f"child {i} of {v!r}")
        self.at = v.children[i]
        self.meter.moves += 1
        return self

    def move_to_parent(self) -> "Cursor":
        if self.at.parent is None:
            raise AtRoot("cursor is at the root")
        self.at = self.at.parent
        self.meter.moves += 1
        return self

    # -- rotation -------------------------------------------------------

    def rotate(self, spec: RotationSpec) -> "Cursor":
        """Rotate the edge between the cursor node ``u`` and its parent.

        The cursor stays on ``u``.  Children are re-attached in in-order
        position, so subtrees may move between ``u`` and its parent.
        """
        u = self.at
        p = u.parent
        if p is None:
            raise AtRoot("cannot rotate at the root")
        B = self.tree.B
        j = p.child_index(u)
        n_u = len(u.keys)
        # position of u's keys inside the merged sorted key list
        lo = j
        hi = j + n_u  # exclusive
        new_lo = lo + spec.left
        new_hi = hi - spec.right
        total = len(p.keys) + n_u
        new_u = new_hi - new_lo
        new_p = total - new_u
        if new_p > B - 1 or new_u > B - 1:
            raise Overflow(f"rotation {spec} leaves more than {B - 1} keys in a node")
        if new_lo < 0 or new_hi > total or new_u < 1 or new_p < 1:
            raise Underflow(f"rotation {spec} is not realizable at {u!r}")

        pseq = _flatten(p)
        useq = _flatten(u)
        # splice u's interleaving into the parent's, replacing its slot
        merged = pseq[: 2 * j] + useq + pseq[2 * j + 1 :]
        useg = merged[2 * new_lo : 2 * new_hi + 1]
        pseg = merged[: 2 * new_lo] + [u] + merged[2 * new_hi + 1 :]
        u.keys, u.children = _unflatten(useg)
        p.keys, p.children = _unflatten(pseg)
        for c in u.children:
            if c is not None:
                c.parent = u
        for c in p.children:
            if c is not None:
                c.parent = p
        self.meter.rotations += 1
        return self

    # -- split / join ---------------------------------------------------

    def split(self, m: int) -> "Cursor":
        """Split the cursor node at key index ``m``; the cursor moves to the parent."""
        u = self.at
        tree = self.tree
        n = len(u.keys)
        if n < 3:
            raise TooFewKeys(f"{u!r} holds {n} keys")
        if not 0 < m < n - 1:
            raise BadSplitKey(f"key index {m} is an extreme of {u!r}")
        p = u.parent
        if p is not None and len(p.keys) >= tree.B - 1:
            raise ParentFull(f"parent {p!r} is full")
        if p is None:
            p = Node([], [u])
            u.parent = p
            tree.root = p
            tree._register(p)
        j = p.child_index(u)
        mid = u.keys[m]
        right = Node(u.keys[m + 1 :], u.children[m + 1 :], parent=p)
        tree._register(right)
        for c in right.children:
            if c is not None:
                c.parent = right
        del u.keys[m:]
        del u.children[m + 1 :]
        p.keys.insert(j, mid)
        p.children.insert(j + 1, right)
        self.at = p
        self.meter.splits += 1
        return self

    def join(self, u: Node, v: Node) -> "Cursor":
        """Join adjacent siblings ``u < v`` under the cursor node; cursor moves to ``u``."""
        p = self.at
        if u.parent is not p or v.parent is not p:
            raise NotSiblings(f"{u!r} and {v!r} are not children of the cursor node")
        j = p.child_index(u)
        if j + 1 >= len(p.children) or p.children[j + 1] is not v:
            raise NotSiblings(f"{u!r} and {v!r} are not separated by a single key")
        if len(u.keys) + len(v.keys) > self.tree.B - 2:
            raise TooManyKeys(f"{len(u.keys)} + {len(v.keys)} > B - 2")
        sep = p.keys.pop(j)
        del p.children[j + 1]
        u.keys = u.keys + [sep] + v.keys
        u.children = u.children + v.children
        for c in v.children:
            if c is not None:
                c.parent = u
        self.tree._retire(v)
        if not p.keys:
            # empty parent is excised
            gp = p.parent
            u.parent = gp
            if gp is None:
                self.tree.root = u
            else:
                gp.children[gp.child_index(p)] = u
            self.tree._retire(p)
        self.at = u
        self.meter.joins += 1
        return self


# convenience functional surface -------------------------------------------


def move_to_child(c: Cursor, i: int) -> Cursor:
    return c.move_to_child(i)


def move_to_parent(c: Cursor) -> Cursor:
    return c.move_to_parent()


def rotate(c: Cursor, spec: RotationSpec) -> Cursor:
    return c.rotate(spec)


def split_node(c: Cursor, m: int) -> Cursor:
    return c.split(m)


def join_nodes(c: Cursor, u: Node, v: Node) -> Cursor:
    return c.join(u, v)


# validation ------------------------------------------------------------------


@dataclass
class Report:
    ok: bool
    problem: Optional[str] = None

    def __bool__(self):
        return self.ok


def validate(tree: ModelTree, max_keys: Optional[int] = None) -> Report:
    """Check occupancy, key order, in-order condition and link consistency."""
    if max_keys is None:
        max_keys = tree.B - 1
    root = tree.root
    if root is None:
        return Report(True)
    if root.parent is not None:
        return Report(False, f"root {root!r} has a parent link")
    stack = [(root, None, None)]
    seen = set()
    while stack:
        v, lo, hi = stack.pop()
        if id(v) in seen:
            return Report(False, f"{v!r} reachable twice")
        seen.add(id(v))
        n = len(v.keys)
        if not 1 <= n <= max_keys:
            return Report(False, f"{v!r} holds {n} keys (allowed 1..{max_keys})")
        if len(v.children) != n + 1:
            return Report(False, f"{v!r} has {len(v.children)} child slots for {n} keys")
        for a, b in zip(v.keys, v.keys[1:]):
            if not a < b:
                return Report(False, f"keys of {v!r} not strictly increasing")
        if (lo is not None and v.keys[0] <= lo) or (hi is not None and v.keys[-1] >= hi):
            return Report(False, f"in-order violation at {v!r}: bounds ({lo}, {hi})")
        bounds = [lo] + v.keys + [hi]
        for i, c in enumerate(v.children):
            if c is None:
                continue
            if c.parent is not v:
                return Report(False, f"parent link of {c!r} does not point to {v!r}")
            stack.append((c, bounds[i], bounds[i + 1]))
    return Report(True)


def locate(tree: ModelTree, x) -> Optional[Node]:
    """Uncharged lookup of the node holding ``x`` (test and harness helper)."""
    v = tree.root
    while v is not None:
        i = bisect_left(v.keys, x)
        if i < len(v.keys) and v.keys[i] == x:
            return v
        v = v.children[i]
    return None
