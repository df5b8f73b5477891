"""Simulating the B-tree model with a binary search tree.

Every B-tree node is stored as a red-black tree over its keys.  The root of
each red-black tree is marked and hangs in the external slot of its parent's
tree that matches the B-tree child pointer, so the whole forest is one BST.
Red-black split, concatenate and select are enough to build ``merge`` (absorb
a marked child tree) and ``separate`` (cut a key range out as a marked child
tree), and those in turn simulate B-tree rotations, splits and joins in
``O(log B)`` BST steps each.

All restructuring goes through :class:`BstMachine`, which owns the single
cursor, charges one unit per pointer step and per edge rotation, and rejects
steps to non-adjacent nodes and writes away from the cursor.  Subtree sizes
and black heights are node augmentation, refreshed locally.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

from .model import ModelTree, RotationSpec, ModelError


class RbError(Exception):
    pass


class KeyAbsent(RbError):
    pass


class OrderViolation(RbError):
    pass


class RankOutOfRange(RbError):
    pass


class NotChild(RbError):
    pass


class EmptyRange(RbError):
    pass


class IllegalStep(RbError):
    """The BST machine refused a non-local step or write."""


class CorrespondenceError(RbError):
    pass


class RBNode:
    __slots__ = ("key", "red", "left", "right", "parent", "size", "bh", "mark")

    def __init__(self, key, red: bool = False):
        self.key = key
        self.red = red
        self.left: Optional[RBNode] = None
        self.right: Optional[RBNode] = None
        self.parent: Optional[RBNode] = None
        self.size = 1
        self.bh = 0 if red else 1
        self.mark = False

    @property
    def color(self) -> str:
        return "red" if self.red else "black"

    def __repr__(self):
        tag = "*" if self.mark else ""
        return f"RB({self.key}{tag},{self.color[0]})"


def _inner(v: Optional[RBNode]) -> Optional[RBNode]:
    """Child view: marked roots belong to another tree and count as empty."""
    return v if v is not None and not v.mark else None


def _pull(v: RBNode) -> None:
    left = _inner(v.left)
    right = _inner(v.right)
    v.size = 1 + (left.size if left else 0) + (right.size if right else 0)
    v.bh = (0 if v.red else 1) + (left.bh if left else 0)


@dataclass
class BstMeter:
    moves: int = 0
    rotations: int = 0
    inits: int = 0

    def total(self) -> int:
        return self.moves + self.rotations + self.inits

    def snapshot(self) -> "BstMeter":
        return BstMeter(**{f.name: getattr(self, f.name) for f in fields(self)})


class BstMachine:
    """One cursor over one BST, with unit-cost steps and edge rotations."""

    def __init__(self, root: Optional[RBNode] = None):
        self.root = root
        self.at = root
        self.meter = BstMeter()
        self.violations = 0

    def _illegal(self, msg: str):
        self.violations += 1
        raise IllegalStep(msg)

    def _near(self, v: RBNode) -> None:
        a = self.at
        if a is None or not (v is a or v is a.parent or v is a.left or v is a.right):
            self._illegal(f"{v!r} is not at or next to the cursor")

    def init(self) -> None:
        self.at = self.root
        self.meter.inits += 1

    def step(self, v: Optional[RBNode]) -> None:
        a = self.at
        if v is None or a is None or not (v is a.parent or v is a.left or v is a.right):
            self._illegal(f"step from {a!r} to {v!r}")
        self.at = v
        self.meter.moves += 1

    def goto(self, v: RBNode) -> None:
        """Walk the cursor to ``v`` one edge at a time (through the common ancestor)."""
        if self.at is None:
            self.init()
        if self.at is v:
            return
        up = set()
        w = self.at
        while w is not None:
            up.add(w)
            w = w.parent
        down = []
        w = v
        while w not in up:
            if w is None:
                self._illegal(f"{v!r} is not in the cursor's tree")
            down.append(w)
            w = w.parent
        while self.at is not w:
            self.step(self.at.parent)
        for x in reversed(down):
            self.step(x)

    def rotate(self) -> None:
        """Rotate the edge between the cursor node and its parent."""
        x = self.at
        p = x.parent if x is not None else None
        if p is None:
            self._illegal("rotation at the root")
        if x.mark:
            self._illegal(f"rotation of the marked edge above {x!r}")
        g = p.parent
        if p.left is x:
            p.left = x.right
            if x.right is not None:
                x.right.parent = p
            x.right = p
        else:
            p.right = x.left
            if x.left is not None:
                x.left.parent = p
            x.left = p
        p.parent = x
        x.parent = g
        if g is None:
            self.root = x
        elif g.left is p:
            g.left = x
        else:
            g.right = x
        if p.mark:
            # x takes over as root of p's red-black tree
            p.mark = False
            x.mark = True
        _pull(p)
        _pull(x)
        self.meter.rotations += 1

    def paint(self, v: RBNode, red: bool) -> None:
        self._near(v)
        v.red = red
        _pull(v)

    def set_mark(self, v: RBNode, flag: bool) -> None:
        self._near(v)
        v.mark = flag
        if v.parent is not None:
            _pull(v.parent)


class RbForest:
    """Red-black primitives and merge/separate over a shared :class:`BstMachine`."""

    def __init__(self, machine: Optional[BstMachine] = None):
        self.m = machine if machine is not None else BstMachine()

    # -- uncharged assembly and reads ---------------------------------------

    @staticmethod
    def build(keys: Sequence, ext: Optional[Sequence] = None) -> Optional[RBNode]:
        """Balanced red-black tree over sorted ``keys``; ``ext`` fills the gaps.

        The result is unmarked and parentless; gap contents get it as parent.
        """
        n = len(keys)
        if ext is None:
            ext = [None] * (n + 1)
        if n == 0:
            return ext[0]
        deepest = n.bit_length() - 1
        ragged = (n + 1) & n != 0

        def mk(lo, hi, depth):
            if lo == hi:
                return ext[lo]
            mid = (lo + hi) // 2
            v = RBNode(keys[mid], red=ragged and depth == deepest and depth > 0)
            v.left = mk(lo, mid, depth + 1)
            v.right = mk(mid + 1, hi, depth + 1)
            for c in (v.left, v.right):
                if c is not None:
                    c.parent = v
            _pull(v)
            return v

        top = mk(0, n, 0)
        top.parent = None
        return top

    @staticmethod
    def tree_keys(top: Optional[RBNode]) -> list:
        out: list = []

        def walk(v):
            v = _inner(v)
            if v is None:
                return
            walk(v.left)
            out.append(v.key)
            walk(v.right)

        if top is not None:
            walk(top.left)
            out.append(top.key)
            walk(top.right)
        return out

    @staticmethod
    def gaps(top: RBNode) -> list:
        """Contents of the external slots of ``top``'s tree, in key order."""
        out: list = []

        def walk_in(v):
            c = v.left
            if c is None or c.mark:
                out.append(c)
            else:
                walk_in(c)
            c = v.right
            if c is None or c.mark:
                out.append(c)
            else:
                walk_in(c)

        walk_in(top)
        return out

    @staticmethod
    def tree_root(v: RBNode) -> RBNode:
        while not v.mark:
            v = v.parent
        return v

    # -- charged primitives -------------------------------------------------

    def find(self, top: RBNode, key) -> RBNode:
        m = self.m
        m.goto(top)
        w = top
        while w is not None:
            if key == w.key:
                return w
            w = _inner(w.left if key < w.key else w.right)
            if w is not None:
                m.step(w)
        raise KeyAbsent(key)

    def neighbors(self, top: RBNode, y):
        """Nodes with the largest key < ``y`` and the smallest key > ``y``."""
        m = self.m
        m.goto(top)
        w = top
        pred = succ = None
        while True:
            if y < w.key:
                succ = w
                nxt = _inner(w.left)
            elif y > w.key:
                pred = w
                nxt = _inner(w.right)
            else:
                a = _inner(w.left)
                if a is not None:
                    m.step(a)
                    while _inner(a.right) is not None:
                        a = a.right
                        m.step(a)
                    pred = a
                b = _inner(w.right)
                if b is not None:
                    m.goto(b)
                    while _inner(b.left) is not None:
                        b = b.left
                        m.step(b)
                    succ = b
                return pred, succ
            if nxt is None:
                return pred, succ
            m.step(nxt)
            w = nxt

    def select(self, top: RBNode, r: int) -> RBNode:
        """The node of rank ``r`` (1-based) within ``top``'s tree."""
        if not 1 <= r <= top.size:
            raise RankOutOfRange(f"rank {r} of {top.size}")
        m = self.m
        m.goto(top)
        w = top
        while True:
            left = _inner(w.left)
            ls = left.size if left else 0
            if r == ls + 1:
                return w
            if r <= ls:
                w = left
            else:
                r -= ls + 1
                w = _inner(w.right)
            m.step(w)

    def split(self, x: RBNode, top: RBNode) -> RBNode:
        """Make ``x`` the top of ``top``'s subtree with red-black subtrees on both sides."""
        m = self.m
        boundary = top.parent
        path = []
        w = x
        while w is not top:
            w = w.parent
            if w is None:
                raise KeyAbsent(x.key)
            path.append(w)
        path.reverse()
        lefts = [a for a in path if a.key < x.key]
        rights = [a for a in path if a.key > x.key]
        m.goto(x)
        while x.parent is not boundary:
            m.rotate()
        # the ancestors now form two chains under x; rebuild them bottom-up
        for a in reversed(lefts):
            self.concat_at(a)
        for a in reversed(rights):
            self.concat_at(a)
        _pull(x)
        return x

    def concat_at(self, x: RBNode) -> RBNode:
        """Turn ``x`` and its two red-black subtrees into one red-black tree.

        Marked children count as empty.  Returns the new top of the subtree.
        """
        m = self.m
        left = _inner(x.left)
        right = _inner(x.right)
        for c in (left, right):
            if c is not None and c.red:
                m.goto(x)
                m.paint(c, False)
        h1 = left.bh if left else 0
        h2 = right.bh if right else 0
        if h1 == h2:
            m.goto(x)
            m.paint(x, False)
            return x
        top = x
        # push x down the spine of the taller side until the heights match
        while True:
            y = _inner(x.left if h1 > h2 else x.right)
            if y is None or (not y.red and y.bh == min(h1, h2)):
                break
            m.goto(y)
            m.rotate()
            if top is x:
                top = y
        m.goto(x)
        m.paint(x, True)
        top = self._fixup(x, top)
        # black heights along the descended spine were taken before x turned red
        w = x
        while True:
            _pull(w)
            if w is top:
                return top
            w = w.parent

    def _fixup(self, z: RBNode, top: RBNode) -> RBNode:
        m = self.m
        while True:
            if z is top:
                return top
            p = z.parent
            if not p.red:
                return top
            if p is top:
                m.goto(p)
                m.paint(p, False)
                return top
            g = p.parent
            u = _inner(g.right if g.left is p else g.left)
            if u is not None and u.red:
                m.goto(g)
                m.paint(p, False)
                m.paint(u, False)
                m.paint(g, True)
                z = g
                continue
            if (p.left is z) != (g.left is p):
                m.goto(z)
                m.rotate()
                z, p = p, z
            m.goto(p)
            m.rotate()
            if g is top:
                top = p
            m.paint(g, True)
            m.paint(p, False)
            return top

    # -- merge / separate -----------------------------------------------------

    def merge(self, S: RBNode, T: RBNode) -> RBNode:
        """Absorb the marked tree ``T`` hanging below ``S``'s tree; returns the new root."""
        if not T.mark or T.parent is None or self.tree_root(T.parent) is not S:
            raise NotChild(f"{T!r} does not hang below {S!r}")
        m = self.m
        lo, hi = self.neighbors(S, T.key)
        if lo is not None:
            self.split(lo, S)
        if hi is not None:
            self.split(hi, lo.right if lo is not None else S)
        holder = hi if hi is not None else lo
        m.goto(holder)
        m.set_mark(T, False)
        if hi is not None and lo is not None:
            _pull(lo)
        res = holder
        if hi is not None:
            res = self.concat_at(hi)
        if lo is not None:
            res = self.concat_at(lo)
        return res

    def separate(self, T: RBNode, lo=None, hi=None):
        """Cut the keys in ``[lo, hi]`` out of ``T`` into a marked child tree.

        ``None`` bounds are open.  Returns ``(rest, cut)``; ``rest`` is
        ``None`` when every key of ``T`` is in range.
        """
        keys = self.tree_keys(T)
        if not any((lo is None or k >= lo) and (hi is None or k <= hi) for k in keys):
            raise EmptyRange(f"no keys in [{lo}, {hi}]")
        m = self.m
        lp = self.neighbors(T, lo)[0] if lo is not None else None
        rs = self.neighbors(T, hi)[1] if hi is not None else None
        if lp is None and rs is None:
            if not T.mark:
                m.goto(T)
                m.set_mark(T, True)
            return None, T
        top = T
        if lp is not None:
            self.split(lp, T)
            top = lp
        if rs is not None:
            self.split(rs, lp.right if lp is not None else T)
            if lp is None:
                top = rs
        holder = rs if rs is not None else lp
        cut = holder.left if rs is not None else holder.right
        m.goto(holder)
        m.set_mark(cut, True)
        if rs is not None and lp is not None:
            _pull(lp)
        res = top
        if rs is not None:
            res = self.concat_at(rs)
        if lp is not None:
            res = self.concat_at(lp)
        return res, cut


# -- standalone red-black trees ------------------------------------------------


def rb_tree(keys: Iterable, machine: Optional[BstMachine] = None) -> tuple[RbForest, RBNode]:
    """A marked red-black tree over ``keys`` as the root of a fresh machine."""
    keys = sorted(keys)
    f = RbForest(machine)
    top = f.build(keys)
    if top is None:
        raise ValueError("no keys")
    top.mark = True
    f.m.root = top
    f.m.init()
    return f, top


def rb_split(f: RbForest, top: RBNode, key) -> RBNode:
    """Bring ``key`` to the top of its tree; both subtrees are red-black trees."""
    return f.split(f.find(top, key), top)


def rb_concatenate(f: RbForest, x: RBNode) -> RBNode:
    """Concatenate at ``x`` (its children must respect the key order)."""
    for c, ok in ((_inner(x.left), lambda k: k < x.key), (_inner(x.right), lambda k: k > x.key)):
        if c is not None and not all(ok(k) for k in RbForest.tree_keys(c)):
            raise OrderViolation(f"subtree of {x!r} out of order")
    return f.concat_at(x)


def rb_select(f: RbForest, top: RBNode, r: int):
    return f.select(top, r).key


def audit_tree(top: RBNode) -> Optional[str]:
    """Check one red-black tree (marked children excluded); ``None`` when valid."""

    def walk(v, lo, hi):
        if v.left is not None and v.left.parent is not v:
            raise _Bad(f"parent link under {v!r}")
        if v.right is not None and v.right.parent is not v:
            raise _Bad(f"parent link under {v!r}")
        if (lo is not None and v.key <= lo) or (hi is not None and v.key >= hi):
            raise _Bad(f"order at {v!r}")
        hs = []
        size = 1
        for c, a, b in ((v.left, lo, v.key), (v.right, v.key, hi)):
            c = _inner(c)
            if c is None:
                hs.append(0)
                continue
            if v.red and c.red:
                raise _Bad(f"red {c!r} under red {v!r}")
            h, s = walk(c, a, b)
            hs.append(h)
            size += s
        if hs[0] != hs[1]:
            raise _Bad(f"black heights differ under {v!r}")
        h = hs[0] + (0 if v.red else 1)
        if v.size != size or v.bh != h:
            raise _Bad(f"stale augmentation at {v!r}")
        return h, size

    try:
        walk(top, None, None)
    except _Bad as e:
        return str(e)
    return None


class _Bad(Exception):
    pass


# -- simulating the B-tree model ------------------------------------------------


class Simulator:
    """Replays B-tree model operations on a tree of red-black trees.

    The model tree is updated first (it rejects illegal operations before
    anything is charged), then the same operation is simulated on the BST.
    ``here`` is the root of the red-black tree mirroring the model cursor.
    """

    def __init__(self, tree: ModelTree, literal_rotations: bool = True):
        self.model = tree
        self.B = tree.B
        self.literal_rotations = literal_rotations
        self.m = BstMachine()
        self.f = RbForest(self.m)
        index: dict = {}
        self.m.root = self._mirror(tree.root, index)
        self.m.init()
        self.here = index[tree.cursor.at.nid]
        self.m.goto(self.here)

    def _mirror(self, v, index) -> RBNode:
        kids = [self._mirror(c, index) if c is not None else None for c in v.children]
        top = self.f.build(v.keys, kids)
        top.mark = True
        index[v.nid] = top
        return top

    @property
    def meter(self) -> BstMeter:
        return self.m.meter

    # -- simulated unit operations --------------------------------------------

    def sim_init(self) -> None:
        """Cursor back to the root (one unit on each side)."""
        self.model.cursor.init()
        self.m.init()
        self.here = self.m.root

    def sim_move(self, i: int) -> None:
        self.model.cursor.move_to_child(i)
        target = self.f.gaps(self.here)[i]
        self.m.goto(target)
        self.here = target

    def sim_parent(self) -> None:
        self.model.cursor.move_to_parent()
        target = self.f.tree_root(self.here.parent)
        self.m.goto(target)
        self.here = target

    def sim_rotation(self, spec: RotationSpec) -> None:
        c = self.model.cursor
        u = c.at
        p = u.parent
        if p is not None:
            j = p.child_index(u)
            vkeys = list(u.keys)
            ukeys = list(p.keys)
        c.rotate(spec)
        U = self.f.tree_root(self.here.parent)
        V = self.here
        if (self.literal_rotations and 1 <= spec.right <= len(vkeys)
                and 0 <= -spec.left <= j):
            self._rotate_literal(U, V, -spec.left, spec.right, vkeys, ukeys, j)
        else:
            merged = ukeys[:j] + vkeys + ukeys[j:]
            lo = j + spec.left
            hi = j + len(vkeys) - spec.right
            W = self.f.merge(U, V)
            _, self.here = self.f.separate(W, merged[lo], merged[hi - 1])
        self.m.goto(self.here)

    def _rotate_literal(self, U, V, ell, k, vk, uk, j) -> None:
        # demote-left ell / promote-right k, one primitive at a time
        f = self.f
        n = len(vk)
        if k < n:
            V1, V2 = f.separate(V, None, vk[n - k - 1])
        else:
            V1, V2 = V, None
        U1 = f.merge(U, V1)
        x = f.find(U1, vk[n - k])
        f.split(x, U1)
        if ell > 0:
            _, UL2 = f.separate(x.left, uk[j - ell], None)
            vnew = f.merge(UL2, V2) if V2 is not None else UL2
        else:
            vnew = V2
        f.concat_at(x)
        self.here = vnew

    def sim_split(self, mi: int) -> None:
        c = self.model.cursor
        key = c.at.keys[mi] if 0 <= mi < len(c.at.keys) else None
        c.split(mi)
        U = self.here
        P = self.f.tree_root(U.parent) if U.parent is not None else None
        x = self.f.find(U, key)
        self.f.split(x, U)
        self.m.goto(x)
        self.m.set_mark(x.left, True)
        self.m.set_mark(x.right, True)
        self.here = self.f.merge(P, x) if P is not None else x
        self.m.goto(self.here)

    def sim_join(self, j: int) -> None:
        c = self.model.cursor
        p = c.at
        if not 0 <= j < len(p.keys):
            raise ModelError(f"no separator {j}")
        pj = p.keys[j]
        c.join(p.children[j], p.children[j + 1])
        _, X = self.f.separate(self.here, pj, pj)
        self.m.goto(X)
        self.m.set_mark(X.left, False)
        self.m.set_mark(X.right, False)
        self.here = self.f.concat_at(X)
        self.m.goto(self.here)

    def apply(self, op: tuple) -> None:
        kind = op[0]
        if kind == "down":
            self.sim_move(op[1])
        elif kind == "up":
            self.sim_parent()
        elif kind == "rotate":
            self.sim_rotation(RotationSpec(op[1], op[2]))
        elif kind == "split":
            self.sim_split(op[1])
        elif kind == "join":
            self.sim_join(op[1])
        else:
            raise ValueError(f"unknown op {kind!r}")

    # -- checks ---------------------------------------------------------------

    def nested(self):
        f = self.f

        def snap(top):
            if top is None:
                return None
            return (tuple(f.tree_keys(top)), tuple(snap(g) for g in f.gaps(top)))

        return snap(self.m.root)

    def check(self) -> None:
        """Raise unless the forest mirrors the model tree node for node."""
        if self.nested() != self.model.nested():
            raise CorrespondenceError("forest shape differs from the model tree")
        if tuple(self.f.tree_keys(self.here)) != tuple(self.model.cursor.at.keys):
            raise CorrespondenceError("cursor trees differ")
        if not self.m.root.mark or self.m.root.parent is not None:
            raise CorrespondenceError("global root must be a marked tree root")
        stack = [self.m.root]
        while stack:
            v = stack.pop()
            if v.mark:
                problem = audit_tree(v)
                if problem:
                    raise CorrespondenceError(problem)
            stack.extend(c for c in (v.left, v.right) if c is not None)


# -- programs -------------------------------------------------------------------


def start_tree(B: int, n_keys: int) -> ModelTree:
    """A half-full model tree over ``1..n_keys`` to run programs on."""
    fill = max(1, (B - 1) // 2)

    def build(lo, hi):
        n = hi - lo
        if n == 0:
            return None
        if n <= fill:
            return (list(range(lo, hi)), None)
        per, extra = divmod(n - fill, fill + 1)
        keys, kids = [], []
        pos = lo
        for i in range(fill + 1):
            size = per + (1 if i < extra else 0)
            kids.append(build(pos, pos + size))
            pos += size
            if i < fill:
                keys.append(pos)
                pos += 1
        return (keys, kids)

    return ModelTree.from_nested(B, build(1, n_keys + 1))


def random_program(B: int, m: int, seed: int = 0, tree: Optional[ModelTree] = None,
                   n_keys: Optional[int] = None) -> list:
    """``m`` random operations, each legal when replayed in order from the start tree."""
    rng = random.Random(seed)
    t = tree if tree is not None else start_tree(B, n_keys or 8 * B)
    c = t.cursor
    ops: list = []
    span = max(1, (B - 1) // 3)
    while len(ops) < m:
        u = c.at
        roll = rng.random()
        try:
            if roll < 0.45:
                kids = [i for i, k in enumerate(u.children) if k is not None]
                if u.parent is not None and (not kids or rng.random() < 0.4):
                    c.move_to_parent()
                    ops.append(("up",))
                elif kids:
                    i = rng.choice(kids)
                    c.move_to_child(i)
                    ops.append(("down", i))
            elif roll < 0.75:
                spec = RotationSpec(rng.randint(-span, span), rng.randint(-span, span))
                c.rotate(spec)
                ops.append(("rotate", spec.left, spec.right))
            elif roll < 0.88:
                mi = rng.randint(1, max(1, len(u.keys) - 2))
                c.split(mi)
                ops.append(("split", mi))
            else:
                j = rng.randrange(len(u.keys))
                if u.children[j] is not None and u.children[j + 1] is not None:
                    c.join(u.children[j], u.children[j + 1])
                    ops.append(("join", j))
        except ModelError:
            continue
    return ops


def simulate_program(ops: Sequence, B: int, tree: Optional[ModelTree] = None,
                     n_keys: Optional[int] = None, check: bool = True,
                     literal_rotations: bool = True) -> BstMeter:
    """Run ``ops`` through the simulator; returns the BST meter.

    ``tree`` (or a fresh :func:`start_tree`) is the starting model tree.
    With ``check`` the correspondence is verified after every operation.
    """
    t = tree if tree is not None else start_tree(B, n_keys or 8 * B)
    sim = Simulator(t, literal_rotations=literal_rotations)
    start = sim.meter.snapshot()
    for op in ops:
        sim.apply(op)
        if check:
            sim.check()
    out = sim.meter
    return BstMeter(out.moves - start.moves, out.rotations - start.rotations,
                    out.inits - start.inits)
