"""Classic B-trees: equal leaf depth, standard fill, search / split / concatenate.

Trees are handled as ``(root, height)`` pairs.  Height ``-1`` denotes an
empty tree, in which case ``root`` is the content of its single external
slot (``None`` or a foreign subtree hanging there).  Leaves keep their
``len(keys) + 1`` external slots, and every restructuring moves those slots
together with the keys around them, so foreign subtrees hung between two
keys stay between the same two keys.  That is what lets auxiliary trees of
a Belga tree be cut and merged with foreign trees attached.

Costs are charged in model units: one move per pointer step, one split per
node split (including the cut of a path node during ``split_at``), one join
per node merge and one rotation per key redistribution between siblings.
With ``B = 2`` the nodes are 2-3 nodes; a two-key node occupies two model
nodes, so touching it is charged twice.
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Callable, Iterable, Optional

from .model import CostMeter, ModelError, Node, Report


class ClassicError(ModelError):
    pass


class EmptyInput(ClassicError):
    pass


class Unsorted(ClassicError):
    pass


class KeyAbsent(ClassicError):
    pass


class OrderViolation(ClassicError):
    pass


class RankOutOfRange(ClassicError):
    pass


class BNode(Node):
    """Classic-tree node with subtree augmentation.

    ``size`` counts keys of the subtree within its own tree; ``mind`` and
    ``maxd`` are the extreme key depths (when a depth function is set);
    ``mark`` flags the root of a tree hanging in someone's external slot.
    """

    __slots__ = ("height", "mark", "size", "mind", "maxd")

    def __init__(self, keys, children, height):
        Node.__init__(self, keys, children)
        self.height = height
        self.mark = False
        self.size = 0
        self.mind = 0
        self.maxd = 0


def fill_bounds(B: int) -> tuple[int, int]:
    """(min keys of a non-root node, max keys of a node)."""
    return max(1, (B + 1) // 2 - 1), max(2, B - 1)


class Core:
    """Split/concatenate machinery shared by classic and auxiliary trees."""

    def __init__(self, B: int, meter: Optional[CostMeter] = None,
                 depth_of: Optional[Callable[[int], int]] = None):
        if B < 2:
            raise ValueError("B must be at least 2")
        self.B = B
        self.min_keys, self.max_keys = fill_bounds(B)
        self.meter = meter if meter is not None else CostMeter()
        self.depth_of = depth_of
        # B = 2: a node with two keys is two model nodes
        self.heavy = B == 2

    # -- augmentation -----------------------------------------------------

    def pull(self, v: BNode) -> None:
        keys = v.keys
        size = len(keys)
        dep = self.depth_of
        if dep is not None:
            ds = [dep(k) for k in keys]
            lo = min(ds)
            hi = max(ds)
        if v.height > 0:
            for c in v.children:
                size += c.size
                if dep is not None:
                    if c.mind < lo:
                        lo = c.mind
                    if c.maxd > hi:
                        hi = c.maxd
        v.size = size
        if dep is not None:
            v.mind = lo
            v.maxd = hi

    def _touch(self, v: BNode) -> None:
        m = self.meter
        m.moves += 2 if (self.heavy and len(v.keys) > 1) else 1

    def make(self, keys, children, height) -> BNode:
        v = BNode(keys, children, height)
        for c in v.children:
            if c is not None:
                c.parent = v
        self.pull(v)
        return v

    # -- concatenate ------------------------------------------------------

    def concat(self, t1, h1: int, k, t2, h2: int):
        """Concatenate ``t1 < k < t2``; returns ``(root, height)``."""
        m = self.meter
        if h1 == h2:
            if h1 >= 0 and (len(t1.keys) < self.min_keys or len(t2.keys) < self.min_keys):
                keys = t1.keys + [k] + t2.keys
                kids = t1.children + t2.children
                if len(keys) <= self.max_keys:
                    t1.keys = keys
                    t1.children = kids
                    for c in t2.children:
                        if c is not None:
                            c.parent = t1
                    self.pull(t1)
                    m.joins += 1
                    return t1, h1
                mid = len(keys) // 2
                t1.keys, t1.children = keys[:mid], kids[: mid + 1]
                t2.keys, t2.children = keys[mid + 1 :], kids[mid + 1 :]
                for t in (t1, t2):
                    for c in t.children:
                        if c is not None:
                            c.parent = t
                    self.pull(t)
                m.rotations += 1
                k = keys[mid]
            v = self.make([k], [t1, t2], h1 + 1)
            m.splits += 1
            return v, h1 + 1
        if h1 > h2:
            return self._concat_right(t1, h1, k, t2, h2)
        return self._concat_left(t1, h1, k, t2, h2)

    def _concat_right(self, t1, h1, k, t2, h2):
        m = self.meter
        path = [t1]
        v = t1
        while v.height > h2 + 1:
            v = v.children[-1]
            self._touch(v)
            path.append(v)
        if h2 >= 0 and len(t2.keys) < self.min_keys:
            s = v.children[-1]
            keys = s.keys + [k] + t2.keys
            kids = s.children + t2.children
            if len(keys) <= self.max_keys:
                s.keys = keys
                s.children = kids
                for c in t2.children:
                    if c is not None:
                        c.parent = s
                self.pull(s)
                m.joins += 1
            else:
                mid = len(keys) // 2
                s.keys = keys[:mid]
                s.children = kids[: mid + 1]
                t2.keys = keys[mid + 1 :]
                t2.children = kids[mid + 1 :]
                for c in s.children:
                    if c is not None:
                        c.parent = s
                for c in t2.children:
                    if c is not None:
                        c.parent = t2
                self.pull(s)
                self.pull(t2)
                v.keys.append(keys[mid])
                v.children.append(t2)
                t2.parent = v
                m.rotations += 1
        else:
            v.keys.append(k)
            v.children.append(t2)
            if t2 is not None:
                t2.parent = v
        return self._fix_path(path, at_end=True)

    def _concat_left(self, t1, h1, k, t2, h2):
        m = self.meter
        path = [t2]
        v = t2
        while v.height > h1 + 1:
            v = v.children[0]
            self._touch(v)
            path.append(v)
        if h1 >= 0 and len(t1.keys) < self.min_keys:
            s = v.children[0]
            keys = t1.keys + [k] + s.keys
            kids = t1.children + s.children
            if len(keys) <= self.max_keys:
                s.keys = keys
                s.children = kids
                for c in t1.children:
                    if c is not None:
                        c.parent = s
                self.pull(s)
                m.joins += 1
            else:
                mid = len(keys) // 2
                t1.keys = keys[:mid]
                t1.children = kids[: mid + 1]
                s.keys = keys[mid + 1 :]
                s.children = kids[mid + 1 :]
                for c in t1.children:
                    if c is not None:
                        c.parent = t1
                for c in s.children:
                    if c is not None:
                        c.parent = s
                self.pull(s)
                self.pull(t1)
                v.keys.insert(0, keys[mid])
                v.children.insert(0, t1)
                t1.parent = v
                m.rotations += 1
        else:
            v.keys.insert(0, k)
            v.children.insert(0, t1)
            if t1 is not None:
                t1.parent = v
        return self._fix_path(path, at_end=False)

    def _fix_path(self, path, at_end: bool):
        """Split overflowing spine nodes bottom-up and refresh augmentation."""
        m = self.meter
        maxk = self.max_keys
        carry = None  # (key, new right/left sibling) pushed into the next node up
        for idx in range(len(path) - 1, -1, -1):
            v = path[idx]
            if carry is not None:
                key, w = carry
                if at_end:
                    v.keys.append(key)
                    v.children.append(w)
                else:
                    v.keys.insert(0, key)
                    v.children.insert(0, w)
                w.parent = v
                carry = None
            if len(v.keys) > maxk:
                mid = len(v.keys) // 2
                if at_end:
                    w = self.make(v.keys[mid + 1 :], v.children[mid + 1 :], v.height)
                    key = v.keys[mid]
                    del v.keys[mid:]
                    del v.children[mid + 1 :]
                else:
                    w = self.make(v.keys[:mid], v.children[: mid + 1], v.height)
                    key = v.keys[mid]
                    del v.keys[: mid + 1]
                    del v.children[: mid + 1]
                carry = (key, w)
                m.splits += 1
            self.pull(v)
        root = path[0]
        if carry is not None:
            key, w = carry
            kids = [root, w] if at_end else [w, root]
            root = self.make([key], kids, root.height + 1)
            m.splits += 1
        return root, root.height

    # -- split --------------------------------------------------------------

    def _piece(self, keys, children, height, reuse: Optional[BNode] = None):
        if not keys:
            c = children[0]
            return c, height - 1
        if reuse is not None:
            reuse.keys = keys
            reuse.children = children
            for c in children:
                if c is not None:
                    c.parent = reuse
            self.pull(reuse)
            return reuse, height
        return self.make(keys, children, height), height

    def split(self, root: BNode, x):
        """Split at key ``x`` (present).  Returns ``(left, lh, right, rh)``."""
        m = self.meter
        path = []
        v = root
        while True:
            keys = v.keys
            i = bisect_left(keys, x)
            if i < len(keys) and keys[i] == x:
                break
            if v.height == 0:
                raise KeyAbsent(x)
            path.append((v, i))
            v = v.children[i]
            self._touch(v)
        j = i
        h = v.height
        keys, kids = v.keys, v.children
        m.splits += 1
        L, lh = self._piece(keys[:j], kids[: j + 1], h)
        R, rh = self._piece(keys[j + 1 :], kids[j + 1 :], h, reuse=v)
        for u, i in reversed(path):
            keys, kids, h = u.keys, u.children, u.height
            n = len(keys)
            m.splits += 1
            if i > 0:
                P, ph = self._piece(keys[: i - 1], kids[:i], h)
                L, lh = self.concat(P, ph, keys[i - 1], L, lh)
            if i < n:
                P, ph = self._piece(keys[i + 1 :], kids[i + 1 :], h, reuse=u)
                R, rh = self.concat(R, rh, keys[i], P, ph)
        if lh >= 0:
            L.parent = None
        if rh >= 0:
            R.parent = None
        return L, lh, R, rh

    # -- navigation ---------------------------------------------------------

    def find(self, root: BNode, x):
        """Descend toward ``x``; returns ``(node, index, found)``."""
        v = root
        while True:
            keys = v.keys
            i = bisect_left(keys, x)
            if i < len(keys) and keys[i] == x:
                return v, i, True
            if v.height == 0:
                return v, i, False
            v = v.children[i]
            self._touch(v)

    def neighbors(self, root: BNode, x):
        """Largest key < x and smallest key > x among the tree's keys."""
        pred = succ = None
        v = root
        while True:
            keys = v.keys
            i = bisect_left(keys, x)
            if i > 0:
                pred = keys[i - 1]
            if i < len(keys):
                if keys[i] == x:
                    if i + 1 < len(keys):
                        succ = keys[i + 1]
                    if v.height > 0:
                        # neighbours sit at the extremes of the adjacent subtrees
                        a = v.children[i]
                        self._touch(a)
                        while a.height > 0:
                            a = a.children[-1]
                            self._touch(a)
                        pred = a.keys[-1]
                        b = v.children[i + 1]
                        self._touch(b)
                        while b.height > 0:
                            b = b.children[0]
                            self._touch(b)
                        succ = b.keys[0]
                    return pred, succ
                succ = keys[i]
            if v.height == 0:
                return pred, succ
            v = v.children[i]
            self._touch(v)

    def select(self, root: BNode, r: int):
        """The ``r``-th smallest key (1-based) using subtree sizes."""
        v = root
        while True:
            if v.height == 0:
                return v.keys[r - 1]
            for i, c in enumerate(v.children):
                if r <= c.size:
                    v = c
                    break
                r -= c.size
                if i < len(v.keys):
                    if r == 1:
                        return v.keys[i]
                    r -= 1
            self._touch(v)

    # -- bulk build ---------------------------------------------------------

    def build(self, keys: list, ext: Optional[list] = None):
        """Build a tree over sorted ``keys`` with nodes as full as possible.

        ``ext`` optionally supplies the ``len(keys) + 1`` external slot
        contents.  Returns ``(root, height)``.
        """
        n = len(keys)
        if ext is None:
            ext = [None] * (n + 1)
        if n == 0:
            return ext[0], -1
        if self.B == 2:
            # thinnest legal 2-3 tree: single-key nodes wherever possible
            h = (n + 1).bit_length() - 2
        else:
            h = 0
            while self.B ** (h + 1) - 1 < n:
                h += 1
        return self._build(keys, 0, n, ext, h), h

    def _build(self, keys, lo, hi, ext, h):
        n = hi - lo
        if h == 0:
            return self.make(keys[lo:hi], ext[lo : hi + 1], 0)
        cap = (self.max_keys + 1) ** h - 1
        c = max(2, -(-(n + 1) // (cap + 1)))
        base, extra = divmod(n - (c - 1), c)
        kids = []
        seps = []
        pos = lo
        for t in range(c):
            size = base + (1 if t < extra else 0)
            kids.append(self._build(keys, pos, pos + size, ext, h - 1))
            pos += size
            if t < c - 1:
                seps.append(keys[pos])
                pos += 1
        return self.make(seps, kids, h)


class ClassicTree:
    """A classic B-tree over distinct keys, with a private or shared meter."""

    def __init__(self, B: int, meter: Optional[CostMeter] = None,
                 depth_of: Optional[Callable[[int], int]] = None):
        self.core = Core(B, meter, depth_of)
        self.B = B
        self.meter = self.core.meter
        self.root: Optional[BNode] = None
        self.height = -1

    @property
    def size(self) -> int:
        return 0 if self.height < 0 else self.root.size

    def __len__(self):
        return self.size

    @classmethod
    def build_from_sorted(cls, keys: Iterable, B: int, meter: Optional[CostMeter] = None,
                          depth_of=None) -> "ClassicTree":
        keys = list(keys)
        if not keys:
            raise EmptyInput("no keys")
        for a, b in zip(keys, keys[1:]):
            if not a < b:
                raise Unsorted(f"{a} !< {b}")
        t = cls(B, meter, depth_of)
        t.root, t.height = t.core.build(keys)
        return t

    @classmethod
    def _wrap(cls, core: Core, root, height) -> "ClassicTree":
        t = cls.__new__(cls)
        t.core = core
        t.B = core.B
        t.meter = core.meter
        if height < 0:
            root = None
        t.root, t.height = root, height
        return t

    def keys(self) -> list:
        out: list = []
        if self.height < 0:
            return out

        def walk(v):
            if v.height == 0:
                out.extend(v.keys)
                return
            for c, k in zip(v.children, v.keys):
                walk(c)
                out.append(k)
            walk(v.children[-1])

        walk(self.root)
        return out

    def search(self, x) -> bool:
        self.meter.inits += 1
        if self.height < 0:
            return False
        _, _, found = self.core.find(self.root, x)
        return found

    def split_at(self, x) -> tuple[Optional[int], "ClassicTree", "ClassicTree"]:
        """Split at ``x``: returns ``(x, left tree, right tree)``."""
        if self.height < 0:
            raise KeyAbsent(x)
        self.meter.inits += 1
        L, lh, R, rh = self.core.split(self.root, x)
        core = self.core
        return x, ClassicTree._wrap(core, L, lh), ClassicTree._wrap(core, R, rh)

    def find_by_rank(self, r: int):
        if not 1 <= r <= self.size:
            raise RankOutOfRange(r)
        self.meter.inits += 1
        return self.core.select(self.root, r)

    def validate(self) -> Report:
        return validate_classic(self.root, self.height, self.core)


def concatenate(t1: ClassicTree, k, t2: ClassicTree) -> ClassicTree:
    """Concatenate ``t1 < k < t2`` into a fresh handle (inputs are consumed)."""
    core = t1.core
    if t1.height >= 0 and _max_key(t1.root) >= k:
        raise OrderViolation(f"max(t1) >= {k}")
    if t2.height >= 0 and _min_key(t2.root) <= k:
        raise OrderViolation(f"min(t2) <= {k}")
    core.meter.inits += 1
    r1 = t1.root if t1.height >= 0 else None
    r2 = t2.root if t2.height >= 0 else None
    root, h = core.concat(r1, t1.height, k, r2, t2.height)
    root.parent = None
    t1.root, t1.height = None, -1
    t2.root, t2.height = None, -1
    return ClassicTree._wrap(core, root, h)


def _max_key(v):
    while v.height > 0:
        v = v.children[-1]
    return v.keys[-1]


def _min_key(v):
    while v.height > 0:
        v = v.children[0]
    return v.keys[0]


def validate_classic(root, height: int, core: Core, external_ok=None) -> Report:
    """Equal leaf depth, fill bounds, order, sizes and depth augmentation.

    External slots must be ``None`` unless ``external_ok`` accepts them.
    """
    if height < 0:
        return Report(True)
    if root.height != height:
        return Report(False, f"root height {root.height} != {height}")
    stack = [(root, True, None, None)]
    while stack:
        v, is_root, lo, hi = stack.pop()
        n = len(v.keys)
        low = 1 if is_root else core.min_keys
        if not low <= n <= core.max_keys:
            return Report(False, f"{v!r} holds {n} keys, allowed {low}..{core.max_keys}")
        if len(v.children) != n + 1:
            return Report(False, f"{v!r} child slot count")
        for a, b in zip(v.keys, v.keys[1:]):
            if not a < b:
                return Report(False, f"{v!r} keys unsorted")
        if (lo is not None and v.keys[0] <= lo) or (hi is not None and v.keys[-1] >= hi):
            return Report(False, f"in-order violation at {v!r}")
        bounds = [lo] + v.keys + [hi]
        size = n
        dep = core.depth_of
        if dep is not None:
            ds = [dep(k) for k in v.keys]
            mind, maxd = min(ds), max(ds)
        for i, c in enumerate(v.children):
            if v.height == 0:
                if c is not None and not (external_ok and external_ok(c)):
                    return Report(False, f"unexpected external child under {v!r}")
                continue
            if c is None or c.height != v.height - 1:
                return Report(False, f"child {i} of {v!r} has wrong height (leaves not level)")
            if c.parent is not v:
                return Report(False, f"parent link of {c!r}")
            if c.mark:
                return Report(False, f"marked node {c!r} inside a tree")
            size += c.size
            if dep is not None:
                mind = min(mind, c.mind)
                maxd = max(maxd, c.maxd)
            stack.append((c, False, bounds[i], bounds[i + 1]))
        if size != v.size:
            return Report(False, f"size augmentation wrong at {v!r}")
        if dep is not None and (mind, maxd) != (v.mind, v.maxd):
            return Report(False, f"depth augmentation wrong at {v!r}")
    return Report(True)
