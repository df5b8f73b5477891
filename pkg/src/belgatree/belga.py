"""The Belga B-tree: a tree of auxiliary classic B-trees, one per preferred path.

Each auxiliary tree stores the keys of one preferred path of the reference
tree, with per-node size and min/max reference depth.  Its root is marked
and hangs in an external slot of the auxiliary tree above it.  A search
descends in key order; whenever it steps onto a marked root it cuts the
current path below the attachment depth and merges the path it entered,
exactly mirroring the preferred-child changes on the reference tree.
"""
from __future__ import annotations

from bisect import bisect_left
from typing import NamedTuple, Optional

from .classic import BNode, Core, validate_classic
from .model import CostMeter, Report
from . import _backend
from ._errors import NotAdjacent, NothingToCut
from .reference import OutOfUniverse, RefTree, height_for


class BadParams(ValueError):
    pass


class SearchOutcome(NamedTuple):
    found: bool
    cost: int
    flips: int
    changes: int


class PyEngine:
    """Pure-Python search engine; ``_ckernels.BelgaEngine`` is its compiled twin."""

    name = "python"

    def __init__(self, height: int, B: int, meter: CostMeter):
        self.B = B
        self.height = height
        self.n = (1 << height) - 1
        self.depth_of = lambda x: height - (x & -x).bit_length()
        self.meter = meter
        self.core = Core(B, meter, self.depth_of)
        self.root = self._build_initial()

    def _build_initial(self) -> BNode:
        # every key starts as its own marked auxiliary tree, shaped like
        # the reference tree (no preferred children yet)
        dep = self.depth_of
        level = [None] * (self.n + 1)
        for d in range(self.height - 1, -1, -1):
            step = 1 << (self.height - 1 - d)
            for x in range(step, self.n + 1, 2 * step):
                if d == self.height - 1:
                    kids = [None, None]
                else:
                    half = step >> 1
                    kids = [level[x - half], level[x + half]]
                v = BNode([x], kids, 0)
                v.mark = True
                v.size = 1
                v.mind = v.maxd = dep(x)
                for c in kids:
                    if c is not None:
                        c.parent = v
                level[x] = v
        return level[1 << (self.height - 1)]

    # -- search -----------------------------------------------------------

    def search(self, x: int) -> int:
        """Search ``x``, updating paths; returns the number of path changes."""
        m = self.meter
        core = self.core
        m.inits += 1
        changes = 0
        aux = v = self.root
        while True:
            keys = v.keys
            i = bisect_left(keys, x)
            if i < len(keys) and keys[i] == x:
                break
            c = v.children[i]
            core._touch(c)
            if c.mark:
                # back up to the root of the current auxiliary tree
                m.moves += aux.height + 1
                aux = self._switch(aux, c)
                changes += 1
                v = aux
            else:
                v = c
        return changes + self._prefer_left(aux, x)

    def _owner(self, root: BNode):
        p = root.parent
        if p is None:
            return None, -1
        for i, c in enumerate(p.children):
            if c is root:
                return p, i
        raise AssertionError("aux root missing from its parent slot")

    def _install(self, owner, idx, new: BNode) -> None:
        new.mark = True
        new.parent = owner
        if owner is None:
            self.root = new
        else:
            owner.children[idx] = new

    def _switch(self, q: BNode, r: BNode) -> BNode:
        """Cut the path of ``q`` above ``r``'s attachment depth and merge ``r``."""
        owner, idx = self._owner(q)
        top = self.cut_at_depth(q, r.mind - 1, strict=False)
        new = self.merge_paths(top, r)
        self._install(owner, idx, new)
        return new

    def _prefer_left(self, aux: BNode, x: int) -> int:
        # x lies in its own left region, so x now prefers its left child
        dx = self.depth_of(x)
        if dx == self.height - 1:
            return 0
        lc = x - ((x & -x) >> 1)
        core = self.core
        self.meter.moves += aux.height
        _, _, found = core.find(aux, lc)
        if found:
            return 0
        owner, idx = self._owner(aux)
        top = self.cut_at_depth(aux, dx, strict=False)
        v, i, _ = core.find(top, lc)
        hanging = v.children[i]
        new = self.merge_paths(top, hanging)
        self._install(owner, idx, new)
        return 1

    # -- auxiliary tree operations ----------------------------------------

    def _deep_extreme(self, root: BNode, d: int, leftmost: bool):
        dep = self.depth_of
        core = self.core
        v = root
        while True:
            n = len(v.keys)
            order = range(n + 1) if leftmost else range(n, -1, -1)
            nxt = None
            for j in order:
                if leftmost:
                    if v.height > 0 and v.children[j].maxd > d:
                        nxt = v.children[j]
                        break
                    if j < n and dep(v.keys[j]) > d:
                        return v.keys[j]
                else:
                    if v.height > 0 and v.children[j].maxd > d:
                        nxt = v.children[j]
                        break
                    if j > 0 and dep(v.keys[j - 1]) > d:
                        return v.keys[j - 1]
            core._touch(nxt)
            v = nxt

    def cut_at_depth(self, root: BNode, d: int, strict: bool = True) -> BNode:
        """Detach the keys deeper than ``d`` into their own marked tree.

        Returns the root of the remaining (shallower) tree; the detached
        tree hangs in one of its external slots.  With ``strict=False`` a
        tree with nothing below ``d`` is returned unchanged.
        """
        core = self.core
        if root.maxd <= d or root.mind > d:
            if strict:
                raise NothingToCut(f"depths {root.mind}..{root.maxd} vs {d}")
            return root
        root.mark = False
        lo = self._deep_extreme(root, d, True)
        hi = self._deep_extreme(root, d, False)
        pred, _ = core.neighbors(root, lo)
        _, succ = core.neighbors(root, hi)
        if pred is not None:
            A, ah, rest, rh = core.split(root, pred)
        else:
            rest, rh = root, root.height
        if succ is not None:
            D, dh, C, ch = core.split(rest, succ)
        else:
            D, dh = rest, rh
        D.mark = True
        top, th = D, -1
        if succ is not None:
            top, th = core.concat(D, -1, succ, C, ch)
        if pred is not None:
            top, th = core.concat(A, ah, pred, top, th)
        top.parent = None
        return top

    def merge_paths(self, top: BNode, bottom: BNode) -> BNode:
        """Merge the marked tree ``bottom`` hanging below ``top`` into it."""
        core = self.core
        top.mark = False
        y = bottom.keys[0]
        pred, succ = core.neighbors(top, y)
        if pred is not None:
            A, ah, rest, rh = core.split(top, pred)
        else:
            rest, rh = top, top.height
        if succ is not None:
            M, mh, C, ch = core.split(rest, succ)
        else:
            M, mh = rest, rh
        if M is not bottom or mh != -1:
            raise NotAdjacent(f"{bottom!r} does not hang below {top!r}")
        bottom.mark = False
        t, th = bottom, bottom.height
        if succ is not None:
            t, th = core.concat(bottom, th, succ, C, ch)
        if pred is not None:
            t, th = core.concat(A, ah, pred, t, th)
        t.parent = None
        return t


class BelgaTree:
    """A Belga B-tree over ``1 .. N`` (padded to ``2**i - 1``) with branching ``B``.

    ``backend`` is ``"auto"`` (compiled engine when built), ``"python"`` or
    ``"compiled"``.
    """

    def __init__(self, N: int, B: int, backend: str = "auto"):
        if N < 1 or B < 2:
            raise BadParams(f"N={N}, B={B}")
        self.N = N
        self.B = B
        self.height = height_for(N)
        self.n = (1 << self.height) - 1
        i = self.height
        self.depth_of = lambda x: i - (x & -x).bit_length()
        self.meter = CostMeter()
        self.rt = RefTree(self.height)
        self.core = Core(B, self.meter, self.depth_of)
        if backend == "auto":
            backend = "compiled" if _backend.compiled is not None else "python"
        if backend == "python":
            self.engine = PyEngine(self.height, B, self.meter)
            self._sync = None
        elif backend == "compiled":
            if _backend.compiled is None:
                raise BadParams("compiled kernels are not built")
            self.engine = _backend.compiled.BelgaEngine(self.height, B)
            self._sync = self.engine.counts
        else:
            raise BadParams(f"unknown backend {backend!r}")
        self.backend = backend

    @classmethod
    def build_initial(cls, N: int, B: int, backend: str = "auto") -> "BelgaTree":
        return cls(N, B, backend)

    @property
    def root(self) -> BNode:
        return self.engine.root

    def _pull_counts(self) -> None:
        m = self.meter
        m.moves, m.rotations, m.splits, m.joins, m.inits = self._sync()

    def search(self, x: int) -> SearchOutcome:
        if not 1 <= x <= self.N:
            raise OutOfUniverse(f"{x} not in [1, {self.N}]")
        before = self.meter.total()
        flips = self.rt.record_search(x)
        changes = self.engine.search(x)
        if self._sync is not None:
            self._pull_counts()
        return SearchOutcome(True, self.meter.total() - before, flips, changes)

    def cut_at_depth(self, root: BNode, d: int, strict: bool = True) -> BNode:
        out = self.engine.cut_at_depth(root, d, strict)
        if self._sync is not None:
            self._pull_counts()
        return out

    def merge_paths(self, top: BNode, bottom: BNode) -> BNode:
        out = self.engine.merge_paths(top, bottom)
        if self._sync is not None:
            self._pull_counts()
        return out

    # -- inspection ---------------------------------------------------------

    def aux_roots(self) -> list:
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v.mark:
                out.append(v)
            stack.extend(c for c in v.children if c is not None)
        return out

    @staticmethod
    def aux_keys(root: BNode) -> list:
        out: list = []

        def walk(v):
            if v.height == 0:
                out.extend(v.keys)
                return
            for c, k in zip(v.children, v.keys):
                walk(c)
                out.append(k)
            walk(v.children[-1])

        walk(root)
        return out

    def partition(self) -> list:
        """Key sets of all auxiliary trees, sorted by smallest key."""
        return sorted((self.aux_keys(r) for r in self.aux_roots()), key=lambda ks: ks[0])

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

    def audit(self, check_paths: bool = True) -> Report:
        """Full structural audit against the mirrored reference tree."""
        if self.root.parent is not None or not self.root.mark:
            return Report(False, "global root must be marked and parentless")
        if self.inorder() != list(range(1, self.n + 1)):
            return Report(False, "global in-order is not 1..n")
        core = self.core

        def external_ok(c):
            return c.mark

        for r in self.aux_roots():
            rep = validate_classic(r, r.height, core, external_ok)
            if not rep:
                return rep
            stack = [r]
            while stack:
                v = stack.pop()
                for c in v.children:
                    if c is None:
                        continue
                    if c.parent is not v:
                        return Report(False, f"parent link of {c!r}")
                    if v.height > 0:
                        stack.append(c)
        if check_paths:
            mine = [tuple(ks) for ks in self.partition()]
            ref = sorted((tuple(sorted(p.keys)) for p in self.rt.paths()), key=lambda t: t[0])
            if mine != ref:
                for a, b in zip(mine, ref):
                    if a != b:
                        return Report(False, f"aux tree {a} != preferred path {b}")
                return Report(False, "partition sizes differ")
        return Report(True)
