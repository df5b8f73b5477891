# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: interleave replay, slab crossings, and the Belga engine.

Mirrors ``_pykernels`` and ``belga.PyEngine`` / ``classic.Core`` step for
step, charging the same units, so either backend yields identical meters.
"""
from libc.stdlib cimport calloc, free

from ._errors import NotAdjacent, NothingToCut

cdef extern from *:
    int __builtin_ctzl(unsigned long)

NAME = "compiled"


def replay_interleave(xs, int height):
    cdef long n = (1 << height) - 1
    cdef unsigned char *pref = <unsigned char *> calloc(n + 1, 1)
    cdef long root = 1 << (height - 1)
    cdef long flips = 0, fresh = 0
    cdef long x, a, step
    cdef unsigned char d, old
    if pref == NULL:
        raise MemoryError()
    try:
        for obj in xs:
            x = obj
            a = root
            step = a >> 1
            while step:
                d = 1 if x <= a else 2
                old = pref[a]
                if old != d:
                    if old:
                        flips += 1
                    else:
                        fresh += 1
                    pref[a] = d
                if x == a:
                    break
                if x < a:
                    a -= step
                else:
                    a += step
                step >>= 1
    finally:
        free(pref)
    return flips, fresh


def slab_crossings(depths_from, depths_to, int s, int h):
    cdef long count = 0
    cdef long a, b, lower
    for pa, pb in zip(depths_from, depths_to):
        a = pa
        b = pb
        lower = a if a > b else b
        if lower >= h and (lower - h) % s == 0:
            count += 1
    return count


cdef long _next_id = 1


cdef class CNode:
    """Compiled counterpart of ``classic.BNode`` (same public attributes)."""

    cdef public long nid
    cdef public list keys
    cdef public list children
    cdef public object parent
    cdef public int height
    cdef public bint mark
    cdef public long size
    cdef public int mind
    cdef public int maxd
    cdef public object aug

    def __init__(self, list keys, list children, int height):
        global _next_id
        self.nid = _next_id
        _next_id += 1
        self.keys = keys
        self.children = children
        self.parent = None
        self.height = height
        self.mark = False
        self.size = 0
        self.mind = 0
        self.maxd = 0

    def __repr__(self):
        return f"CNode#{self.nid}({self.keys})"


cdef inline void _adopt(CNode v):
    for c in v.children:
        if c is not None:
            (<CNode> c).parent = v


cdef inline long _bisect(list keys, long x):
    cdef long lo = 0, hi = len(keys), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if <long> keys[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef class BelgaEngine:
    cdef public object root
    cdef public int B
    cdef public int height
    cdef public long n
    cdef int min_keys
    cdef int max_keys
    cdef bint heavy
    cdef public long moves, rotations, splits, joins, inits

    name = "compiled"

    def __init__(self, int height, int B):
        self.B = B
        self.height = height
        self.n = (1 << height) - 1
        self.min_keys = max(1, (B + 1) // 2 - 1)
        self.max_keys = max(2, B - 1)
        self.heavy = B == 2
        self.moves = self.rotations = self.splits = self.joins = self.inits = 0
        self.root = self._build_initial()

    def counts(self):
        return (self.moves, self.rotations, self.splits, self.joins, self.inits)

    cdef inline int dep(self, long x):
        return self.height - 1 - __builtin_ctzl(<unsigned long> x)

    def depth_of(self, long x):
        return self.dep(x)

    cdef CNode _build_initial(self):
        cdef list level = [None] * (self.n + 1)
        cdef long step, half, x
        cdef int d
        cdef CNode v
        for d in range(self.height - 1, -1, -1):
            step = 1 << (self.height - 1 - d)
            x = step
            while x <= self.n:
                if d == self.height - 1:
                    kids = [None, None]
                else:
                    half = step >> 1
                    kids = [level[x - half], level[x + half]]
                v = CNode([x], kids, 0)
                v.mark = True
                v.size = 1
                v.mind = v.maxd = self.dep(x)
                _adopt(v)
                level[x] = v
                x += 2 * step
        return level[1 << (self.height - 1)]

    # -- core -------------------------------------------------------------

    cdef void pull(self, CNode v):
        cdef list keys = v.keys
        cdef long size = len(keys)
        cdef int lo = 1 << 30, hi = -1, dd
        cdef CNode c
        for k in keys:
            dd = self.dep(<long> k)
            if dd < lo:
                lo = dd
            if dd > hi:
                hi = dd
        if v.height > 0:
            for o in v.children:
                c = <CNode> o
                size += c.size
                if c.mind < lo:
                    lo = c.mind
                if c.maxd > hi:
                    hi = c.maxd
        v.size = size
        v.mind = lo
        v.maxd = hi

    cdef inline void touch(self, CNode v):
        if self.heavy and len(v.keys) > 1:
            self.moves += 2
        else:
            self.moves += 1

    cdef CNode make(self, list keys, list children, int height):
        cdef CNode v = CNode(keys, children, height)
        _adopt(v)
        self.pull(v)
        return v

    cdef tuple concat(self, object t1, int h1, long k, object t2, int h2):
        cdef CNode a, b, v
        cdef list keys, kids
        cdef long mid
        if h1 == h2:
            if h1 >= 0:
                a = <CNode> t1
                b = <CNode> t2
                if len(a.keys) < self.min_keys or len(b.keys) < self.min_keys:
                    keys = a.keys + [k] + b.keys
                    kids = a.children + b.children
                    if len(keys) <= self.max_keys:
                        a.keys = keys
                        a.children = kids
                        _adopt(a)
                        self.pull(a)
                        self.joins += 1
                        return (a, h1)
                    mid = len(keys) // 2
                    a.keys = keys[:mid]
                    a.children = kids[: mid + 1]
                    b.keys = keys[mid + 1 :]
                    b.children = kids[mid + 1 :]
                    _adopt(a)
                    self.pull(a)
                    _adopt(b)
                    self.pull(b)
                    self.rotations += 1
                    k = keys[mid]
            v = self.make([k], [t1, t2], h1 + 1)
            self.splits += 1
            return (v, h1 + 1)
        if h1 > h2:
            return self._concat_right(<CNode> t1, h1, k, t2, h2)
        return self._concat_left(t1, h1, k, <CNode> t2, h2)

    cdef tuple _concat_right(self, CNode t1, int h1, long k, object t2, int h2):
        cdef list path = [t1]
        cdef CNode v = t1, s, b
        cdef list keys, kids
        cdef long mid
        while v.height > h2 + 1:
            v = <CNode> v.children[len(v.children) - 1]
            self.touch(v)
            path.append(v)
        if h2 >= 0 and len((<CNode> t2).keys) < self.min_keys:
            b = <CNode> t2
            s = <CNode> v.children[len(v.children) - 1]
            keys = s.keys + [k] + b.keys
            kids = s.children + b.children
            if len(keys) <= self.max_keys:
                s.keys = keys
                s.children = kids
                _adopt(s)
                self.pull(s)
                self.joins += 1
            else:
                mid = len(keys) // 2
                s.keys = keys[:mid]
                s.children = kids[: mid + 1]
                b.keys = keys[mid + 1 :]
                b.children = kids[mid + 1 :]
                _adopt(s)
                _adopt(b)
                self.pull(s)
                self.pull(b)
                v.keys.append(keys[mid])
                v.children.append(b)
                b.parent = v
                self.rotations += 1
        else:
            v.keys.append(k)
            v.children.append(t2)
            if t2 is not None:
                (<CNode> t2).parent = v
        return self._fix_path(path, True)

    cdef tuple _concat_left(self, object t1, int h1, long k, CNode t2, int h2):
        cdef list path = [t2]
        cdef CNode v = t2, s, a
        cdef list keys, kids
        cdef long mid
        while v.height > h1 + 1:
            v = <CNode> v.children[0]
            self.touch(v)
            path.append(v)
        if h1 >= 0 and len((<CNode> t1).keys) < self.min_keys:
            a = <CNode> t1
            s = <CNode> v.children[0]
            keys = a.keys + [k] + s.keys
            kids = a.children + s.children
            if len(keys) <= self.max_keys:
                s.keys = keys
                s.children = kids
                _adopt(s)
                self.pull(s)
                self.joins += 1
            else:
                mid = len(keys) // 2
                a.keys = keys[:mid]
                a.children = kids[: mid + 1]
                s.keys = keys[mid + 1 :]
                s.children = kids[mid + 1 :]
                _adopt(a)
                _adopt(s)
                self.pull(s)
                self.pull(a)
                v.keys.insert(0, keys[mid])
                v.children.insert(0, a)
                a.parent = v
                self.rotations += 1
        else:
            v.keys.insert(0, k)
            v.children.insert(0, t1)
            if t1 is not None:
                (<CNode> t1).parent = v
        return self._fix_path(path, False)

    cdef tuple _fix_path(self, list path, bint at_end):
        cdef long idx, mid
        cdef CNode v, w, root
        cdef object carry_w = None
        cdef long carry_k = 0
        cdef bint carrying = False
        for idx in range(len(path) - 1, -1, -1):
            v = <CNode> path[idx]
            if carrying:
                w = <CNode> carry_w
                if at_end:
                    v.keys.append(carry_k)
                    v.children.append(w)
                else:
                    v.keys.insert(0, carry_k)
                    v.children.insert(0, w)
                w.parent = v
                carrying = False
            if len(v.keys) > self.max_keys:
                mid = len(v.keys) // 2
                if at_end:
                    w = self.make(v.keys[mid + 1 :], v.children[mid + 1 :], v.height)
                    carry_k = v.keys[mid]
                    del v.keys[mid:]
                    del v.children[mid + 1 :]
                else:
                    w = self.make(v.keys[:mid], v.children[: mid + 1], v.height)
                    carry_k = v.keys[mid]
                    del v.keys[: mid + 1]
                    del v.children[: mid + 1]
                carry_w = w
                carrying = True
                self.splits += 1
            self.pull(v)
        root = <CNode> path[0]
        if carrying:
            if at_end:
                root = self.make([carry_k], [root, carry_w], root.height + 1)
            else:
                root = self.make([carry_k], [carry_w, root], root.height + 1)
            self.splits += 1
        return (root, root.height)

    cdef tuple _piece(self, list keys, list children, int height, CNode reuse):
        if len(keys) == 0:
            return (children[0], height - 1)
        if reuse is not None:
            reuse.keys = keys
            reuse.children = children
            _adopt(reuse)
            self.pull(reuse)
            return (reuse, height)
        return (self.make(keys, children, height), height)

    cdef tuple split(self, CNode root, long x):
        cdef list path = []
        cdef list idxs = []
        cdef CNode v = root, u
        cdef list keys, kids
        cdef long i, j, n
        cdef int h, lh, rh, ph
        cdef object L, R, P
        cdef tuple t
        while True:
            keys = v.keys
            i = _bisect(keys, x)
            if i < len(keys) and <long> keys[i] == x:
                break
            if v.height == 0:
                raise KeyError(x)
            path.append(v)
            idxs.append(i)
            v = <CNode> v.children[i]
            self.touch(v)
        j = i
        h = v.height
        keys = v.keys
        kids = v.children
        self.splits += 1
        t = self._piece(keys[:j], kids[: j + 1], h, None)
        L = t[0]; lh = t[1]
        t = self._piece(keys[j + 1 :], kids[j + 1 :], h, v)
        R = t[0]; rh = t[1]
        for pos in range(len(path) - 1, -1, -1):
            u = <CNode> path[pos]
            i = idxs[pos]
            keys = u.keys
            kids = u.children
            h = u.height
            n = len(keys)
            self.splits += 1
            if i > 0:
                t = self._piece(keys[: i - 1], kids[:i], h, None)
                t = self.concat(t[0], t[1], keys[i - 1], L, lh)
                L = t[0]; lh = t[1]
            if i < n:
                t = self._piece(keys[i + 1 :], kids[i + 1 :], h, u)
                t = self.concat(R, rh, keys[i], t[0], t[1])
                R = t[0]; rh = t[1]
        if lh >= 0:
            (<CNode> L).parent = None
        if rh >= 0:
            (<CNode> R).parent = None
        return (L, lh, R, rh)

    cdef tuple find(self, CNode root, long x):
        cdef CNode v = root
        cdef list keys
        cdef long i
        while True:
            keys = v.keys
            i = _bisect(keys, x)
            if i < len(keys) and <long> keys[i] == x:
                return (v, i, True)
            if v.height == 0:
                return (v, i, False)
            v = <CNode> v.children[i]
            self.touch(v)

    cdef tuple neighbors(self, CNode root, long x):
        cdef object pred = None, succ = None
        cdef CNode v = root, a, b
        cdef list keys
        cdef long i, n
        while True:
            keys = v.keys
            n = len(keys)
            i = _bisect(keys, x)
            if i > 0:
                pred = keys[i - 1]
            if i < n:
                if <long> keys[i] == x:
                    if i + 1 < n:
                        succ = keys[i + 1]
                    if v.height > 0:
                        a = <CNode> v.children[i]
                        self.touch(a)
                        while a.height > 0:
                            a = <CNode> a.children[len(a.children) - 1]
                            self.touch(a)
                        pred = a.keys[len(a.keys) - 1]
                        b = <CNode> v.children[i + 1]
                        self.touch(b)
                        while b.height > 0:
                            b = <CNode> b.children[0]
                            self.touch(b)
                        succ = b.keys[0]
                    return (pred, succ)
                succ = keys[i]
            if v.height == 0:
                return (pred, succ)
            v = <CNode> v.children[i]
            self.touch(v)

    # -- engine -------------------------------------------------------------

    def search(self, long x):
        cdef long changes = 0, i
        cdef CNode aux = <CNode> self.root, v = aux, c
        cdef list keys
        self.inits += 1
        while True:
            keys = v.keys
            i = _bisect(keys, x)
            if i < len(keys) and <long> keys[i] == x:
                break
            c = <CNode> v.children[i]
            self.touch(c)
            if c.mark:
                self.moves += aux.height + 1
                aux = self._switch(aux, c)
                changes += 1
                v = aux
            else:
                v = c
        return changes + self._prefer_left(aux, x)

    cdef tuple _owner(self, CNode root):
        cdef CNode p
        if root.parent is None:
            return (None, -1)
        p = <CNode> root.parent
        for i, c in enumerate(p.children):
            if c is root:
                return (p, i)
        raise AssertionError("aux root missing from its parent slot")

    cdef void _install(self, object owner, long idx, CNode new):
        new.mark = True
        new.parent = owner
        if owner is None:
            self.root = new
        else:
            (<CNode> owner).children[idx] = new

    cdef CNode _switch(self, CNode q, CNode r):
        cdef tuple o = self._owner(q)
        cdef CNode top = self._cut(q, r.mind - 1, False)
        cdef CNode new = self._merge(top, r)
        self._install(o[0], o[1], new)
        return new

    cdef long _prefer_left(self, CNode aux, long x):
        cdef int dx = self.dep(x)
        cdef long lc
        cdef tuple t, o
        cdef CNode top, v, new
        if dx == self.height - 1:
            return 0
        lc = x - ((x & -x) >> 1)
        self.moves += aux.height
        t = self.find(aux, lc)
        if t[2]:
            return 0
        o = self._owner(aux)
        top = self._cut(aux, dx, False)
        t = self.find(top, lc)
        v = <CNode> t[0]
        new = self._merge(top, <CNode> v.children[<long> t[1]])
        self._install(o[0], o[1], new)
        return 1

    cdef long _deep_extreme(self, CNode root, int d, bint leftmost):
        cdef CNode v = root, c
        cdef long n, j
        cdef object nxt
        while True:
            n = len(v.keys)
            nxt = None
            if leftmost:
                for j in range(n + 1):
                    if v.height > 0:
                        c = <CNode> v.children[j]
                        if c.maxd > d:
                            nxt = c
                            break
                    if j < n and self.dep(<long> v.keys[j]) > d:
                        return v.keys[j]
            else:
                for j in range(n, -1, -1):
                    if v.height > 0:
                        c = <CNode> v.children[j]
                        if c.maxd > d:
                            nxt = c
                            break
                    if j > 0 and self.dep(<long> v.keys[j - 1]) > d:
                        return v.keys[j - 1]
            v = <CNode> nxt
            self.touch(v)

    cdef CNode _cut(self, CNode root, int d, bint strict):
        cdef long lo, hi
        cdef object pred, succ, A = None, C = None, D, rest
        cdef int ah = -1, ch = -1, rh, dh
        cdef tuple t
        cdef CNode top
        if root.maxd <= d or root.mind > d:
            if strict:
                raise NothingToCut(f"depths {root.mind}..{root.maxd} vs {d}")
            return root
        root.mark = False
        lo = self._deep_extreme(root, d, True)
        hi = self._deep_extreme(root, d, False)
        pred = self.neighbors(root, lo)[0]
        succ = self.neighbors(root, hi)[1]
        if pred is not None:
            t = self.split(root, pred)
            A = t[0]; ah = t[1]; rest = t[2]; rh = t[3]
        else:
            rest = root; rh = root.height
        if succ is not None:
            t = self.split(<CNode> rest, succ)
            D = t[0]; dh = t[1]; C = t[2]; ch = t[3]
        else:
            D = rest; dh = rh
        (<CNode> D).mark = True
        t = (D, -1)
        if succ is not None:
            t = self.concat(D, -1, succ, C, ch)
        if pred is not None:
            t = self.concat(A, ah, pred, t[0], t[1])
        top = <CNode> t[0]
        top.parent = None
        return top

    cdef CNode _merge(self, CNode top, CNode bottom):
        cdef long y
        cdef object pred, succ, A = None, C = None, M, rest
        cdef int ah = -1, ch = -1, rh, mh
        cdef tuple t
        cdef CNode out
        top.mark = False
        y = bottom.keys[0]
        t = self.neighbors(top, y)
        pred = t[0]; succ = t[1]
        if pred is not None:
            t = self.split(top, pred)
            A = t[0]; ah = t[1]; rest = t[2]; rh = t[3]
        else:
            rest = top; rh = top.height
        if succ is not None:
            t = self.split(<CNode> rest, succ)
            M = t[0]; mh = t[1]; C = t[2]; ch = t[3]
        else:
            M = rest; mh = rh
        if M is not bottom or mh != -1:
            raise NotAdjacent(f"{bottom!r} does not hang below {top!r}")
        bottom.mark = False
        t = (bottom, bottom.height)
        if succ is not None:
            t = self.concat(bottom, bottom.height, succ, C, ch)
        if pred is not None:
            t = self.concat(A, ah, pred, t[0], t[1])
        out = <CNode> t[0]
        out.parent = None
        return out

    def cut_at_depth(self, CNode root, int d, bint strict=True):
        return self._cut(root, d, strict)

    def merge_paths(self, CNode top, CNode bottom):
        return self._merge(top, bottom)
