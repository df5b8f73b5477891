import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from belgatree.belga import BadParams, BelgaTree, NotAdjacent, NothingToCut
from belgatree.classic import ClassicTree
from belgatree.reference import OutOfUniverse, RefTree

from oracles import ExplicitRef


def hanging_below(t, top, depth):
    """The marked tree in ``top``'s external slots whose shallowest key is ``depth``."""
    stack = [top]
    while stack:
        v = stack.pop()
        for c in v.children:
            if c is None:
                continue
            if c.mark:
                if c.mind == depth:
                    return c
            else:
                stack.append(c)
    return None


def test_initial_state_is_all_singletons():
    t = BelgaTree(15, 4, backend="python")
    assert t.partition() == [[x] for x in range(1, 16)]
    assert t.audit()
    assert t.meter.total() == 0


def test_first_search_builds_one_path():
    t = BelgaTree(15, 4, backend="python")
    out = t.search(5)
    assert out.found and out.cost > 0
    assert [4, 5, 6, 8] in t.partition()
    assert t.audit()


@pytest.mark.parametrize("B", (2, 3, 4, 16))
@pytest.mark.parametrize("N", (1, 7, 20, 127))
def test_audit_after_every_search(B, N):
    rng = random.Random(N * B)
    t = BelgaTree(N, B, backend="python")
    ref = ExplicitRef(t.height)
    for _ in range(150):
        x = rng.randint(1, N)
        out = t.search(x)
        assert out.flips == ref.search(x)
        rep = t.audit()
        assert rep, rep.problem
    assert t.inorder() == list(range(1, t.n + 1))


def test_padding_to_full_universe():
    t = BelgaTree(10, 4, backend="python")
    assert t.n == 15
    with pytest.raises(OutOfUniverse):
        t.search(11)
    with pytest.raises(OutOfUniverse):
        t.search(0)


def test_bad_params():
    with pytest.raises(BadParams):
        BelgaTree(0, 4)
    with pytest.raises(BadParams):
        BelgaTree(7, 1)
    with pytest.raises(BadParams):
        BelgaTree(7, 4, backend="fortran")


def test_repeated_search_is_cheap():
    N, B = 4095, 16
    t = BelgaTree(N, B)
    t.search(1234)
    costs = [t.search(1234).cost for _ in range(20)]
    classic = math.ceil(math.log(N, B))
    assert max(costs) <= classic
    assert all(t.search(1234).changes == 0 for _ in range(3))


def test_cost_tracks_path_changes():
    rng = random.Random(9)
    N, B = 1023, 16
    t = BelgaTree(N, B)
    lvl = 1 + math.ceil(math.log(math.ceil(math.log2(N + 1)), B))
    for _ in range(2000):
        out = t.search(rng.randint(1, N))
        assert out.cost <= 20 * (out.changes + 1) * lvl


def test_cut_and_merge_restore_partition():
    t = BelgaTree(63, 4, backend="python")
    t.search(1)
    root = t.root
    assert t.aux_keys(root) == [1, 2, 4, 8, 16, 32]
    before = t.partition()
    top = t.cut_at_depth(root, 2)
    t.engine.root = top
    top.mark = True
    assert sorted(t.aux_keys(top)) == [8, 16, 32]
    low = hanging_below(t, top, 3)
    assert low is not None and t.aux_keys(low) == [1, 2, 4]
    merged = t.merge_paths(top, low)
    merged.mark = True
    t.engine.root = merged
    assert t.partition() == before
    assert t.audit()


def test_cut_with_nothing_below():
    t = BelgaTree(15, 4, backend="python")
    t.search(8)
    with pytest.raises(NothingToCut):
        t.cut_at_depth(t.root, 5)
    assert t.cut_at_depth(t.root, 5, strict=False) is t.root


def test_merge_requires_adjacent_tree():
    t = BelgaTree(63, 4, backend="python")
    t.search(1)
    far = next(r for r in t.aux_roots() if t.aux_keys(r) == [63])
    with pytest.raises(NotAdjacent):
        t.merge_paths(t.root, far)


def test_charges_match_classic_search_on_fresh_path():
    # once the whole search path is one auxiliary tree, a repeat costs a
    # plain descent plus the final left-preference check
    t = BelgaTree(255, 16, backend="python")
    t.search(100)
    before = t.meter.snapshot()
    t.search(100)
    delta = t.meter.since(before)
    assert delta.splits == delta.joins == 0
    assert delta.inits == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.sampled_from([2, 4, 16]), st.data())
def test_partition_equals_preferred_paths(h, B, data):
    n = (1 << h) - 1
    xs = data.draw(st.lists(st.integers(1, n), max_size=30))
    t = BelgaTree(n, B, backend="python")
    rt = RefTree(h)
    for x in xs:
        t.search(x)
        rt.record_search(x)
    assert [tuple(p) for p in t.partition()] == sorted(
        (tuple(sorted(p.keys)) for p in rt.paths()), key=lambda p: p[0])


def test_classic_is_no_better_on_skewed_workload():
    N, B = 4095, 16
    t = BelgaTree(N, B)
    c = ClassicTree.build_from_sorted(range(1, N + 1), B)
    for _ in range(500):
        t.search(7)
        c.search(7)
    assert t.meter.total() < c.meter.total()


def test_changes_count_every_preference_transition():
    rng = random.Random(21)
    t = BelgaTree(1023, 16)
    for _ in range(2000):
        out = t.search(rng.randint(1, 1023))
        assert out.changes == out.flips + t.rt.last_fresh
