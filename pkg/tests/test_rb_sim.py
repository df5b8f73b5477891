import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from belgatree.model import ModelTree, RotationSpec
from belgatree.rb_sim import (
    BstMachine,
    EmptyRange,
    IllegalStep,
    KeyAbsent,
    NotChild,
    OrderViolation,
    RankOutOfRange,
    RbForest,
    RBNode,
    Simulator,
    audit_tree,
    random_program,
    rb_concatenate,
    rb_select,
    rb_split,
    rb_tree,
    simulate_program,
    start_tree,
)

from oracles import sorted_select, sorted_split


def keys_of(v):
    return RbForest.tree_keys(v)


def side_keys(v):
    out = []

    def walk(w):
        if w is None or w.mark:
            return
        walk(w.left)
        out.append(w.key)
        walk(w.right)

    walk(v)
    return out


class TestRedBlack:
    def test_build_is_valid(self):
        for n in range(1, 70):
            f, top = rb_tree(range(n))
            assert audit_tree(top) is None
            assert keys_of(top) == list(range(n))
            assert top.size == n

    def test_split_median(self):
        f, top = rb_tree([1, 2, 3, 4, 5, 6, 7])
        x = rb_split(f, top, 4)
        assert x.key == 4
        assert side_keys(x.left) == [1, 2, 3]
        assert side_keys(x.right) == [5, 6, 7]
        for c in (x.left, x.right):
            c.mark, c.parent, saved = True, None, c.parent
            assert audit_tree(c) is None
            c.mark, c.parent = False, saved

    def test_select_min(self):
        f, top = rb_tree([1, 2, 3])
        assert rb_select(f, top, 1) == 1
        with pytest.raises(RankOutOfRange):
            rb_select(f, top, 4)

    def test_missing_key(self):
        f, top = rb_tree([1, 2, 3])
        with pytest.raises(KeyAbsent):
            rb_split(f, top, 9)

    def test_concatenate_checks_order(self):
        f, top = rb_tree([1, 2, 3, 4, 5])
        x = rb_split(f, top, 3)
        x.key = 0
        with pytest.raises(OrderViolation):
            rb_concatenate(f, x)

    def test_random_instances_match_sorted_lists(self):
        rng = random.Random(7)
        for _ in range(500):
            keys = sorted(rng.sample(range(2000), rng.randint(1, 120)))
            f, top = rb_tree(keys)
            r = rng.randint(1, len(keys))
            assert rb_select(f, top, r) == sorted_select(keys, r)
            k = rng.choice(keys)
            x = rb_split(f, top, k)
            lo, hi = sorted_split(keys, k)
            assert side_keys(x.left) == lo and side_keys(x.right) == hi
            top = rb_concatenate(f, x)
            assert keys_of(top) == keys
            assert audit_tree(top) is None
            assert f.m.violations == 0

    def test_split_and_concat_cost_logarithmically(self):
        f, top = rb_tree(range(1 << 14))
        before = f.m.meter.total()
        x = rb_split(f, top, 5000)
        rb_concatenate(f, x)
        assert f.m.meter.total() - before <= 12 * 14


class TestMergeSeparate:
    @settings(max_examples=150, deadline=None)
    @given(st.sets(st.integers(0, 500), min_size=1, max_size=80), st.data())
    def test_round_trip(self, keys, data):
        keys = sorted(keys)
        a = data.draw(st.sampled_from(keys))
        b = data.draw(st.sampled_from(keys))
        lo, hi = min(a, b), max(a, b)
        lo = data.draw(st.sampled_from([lo, None]))
        hi = data.draw(st.sampled_from([hi, None]))
        f, top = rb_tree(keys)
        rest, cut = f.separate(top, lo, hi)
        inside = [k for k in keys if (lo is None or k >= lo) and (hi is None or k <= hi)]
        assert keys_of(cut) == inside and cut.mark
        assert audit_tree(cut) is None
        if rest is None:
            assert inside == keys
            return
        assert keys_of(rest) == [k for k in keys if k not in inside]
        assert audit_tree(rest) is None
        assert RbForest.tree_root(cut.parent) is rest
        back = f.merge(rest, cut)
        back = RbForest.tree_root(back)
        assert keys_of(back) == keys
        assert audit_tree(back) is None
        assert f.m.violations == 0

    def test_empty_range(self):
        f, top = rb_tree([1, 5, 9])
        with pytest.raises(EmptyRange):
            f.separate(top, 2, 4)

    def test_merge_needs_a_child(self):
        f, top = rb_tree([1, 5, 9])
        stray = RBNode(3, red=False)
        stray.mark = True
        with pytest.raises(NotChild):
            f.merge(top, stray)


class TestMachine:
    def test_non_adjacent_step_is_rejected(self):
        f, top = rb_tree(range(15))
        far = top.left.left
        m = f.m
        m.goto(top)
        with pytest.raises(IllegalStep):
            m.step(far)
        assert m.violations == 1

    def test_goto_charges_each_edge(self):
        f, top = rb_tree(range(15))
        m = f.m
        m.goto(top)
        before = m.meter.moves
        m.goto(top.left.left)
        m.goto(top.right)
        assert m.meter.moves - before == 2 + 3

    def test_rotation_at_root_is_illegal(self):
        f, top = rb_tree(range(3))
        f.m.goto(top)
        with pytest.raises(IllegalStep):
            f.m.rotate()

    def test_paint_far_away_is_illegal(self):
        f, top = rb_tree(range(31))
        f.m.goto(top)
        with pytest.raises(IllegalStep):
            f.m.paint(top.left.left.left, True)


class TestSimulator:
    def test_demote_left_promote_right(self):
        t = ModelTree.from_nested(8, ([10, 20, 30, 40], [None, None, ([22, 24, 26], None), None, None]))
        t.cursor.move_to_child(2)
        sim = Simulator(t)
        sim.sim_rotation(RotationSpec.demote_left_promote_right(1, 1))
        sim.check()
        assert keys_of(sim.m.root) == [10, 26, 30, 40]
        assert keys_of(sim.here) == [20, 22, 24]

    def test_both_rotation_routes_track_the_model(self):
        for literal in (True, False):
            t = start_tree(16, 200)
            ops = random_program(16, 300, seed=4, tree=start_tree(16, 200))
            simulate_program(ops, 16, tree=t, literal_rotations=literal)

    def test_join_under_single_key(self):
        t = ModelTree.from_nested(4, ([5], [([3], None), ([7], None)]))
        sim = Simulator(t)
        sim.sim_join(0)
        sim.check()
        assert sim.nested() == ((3, 5, 7), (None,) * 4)

    def test_split_then_join(self):
        t = ModelTree.from_nested(8, ([3, 5, 7, 9], None))
        sim = Simulator(t)
        sim.sim_split(2)
        sim.check()
        assert t.nested() == ((7,), (((3, 5), (None,) * 3), ((9,), (None, None))))
        sim.sim_join(0)
        sim.check()
        assert sim.nested() == ((3, 5, 7, 9), (None,) * 5)

    def test_empty_program_costs_nothing(self):
        assert simulate_program([], 16).total() == 0

    def test_rejected_model_op_charges_nothing(self):
        t = ModelTree.from_nested(4, ([1, 2], None))
        sim = Simulator(t)
        before = sim.meter.total()
        with pytest.raises(Exception):
            sim.sim_move(0)
        assert sim.meter.total() == before

    @pytest.mark.parametrize("B", (2, 3, 4, 16))
    def test_every_op_costs_log_b(self, B):
        ops = random_program(B, 400, seed=B)
        t = start_tree(B, 8 * B)
        sim = Simulator(t)
        cap = 40 * max(1, math.ceil(math.log2(B)))
        for op in ops:
            before = sim.meter.total()
            sim.apply(op)
            sim.check()
            assert sim.meter.total() - before <= cap, op
        assert sim.m.violations == 0

    def test_machine_rejects_unknown_op(self):
        sim = Simulator(start_tree(4, 10))
        with pytest.raises(ValueError):
            sim.apply(("teleport",))


def test_machine_starts_empty():
    m = BstMachine()
    with pytest.raises(IllegalStep):
        m.step(RBNode(1, red=False))
