import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from belgatree.model import validate as validate_model
from belgatree.static_map import (
    BlockMapping,
    BTooSmall,
    IllegalWalk,
    StaticBST,
    Walk,
    adversary_sequence,
    build_randomized,
    build_slabs,
    expected_cost_by_mapping,
    exact_expected_cost,
    slab_height,
    walk_cost,
)


def test_slab_height():
    assert [slab_height(B) for B in (3, 4, 7, 8, 16, 64)] == [1, 2, 2, 3, 4, 6]
    with pytest.raises(BTooSmall):
        slab_height(2)
    with pytest.raises(BTooSmall):
        build_randomized(StaticBST.perfect(3), 2, seed=0)


def test_fifteen_nodes_with_two_level_root_block():
    T = StaticBST.perfect(4)
    f = build_slabs(T, 16, 2)
    assert f.blocks[8] == [4, 8, 12]
    assert sorted(map(tuple, f.blocks.values())) == [
        (1, 2, 3), (4, 8, 12), (5, 6, 7), (9, 10, 11), (13, 14, 15)]
    assert f.validate()


def test_b3_blocks_are_single_nodes():
    T = StaticBST.perfect(5)
    f = build_randomized(T, 3, seed=1)
    assert all(len(ks) == 1 for ks in f.blocks.values())
    w = Walk.random(T, 50, random.Random(0))
    assert walk_cost(f, w) == 1 + w.steps
    assert walk_cost(BlockMapping.singletons(T), w) == 1 + w.steps


@pytest.mark.parametrize("B", (4, 16, 64))
def test_block_sizes_and_connectivity(B):
    for T in (StaticBST.perfect(9), StaticBST.random(300, seed=B)):
        for h in range(slab_height(B)):
            f = build_slabs(T, B, h)
            rep = f.validate()
            assert rep, rep.problem
            assert sorted(f.assignment) == T.keys


def test_validate_catches_bad_blocks():
    T = StaticBST.perfect(3)
    f = BlockMapping.from_function(T, 4, lambda k: 0 if k in (1, 3) else k)
    assert not f.validate()
    f = BlockMapping.from_function(T, 3, lambda k: 0)
    assert not f.validate()


def test_static_btree_shape():
    T = StaticBST.perfect(6)
    f = build_slabs(T, 8, 1)
    tree = f.to_btree()
    assert validate_model(tree)
    assert tree.inorder() == T.keys


def test_walk_inside_root_block():
    T = StaticBST.perfect(6)
    f = build_slabs(T, 64, 5)
    root = T.root
    kid = T.left[root]
    assert walk_cost(f, Walk([root, kid, root, T.right[root]])) == 1


@pytest.mark.parametrize("B", (4, 8, 16, 64))
def test_root_to_leaf_cost(B):
    height = 11
    T = StaticBST.perfect(height)
    s = slab_height(B)
    D = height - 1
    w = Walk.to_node(T, T.leaves()[5])
    assert w.steps == D
    for h in range(s):
        cost = walk_cost(build_slabs(T, B, h), w)
        assert cost in (math.ceil(D / s), math.ceil(D / s) + 1)


def test_illegal_walks():
    T = StaticBST.perfect(3)
    with pytest.raises(IllegalWalk):
        Walk([2, 1]).check(T)
    with pytest.raises(IllegalWalk):
        walk_cost(build_slabs(T, 4, 0), Walk([4, 1]))
    with pytest.raises(IllegalWalk):
        walk_cost(build_slabs(T, 4, 0), Walk([4, 99]))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.sampled_from([3, 4, 8, 16, 64]), st.integers(0, 80), st.integers(0, 10**6))
def test_exact_expectation_matches_per_mapping_sum(height, B, k, seed):
    T = StaticBST.perfect(height)
    w = Walk.random(T, k, random.Random(seed))
    assert exact_expected_cost(T, B, w) == expected_cost_by_mapping(T, B, w)


def test_expectation_is_k_over_s_away_from_edges():
    # every edge below the root is cut by exactly one root-block height
    T = StaticBST.perfect(12)
    w = Walk.to_node(T, T.leaves()[0])
    for B in (16, 64):
        s = slab_height(B)
        assert exact_expected_cost(T, B, w) == 1 + Fraction(w.steps, s)


def test_sampled_expectation_near_exact():
    rng = random.Random(3)
    T = StaticBST.perfect(10)
    B = 16
    s = slab_height(B)
    total = 0
    trials = 2000
    k = 40
    for _ in range(trials):
        w = Walk.random(T, k, rng)
        total += walk_cost(build_randomized(T, B, rng), w)
    assert abs(total / trials - (1 + k / s)) <= 0.1 * (1 + k / s)


@pytest.mark.parametrize("height", (6, 8, 10))
def test_adversary_costs(height):
    T = StaticBST.perfect(height)
    f = build_slabs(T, 16, 0)
    res = adversary_sequence(f)
    b = res.visited_blocks
    assert res.bst_cost == len(res.sequence) == 2 * b - 1
    assert res.visited_blocks == res.leaf_blocks
    assert res.btree_cost >= b
    assert res.ratio >= 0.2
    res.walk.check(T)
    assert res.sequence == sorted(res.sequence)


def test_adversary_against_singletons_is_full_inorder():
    T = StaticBST.perfect(4)
    res = adversary_sequence(BlockMapping.singletons(T))
    assert res.sequence == T.keys
    assert res.bst_cost == 15


def test_adversary_accepts_plain_function():
    T = StaticBST.perfect(6)
    f = build_slabs(T, 8, 2)
    res = adversary_sequence(f.assignment.__getitem__, T)
    assert res.btree_cost == adversary_sequence(f).btree_cost
