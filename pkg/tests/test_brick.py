from itertools import product

import pytest
from hypothesis import given, strategies as st

from meshdist.brick import (BrickLayout, Quadrant, brick_params, global_sfc_index, morton_decode,
                            morton_encode, owner_of_quadrant, quad_to_pvec, uniform_partition)
from meshdist.errors import InvalidParameterError
from meshdist.harness import face_components

from oracles import curve_order, zorder_cells


def test_brick_params_examples():
    assert brick_params((3, 2, 1)) == (1, 0, (3, 2, 1))
    g, k0, dims = brick_params((4, 4, 2))
    assert (g, k0, dims) == (2, 1, (2, 2, 1))
    # refined brick holds exactly Px*Py*Pz quadrants
    assert dims[0] * dims[1] * dims[2] * g ** 3 == 4 * 4 * 2
    assert brick_params((1, 1, 1)) == (1, 0, (1, 1, 1))
    assert brick_params((8, 16, 24)) == (8, 3, (1, 2, 3))


@given(st.tuples(st.integers(1, 64), st.integers(1, 64), st.integers(1, 64)))
def test_brick_params_quadrant_count(pgrid):
    g, k0, dims = brick_params(pgrid)
    assert g == 2 ** k0
    assert all(p % g == 0 for p in pgrid)
    assert any((p // g) % 2 for p in pgrid)
    assert dims[0] * dims[1] * dims[2] * g ** 3 == pgrid[0] * pgrid[1] * pgrid[2]


def test_morton_examples():
    assert morton_encode((0, 0, 0), 3) == 0
    assert morton_encode((1, 0), 1, dims=2) == 1
    assert morton_encode((0, 1), 1, dims=2) == 2
    assert morton_encode((1, 1), 1, dims=2) == 3
    assert morton_encode((1, 1, 1), 1, dims=3) == 7
    assert morton_decode(0, 2) == (0, 0, 0)
    assert morton_decode(2, 1, dims=2) == (0, 1)
    assert morton_decode(6, 2, dims=2) == (2, 1)


def test_morton_matches_recursive_zorder():
    for dims, top in ((2, 4), (3, 3)):
        for level in range(top + 1):
            cells = zorder_cells(level, dims)
            assert [morton_encode(c, level, dims) for c in cells] == list(range(len(cells)))
            assert [morton_decode(i, level, dims) for i in range(len(cells))] == cells


def test_morton_range_errors():
    with pytest.raises(InvalidParameterError):
        morton_encode((2, 0), 1, dims=2)
    with pytest.raises(InvalidParameterError):
        morton_decode(4, 1, dims=2)


def test_global_sfc_index_examples():
    brick = BrickLayout.from_pgrid((3, 2, 1), 6)
    assert global_sfc_index(0, 0, brick) == 0
    assert global_sfc_index((1, 1, 0), 0, brick) == 4
    brick = BrickLayout.from_pgrid((4, 4, 1), 3)
    assert brick.g == 1 and brick.ntrees == 16
    assert brick.index_of_pvec((3, 3, 0)) == 15
    with pytest.raises(InvalidParameterError):
        global_sfc_index(6, 0, BrickLayout.from_pgrid((3, 2, 1), 6))


@pytest.mark.parametrize("pgrid", [(3, 2, 1), (4, 4, 2), (4, 4, 4), (6, 2, 4), (8, 4, 2), (16, 8, 8)])
def test_curve_order_matches_enumeration(pgrid):
    brick = BrickLayout.from_pgrid(pgrid, 1)
    order = curve_order(pgrid, brick.g)
    assert [brick.quadrant(i).pvec for i in range(brick.K)] == order
    assert all(brick.index_of_pvec(p) == i for i, p in enumerate(order))
    assert sorted(order) == sorted(product(*map(range, pgrid)))


def test_uniform_partition_examples():
    assert uniform_partition(16, 3).offsets == (0, 5, 10, 16)
    assert uniform_partition(6, 6).offsets == tuple(range(7))
    assert uniform_partition(6, 2).offsets == (0, 3, 6)
    part = uniform_partition(3, 5)
    assert part.counts() == [0, 1, 0, 1, 1]
    assert part.empty_ranks == (0, 2)


def test_owner_of_quadrant():
    assert owner_of_quadrant(0, (0, 5, 10, 16)) == 0
    assert owner_of_quadrant(10, (0, 5, 10, 16)) == 2
    assert owner_of_quadrant(3, (0, 3, 6)) == 1
    assert owner_of_quadrant(1, uniform_partition(3, 5).offsets) == 3
    with pytest.raises(InvalidParameterError):
        owner_of_quadrant(16, (0, 5, 10, 16))


@given(st.integers(1, 5000), st.integers(1, 5000))
def test_partition_balance(K, P):
    part = uniform_partition(K, P)
    counts = part.counts()
    assert part.offsets[0] == 0 and part.offsets[-1] == K
    assert max(counts) - min(counts) <= 1
    assert set(counts) <= {K // P, -(-K // P)}


def test_quad_to_pvec_examples():
    brick = BrickLayout.from_pgrid((4, 4, 2), 1)
    assert quad_to_pvec(Quadrant(0, (0, 0, 0), 0, None), brick) == (0, 0, 0)
    assert quad_to_pvec(Quadrant(1, (1, 1, 0), -1, None), brick) == (3, 1, 0)
    brick = BrickLayout.from_pgrid((3, 2, 1), 6)
    assert quad_to_pvec(Quadrant(brick.tree_index((2, 1, 0)), (0, 0, 0), -1, None), brick) == (2, 1, 0)


def test_adjacent_curve_steps_within_tree():
    # consecutive positions inside one z-order tree stay within one level-sized block jump
    for level in range(1, 5):
        brick = BrickLayout((1, 1, 1), level, 1, dim=2)
        for i in range(brick.K - 1):
            a, b = brick.quadrant(i).pvec, brick.quadrant(i + 1).pvec
            if i % 4 != 3:
                assert max(abs(x - y) for x, y in zip(a, b)) == 1


def test_2d_components_small():
    for level in range(3):
        brick = BrickLayout((1, 1, 1), level, 1, dim=2)
        for P in range(1, brick.K + 1):
            b = BrickLayout((1, 1, 1), level, P, dim=2)
            for r in range(P):
                pv = [b.quadrant(i).pvec for i in b.local_range(r)]
                assert face_components(pv) <= 2
