from itertools import product

import numpy as np
import pytest

from meshdist.brick import BrickLayout
from meshdist.errors import ConfigurationError
from meshdist.grid import GridConfig, Locality
from meshdist.lex import build_lex_layouts
from meshdist.sfc import build_sfc_layout, build_sfc_layouts, compute_ghost, sfc_dependent_region
from meshdist.stencil import Connectivity, Stencil

from oracles import adjacency_matrix, curve_order, ghost_sets, owners_by_counts

MESH = GridConfig((10, 7, 1))


def test_unit_subgrids_single_per_rank():
    layout = build_sfc_layout(MESH, (3, 3, 1), 6, 0)
    assert layout.brick.trees == (3, 2, 1) and layout.brick.g == 1 and layout.brick.K == 6
    assert len(layout.locsubs) == 1
    e = layout.locsubs[0].extents
    assert e[0] in (3, 4) and e[1] in (3, 4) and e[2] == 1


def test_single_rank_owns_everything():
    layout = build_sfc_layout(MESH, (3, 3, 1), 1, 0)
    assert len(layout.locsubs) == 6 and layout.ghosts == ()


def test_two_ranks_face_ghosts():
    layout = build_sfc_layout(MESH, (3, 3, 1), 2, 0, Connectivity.FACES)
    assert len(layout.locsubs) == 3
    assert [s.pvec for s in layout.locsubs] == [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    # brute force: foreign slots sharing a face with a local slot
    local = {s.pvec for s in layout.locsubs}
    expect = sorted({(x, y + dy, 0) for (x, y, _) in local for dy in (-1, 1)
                     if 0 <= y + dy < 2} - local)
    assert sorted(s.pvec for s in layout.ghosts) == expect
    assert all(s.owner == 1 and s.locality is Locality.GHOST for s in layout.ghosts)
    other = build_sfc_layout(MESH, (3, 3, 1), 2, 1, Connectivity.FACES)
    assert [s.index for s in other.ghosts] == [0, 1, 2]


def test_cover_violation_names_pair():
    with pytest.raises(ConfigurationError) as info:
        build_sfc_layout(GridConfig((5, 7, 1)), (3, 3, 1), 2, 0)
    assert info.value.keys == ("NX", "MX")


def test_compute_ghost_examples():
    brick = BrickLayout.from_pgrid((4, 2, 1), 1)
    assert compute_ghost(brick, 0) == []
    brick = BrickLayout.from_pgrid((3, 3, 1), 9)
    ghosts = compute_ghost(brick, 4, Connectivity.FULL)
    assert len(ghosts) == 8
    assert [g.quadrant.global_idx for g in ghosts] == sorted(g.quadrant.global_idx for g in ghosts)
    assert {g.owner for g in ghosts} == {0, 1, 2, 3, 5, 6, 7, 8}


@pytest.mark.parametrize("pgrid", [(2, 2, 2), (4, 4, 2), (3, 5, 2), (4, 4, 4)])
@pytest.mark.parametrize("conn", list(Connectivity))
def test_compute_ghost_matches_oracle(pgrid, conn):
    K = pgrid[0] * pgrid[1] * pgrid[2]
    brick = BrickLayout.from_pgrid(pgrid, 1)
    order = curve_order(pgrid, brick.g)
    adj = adjacency_matrix(order, conn.value)
    for P in (1, 2, 3, K // 2 + 1, K):
        b = BrickLayout.from_pgrid(pgrid, P)
        expect = ghost_sets(order, owners_by_counts(K, P), P, conn.value, adj)
        for r in range(P):
            got = [g.quadrant.global_idx for g in compute_ghost(b, r, conn)]
            assert got == expect[r]


def _boxes(layouts):
    return sorted((s.corner, s.extents) for layout in layouts for s in layout.locsubs)


def test_geometry_equivalence_with_lex():
    for n in product((5, 7, 12), repeat=3):
        grid = GridConfig(n)
        for m in product(*[range(1, k + 1) for k in n]):
            layouts = None
            try:
                layouts = build_sfc_layouts(grid, m, 3)
            except ConfigurationError:
                continue
            pgrid = layouts[0].pgrid
            lex = build_lex_layouts(grid, pgrid)
            assert _boxes(layouts) == sorted((s.corner, s.extents) for s in lex[0].allsubs)


def test_setup_ops_independent_of_P():
    # fixed K/P = 1, growing P
    ops = []
    for side in (4, 8, 16, 32):
        grid = GridConfig((side * 3, side * 3, 6))
        layouts = build_sfc_layouts(grid, (3, 3, 3), side * side * 2)
        for layout in layouts:
            assert layout.setup_ops <= 1 * (len(layout.locsubs) + len(layout.ghosts))
        ops.append(max(l.setup_ops for l in layouts))
    assert max(ops) <= 27


def test_allsubs_only_local_and_ghost():
    layouts = build_sfc_layouts(GridConfig((16, 16, 8)), (2, 2, 2), 13)
    K = layouts[0].brick.K
    for layout in layouts:
        assert len(layout.allsubs) == len(layout.locsubs) + len(layout.ghosts) < K
        assert all(s.owner == layout.rank for s in layout.locsubs)
        assert all(s.owner != layout.rank for s in layout.ghosts)
        assert [s.index for s in layout.ghosts] == sorted(s.index for s in layout.ghosts)


def test_empty_ranks_allowed():
    layouts = build_sfc_layouts(GridConfig((4, 4, 1)), (2, 2, 1), 7)
    assert sum(len(l.locsubs) for l in layouts) == 4
    assert sum(1 for l in layouts if not l.locsubs) == 3
    assert all(l.ghosts == () for l in layouts if not l.locsubs)


def test_dependent_region_rejects_thin_subgrids():
    layout = build_sfc_layout(GridConfig((6, 6, 6)), (1, 2, 2), 2, 0)
    wide = Stencil(frozenset({(2, 0, 0), (-2, 0, 0)}))
    with pytest.raises(ConfigurationError):
        sfc_dependent_region(layout, wide)
    faces = build_sfc_layout(GridConfig((6, 6, 6)), (2, 2, 2), 2, 0, Connectivity.FACES)
    with pytest.raises(ConfigurationError):
        sfc_dependent_region(faces, Stencil.box27())
