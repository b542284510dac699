"""
Lexicographic one-subgrid-per-rank layout.

This is the baseline scheme: rank ``(pz*Py + py)*Px + px`` owns the single
subgrid at process-grid slot ``(px, py, pz)``, and every rank replicates
the metadata of all ``P`` subgrids in ``allsubs``.  Both the construction
and the dependent-region search loop over all of them, which is counted in
``setup_ops``.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .grid import AXES, AxisSplit, GridConfig, Locality, Subgrid, Triple, make_subgrid
from .stencil import Connectivity, Dependency, box_from_arrays, needed_boxes_many, relative_direction

BOUNDARY = None
"""Returned by :func:`lex_neighbor` for slots outside the process grid."""


def _check_pgrid(pgrid):
    pgrid = tuple(int(p) for p in pgrid)
    if len(pgrid) != 3 or any(p < 1 for p in pgrid):
        raise InvalidParameterError(f"process grid must be three positive counts, got {pgrid}")
    return pgrid


def lex_owner(pvec, pgrid):
    """Rank owning process-grid slot ``pvec``, x fastest, z slowest."""
    px, py, pz = pvec
    nx, ny, nz = pgrid
    if not (0 <= px < nx and 0 <= py < ny and 0 <= pz < nz):
        raise InvalidParameterError(f"slot {tuple(pvec)} outside process grid {tuple(pgrid)}")
    return (pz * ny + py) * nx + px


def lex_pvec(rank, pgrid):
    """Inverse of :func:`lex_owner`."""
    nx, ny, nz = pgrid
    if not 0 <= rank < nx * ny * nz:
        raise InvalidParameterError(f"rank {rank} outside process grid {tuple(pgrid)}")
    rest, px = divmod(rank, nx)
    pz, py = divmod(rest, ny)
    return (px, py, pz)


def lex_neighbor(pvec, offset, pgrid):
    """Rank owning the slot ``pvec + offset``, or :data:`BOUNDARY` when off the grid."""
    shifted = tuple(p + d for p, d in zip(pvec, offset))
    if any(not 0 <= s < n for s, n in zip(shifted, pgrid)):
        return BOUNDARY
    return lex_owner(shifted, pgrid)


class _SubgridTable:
    """All subgrids of one layout plus array copies of their boxes for vectorized scans."""

    def __init__(self, subgrids):
        self.subgrids = tuple(subgrids)
        self.lo = np.array([s.corner for s in self.subgrids], dtype=np.int64).reshape(-1, 3)
        self.hi = self.lo + np.array([s.extents for s in self.subgrids],
                                     dtype=np.int64).reshape(-1, 3)


@dataclass(eq=False)
class LexLayout:
    """One rank's view of the lexicographic layout.

    ``allsubs`` is the replicated array of every subgrid in rank order and
    ``locsubs`` holds just the rank's own.  ``setup_ops`` counts subgrid
    metadata visits and grows as setup routines run.
    """

    grid: GridConfig
    pgrid: Triple
    splits: Tuple[AxisSplit, AxisSplit, AxisSplit]
    rank: int
    table: _SubgridTable = field(repr=False)
    setup_ops: int = 0

    mode = "lex"
    connectivity = Connectivity.FULL

    @property
    def nranks(self):
        return len(self.table.subgrids)

    @property
    def allsubs(self):
        return self.table.subgrids

    @property
    def locsubs(self):
        return (self.table.subgrids[self.rank],)

    @property
    def ghosts(self):
        return ()

    @property
    def local(self):
        return self.locsubs[0]


def _lex_splits(grid, pgrid):
    splits = []
    for axis, (n, p) in enumerate(zip(grid.n, pgrid)):
        if p > n:
            raise ConfigurationError(
                f"P{AXES[axis]}={p} exceeds N{AXES[axis]}={n}: some subgrids would be empty",
                keys=(f"N{AXES[axis].upper()}", f"P{AXES[axis].upper()}"))
        splits.append(AxisSplit.from_parts(n, p))
    return tuple(splits)


def _check_machine(pgrid, nranks):
    total = pgrid[0] * pgrid[1] * pgrid[2]
    if nranks is not None and nranks != total:
        raise ConfigurationError(
            f"P = Px*Py*Pz = {pgrid[0]}*{pgrid[1]}*{pgrid[2]} = {total} must equal "
            f"the number of processes {nranks}", keys=("PX", "PY", "PZ", "RANKS"))
    return total


def _build_table(splits, pgrid):
    # one subgrid per rank, created in rank order
    subs = []
    for rank in range(pgrid[0] * pgrid[1] * pgrid[2]):
        pvec = lex_pvec(rank, pgrid)
        subs.append(make_subgrid(pvec, splits, owner=rank, locality=Locality.LOCAL, index=rank))
    return _SubgridTable(subs)


def build_lex_layout(grid, pgrid, rank, nranks=None):
    """Build the layout as seen by ``rank``.

    ``nranks`` is the size of the simulated machine; it defaults to the
    process-grid product and must equal it otherwise.
    """
    pgrid = _check_pgrid(pgrid)
    total = _check_machine(pgrid, nranks)
    if not 0 <= rank < total:
        raise ConfigurationError(f"rank {rank} outside [0, {total})", keys=("RANKS",))
    splits = _lex_splits(grid, pgrid)
    table = _build_table(splits, pgrid)
    return LexLayout(grid, pgrid, splits, rank, table, setup_ops=total)


def build_lex_layouts(grid, pgrid, nranks=None):
    """Build the layouts of all ranks.

    Every rank performs (and is charged for) the full ``P``-step creation
    loop, but the resulting immutable table is shared between the returned
    objects to keep memory bounded when simulating many ranks.
    """
    pgrid = _check_pgrid(pgrid)
    total = _check_machine(pgrid, nranks)
    splits = _lex_splits(grid, pgrid)
    table = _build_table(splits, pgrid)
    return [LexLayout(grid, pgrid, splits, r, table, setup_ops=total) for r in range(total)]


def lex_dependent_region(layout, stencil):
    """Find the neighbors of the local subgrid by scanning every entry of ``allsubs``.

    Returns a list of :class:`~meshdist.stencil.Dependency` sorted by the
    neighbor's rank.  Charges ``P`` visits to ``layout.setup_ops``.
    """
    table = layout.table
    local = layout.local
    layout.setup_ops += len(table.subgrids)
    rlo, rhi, rmask = needed_boxes_many(local.box, table.lo, table.hi, stencil)
    slo, shi, smask = _needed_by_many(local, table, stencil)
    hits = (rmask | smask)
    hits[layout.rank] = False
    deps = []
    for idx in np.flatnonzero(hits):
        neighbor = table.subgrids[idx]
        recv = box_from_arrays(rlo[idx], rhi[idx]) if rmask[idx] else None
        send = box_from_arrays(slo[idx], shi[idx]) if smask[idx] else None
        deps.append(Dependency(local, neighbor, recv, send,
                               relative_direction(local.box, neighbor.box)))
    return deps


def _needed_by_many(local, table, stencil):
    # points of the local box read by each other box: shift the others instead
    llo = np.asarray(local.box.lo, dtype=np.int64)
    lhi = np.asarray(local.box.hi, dtype=np.int64)
    n = len(table.subgrids)
    big = np.iinfo(np.int64).max
    lo = np.full((n, 3), big, dtype=np.int64)
    hi = np.full((n, 3), -big, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    for d in stencil.sorted_offsets():
        d = np.asarray(d, dtype=np.int64)
        plo = np.maximum(table.lo + d, llo)
        phi = np.minimum(table.hi + d, lhi)
        hit = np.all(phi > plo, axis=1)
        if not hit.any():
            continue
        lo[hit] = np.minimum(lo[hit], plo[hit])
        hi[hit] = np.maximum(hi[hit], phi[hit])
        mask |= hit
    return lo, hi, mask
