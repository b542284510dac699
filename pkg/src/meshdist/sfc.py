"""
Space-filling-curve layout: subgrids attached to the quadrants of a brick.

Each rank only materializes metadata for its own quadrants (``locsubs``)
and the off-rank quadrants adjacent to them (``ghosts``).  Nothing in here
loops over all ``P`` ranks or all ``K`` quadrants.
"""
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Tuple

from .brick import BrickLayout, Quadrant
from .errors import ConfigurationError, ConsistencyError, InvalidParameterError
from .grid import AXES, AxisSplit, GridConfig, Locality, Subgrid, Triple, check_cover, make_subgrid
from .stencil import Connectivity, connectivity_of, dependency


class Ghost(NamedTuple):
    quadrant: Quadrant
    owner: int


def compute_ghost(brick, rank, connectivity=Connectivity.FULL):
    """Off-rank quadrants adjacent to the local partition of ``rank``, in curve order."""
    connectivity = Connectivity.parse(connectivity)
    local = brick.local_range(rank)
    pgrid = brick.pgrid
    directions = connectivity.directions()
    found = set()
    for idx in local:
        pvec = brick.quadrant(idx).pvec
        for d in directions:
            nb = (pvec[0] + d[0], pvec[1] + d[1], pvec[2] + d[2])
            if not (0 <= nb[0] < pgrid[0] and 0 <= nb[1] < pgrid[1] and 0 <= nb[2] < pgrid[2]):
                continue
            j = brick.index_of_pvec(nb)
            if j not in local:
                found.add(j)
    return [Ghost(brick.quadrant(j), brick.owner(j)) for j in sorted(found)]


def sfc_splits(grid, m):
    """Per-axis splits for subgrids of ``m`` points; raises on any cover violation."""
    m = tuple(int(v) for v in m)
    if len(m) != 3:
        raise ConfigurationError(f"subgrid size must have three components, got {m}")
    splits = []
    for axis, (n, q) in enumerate(zip(grid.n, m)):
        keys = (f"N{AXES[axis].upper()}", f"M{AXES[axis].upper()}")
        try:
            report = check_cover(n, q)
        except InvalidParameterError as exc:
            raise ConfigurationError(f"({keys[0]}, {keys[1]}) = ({n}, {q}): {exc}", keys) from exc
        if not report.ok:
            raise ConfigurationError(f"({keys[0]}, {keys[1]}) = ({n}, {q}): {report.message}", keys)
        splits.append(AxisSplit.from_quotient(n, q))
    return tuple(splits)


@dataclass(eq=False)
class SfcLayout:
    """One rank's view of the curve-ordered layout."""

    grid: GridConfig
    m: Triple
    splits: Tuple[AxisSplit, AxisSplit, AxisSplit]
    brick: BrickLayout
    rank: int
    connectivity: Connectivity
    locsubs: Tuple[Subgrid, ...]
    ghosts: Tuple[Subgrid, ...]
    setup_ops: int = 0
    _by_pvec: Dict[Triple, Subgrid] = field(default=None, repr=False)

    mode = "sfc"

    def __post_init__(self):
        self._by_pvec = {s.pvec: s for s in self.allsubs}

    @property
    def nranks(self):
        return self.brick.nranks

    @property
    def pgrid(self):
        return self.brick.pgrid

    @property
    def allsubs(self):
        return self.locsubs + self.ghosts

    def lookup(self, pvec):
        """Local or ghost subgrid at slot ``pvec``, ``None`` if this rank does not know it."""
        return self._by_pvec.get(tuple(pvec))


def _attach(brick, splits, rank, connectivity):
    ops = 0
    locsubs = []
    for idx in brick.local_range(rank):
        quad = brick.quadrant(idx)
        locsubs.append(make_subgrid(quad.pvec, splits, rank, Locality.LOCAL, idx))
        ops += 1
    ghosts = []
    for quad, owner in compute_ghost(brick, rank, connectivity):
        ghosts.append(make_subgrid(quad.pvec, splits, owner, Locality.GHOST, quad.global_idx))
        ops += 1
    return tuple(locsubs), tuple(ghosts), ops


def _validate(grid, m, nranks, connectivity):
    if nranks < 1:
        raise ConfigurationError(f"number of processes must be >= 1, got {nranks}", ("RANKS",))
    splits = sfc_splits(grid, m)
    pgrid = tuple(s.parts for s in splits)
    brick = BrickLayout.from_pgrid(pgrid, nranks)
    return splits, brick, Connectivity.parse(connectivity)


def build_sfc_layout(grid, m, nranks, rank, connectivity=Connectivity.FULL):
    """Build the layout seen by ``rank`` for subgrids of nominal size ``m``."""
    splits, brick, connectivity = _validate(grid, m, nranks, connectivity)
    if not 0 <= rank < nranks:
        raise ConfigurationError(f"rank {rank} outside [0, {nranks})", ("RANKS",))
    locsubs, ghosts, ops = _attach(brick, splits, rank, connectivity)
    return SfcLayout(grid, tuple(m), splits, brick, rank, connectivity, locsubs, ghosts, ops)


def build_sfc_layouts(grid, m, nranks, connectivity=Connectivity.FULL):
    """Layouts of all ranks; each is built independently from the shared immutable brick."""
    splits, brick, connectivity = _validate(grid, m, nranks, connectivity)
    layouts = []
    for rank in range(nranks):
        locsubs, ghosts, ops = _attach(brick, splits, rank, connectivity)
        layouts.append(SfcLayout(grid, tuple(m), splits, brick, rank, connectivity,
                                 locsubs, ghosts, ops))
    return layouts


def sfc_dependent_region(layout, stencil):
    """Neighbors of every local subgrid, found through the ghost layer only.

    Neighbors on the same rank are included; the caller separates local
    copies from messages.  Charges one visit per local subgrid plus one per
    neighbor looked up.
    """
    needed = connectivity_of(stencil)
    if not layout.connectivity.includes(needed):
        raise ConfigurationError(
            f"ghost layer built with {layout.connectivity.name} connectivity cannot serve a "
            f"stencil needing {needed.name}")
    for axis, (r, q) in enumerate(zip(stencil.reach, layout.m)):
        if r > q:
            raise ConfigurationError(
                f"stencil reach {r} exceeds subgrid size M{AXES[axis].upper()}={q}",
                (f"M{AXES[axis].upper()}", "STENCIL"))
    directions = needed.directions()
    pgrid = layout.pgrid
    deps = []
    for local in layout.locsubs:
        layout.setup_ops += 1
        for d in directions:
            slot = (local.pvec[0] + d[0], local.pvec[1] + d[1], local.pvec[2] + d[2])
            if any(not 0 <= s < n for s, n in zip(slot, pgrid)):
                continue
            nb = layout.lookup(slot)
            if nb is None:
                raise ConsistencyError(f"rank {layout.rank} has no metadata for neighbor slot {slot}")
            layout.setup_ops += 1
            dep = dependency(local, nb, stencil)
            if dep is not None:
                deps.append(dep)
    deps.sort(key=lambda dep: (dep.local.index, dep.neighbor.index))
    return deps
