"""
Forest-of-octrees brick, Morton ordering and uniform curve partition.

A process grid of ``Px x Py x Pz`` slots is represented as a brick of
``Px/g x Py/g x Pz/g`` trees, each uniformly refined ``k0`` times, where
``g = 2**k0`` is the largest power of two dividing ``gcd(Px, Py, Pz)``.
Quadrants are ordered tree by tree (trees x fastest), and by Morton index
inside a tree, with the x bit least significant in every bit plane::

    level 1, 2D            level 2, 2D (first two rows)
    +---+---+              +---+---+---+---+
    | 2 | 3 |              | 2 | 3 | 6 | 7 |
    +---+---+              +---+---+---+---+
    | 0 | 1 |              | 0 | 1 | 4 | 5 |
    +---+---+              +---+---+---+---+
"""
import bisect
from dataclasses import dataclass
from math import gcd
from typing import Tuple

from .errors import InvalidParameterError
from .grid import Triple


def brick_params(pgrid):
    """Quadrant multiplier ``g``, refinement level ``k0`` and tree counts for a process grid."""
    px, py, pz = (int(p) for p in pgrid)
    if min(px, py, pz) < 1:
        raise InvalidParameterError(f"process grid must be positive, got {tuple(pgrid)}")
    common = gcd(gcd(px, py), pz)
    g = common & -common
    k0 = g.bit_length() - 1
    return g, k0, (px // g, py // g, pz // g)


def morton_encode(coords, level, dims=3):
    """Interleave coordinate bits into a within-tree Morton index."""
    if dims not in (2, 3):
        raise InvalidParameterError(f"dims must be 2 or 3, got {dims}")
    coords = tuple(int(c) for c in coords)
    if len(coords) == 3 and dims == 2:
        if coords[2] != 0:
            raise InvalidParameterError(f"2D coordinates must have z == 0, got {coords}")
        coords = coords[:2]
    if len(coords) != dims:
        raise InvalidParameterError(f"expected {dims} coordinates, got {coords}")
    side = 1 << level
    if any(not 0 <= c < side for c in coords):
        raise InvalidParameterError(f"coordinates {coords} outside [0, {side}) at level {level}")
    index = 0
    for bit in range(level):
        for axis, c in enumerate(coords):
            index |= ((c >> bit) & 1) << (dims * bit + axis)
    return index


def morton_decode(index, level, dims=3):
    """Inverse of :func:`morton_encode`; returns a tuple of ``dims`` coordinates."""
    if dims not in (2, 3):
        raise InvalidParameterError(f"dims must be 2 or 3, got {dims}")
    if not 0 <= index < 1 << (dims * level):
        raise InvalidParameterError(f"Morton index {index} outside [0, 2**{dims * level})")
    coords = [0] * dims
    for bit in range(level):
        for axis in range(dims):
            coords[axis] |= ((index >> (dims * bit + axis)) & 1) << bit
    return tuple(coords)


@dataclass(frozen=True)
class Partition:
    """Contiguous split of ``K`` curve positions among ranks: rank ``r`` owns ``[offsets[r], offsets[r+1])``."""

    offsets: Tuple[int, ...]

    @property
    def nranks(self):
        return len(self.offsets) - 1

    @property
    def total(self):
        return self.offsets[-1]

    def count(self, rank):
        return self.offsets[rank + 1] - self.offsets[rank]

    def counts(self):
        return [b - a for a, b in zip(self.offsets, self.offsets[1:])]

    @property
    def empty_ranks(self):
        return tuple(r for r in range(self.nranks) if self.count(r) == 0)

    def owner(self, global_idx):
        return owner_of_quadrant(global_idx, self.offsets)


def uniform_partition(K, P):
    """Offsets ``floor(r*K/P)`` for ``r = 0..P``; counts differ by at most one."""
    if K < 1 or P < 1:
        raise InvalidParameterError(f"need K >= 1 and P >= 1, got K={K}, P={P}")
    return Partition(tuple(r * K // P for r in range(P + 1)))


def owner_of_quadrant(global_idx, offsets):
    """Rank whose offset range contains ``global_idx`` (binary search, skips empty ranks)."""
    if not 0 <= global_idx < offsets[-1]:
        raise InvalidParameterError(f"quadrant index {global_idx} outside [0, {offsets[-1]})")
    return bisect.bisect_right(offsets, global_idx) - 1


@dataclass(frozen=True)
class Quadrant:
    tree: int
    coords: Triple
    global_idx: int
    pvec: Triple


@dataclass(frozen=True)
class BrickLayout:
    """Uniformly refined brick of trees, partitioned along the curve among ``nranks`` ranks."""

    trees: Triple
    level: int
    nranks: int
    dim: int = 3

    def __post_init__(self):
        trees = tuple(int(t) for t in self.trees)
        if len(trees) != 3 or min(trees) < 1:
            raise InvalidParameterError(f"tree counts must be three positive ints, got {trees}")
        if self.dim not in (2, 3):
            raise InvalidParameterError(f"dim must be 2 or 3, got {self.dim}")
        if self.dim == 2 and trees[2] != 1:
            raise InvalidParameterError("a 2D brick has a single tree layer in z")
        if self.level < 0 or self.nranks < 1:
            raise InvalidParameterError("level must be >= 0 and nranks >= 1")
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "partition", uniform_partition(self.K, self.nranks))

    @classmethod
    def from_pgrid(cls, pgrid, nranks):
        """Brick whose quadrants correspond one-to-one to the slots of ``pgrid``."""
        _, k0, trees = brick_params(pgrid)
        return cls(trees, k0, nranks)

    @property
    def g(self):
        return 1 << self.level

    @property
    def pgrid(self):
        g = self.g
        return (self.trees[0] * g, self.trees[1] * g, self.trees[2] * (g if self.dim == 3 else 1))

    @property
    def ntrees(self):
        return self.trees[0] * self.trees[1] * self.trees[2]

    @property
    def quadrants_per_tree(self):
        return self.g ** self.dim

    @property
    def K(self):
        return self.ntrees * self.quadrants_per_tree

    @property
    def offsets(self):
        return self.partition.offsets

    def tree_index(self, tree):
        tx, ty, tz = tree
        nx, ny, nz = self.trees
        if not (0 <= tx < nx and 0 <= ty < ny and 0 <= tz < nz):
            raise InvalidParameterError(f"tree {tuple(tree)} outside brick {self.trees}")
        return (tz * ny + ty) * nx + tx

    def tree_coords(self, tree_idx):
        if not 0 <= tree_idx < self.ntrees:
            raise InvalidParameterError(f"tree index {tree_idx} outside [0, {self.ntrees})")
        rest, tx = divmod(tree_idx, self.trees[0])
        tz, ty = divmod(rest, self.trees[1])
        return (tx, ty, tz)

    def quadrant(self, global_idx):
        if not 0 <= global_idx < self.K:
            raise InvalidParameterError(f"quadrant index {global_idx} outside [0, {self.K})")
        tree, within = divmod(global_idx, self.quadrants_per_tree)
        coords = morton_decode(within, self.level, self.dim)
        if self.dim == 2:
            coords = coords + (0,)
        origin = self.tree_coords(tree)
        pvec = tuple(t * self.g + c for t, c in zip(origin, coords))
        return Quadrant(tree, coords, global_idx, pvec)

    def index_of_pvec(self, pvec):
        """Global curve index of the quadrant sitting at process-grid slot ``pvec``."""
        g = self.g
        tree = tuple(p // g for p in pvec[:self.dim]) + ((pvec[2],) if self.dim == 2 else ())
        coords = tuple(p % g for p in pvec[:self.dim])
        if any(not 0 <= p < n for p, n in zip(pvec, self.pgrid)):
            raise InvalidParameterError(f"slot {tuple(pvec)} outside {self.pgrid}")
        return global_sfc_index(self.tree_index(tree), morton_encode(coords, self.level, self.dim), self)

    def owner(self, global_idx):
        return owner_of_quadrant(global_idx, self.offsets)

    def local_range(self, rank):
        if not 0 <= rank < self.nranks:
            raise InvalidParameterError(f"rank {rank} outside [0, {self.nranks})")
        return range(self.offsets[rank], self.offsets[rank + 1])


def global_sfc_index(tree, within, brick):
    """Position along the curve of quadrant ``within`` (Morton index) of tree ``tree``.

    ``tree`` is a tree index or a tree coordinate triple.
    """
    if not isinstance(tree, int):
        tree = brick.tree_index(tree)
    if not 0 <= tree < brick.ntrees:
        raise InvalidParameterError(f"tree index {tree} outside [0, {brick.ntrees})")
    if not 0 <= within < brick.quadrants_per_tree:
        raise InvalidParameterError(
            f"within-tree index {within} outside [0, {brick.quadrants_per_tree})")
    return tree * brick.quadrants_per_tree + within


def quad_to_pvec(quad, brick):
    """Process-grid slot of a quadrant: tree origin scaled by ``g`` plus in-tree coordinates."""
    g = brick.g
    tree = brick.tree_coords(quad.tree)
    return tuple(t * g + c for t, c in zip(tree, quad.coords))
