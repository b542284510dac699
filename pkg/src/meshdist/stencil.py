"""Stencils, neighbor connectivity classes and dependent-region box algebra."""
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import FrozenSet

import numpy as np

from .errors import InvalidParameterError
from .grid import Box, Triple


class Connectivity(Enum):
    """Which neighbors of a box are adjacent: value is the max number of nonzero offset components."""

    FACES = 1
    EDGES = 2
    FULL = 3

    @property
    def count(self):
        return {1: 6, 2: 18, 3: 26}[self.value]

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        names = {"faces": cls.FACES, "6": cls.FACES, "edges": cls.EDGES, "18": cls.EDGES,
                 "full": cls.FULL, "26": cls.FULL}
        try:
            return names[str(value).lower()]
        except KeyError:
            raise InvalidParameterError(f"unknown connectivity {value!r}") from None

    def admits(self, direction):
        nonzero = sum(1 for d in direction if d)
        return 0 < nonzero <= self.value

    def directions(self):
        """All unit directions in ``{-1, 0, 1}^3`` adjacent under this class, in a fixed order."""
        return [d for d in product((-1, 0, 1), repeat=3) if self.admits(d)]

    def includes(self, other):
        return self.value >= other.value


@dataclass(frozen=True)
class Stencil:
    """Set of relative offsets that a point update reads."""

    offsets: FrozenSet[Triple]
    name: str = ""

    def __post_init__(self):
        offsets = frozenset(tuple(int(c) for c in d) for d in self.offsets)
        if any(len(d) != 3 for d in offsets):
            raise InvalidParameterError("stencil offsets must be triples")
        offsets = frozenset(d for d in offsets if d != (0, 0, 0))
        object.__setattr__(self, "offsets", offsets)

    @property
    def reach(self):
        if not self.offsets:
            return (0, 0, 0)
        return tuple(max(abs(d[axis]) for d in self.offsets) for axis in range(3))

    def sorted_offsets(self):
        return sorted(self.offsets)

    @classmethod
    def face7(cls):
        return cls(frozenset(d for d in product((-1, 0, 1), repeat=3)
                             if sum(map(abs, d)) == 1), "face7")

    @classmethod
    def edge19(cls):
        return cls(frozenset(d for d in product((-1, 0, 1), repeat=3)
                             if 1 <= sum(map(abs, d)) <= 2), "edge19")

    @classmethod
    def box27(cls):
        return cls(frozenset(d for d in product((-1, 0, 1), repeat=3)
                             if d != (0, 0, 0)), "box27")

    @classmethod
    def from_name(cls, name):
        builders = {"face7": cls.face7, "edge19": cls.edge19, "box27": cls.box27}
        try:
            return builders[name]()
        except KeyError:
            raise InvalidParameterError(
                f"unknown stencil {name!r}, expected one of {sorted(builders)}") from None


STENCIL_NAMES = ("face7", "edge19", "box27")


def ghost_width(stencil):
    """Width of the ghost strip needed on each axis."""
    if not stencil.offsets:
        raise InvalidParameterError("stencil has no offsets")
    return stencil.reach


def connectivity_of(stencil):
    """Smallest neighbor class containing every direction the stencil reaches."""
    worst = max((sum(1 for c in d if c) for d in stencil.offsets), default=1)
    return Connectivity(worst)


def needed_box(recv, send, stencil):
    """Bounding box of the points of ``send`` read by updates of points in ``recv``.

    Both arguments are :class:`Box` instances.  Returns ``None`` when the
    update of ``recv`` reads nothing from ``send``.
    """
    result = None
    for d in stencil.offsets:
        part = recv.shift(d).intersect(send)
        if part.is_empty():
            continue
        result = part if result is None else result.hull(part)
    return result


def needed_boxes_many(recv, send_lo, send_hi, stencil):
    """Vectorized :func:`needed_box` of one receiver box against many sender boxes.

    Returns ``(lo, hi, mask)`` where ``mask`` flags the senders that are read
    at all; ``lo``/``hi`` are only meaningful where ``mask`` is set.
    """
    send_lo = np.asarray(send_lo, dtype=np.int64)
    send_hi = np.asarray(send_hi, dtype=np.int64)
    n = send_lo.shape[0]
    big = np.iinfo(np.int64).max
    lo = np.full((n, 3), big, dtype=np.int64)
    hi = np.full((n, 3), -big, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    rlo = np.asarray(recv.lo, dtype=np.int64)
    rhi = np.asarray(recv.hi, dtype=np.int64)
    for d in stencil.sorted_offsets():
        d = np.asarray(d, dtype=np.int64)
        plo = np.maximum(send_lo, rlo + d)
        phi = np.minimum(send_hi, rhi + d)
        hit = np.all(phi > plo, axis=1)
        if not hit.any():
            continue
        lo[hit] = np.minimum(lo[hit], plo[hit])
        hi[hit] = np.maximum(hi[hit], phi[hit])
        mask |= hit
    return lo, hi, mask


def relative_direction(a, b):
    """Per-axis sign of the position of box ``b`` relative to box ``a``.

    Boxes of one tensor layout are either aligned on an axis (0), or ``b``
    lies entirely below (-1) or above (+1) ``a``.
    """
    out = []
    for alo, ahi, blo, bhi in zip(a.lo, a.hi, b.lo, b.hi):
        if bhi <= alo:
            out.append(-1)
        elif blo >= ahi:
            out.append(1)
        else:
            out.append(0)
    return tuple(out)


def box_from_arrays(lo, hi):
    return Box(tuple(int(v) for v in lo), tuple(int(v) for v in hi))


@dataclass(frozen=True)
class Dependency:
    """Data coupling between a local subgrid and one neighbor subgrid.

    ``recv`` holds the points of ``neighbor`` read by updates in ``local``,
    ``send`` the points of ``local`` read by updates in ``neighbor``; either
    is ``None`` when the stencil is one-sided in that direction.
    """

    local: object
    neighbor: object
    recv: object
    send: object
    direction: Triple


def dependency(local, neighbor, stencil):
    recv = needed_box(local.box, neighbor.box, stencil)
    send = needed_box(neighbor.box, local.box, stencil)
    if recv is None and send is None:
        return None
    return Dependency(local, neighbor, recv, send, relative_direction(local.box, neighbor.box))
