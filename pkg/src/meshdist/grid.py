"""
Global grid description and the distribution arithmetic shared by the
lexicographic and the space-filling-curve layouts.

Along every axis ``t`` a grid of ``N_t`` points is cut into ``P_t`` slabs.
Slab ``p`` starts at ``c(p) = p*m + min(p, l)`` and holds ``q(p)`` points,
``m + 1`` for the first ``l`` slabs and ``m`` for the rest.  The two layouts
differ only in which of ``P_t`` and ``m_t`` the user supplies::

    lex:  m, l = divmod(N, P)     0 <= l < P
    sfc:  P, l = divmod(N, m)     0 <= l < m   (valid only if l <= P)

All indices are plain Python integers, so configurations with billions of
points can be described without overflow.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

from .errors import InvalidParameterError

Triple = Tuple[int, int, int]

AXES = "xyz"


def _triple(values, name):
    values = tuple(values)
    if len(values) != 3:
        raise InvalidParameterError(f"{name} must have three components, got {values!r}")
    return values


@dataclass(frozen=True)
class GridConfig:
    """Global mesh extents plus metadata-only spacing and origin."""

    n: Triple
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        n = tuple(int(v) for v in _triple(self.n, "n"))
        spacing = tuple(float(v) for v in _triple(self.spacing, "spacing"))
        origin = tuple(float(v) for v in _triple(self.origin, "origin"))
        if any(v < 1 for v in n):
            raise InvalidParameterError(f"grid extents must be >= 1, got {n}")
        if any(not v > 0 for v in spacing):
            raise InvalidParameterError(f"grid spacing must be > 0, got {spacing}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def npoints(self):
        nx, ny, nz = self.n
        return nx * ny * nz


class Box(NamedTuple):
    """Half-open index box ``[lo, hi)`` in global grid coordinates."""

    lo: Triple
    hi: Triple

    @property
    def shape(self):
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def size(self):
        sx, sy, sz = self.shape
        return max(sx, 0) * max(sy, 0) * max(sz, 0)

    def is_empty(self):
        return any(h <= l for l, h in zip(self.lo, self.hi))

    def intersect(self, other):
        return Box(tuple(max(a, b) for a, b in zip(self.lo, other.lo)),
                   tuple(min(a, b) for a, b in zip(self.hi, other.hi)))

    def shift(self, offset):
        return Box(tuple(a + d for a, d in zip(self.lo, offset)),
                   tuple(a + d for a, d in zip(self.hi, offset)))

    def grow(self, width):
        return Box(tuple(a - w for a, w in zip(self.lo, width)),
                   tuple(a + w for a, w in zip(self.hi, width)))

    def hull(self, other):
        return Box(tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
                   tuple(max(a, b) for a, b in zip(self.hi, other.hi)))

    def contains(self, other):
        return all(a <= b for a, b in zip(self.lo, other.lo)) and \
            all(a >= b for a, b in zip(self.hi, other.hi))


def split_counts(n, parts):
    """Split ``n`` points among ``parts`` slabs.

    Returns
    -------
    (quotient, remainder) : tuple of int
        ``n // parts`` and ``n % parts``.
    """
    if parts < 1:
        raise InvalidParameterError(f"number of parts must be >= 1, got {parts}")
    if n < 1:
        raise InvalidParameterError(f"extent must be >= 1, got {n}")
    return divmod(n, parts)


def subgrid_corner(p, quotient, remainder):
    """First grid index of slab ``p``."""
    if p < 0:
        raise InvalidParameterError(f"slab index must be >= 0, got {p}")
    return p * quotient + min(p, remainder)


def subgrid_extent(p, quotient, remainder):
    """Number of points in slab ``p``: one extra for the first ``remainder`` slabs."""
    if p < 0:
        raise InvalidParameterError(f"slab index must be >= 0, got {p}")
    return quotient + 1 if p < remainder else quotient


def derive_parts(n, quotient):
    """Number of slabs and leftover points when every slab should hold ``quotient`` points."""
    if n < 1:
        raise InvalidParameterError(f"extent must be >= 1, got {n}")
    if quotient < 1 or quotient > n:
        raise InvalidParameterError(
            f"subgrid size must satisfy 1 <= m <= N, got m={quotient}, N={n}")
    return divmod(n, quotient)


@dataclass(frozen=True)
class CoverReport:
    """Outcome of :func:`check_cover` for one axis."""

    n: int
    quotient: int
    parts: int
    remainder: int
    total: int

    @property
    def ok(self):
        return self.total == self.n

    def __bool__(self):
        return self.ok

    @property
    def message(self):
        if self.ok:
            return f"N={self.n}, m={self.quotient}: ok"
        return (f"subgrids do not cover the axis for N={self.n}, m={self.quotient}: "
                f"{self.parts} subgrids hold {self.total} points, expected {self.n}")


def check_cover(n, quotient):
    """Check that slabs of size ``quotient`` (plus one for the leftovers) tile ``n`` points.

    The sum of all slab extents is ``P*m + min(P, l)``, which equals ``n``
    exactly when the remainder does not exceed the slab count.  Never raises
    for valid input; inspect the returned report instead.
    """
    parts, remainder = derive_parts(n, quotient)
    total = parts * quotient + min(parts, remainder)
    return CoverReport(n, quotient, parts, remainder, total)


@dataclass(frozen=True)
class AxisSplit:
    """Distribution of one axis: ``n == quotient * parts + remainder``."""

    parts: int
    quotient: int
    remainder: int
    n: int

    def __post_init__(self):
        if self.n != self.quotient * self.parts + self.remainder:
            raise InvalidParameterError(f"inconsistent axis split {self}")
        if self.parts < 1 or self.quotient < 0 or self.remainder < 0:
            raise InvalidParameterError(f"invalid axis split {self}")

    @classmethod
    def from_parts(cls, n, parts):
        quotient, remainder = split_counts(n, parts)
        return cls(parts, quotient, remainder, n)

    @classmethod
    def from_quotient(cls, n, quotient):
        parts, remainder = derive_parts(n, quotient)
        return cls(parts, quotient, remainder, n)

    @property
    def covers(self):
        return sum(self.extents()) == self.n

    def corner(self, p):
        return subgrid_corner(p, self.quotient, self.remainder)

    def extent(self, p):
        return subgrid_extent(p, self.quotient, self.remainder)

    def corners(self):
        return [self.corner(p) for p in range(self.parts)]

    def extents(self):
        return [self.extent(p) for p in range(self.parts)]


class Locality(Enum):
    LOCAL = "local"
    GHOST = "ghost"


@dataclass(frozen=True)
class Subgrid:
    """A box of grid points attached to one slot ``pvec`` of the process grid.

    ``index`` is the position of the subgrid in the layout's global order:
    the owner rank for the lexicographic layout, the curve index for the
    space-filling-curve layout.
    """

    pvec: Triple
    corner: Triple
    extents: Triple
    owner: int
    locality: Locality = Locality.LOCAL
    index: int = -1

    @property
    def box(self):
        return Box(self.corner, tuple(c + e for c, e in zip(self.corner, self.extents)))

    @property
    def npoints(self):
        ex, ey, ez = self.extents
        return ex * ey * ez

    def as_ghost(self):
        return Subgrid(self.pvec, self.corner, self.extents, self.owner, Locality.GHOST, self.index)


def make_subgrid(pvec, splits, owner, locality=Locality.LOCAL, index=-1):
    """Create the subgrid at process-grid slot ``pvec`` from per-axis splits."""
    pvec = tuple(int(p) for p in _triple(pvec, "pvec"))
    splits = _triple(splits, "splits")
    for axis, (p, s) in enumerate(zip(pvec, splits)):
        if not 0 <= p < s.parts:
            raise InvalidParameterError(
                f"slab index p_{AXES[axis]}={p} outside [0, {s.parts})")
    corner = tuple(s.corner(p) for p, s in zip(pvec, splits))
    extents = tuple(s.extent(p) for p, s in zip(pvec, splits))
    return Subgrid(pvec, corner, extents, owner, locality, index)
