"""
Message envelopes and the simulated halo exchange.

An :class:`Envelope` lists every message that has to travel between ranks
for one stencil, plus the copies between subgrids that live on the same
rank.  Every message is derived twice, once from the sender's view and once
from the receiver's, and the two derivations must agree.

Each local subgrid owns one array inflated by the stencil reach on every
side; its ghost strips are filled by :func:`exchange` (points inside the
domain) and :func:`local_boundary_fill` (points outside the domain).
"""
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from .errors import ConsistencyError
from .grid import Box, Triple
from .lex import LexLayout, lex_dependent_region
from .sfc import SfcLayout, sfc_dependent_region
from .stencil import ghost_width


class Role(Enum):
    SEND_FROM = "send_from"
    RECEIVE_INTO = "receive_into"


@dataclass(frozen=True)
class RegionBox:
    lo: Triple
    hi: Triple
    subgrid: int
    role: Role

    @property
    def count(self):
        return Box(self.lo, self.hi).size


@dataclass(frozen=True, order=True)
class Message:
    """One halo message: ``box`` is read from ``src_subgrid`` and written into the ghost strip of ``dst_subgrid``.

    Field order is the canonical sort order of an envelope.
    """

    src: int
    dst: int
    src_subgrid: int
    direction: Triple
    dst_subgrid: int
    box: Box

    @property
    def count(self):
        return self.box.size

    @property
    def src_region(self):
        return RegionBox(self.box.lo, self.box.hi, self.src_subgrid, Role.SEND_FROM)

    @property
    def dst_region(self):
        return RegionBox(self.box.lo, self.box.hi, self.dst_subgrid, Role.RECEIVE_INTO)

    def to_dict(self):
        return {
            "src": self.src,
            "dst": self.dst,
            "src_subgrid": self.src_subgrid,
            "dst_subgrid": self.dst_subgrid,
            "direction": list(self.direction),
            "lo": list(self.box.lo),
            "hi": list(self.box.hi),
            "count": self.count,
        }


@dataclass(frozen=True)
class Envelope:
    nranks: int
    stencil: object
    messages: Tuple[Message, ...]
    local_copies: Tuple[Message, ...]
    send_lists: Dict[int, Tuple[int, ...]] = field(repr=False)
    recv_lists: Dict[int, Tuple[int, ...]] = field(repr=False)

    def sends(self, rank):
        return [self.messages[i] for i in self.send_lists.get(rank, ())]

    def receives(self, rank):
        return [self.messages[i] for i in self.recv_lists.get(rank, ())]

    def to_dict(self, rank=None):
        """Canonical document: ``nranks``, ``stencil``, ``messages``, ``local_copies``.

        Messages keep envelope order and the key order of :meth:`Message.to_dict`.
        With ``rank`` only messages and copies touching that rank are kept.
        """
        def keep(msg):
            return rank is None or rank in (msg.src, msg.dst)
        return {
            "nranks": self.nranks,
            "stencil": self.stencil.name or [list(d) for d in self.stencil.sorted_offsets()],
            "messages": [m.to_dict() for m in self.messages if keep(m)],
            "local_copies": [m.to_dict() for m in self.local_copies if keep(m)],
        }

    def to_json(self, rank=None):
        return json.dumps(self.to_dict(rank), indent=1) + "\n"


def dependent_region(layout, stencil):
    if isinstance(layout, LexLayout):
        return lex_dependent_region(layout, stencil)
    if isinstance(layout, SfcLayout):
        return sfc_dependent_region(layout, stencil)
    raise TypeError(f"unsupported layout type {type(layout).__name__}")


def _negate(direction):
    return tuple(-d for d in direction)


def _check_layouts(layouts):
    if not layouts:
        raise ConsistencyError("no layouts given")
    first = layouts[0]
    for r, layout in enumerate(layouts):
        if layout.rank != r:
            raise ConsistencyError(f"layout at position {r} belongs to rank {layout.rank}")
        if type(layout) is not type(first) or layout.grid != first.grid \
                or layout.nranks != len(layouts) or layout.pgrid != first.pgrid:
            raise ConsistencyError(f"layout of rank {r} does not match the global configuration")


def build_envelope(layouts, stencil):
    """Derive the complete message schedule for ``stencil`` from all ranks' layouts.

    ``layouts[r]`` must be rank ``r``'s layout.  Runs the dependent-region
    search once per rank (charged to each layout's ``setup_ops``).
    """
    _check_layouts(layouts)
    ghost_width(stencil)
    sent, expected, copies = [], [], []
    for layout in layouts:
        r = layout.rank
        for dep in dependent_region(layout, stencil):
            local, nb = dep.local, dep.neighbor
            if nb.owner == r:
                if dep.recv is not None:
                    copies.append(Message(r, r, nb.index, _negate(dep.direction),
                                          local.index, dep.recv))
                continue
            if dep.send is not None:
                sent.append(Message(r, nb.owner, local.index, dep.direction, nb.index, dep.send))
            if dep.recv is not None:
                expected.append(Message(nb.owner, r, nb.index, _negate(dep.direction),
                                        local.index, dep.recv))
    if Counter(sent) != Counter(expected):
        missing = set(expected) - set(sent)
        extra = set(sent) - set(expected)
        raise ConsistencyError(
            f"send and receive views disagree: {len(missing)} expected messages never sent, "
            f"{len(extra)} sent messages not expected")
    messages = tuple(sorted(sent))
    position = {m: i for i, m in enumerate(messages)}
    send_lists, recv_lists = {}, {}
    for i, m in enumerate(messages):
        send_lists.setdefault(m.src, []).append(i)
    for m in sorted(expected, key=lambda m: (m.dst, m.src, m.dst_subgrid, m.src_subgrid)):
        recv_lists.setdefault(m.dst, []).append(position[m])
    return Envelope(
        nranks=len(layouts),
        stencil=stencil,
        messages=messages,
        local_copies=tuple(sorted(copies)),
        send_lists={k: tuple(v) for k, v in send_lists.items()},
        recv_lists={k: tuple(v) for k, v in recv_lists.items()},
    )


class RankState:
    """Field arrays of one simulated rank, one inflated array per local subgrid."""

    def __init__(self, layout, reach, fields=None, step=0):
        self.layout = layout
        self.reach = tuple(reach)
        self.step = step
        self._slot = {s.index: i for i, s in enumerate(layout.locsubs)}
        if fields is None:
            fields = [np.full(tuple(e + 2 * w for e, w in zip(s.extents, self.reach)), np.nan)
                      for s in layout.locsubs]
        self.fields = list(fields)
        for s, arr in zip(layout.locsubs, self.fields):
            expect = tuple(e + 2 * w for e, w in zip(s.extents, self.reach))
            if arr.shape != expect:
                raise ConsistencyError(f"field of subgrid {s.index} has shape {arr.shape}, "
                                       f"expected {expect}")

    @property
    def rank(self):
        return self.layout.rank

    def subgrid(self, index):
        return self.layout.locsubs[self._slot[index]]

    def array(self, index):
        return self.fields[self._slot[index]]

    def view(self, index, box):
        """Writable view of the global ``box`` inside the inflated array of subgrid ``index``."""
        sub = self.subgrid(index)
        arr = self.fields[self._slot[index]]
        lo = [b - c + w for b, c, w in zip(box.lo, sub.corner, self.reach)]
        hi = [b - c + w for b, c, w in zip(box.hi, sub.corner, self.reach)]
        if any(l < 0 for l in lo) or any(h > s for h, s in zip(hi, arr.shape)):
            raise ConsistencyError(f"box {box} outside the inflated array of subgrid {index}")
        return arr[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]

    def interior(self, index):
        sub = self.subgrid(index)
        return self.view(index, sub.box)

    def coordinates(self, index):
        """Open-mesh global index arrays ``(x, y, z)`` matching the inflated array."""
        sub = self.subgrid(index)
        axes = [np.arange(c - w, c + e + w) for c, e, w in zip(sub.corner, sub.extents, self.reach)]
        return np.ix_(*axes)

    def copy(self):
        return RankState(self.layout, self.reach, [f.copy() for f in self.fields], self.step)


def make_states(layouts, stencil, init=None):
    """Allocate rank states; ghost strips start as NaN, interiors from ``init(x, y, z)``."""
    reach = ghost_width(stencil)
    states = [RankState(layout, reach) for layout in layouts]
    if init is not None:
        for state in states:
            for s in state.layout.locsubs:
                x, y, z = state.coordinates(s.index)
                values = np.broadcast_to(init(x, y, z), state.array(s.index).shape)
                w = state.reach
                state.interior(s.index)[...] = values[w[0]:values.shape[0] - w[0],
                                                      w[1]:values.shape[1] - w[1],
                                                      w[2]:values.shape[2] - w[2]]
    return states


def exchange(states, envelope, order=None):
    """Fill ghost strips from neighbor interiors.

    All payloads are captured before any write, so the result does not
    depend on ``order``, an optional delivery permutation of the combined
    list ``envelope.messages + envelope.local_copies``.
    """
    if len(states) != envelope.nranks:
        raise ConsistencyError(f"{len(states)} states for an envelope of {envelope.nranks} ranks")
    transfers = envelope.messages + envelope.local_copies
    payloads = [states[m.src].view(m.src_subgrid, m.box).copy() for m in transfers]
    if order is None:
        order = range(len(transfers))
    for i in order:
        m = transfers[i]
        target = states[m.dst].view(m.dst_subgrid, m.box)
        if target.shape != payloads[i].shape:
            raise ConsistencyError(f"payload shape {payloads[i].shape} does not match "
                                   f"receive region {target.shape} for {m}")
        target[...] = payloads[i]
    return states


def local_boundary_fill(state, boundary=0.0):
    """Set every ghost point outside the global domain from ``boundary``.

    ``boundary`` is a constant or a function of global index arrays ``(x, y, z)``.
    """
    n = state.layout.grid.n
    for s in state.layout.locsubs:
        x, y, z = state.coordinates(s.index)
        outside = (x < 0) | (x >= n[0]) | (y < 0) | (y >= n[1]) | (z < 0) | (z >= n[2])
        if not outside.any():
            continue
        arr = state.array(s.index)
        if callable(boundary):
            values = np.broadcast_to(np.asarray(boundary(x, y, z), dtype=np.float64), arr.shape)
            arr[outside] = values[outside]
        else:
            arr[outside] = float(boundary)
    return state
