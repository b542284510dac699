"""
Verification solver and scalability metrics.

The solver is a Jacobi relaxation of the 7-point Laplacian,
``u'(i) = (u(i-x) + u(i+x) + u(i-y) + u(i+y) + u(i-z) + u(i+z)) * (1/6)``,
evaluated in exactly that operand order on every path so that the
distributed run and :func:`serial_oracle` agree bit for bit.
"""
import csv
import io
import json
import logging
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError, ConsistencyError
from .exchange import build_envelope, exchange, local_boundary_fill, make_states
from .grid import GridConfig, Triple
from .lex import build_lex_layouts
from .sfc import build_sfc_layouts
from .stencil import STENCIL_NAMES, Stencil, connectivity_of

log = logging.getLogger(__name__)

ORACLE_MAX_POINTS = 10 ** 7
SIXTH = 1.0 / 6.0
FACE_OFFSETS = frozenset(Stencil.face7().offsets)


def _mixed(x, y, z):
    # exact small-integer arithmetic keeps every path bit-identical
    return ((x * 7 + y * 13 + z * 29) % 17) / 17.0 + x * 0.01 - y * 0.02 + z * 0.5


INIT_FUNCTIONS = {
    "zero": lambda x, y, z: 0.0 * (x + y + z),
    "one": lambda x, y, z: 1.0 + 0.0 * (x + y + z),
    "ramp": lambda x, y, z: 1.0 * x + 10.0 * y + 0.0 * z,
    "ramp3": lambda x, y, z: 1.0 * x + 10.0 * y + 100.0 * z,
    "mixed": _mixed,
}

BOUNDARY_FUNCTIONS = {
    "zero": lambda x, y, z: 0.0 * (x + y + z),
    "one": lambda x, y, z: 1.0 + 0.0 * (x + y + z),
    "bottom_one": lambda x, y, z: np.where(z < 0, 1.0, 0.0) + 0.0 * (x + y),
    "ramp": lambda x, y, z: 1.0 * x + 10.0 * y + 0.0 * z,
}


def _lookup(registry, name, what):
    if name in registry:
        return registry[name]
    try:
        value = float(name)
    except ValueError:
        raise ConfigurationError(
            f"unknown {what} function {name!r}, expected a number or one of {sorted(registry)}",
            (what.upper(),)) from None
    return lambda x, y, z: value + 0.0 * (x + y + z)


def init_function(name):
    return _lookup(INIT_FUNCTIONS, name, "init")


def boundary_function(name):
    return _lookup(BOUNDARY_FUNCTIONS, name, "boundary")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to run one simulation.

    ``pgrid`` is used in ``lex`` mode and ``m`` in ``sfc`` mode; a config may
    carry both so that the mode can be switched per run.
    """

    grid: GridConfig
    mode: str
    ranks: int
    pgrid: Optional[Triple] = None
    m: Optional[Triple] = None
    stencil: str = "face7"
    steps: int = 0
    init: str = "mixed"
    boundary: str = "zero"

    def __post_init__(self):
        if self.mode not in ("lex", "sfc"):
            raise ConfigurationError(f"mode must be 'lex' or 'sfc', got {self.mode!r}", ("MODE",))
        if self.mode == "lex" and self.pgrid is None:
            raise ConfigurationError("lex mode needs the process grid PX, PY, PZ",
                                     ("PX", "PY", "PZ"))
        if self.mode == "sfc" and self.m is None:
            raise ConfigurationError("sfc mode needs the subgrid size MX, MY, MZ",
                                     ("MX", "MY", "MZ"))
        if self.steps < 0:
            raise ConfigurationError(f"steps must be >= 0, got {self.steps}", ("STEPS",))
        if self.ranks < 1:
            raise ConfigurationError(f"ranks must be >= 1, got {self.ranks}", ("RANKS",))
        if self.stencil not in STENCIL_NAMES:
            raise ConfigurationError(f"unknown stencil {self.stencil!r}", ("STENCIL",))
        for name in ("pgrid", "m"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(int(v) for v in value))

    @property
    def stencil_obj(self):
        return Stencil.from_name(self.stencil)


def build_layouts(config):
    """Layouts of every rank for ``config``; raises :class:`ConfigurationError` if invalid."""
    stencil = config.stencil_obj
    if config.mode == "lex":
        return build_lex_layouts(config.grid, config.pgrid, config.ranks)
    return build_sfc_layouts(config.grid, config.m, config.ranks, connectivity_of(stencil))


def _jacobi(arr, reach):
    wx, wy, wz = reach
    nx, ny, nz = (s - 2 * w for s, w in zip(arr.shape, reach))
    cx, cy, cz = slice(wx, wx + nx), slice(wy, wy + ny), slice(wz, wz + nz)
    acc = arr[wx - 1:wx - 1 + nx, cy, cz] + arr[wx + 1:wx + 1 + nx, cy, cz]
    acc = acc + arr[cx, wy - 1:wy - 1 + ny, cz]
    acc = acc + arr[cx, wy + 1:wy + 1 + ny, cz]
    acc = acc + arr[cx, cy, wz - 1:wz - 1 + nz]
    acc = acc + arr[cx, cy, wz + 1:wz + 1 + nz]
    return acc * SIXTH


def _check_solver_stencil(stencil):
    if not FACE_OFFSETS <= stencil.offsets:
        raise ConfigurationError(
            f"stencil {stencil.name or 'custom'} does not contain the 7-point Laplacian",
            ("STENCIL",))


@dataclass
class SimulationResult:
    config: SimulationConfig
    layouts: list
    envelope: object
    states: list
    metrics: "Metrics"

    def assemble(self):
        """Global interior field assembled from all ranks' local subgrids."""
        out = np.full(self.config.grid.n, np.nan)
        seen = np.zeros(self.config.grid.n, dtype=np.int32)
        for state in self.states:
            for s in state.layout.locsubs:
                sl = tuple(slice(c, c + e) for c, e in zip(s.corner, s.extents))
                out[sl] = state.interior(s.index)
                seen[sl] += 1
        if not (seen == 1).all():
            raise ConsistencyError("local subgrids do not tile the grid exactly once")
        return out


def run_simulation(config):
    """Run ``config.steps`` rounds of exchange followed by a Jacobi update on every rank."""
    stencil = config.stencil_obj
    _check_solver_stencil(stencil)
    layouts = build_layouts(config)
    envelope = build_envelope(layouts, stencil)
    states = make_states(layouts, stencil, init_function(config.init))
    boundary = boundary_function(config.boundary)
    for state in states:
        local_boundary_fill(state, boundary)
    for _ in range(config.steps):
        exchange(states, envelope)
        for state in states:
            for s, arr in zip(state.layout.locsubs, state.fields):
                state.interior(s.index)[...] = _jacobi(arr, state.reach)
            state.step += 1
    metrics = measure_metrics(layouts, envelope)
    log.debug("simulated %s mode, %d ranks, %d steps", config.mode, config.ranks, config.steps)
    return SimulationResult(config, layouts, envelope, states, metrics)


def serial_oracle(config):
    """Same update on one undecomposed array padded by a single boundary layer."""
    grid = config.grid
    if grid.npoints > ORACLE_MAX_POINTS:
        raise ConfigurationError(
            f"serial oracle refuses {grid.npoints} points (limit {ORACLE_MAX_POINTS})",
            ("NX", "NY", "NZ"))
    _check_solver_stencil(config.stencil_obj)
    x, y, z = np.ix_(*[np.arange(-1, n + 1) for n in grid.n])
    shape = tuple(n + 2 for n in grid.n)
    arr = np.array(np.broadcast_to(boundary_function(config.boundary)(x, y, z), shape),
                   dtype=np.float64)
    init = np.broadcast_to(init_function(config.init)(x, y, z), shape)
    inner = tuple(slice(1, n + 1) for n in grid.n)
    arr[inner] = init[inner]
    for _ in range(config.steps):
        arr[inner] = _jacobi(arr, (1, 1, 1))
    return arr[inner].copy()


@dataclass
class RankMetrics:
    rank: int
    setup_ops: int
    local_subgrids: int
    ghost_subgrids: int
    neighbor_ranks: int
    messages_sent: int
    messages_received: int
    points_sent: int
    points_received: int
    allsubs: int
    components: int
    local_points: int
    surface_to_volume: float


@dataclass
class Metrics:
    per_rank: List[RankMetrics]
    aggregates: dict = field(default_factory=dict)

    def max(self, name):
        return self.aggregates[name]["max"]

    def min(self, name):
        return self.aggregates[name]["min"]

    def mean(self, name):
        return self.aggregates[name]["mean"]

    def column(self, name):
        return [getattr(r, name) for r in self.per_rank]


def face_components(pvecs):
    """Number of face-connected components of a set of process-grid slots (flood fill)."""
    remaining = set(map(tuple, pvecs))
    count = 0
    while remaining:
        count += 1
        stack = [remaining.pop()]
        while stack:
            x, y, z = stack.pop()
            for nb in ((x - 1, y, z), (x + 1, y, z), (x, y - 1, z),
                       (x, y + 1, z), (x, y, z - 1), (x, y, z + 1)):
                if nb in remaining:
                    remaining.remove(nb)
                    stack.append(nb)
    return count


def measure_metrics(layouts, envelope):
    """Per-rank and aggregated layout and communication counters."""
    nr = len(layouts)
    sent = [0] * nr
    received = [0] * nr
    psent = [0] * nr
    precv = [0] * nr
    partners = [set() for _ in range(nr)]
    for m in envelope.messages:
        sent[m.src] += 1
        received[m.dst] += 1
        psent[m.src] += m.count
        precv[m.dst] += m.count
        partners[m.src].add(m.dst)
        partners[m.dst].add(m.src)
    rows = []
    for layout in layouts:
        r = layout.rank
        local_points = sum(s.npoints for s in layout.locsubs)
        nghost = len(layout.allsubs) - len(layout.locsubs)
        rows.append(RankMetrics(
            rank=r,
            setup_ops=layout.setup_ops,
            local_subgrids=len(layout.locsubs),
            ghost_subgrids=nghost,
            neighbor_ranks=len(partners[r]),
            messages_sent=sent[r],
            messages_received=received[r],
            points_sent=psent[r],
            points_received=precv[r],
            allsubs=len(layout.allsubs),
            components=face_components(s.pvec for s in layout.locsubs),
            local_points=local_points,
            surface_to_volume=precv[r] / local_points if local_points else 0.0,
        ))
    aggregates = {}
    for f in fields(RankMetrics):
        if f.name == "rank":
            continue
        values = [getattr(row, f.name) for row in rows]
        aggregates[f.name] = {"max": max(values), "min": min(values),
                              "mean": sum(values) / len(values)}
    return Metrics(rows, aggregates)


def balanced_pgrid(P):
    """Split ``P`` ranks over x and y by handing each prime factor to the smaller axis; z stays 1."""
    factors = []
    n, f = P, 2
    while f * f <= n:
        while n % f == 0:
            factors.append(f)
            n //= f
        f += 1
    if n > 1:
        factors.append(n)
    px = py = 1
    for f in sorted(factors, reverse=True):
        if px <= py:
            px *= f
        else:
            py *= f
    return (px, py, 1)


SWEEP_COLUMNS = (
    "kind", "mode", "ranks", "nx", "ny", "nz", "subgrids", "status",
    "max_setup_ops", "min_setup_ops", "max_allsubs", "max_local", "min_local",
    "max_ghosts", "max_neighbor_ranks", "total_messages", "total_points_sent",
    "max_components", "reason",
)


def sweep_config(base, P, kind):
    """Configuration for ``P`` ranks in a weak or strong sweep anchored at ``base``.

    Weak sweeps treat ``base.grid.n`` as the per-rank unit problem and tile
    it over a balanced x-y process grid, one subgrid per rank.  Strong
    sweeps keep ``base.grid`` and, in sfc mode, ``base.m``.
    """
    if kind not in ("weak", "strong"):
        raise ConfigurationError(f"sweep kind must be 'weak' or 'strong', got {kind!r}")
    pgrid = balanced_pgrid(P)
    if kind == "weak":
        unit = base.grid.n
        grid = replace(base.grid, n=tuple(u * p for u, p in zip(unit, pgrid)))
        if base.mode == "lex":
            return replace(base, grid=grid, pgrid=pgrid, ranks=P)
        return replace(base, grid=grid, m=unit, ranks=P)
    if base.mode == "lex":
        return replace(base, pgrid=pgrid, ranks=P)
    return replace(base, ranks=P)


def scaling_sweep(base, ranks, kind="weak"):
    """Metrics table over a sequence of rank counts; invalid points become skipped rows."""
    rows = []
    stencil = base.stencil_obj
    for P in ranks:
        row = dict.fromkeys(SWEEP_COLUMNS, "")
        row.update(kind=kind, mode=base.mode, ranks=P)
        try:
            cfg = sweep_config(base, P, kind)
            row.update(nx=cfg.grid.n[0], ny=cfg.grid.n[1], nz=cfg.grid.n[2])
            layouts = build_layouts(cfg)
            envelope = build_envelope(layouts, stencil)
        except ConfigurationError as exc:
            row.update(status="skipped", reason=str(exc))
            rows.append(row)
            continue
        metrics = measure_metrics(layouts, envelope)
        row.update(
            subgrids=sum(metrics.column("local_subgrids")),
            status="ok",
            max_setup_ops=metrics.max("setup_ops"),
            min_setup_ops=metrics.min("setup_ops"),
            max_allsubs=metrics.max("allsubs"),
            max_local=metrics.max("local_subgrids"),
            min_local=metrics.min("local_subgrids"),
            max_ghosts=metrics.max("ghost_subgrids"),
            max_neighbor_ranks=metrics.max("neighbor_ranks"),
            total_messages=len(envelope.messages),
            total_points_sent=sum(metrics.column("points_sent")),
            max_components=metrics.max("components"),
        )
        rows.append(row)
        log.info("sweep %s %s P=%d done", kind, base.mode, P)
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in SWEEP_COLUMNS})
    return buf.getvalue()


def rows_to_json(rows):
    return json.dumps([{k: row.get(k, "") for k in SWEEP_COLUMNS} for row in rows], indent=1) + "\n"


def metrics_to_csv(metrics):
    names = [f.name for f in fields(RankMetrics)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in metrics.per_rank:
        writer.writerow([getattr(row, n) for n in names])
    return buf.getvalue()
