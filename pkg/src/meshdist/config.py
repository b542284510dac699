"""
Flat ``KEY=VALUE`` configuration files.

Entries are separated by newlines or whitespace; ``#`` starts a comment::

    # 10 x 7 mesh on six ranks
    NX=10 NY=7 NZ=1
    MODE=lex  PX=3 PY=2 PZ=1
    RANKS=6
    STENCIL=face7 STEPS=5

Keys: NX NY NZ (required), DX DY DZ, MODE (required, ``lex`` or ``sfc``),
PX PY PZ (lex), MX MY MZ (sfc), RANKS (required), STENCIL (face7, edge19,
box27), STEPS, INIT, BOUNDARY.
"""
from .errors import ConfigurationError, InvalidParameterError
from .grid import AXES, GridConfig, check_cover
from .harness import BOUNDARY_FUNCTIONS, INIT_FUNCTIONS, SimulationConfig
from .stencil import STENCIL_NAMES

INT_KEYS = ("NX", "NY", "NZ", "PX", "PY", "PZ", "MX", "MY", "MZ", "RANKS", "STEPS")
FLOAT_KEYS = ("DX", "DY", "DZ")
STR_KEYS = ("MODE", "STENCIL", "INIT", "BOUNDARY")
KEYS = INT_KEYS + FLOAT_KEYS + STR_KEYS
REQUIRED = ("NX", "NY", "NZ", "MODE", "RANKS")
ORDER = ("NX", "NY", "NZ", "DX", "DY", "DZ", "MODE", "PX", "PY", "PZ", "MX", "MY", "MZ",
         "RANKS", "STENCIL", "STEPS", "INIT", "BOUNDARY")


def _tokens(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        yield from line.split()


def _read(text):
    values = {}
    for token in _tokens(text):
        key, sep, value = token.partition("=")
        key = key.strip().upper()
        if not sep or not value:
            raise ConfigurationError(f"malformed entry {token!r}, expected KEY=VALUE", (key,))
        if key not in KEYS:
            raise ConfigurationError(f"unknown key {key!r}", (key,))
        if key in values:
            raise ConfigurationError(f"duplicate key {key!r}", (key,))
        values[key] = value
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigurationError(f"missing required key(s) {', '.join(missing)}", missing)
    return values


def _int(values, key, default=None, positive=True):
    if key not in values:
        return default
    raw = values[key]
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{key}={raw!r} is not an integer", (key,)) from None
    if value < (1 if positive else 0):
        low = "positive" if positive else "non-negative"
        raise ConfigurationError(f"{key}={value} must be {low}", (key,))
    return value


def _float(values, key, default):
    if key not in values:
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigurationError(f"{key}={values[key]!r} is not a number", (key,)) from None


def _triple_keys(values, prefix, mode, required):
    keys = [f"{prefix}{a.upper()}" for a in AXES]
    present = [k in values for k in keys]
    if not any(present):
        if required:
            raise ConfigurationError(f"{mode} mode needs {', '.join(keys)}", keys)
        return None
    if not all(present):
        missing = [k for k, p in zip(keys, present) if not p]
        raise ConfigurationError(f"incomplete {prefix}* triple, missing {', '.join(missing)}", missing)
    return tuple(_int(values, k) for k in keys)


def parse_config(text):
    """Parse and validate a configuration document into a :class:`SimulationConfig`."""
    values = _read(text)
    n = tuple(_int(values, f"N{a.upper()}") for a in AXES)
    spacing = tuple(_float(values, f"D{a.upper()}", 1.0) for a in AXES)
    try:
        grid = GridConfig(n, spacing)
    except InvalidParameterError as exc:
        raise ConfigurationError(str(exc), ("DX", "DY", "DZ")) from exc
    mode = values["MODE"].lower()
    if mode not in ("lex", "sfc"):
        raise ConfigurationError(f"MODE={values['MODE']!r} must be lex or sfc", ("MODE",))
    pgrid = _triple_keys(values, "P", mode, mode == "lex")
    m = _triple_keys(values, "M", mode, mode == "sfc")
    ranks = _int(values, "RANKS")
    stencil = values.get("STENCIL", "face7")
    if stencil not in STENCIL_NAMES:
        raise ConfigurationError(f"STENCIL={stencil!r} must be one of {', '.join(STENCIL_NAMES)}",
                                 ("STENCIL",))
    steps = _int(values, "STEPS", 0, positive=False)
    init = values.get("INIT", "mixed")
    boundary = values.get("BOUNDARY", "zero")
    _check_function(init, INIT_FUNCTIONS, "INIT")
    _check_function(boundary, BOUNDARY_FUNCTIONS, "BOUNDARY")

    if mode == "lex":
        total = pgrid[0] * pgrid[1] * pgrid[2]
        if total != ranks:
            raise ConfigurationError(
                f"PX*PY*PZ = {total} must equal RANKS = {ranks}", ("PX", "PY", "PZ", "RANKS"))
        for a, nt, pt in zip(AXES, n, pgrid):
            if pt > nt:
                raise ConfigurationError(f"P{a.upper()}={pt} exceeds N{a.upper()}={nt}",
                                         (f"N{a.upper()}", f"P{a.upper()}"))
    else:
        for a, nt, mt in zip(AXES, n, m):
            keys = (f"N{a.upper()}", f"M{a.upper()}")
            if mt > nt:
                raise ConfigurationError(f"({keys[0]}, {keys[1]}) = ({nt}, {mt}): "
                                         f"subgrid larger than the grid", keys)
            report = check_cover(nt, mt)
            if not report.ok:
                raise ConfigurationError(f"({keys[0]}, {keys[1]}) = ({nt}, {mt}): "
                                         f"{report.message}", keys)
    return SimulationConfig(grid=grid, mode=mode, ranks=ranks, pgrid=pgrid, m=m,
                            stencil=stencil, steps=steps, init=init, boundary=boundary)


def _check_function(name, registry, key):
    if name in registry:
        return
    try:
        float(name)
    except ValueError:
        raise ConfigurationError(f"{key}={name!r} must be a number or one of "
                                 f"{', '.join(sorted(registry))}", (key,)) from None


def serialize_config(config):
    """Render ``config`` in canonical key order; :func:`parse_config` reads it back unchanged."""
    values = {}
    for a, nt, dt in zip(AXES, config.grid.n, config.grid.spacing):
        values[f"N{a.upper()}"] = str(nt)
        values[f"D{a.upper()}"] = repr(dt)
    values["MODE"] = config.mode
    if config.pgrid is not None:
        for a, p in zip(AXES, config.pgrid):
            values[f"P{a.upper()}"] = str(p)
    if config.m is not None:
        for a, q in zip(AXES, config.m):
            values[f"M{a.upper()}"] = str(q)
    values["RANKS"] = str(config.ranks)
    values["STENCIL"] = config.stencil
    values["STEPS"] = str(config.steps)
    values["INIT"] = config.init
    values["BOUNDARY"] = config.boundary
    return "".join(f"{k}={values[k]}\n" for k in ORDER if k in values)
