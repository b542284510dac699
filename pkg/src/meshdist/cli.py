"""Command line entry point: ``meshdist {partition,ghost,envelope,simulate,sweep}``."""
import argparse
import hashlib
import json
import logging
import sys

import numpy as np

from .config import parse_config
from .errors import MeshDistError
from .exchange import build_envelope, dependent_region
from .harness import (ORACLE_MAX_POINTS, build_layouts, metrics_to_csv, rows_to_csv, rows_to_json,
                      run_simulation, scaling_sweep, serial_oracle)

log = logging.getLogger("meshdist")


def _subgrid_dict(s):
    return {
        "index": s.index,
        "owner": s.owner,
        "pvec": list(s.pvec),
        "corner": list(s.corner),
        "extents": list(s.extents),
    }


def _dump(doc):
    return json.dumps(doc, indent=1) + "\n"


def _ranks(config, args):
    if args.rank is None:
        return range(config.ranks)
    if not 0 <= args.rank < config.ranks:
        raise SystemExit(f"error: --rank {args.rank} outside [0, {config.ranks})")
    return [args.rank]


def cmd_partition(config, args):
    layouts = build_layouts(config)
    subs = sorted((s for r in _ranks(config, args) for s in layouts[r].locsubs),
                  key=lambda s: s.index)
    if args.output == "text":
        lines = [f"{config.mode} layout, {len(subs)} subgrids, process grid {layouts[0].pgrid}"]
        lines += [f"subgrid {s.index:>6} owner {s.owner:>6} corner {s.corner} extents {s.extents}"
                  for s in subs]
        return "\n".join(lines) + "\n"
    if args.output == "csv":
        rows = ["index,owner,px,py,pz,cx,cy,cz,ex,ey,ez"]
        rows += [",".join(map(str, (s.index, s.owner) + s.pvec + s.corner + s.extents))
                 for s in subs]
        return "\n".join(rows) + "\n"
    return _dump({"mode": config.mode, "nranks": config.ranks, "pgrid": list(layouts[0].pgrid),
                  "subgrids": [_subgrid_dict(s) for s in subs]})


def cmd_ghost(config, args):
    layouts = build_layouts(config)
    stencil = config.stencil_obj
    doc = []
    for r in _ranks(config, args):
        layout = layouts[r]
        if config.mode == "lex":
            ghosts = sorted({d.neighbor.index: d.neighbor for d in dependent_region(layout, stencil)
                             }.values(), key=lambda s: s.index)
        else:
            ghosts = list(layout.ghosts)
        doc.append({"rank": r, "allsubs": len(layout.allsubs),
                    "local": [_subgrid_dict(s) for s in layout.locsubs],
                    "ghosts": [_subgrid_dict(s) for s in ghosts]})
    if args.output == "text":
        lines = []
        for entry in doc:
            lines.append(f"rank {entry['rank']}: {len(entry['local'])} local, "
                         f"{len(entry['ghosts'])} ghost, allsubs {entry['allsubs']}")
            lines += [f"  local {s['index']} corner {tuple(s['corner'])} extents {tuple(s['extents'])}"
                      for s in entry["local"]]
            lines += [f"  ghost {s['index']} owner {s['owner']} corner {tuple(s['corner'])}"
                      for s in entry["ghosts"]]
        return "\n".join(lines) + "\n"
    return _dump(doc)


def cmd_envelope(config, args):
    layouts = build_layouts(config)
    envelope = build_envelope(layouts, config.stencil_obj)
    if args.output == "text":
        msgs = [m for m in envelope.messages if args.rank is None or args.rank in (m.src, m.dst)]
        lines = [f"{len(msgs)} messages"]
        lines += [f"{m.src} -> {m.dst}: subgrid {m.src_subgrid} -> {m.dst_subgrid} "
                  f"box {m.box.lo}..{m.box.hi} ({m.count} points)" for m in msgs]
        return "\n".join(lines) + "\n"
    return envelope.to_json(args.rank)


def cmd_simulate(config, args):
    result = run_simulation(config)
    field = result.assemble()
    digest = hashlib.sha256(np.ascontiguousarray(field).tobytes()).hexdigest()
    if config.grid.npoints <= ORACLE_MAX_POINTS:
        reference = serial_oracle(config)
        differing = int(np.count_nonzero(field != reference))
        verdict = "match" if differing == 0 else "mismatch"
    else:
        differing, verdict = None, "unverified"
    doc = {"mode": config.mode, "ranks": config.ranks, "steps": config.steps,
           "checksum": digest, "sum": float(field.sum()), "verdict": verdict,
           "differing_points": differing}
    if args.output == "csv":
        text = metrics_to_csv(result.metrics)
    elif args.output == "text":
        text = (f"checksum {digest}\nsum {doc['sum']!r}\nverdict {verdict}\n")
    else:
        text = _dump(doc)
    return text, 0 if verdict != "mismatch" else 3


def cmd_sweep(config, args):
    ranks = [int(v) for v in args.ranks.split(",") if v]
    rows = scaling_sweep(config, ranks, args.kind)
    if args.output == "json":
        return rows_to_json(rows)
    return rows_to_csv(rows)


COMMANDS = {
    "partition": cmd_partition,
    "ghost": cmd_ghost,
    "envelope": cmd_envelope,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="meshdist", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="KEY=VALUE configuration file")
        p.add_argument("--rank", type=int, default=None, help="restrict output to one rank")
        p.add_argument("--output", choices=("json", "csv", "text"),
                       default="csv" if name == "sweep" else "json")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        if name == "sweep":
            p.add_argument("--kind", choices=("weak", "strong"), default="weak")
            p.add_argument("--ranks", default="4,16,64", help="comma separated rank counts")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_config(fh.read())
        out = COMMANDS[args.command](config, args)
    except (MeshDistError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    status = 0
    if isinstance(out, tuple):
        out, status = out
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if status:
        print("error: distributed result differs from the serial oracle", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
