import numpy as np
import pytest

from meshdist.errors import ConfigurationError
from meshdist.grid import GridConfig
from meshdist.exchange import exchange
from meshdist.harness import (SimulationConfig, _check_solver_stencil, _jacobi, balanced_pgrid, build_layouts, measure_metrics,
                              rows_to_csv, rows_to_json, run_simulation, scaling_sweep,
                              serial_oracle)
from meshdist.exchange import build_envelope
from meshdist.stencil import Stencil


def cfg(n, mode, ranks, **kw):
    return SimulationConfig(GridConfig(n), mode, ranks, **kw)


def test_zero_steps_keeps_initial_values():
    c = cfg((6, 5, 4), "lex", 4, pgrid=(2, 2, 1), init="ramp3")
    x, y, z = np.ix_(*map(np.arange, (6, 5, 4)))
    expect = np.broadcast_to(1.0 * x + 10.0 * y + 100.0 * z, (6, 5, 4))
    assert np.array_equal(run_simulation(c).assemble(), expect)
    assert np.array_equal(serial_oracle(c), expect)


def test_oracle_hand_examples():
    c = cfg((1, 1, 1), "lex", 1, pgrid=(1, 1, 1), init="6.0", boundary="zero", steps=1)
    assert serial_oracle(c).ravel().tolist() == [0.0]
    # spike of 6 in the middle: neighbours gain 1, centre loses everything
    res = run_simulation(cfg((3, 1, 1), "sfc", 3, m=(1, 1, 1), init="zero"))
    for state in res.states:
        for s in state.layout.locsubs:
            state.interior(s.index)[...] = 6.0 if s.corner[0] == 1 else 0.0
    exchange(res.states, res.envelope)
    out = []
    for state in res.states:
        for s in state.layout.locsubs:
            out.append((s.corner[0], _jacobi(state.array(s.index), state.reach).item()))
    assert sorted(out) == [(0, 1.0), (1, 0.0), (2, 1.0)]


def test_oracle_guard():
    c = cfg((1000, 1000, 11), "sfc", 1, m=(1000, 1000, 11))
    with pytest.raises(ConfigurationError):
        serial_oracle(c)


@pytest.mark.parametrize("mode, ranks, kw", [
    ("lex", 6, dict(pgrid=(3, 2, 1))),
    ("lex", 8, dict(pgrid=(2, 2, 2))),
    ("sfc", 3, dict(m=(2, 2, 2))),
    ("sfc", 11, dict(m=(3, 2, 4))),
])
@pytest.mark.parametrize("stencil", ["face7", "box27"])
def test_distributed_equals_serial(mode, ranks, kw, stencil):
    c = cfg((10, 7, 9), mode, ranks, stencil=stencil, steps=6, boundary="ramp", **kw)
    assert np.array_equal(run_simulation(c).assemble(), serial_oracle(c))


def test_rank_count_invariance():
    base = None
    for ranks in (1, 2, 5, 16, 27):
        c = cfg((12, 12, 9), "sfc", ranks, m=(4, 4, 3), steps=4, boundary="bottom_one")
        out = run_simulation(c).assemble()
        if base is None:
            base = out
        assert np.array_equal(out, base)


def test_solver_needs_face_stencil():
    with pytest.raises(ConfigurationError):
        cfg((4, 4, 4), "lex", 1, pgrid=(1, 1, 1), stencil="nope")
    c = cfg((4, 4, 4), "lex", 1, pgrid=(1, 1, 1))
    diagonal_only = Stencil(frozenset({(1, 1, 0), (-1, -1, 0)}))
    with pytest.raises(ConfigurationError):
        _check_solver_stencil(diagonal_only)
    _check_solver_stencil(c.stencil_obj)


def test_metrics_lex_allsubs_is_P():
    c = cfg((12, 12, 4), "lex", 9, pgrid=(3, 3, 1))
    layouts = build_layouts(c)
    metrics = measure_metrics(layouts, build_envelope(layouts, Stencil.face7()))
    assert metrics.column("allsubs") == [9] * 9
    assert metrics.max("setup_ops") == 18
    assert metrics.max("neighbor_ranks") == 4 and metrics.min("neighbor_ranks") == 2
    assert metrics.max("components") == 1


def test_metrics_sfc_unit_subgrids():
    c = cfg((10, 7, 1), "sfc", 6, m=(3, 3, 1), stencil="box27")
    layouts = build_layouts(c)
    metrics = measure_metrics(layouts, build_envelope(layouts, Stencil.box27()))
    # every unit tree touches every other tree of the same 3x2 brick except the far column
    assert metrics.column("allsubs") == [1 + r.ghost_subgrids for r in metrics.per_rank]
    assert metrics.column("ghost_subgrids") == [3, 5, 3, 3, 5, 3]
    agg = metrics.aggregates["points_sent"]
    assert agg["max"] >= agg["mean"] >= agg["min"]


def test_balanced_pgrid():
    assert balanced_pgrid(64) == (8, 8, 1)
    assert balanced_pgrid(4096) == (64, 64, 1)
    assert balanced_pgrid(6) == (3, 2, 1)
    assert balanced_pgrid(1) == (1, 1, 1)


def test_lex_weak_sweep_quadruples():
    base = cfg((10, 10, 4), "lex", 1, pgrid=(1, 1, 1))
    rows = scaling_sweep(base, [4, 16, 64], "weak")
    ops = [r["max_setup_ops"] for r in rows]
    assert ops == [8, 32, 128]
    assert [r["max_allsubs"] for r in rows] == [4, 16, 64]


def test_sfc_weak_sweep_flat():
    base = cfg((10, 10, 4), "sfc", 1, m=(10, 10, 4))
    rows = scaling_sweep(base, [4, 16, 64, 256], "weak")
    ops = [r["max_setup_ops"] for r in rows]
    assert max(ops) < 2 * min(ops)


def test_sfc_strong_sweep_halves_local_counts():
    base = cfg((32, 32, 8), "sfc", 1, m=(4, 4, 8))
    rows = scaling_sweep(base, [2, 4, 8, 16, 32, 64], "strong")
    assert [r["max_local"] for r in rows] == [32, 16, 8, 4, 2, 1]
    assert all(r["max_local"] - r["min_local"] <= 1 for r in rows)


def test_sweep_skips_invalid_rows():
    base = cfg((4, 4, 4), "lex", 1, pgrid=(1, 1, 1))
    rows = scaling_sweep(base, [4, 64], "strong")
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "skipped" and "exceeds" in rows[1]["reason"]
    text = rows_to_csv(rows)
    assert text.splitlines()[0].startswith("kind,mode,ranks,")
    assert rows_to_json(rows) == rows_to_json(scaling_sweep(base, [4, 64], "strong"))
