"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

CRITERIA = {
    "test_c01_lex_fixture": "1  lex fixture boxes and owners",
    "test_c02_sfc_fixture": "2  sfc fixture brick and box set",
    "test_c03_cover_disjointness": "3  cover and disjointness, N <= 12",
    "test_c04_morton_partition": "4  Morton bijection, balance, 2D components",
    "test_c05_ghost_oracle": "5  ghost layer vs brute-force adjacency",
    "test_c06_envelope_symmetry_coverage": "6  envelope symmetry and coverage, 1000 configs",
    "test_c07_bit_exact": "7  distributed vs serial bit-exactness",
    "test_c08_setup_scaling": "8  setup-cost scaling, weak sweep",
    "test_c09_memory_proxy": "9  memory-proxy scaling, weak sweep",
    "test_c10_strong_multi_subgrid": "10 strong scaling with several subgrids per rank",
}

_outcomes = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if name not in CRITERIA:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(name, []).append((report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name not in _outcomes:
            continue
        results = _outcomes[name]
        ok = all(outcome == "passed" for outcome, _ in results)
        seconds = sum(d for _, d in results)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({seconds:.1f} s)")
