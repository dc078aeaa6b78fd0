import pytest

CRITERIA = {
    1: "contract round-trip, 500 random pairs, < 5 s",
    2: "aggregation completeness and injectivity, 1000 cases",
    3: "CNIP purity, 1000 seeded runs",
    4: "alternating offers admissibility and termination, 1000 runs",
    5: "reverse-auction monotonicity, cinema-3p-icnip x 100 seeds",
    6: "oracle dominance, every bundled scenario x 100 seeds",
    7: "multilateral bookkeeping, k-1 cancellations and 1 stored agreement",
    8: "determinism and replay",
    9: "strategy invariants",
    10: "state-machine reachability equals brute force",
}

_results: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for marker in getattr(report, "acceptance_ids", ()):
        _results.setdefault(marker, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.acceptance_ids = [m.args[0] for m in item.iter_markers("acceptance")]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, text in CRITERIA.items():
        seen = _results.get(n)
        if not seen:
            status = "NOT RUN"
        elif all(o == "passed" for o in seen):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {n:>2} {status:<7} {text}")
