import re

CRITERIA = {
    "AC1": "capability matchmaking returns the two infiltration simulations",
    "AC2": "quality values 0.7 / 0.8 (tol 1e-12)",
    "AC3": "influences 0.4 / 0.4 / 0.2, group sum 1.0 (tol 1e-6), one V3 after mutation",
    "AC4": "two 2-node sequences, draping first",
    "AC5": "accuracy >= 0.8 makes DL infeasible; TPDL ranks first",
    "AC6": "planner equals brute-force enumerator on 200 models",
    "AC7": "matchmaker equals stored queries; engine equals naive oracle",
    "AC8": "parse/serialize/parse identity on fixture and 500 graphs",
    "AC9": "accuracy in [0,1], weight-scaling invariance, replay",
}

_outcomes = {}
_PATTERN = re.compile(r"::test_(ac\d+)_")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    key = m.group(1).upper()
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed:
        _outcomes[key] = "FAIL"
    elif report.when == "call":
        _outcomes.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, text in CRITERIA.items():
        terminalreporter.write_line(f"{key:<4} {_outcomes.get(key, 'NOT RUN'):<7} {text}")
