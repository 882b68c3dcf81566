from importlib import resources
from pathlib import Path

import pytest


def data_path(relative: str) -> Path:
    """Absolute path of a bundled data fixture, e.g. data_path('sdd/seer_codebook.csv')."""
    return Path(str(resources.files("stagegraph").joinpath("data", *relative.split("/"))))


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], outcome))
    if rows:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, outcome in rows:
            label = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"  {label}: {name}")


@pytest.fixture(scope="session")
def cohort_world():
    """Fully built knowledge graph over the bundled 250-row cohort.

    Session-scoped because the build costs ~10 s; tests that mutate the store
    must build their own world instead.
    """
    from stagegraph.pipeline import bootstrap_world, load_config

    return bootstrap_world(load_config())
