import json
from importlib import resources

import pytest


def load_schema(name: str) -> dict:
    return json.loads(resources.files("cclab").joinpath("schemas", f"{name}.schema.json").read_text())


@pytest.fixture
def schema():
    return load_schema


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
