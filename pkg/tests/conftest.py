import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qkdlink import named_default
from qkdlink.pipeline import build_context, evaluate_context

SCENARIO_NAMES = ("uplink-night", "downlink-night", "downlink-day")


@pytest.fixture(scope="session")
def scenarios():
    return {name: named_default(name) for name in SCENARIO_NAMES}


@pytest.fixture(scope="session")
def contexts(scenarios):
    return {name: build_context(s) for name, s in scenarios.items()}


@pytest.fixture(scope="session")
def degree_sweep(contexts):
    """One evaluated point per whole degree in [0, 85] per scenario."""
    thetas = [float(t) for t in range(0, 86)]
    return {
        name: [evaluate_context(ctx, t) for t in thetas]
        for name, ctx in contexts.items()
    }, thetas
