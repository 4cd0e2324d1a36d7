"""
Shared fixtures for the planner test suite
"""

import json
import logging
from pathlib import Path

import pytest

from hap_model import HapNode, PlanParams
from rwa_topology import TopologyState
from scenario import ScenarioSpec, generate_instance

GOLDEN_FILE = Path(__file__).parent / 'golden' / 'seeded_runs.json'


@pytest.fixture(autouse=True)
def restore_root_logging():
    """CLI runs reconfigure the root logger; put it back after each test"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture
def golden():
    """
    Compare a seeded-run value with its frozen copy in golden/seeded_runs.json.

    A name seen for the first time is frozen with the current value; commit
    the file so later runs compare against it. Delete an entry to re-freeze.
    """
    def check(name, value):
        frozen = json.loads(GOLDEN_FILE.read_text()) if GOLDEN_FILE.exists() else {}
        if name not in frozen:
            frozen[name] = value
            GOLDEN_FILE.parent.mkdir(parents=True, exist_ok=True)
            GOLDEN_FILE.write_text(json.dumps(frozen, indent=2, sort_keys=True) + '\n')
            return
        assert frozen[name] == value, f"{name}: frozen {frozen[name]!r}, got {value!r}"
    return check


@pytest.fixture
def params():
    return PlanParams()


@pytest.fixture
def small_instance(params):
    return generate_instance(ScenarioSpec(seed=3, node_count=60), params)


def make_haps(positions, cluster_sizes=None):
    """HapNodes at the given positions; each serves `size` distinct ground ids"""
    cluster_sizes = cluster_sizes or [1] * len(positions)
    haps = []
    next_gid = 0
    for hid, ((x, y), size) in enumerate(zip(positions, cluster_sizes)):
        haps.append(HapNode(hid, float(x), float(y), cluster=tuple(range(next_gid, next_gid + size))))
        next_gid += size
    return haps


def make_state(positions, params, ber_curve=None, cluster_sizes=None):
    return TopologyState(make_haps(positions, cluster_sizes), params, ber_curve)
