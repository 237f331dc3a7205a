from __future__ import annotations

import time

import pytest

from cellrisk.mapper import build_map
from cellrisk.vehicle import make_case_study

# Single seed pinned for every case-study artifact in the suite so results,
# including the acceptance runs, are exactly reproducible.
SUITE_SEED = 20240811


@pytest.fixture(scope="session")
def baseline_case():
    return make_case_study("baseline")


@pytest.fixture(scope="session")
def modified_case():
    return make_case_study("modified")


def _timed_build(case, samples):
    t0 = time.perf_counter()
    tmap = build_map(
        case.model, case.spec, case.config_model, dt=case.dt,
        samples=samples, seed=SUITE_SEED,
    )
    return tmap, time.perf_counter() - t0


@pytest.fixture(scope="session")
def baseline_build(baseline_case):
    tmap, seconds = _timed_build(baseline_case, 200)
    return {"map": tmap, "seconds": seconds}


@pytest.fixture(scope="session")
def baseline_map(baseline_build):
    return baseline_build["map"]


@pytest.fixture(scope="session")
def modified_map(modified_case):
    tmap, _ = _timed_build(modified_case, 200)
    return tmap
