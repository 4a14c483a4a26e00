"""Shared fixtures: the three-area study system, its default LQG design, and
preset simulation traces.  Session-scoped because synthesis and simulation
are deterministic and reused by many tests."""

import numpy as np
import pytest

import lfckit
from lfckit.simulation import DisturbanceSpec, Scenario, StepDisturbance

PRESET_STEP = -0.5 * 400.0 / 1000.0   # half the solar area's rating, pu


@pytest.fixture(scope="session")
def three_area_plant():
    areas, ties = lfckit.three_area_system()
    return lfckit.build_plant(areas, ties)


@pytest.fixture(scope="session")
def lqg_controller(three_area_plant):
    return lfckit.design_lqg(three_area_plant)


@pytest.fixture(scope="session")
def closed_loop(three_area_plant, lqg_controller):
    return lfckit.assemble_closed_loop(three_area_plant, lqg_controller)


@pytest.fixture(scope="session")
def droop_loop(three_area_plant):
    return lfckit.make_droop_baseline(three_area_plant)


def preset_scenario(n_channels=3, record=("states", "outputs", "controls",
                                          "disturbances", "errors"),
                    horizon=30.0, dt=0.01, seed=42):
    return Scenario(
        horizon=horizon, dt=dt,
        disturbances=DisturbanceSpec.single(
            n_channels, 1, StepDisturbance(time=1.0, magnitude=PRESET_STEP)),
        record=record, seed=seed)


@pytest.fixture(scope="session")
def preset_lqg_trace(closed_loop):
    with np.errstate(all="raise"):
        return lfckit.simulate(closed_loop, preset_scenario())


@pytest.fixture(scope="session")
def preset_droop_trace(droop_loop):
    return lfckit.simulate(droop_loop, preset_scenario())
