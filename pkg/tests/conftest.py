"""Shared fixtures: default parameter bundles, seeded generators and small
networks that keep the POMDP sub-problems tiny."""
from dataclasses import replace

import numpy as np
import pytest

from cfhandoff.handoff.engine import EngineConfig
from cfhandoff.handoff.trip import generate_trip
from cfhandoff.network.channel import MobilityParams
from cfhandoff.network.geometry import NetworkLayout, place_aps
from cfhandoff.sim.config import ExperimentConfig, load_config
from cfhandoff.sim.harness import run_experiment


# Dotted overrides shrinking the experiment to a few seconds.
SMALL_OVERRIDES = [
    'network.n_aps=8',
    'network.area_side=400',
    'network.wrap_margin=100',
    'mobility.trip_cycles=3',
    'seeds.trials=2',
    'engine.b_con=2',
    'engine.horizon=2',
    'engine.belief_budget=16',
    'engine.expansion_depth=1',
    'schemes=["pomdp_plain", "pomdp_ho_min", "lsf_time", "lsf_threshold"]',
]


@pytest.fixture
def params():
    return ExperimentConfig().link_params()


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def small_config():
    return load_config(overrides=SMALL_OVERRIDES)


@pytest.fixture
def small_engine():
    return EngineConfig(b_con=2, horizon=2, belief_budget=16, expansion_depth=1)


@pytest.fixture
def small_trip(params):
    layout = place_aps(8, 400.0, np.random.default_rng(1), wrap_margin=100.0)
    return generate_trip(layout, params, 4, np.random.default_rng(2), np.random.default_rng(3))


@pytest.fixture
def static_trip(params):
    """Motionless user next to five APs, three far-away APs."""
    near = [[490.0, 490.0], [510.0, 490.0], [490.0, 510.0], [510.0, 510.0], [500.0, 520.0]]
    far = [[100.0, 100.0], [900.0, 100.0], [100.0, 900.0]]
    layout = NetworkLayout(area_side=1000.0, ap_positions=np.array(near + far))
    still = replace(params, mobility=MobilityParams(speed=0.0, step_duration=1.0))
    return generate_trip(layout, still, 4, np.random.default_rng(4), np.random.default_rng(5))


@pytest.fixture(scope='session')
def small_metrics():
    return run_experiment(load_config(overrides=SMALL_OVERRIDES), progress=False)


@pytest.fixture
def small_args():
    """Command-line options of the small experiment."""
    args = []
    for override in SMALL_OVERRIDES:
        args += ['--set', override]
    return args + ['--quiet']
