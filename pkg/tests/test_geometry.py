import numpy as np
import pytest

from cfhandoff.errors import ConfigurationError, ContractViolation
from cfhandoff.network.geometry import (NetworkLayout, TrajectoryState, advance, distance_2d,
                                        distances_2d, place_aps, start_trajectory,
                                        torus_distance_bruteforce)
from cfhandoff.utils import derive_rng


def moving(position, heading=(1.0, 0.0), speed=10.0):
    return TrajectoryState(position=np.array(position), heading=np.array(heading),
                           speed=speed, step_duration=1.0)


def test_place_aps_in_bounds_and_reproducible():
    first = place_aps(125, 1000.0, derive_rng(7))
    second = place_aps(125, 1000.0, derive_rng(7))
    assert first.n_aps == 125
    assert np.all((first.ap_positions >= 0) & (first.ap_positions <= 1000.0))
    assert np.array_equal(first.ap_positions, second.ap_positions)


def test_place_single_ap():
    layout = place_aps(1, 1000.0, derive_rng(3))
    assert layout.ap_positions.shape == (1, 2)


@pytest.mark.parametrize('count, side', [(0, 1000.0), (5, -1.0)])
def test_place_aps_rejects_bad_arguments(count, side):
    with pytest.raises(ConfigurationError):
        place_aps(count, side, derive_rng(0))


def test_layout_rejects_aps_outside_area():
    with pytest.raises(ConfigurationError):
        NetworkLayout(area_side=100.0, ap_positions=np.array([[150.0, 10.0]]))


def test_advance_moves_one_step(rng):
    layout = place_aps(4, 1000.0, rng)
    traj = advance(moving([500.0, 500.0]), layout)
    assert traj.position == pytest.approx([510.0, 500.0])
    assert traj.cycle_index == 1


def test_advance_zero_speed_keeps_position(rng):
    layout = place_aps(4, 1000.0, rng)
    traj = advance(moving([500.0, 500.0], speed=0.0), layout)
    assert traj.position == pytest.approx([500.0, 500.0])
    assert traj.cycle_index == 1


def test_advance_wraps_into_torus_coordinates(rng):
    layout = place_aps(20, 1000.0, rng)
    traj = advance(moving([795.0, 500.0]), layout)
    assert traj.position == pytest.approx([805.0, 500.0])
    expected = [torus_distance_bruteforce(traj.position, ap, 1000.0)
                for ap in layout.ap_positions]
    assert distances_2d(traj.position, layout) == pytest.approx(expected)


def test_advance_past_the_edge_keeps_distances_continuous(rng):
    layout = place_aps(20, 1000.0, rng)
    before = moving([995.0, 500.0])
    after = advance(before, layout)
    assert after.position == pytest.approx([5.0, 500.0])
    jump = np.abs(distances_2d(after.position, layout) - distances_2d(before.position, layout))
    assert np.all(jump <= before.step_length + 1e-9)


def test_start_trajectory_unit_heading(rng):
    layout = place_aps(4, 1000.0, rng)
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    assert np.linalg.norm(traj.heading) == pytest.approx(1.0)
    assert traj.position == pytest.approx([500.0, 500.0])


def test_distance_to_own_position_is_zero():
    layout = NetworkLayout(area_side=1000.0, ap_positions=np.array([[300.0, 400.0]]))
    assert distance_2d([300.0, 400.0], 0, layout) == 0.0


def test_distance_across_the_border():
    layout = NetworkLayout(area_side=1000.0, ap_positions=np.array([[990.0, 0.0]]))
    assert distance_2d([0.0, 0.0], 0, layout) == pytest.approx(10.0)


def test_distance_is_symmetric(rng):
    points = rng.uniform(0.0, 1000.0, size=(2, 2))
    forward = NetworkLayout(area_side=1000.0, ap_positions=points[1:])
    backward = NetworkLayout(area_side=1000.0, ap_positions=points[:1])
    assert distance_2d(points[0], 0, forward) == pytest.approx(distance_2d(points[1], 0, backward))


def test_distance_rejects_unknown_ap(rng):
    layout = place_aps(3, 1000.0, rng)
    with pytest.raises(ContractViolation):
        distance_2d([0.0, 0.0], 3, layout)


def test_min_image_matches_bruteforce(rng):
    layout = place_aps(30, 1000.0, rng)
    for user in rng.uniform(0.0, 1000.0, size=(10, 2)):
        expected = [torus_distance_bruteforce(user, ap, 1000.0) for ap in layout.ap_positions]
        assert distances_2d(user, layout) == pytest.approx(expected)
