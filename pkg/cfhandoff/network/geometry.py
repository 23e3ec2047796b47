"""Network geometry: AP placement over a square area, straight-line user
mobility with wrap-around, and minimum-image distances on the torus that the
wrap-around emulates.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from cfhandoff.errors import ConfigurationError, ContractViolation
from cfhandoff.utils import euclidean_distance


# Side of the square network area (m).
AREA_SIDE = 1000.0

# AP and user antenna heights (m).
AP_HEIGHT = 15.0
USER_HEIGHT = 1.5

# Boundary band of the wrap-around (m); positions live on the torus, so the
# band never changes a distance.
WRAP_MARGIN = 200.0


@dataclass(frozen=True)
class NetworkLayout:
    """AP deployment over a square of side ``area_side``.

    Parameters:
    -----------
        area_side (float):
            Side of the square area in meters.
        ap_positions (numpy.ndarray):
            Array of shape (B, 2) of AP coordinates in meters.
        ap_height (float):
            AP antenna height in meters.
        user_height (float):
            User antenna height in meters.
        wrap_margin (float):
            Width of the wrap-around band along the boundary.
    """
    area_side: float
    ap_positions: np.ndarray = field(repr=False)
    ap_height: float = AP_HEIGHT
    user_height: float = USER_HEIGHT
    wrap_margin: float = WRAP_MARGIN

    def __post_init__(self):
        positions = np.asarray(self.ap_positions, dtype=float)
        object.__setattr__(self, 'ap_positions', positions)
        if self.area_side <= 0:
            raise ConfigurationError('area_side must be positive.')
        if positions.ndim != 2 or positions.shape[1] != 2 or len(positions) == 0:
            raise ConfigurationError('ap_positions must have shape (B, 2), B >= 1.')
        if np.any(positions < 0) or np.any(positions > self.area_side):
            raise ConfigurationError('AP positions must lie inside the area.')
        if self.height_difference <= 0:
            raise ConfigurationError('AP height must exceed user height.')
        if not 0 <= self.wrap_margin < self.area_side / 2:
            raise ConfigurationError('wrap_margin must be below area_side / 2.')

    @property
    def n_aps(self):
        return len(self.ap_positions)

    @property
    def height_difference(self):
        """d_h, the AP/user height difference in meters."""
        return self.ap_height - self.user_height

    @property
    def center(self):
        return np.array([self.area_side / 2, self.area_side / 2])


@dataclass(frozen=True)
class TrajectoryState:
    """Position and kinematics of the user at decision cycle ``cycle_index``.

    Parameters:
    -----------
        position (numpy.ndarray):
            Planar position in meters, in torus coordinates.
        heading (numpy.ndarray):
            Unit direction of motion.
        speed (float):
            Speed in m/s.
        step_duration (float):
            Duration of a decision cycle in seconds.
        cycle_index (int):
            Decision cycle t.
    """
    position: np.ndarray
    heading: np.ndarray
    speed: float
    step_duration: float
    cycle_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'position', np.asarray(self.position, dtype=float))
        object.__setattr__(self, 'heading', np.asarray(self.heading, dtype=float))
        if abs(np.linalg.norm(self.heading) - 1.0) > 1e-12:
            raise ConfigurationError('heading must be a unit vector.')
        if self.speed < 0:
            raise ConfigurationError('speed must be non-negative.')
        if self.step_duration <= 0:
            raise ConfigurationError('step_duration must be positive.')

    @property
    def step_length(self):
        return self.speed * self.step_duration


def place_aps(count, area_side, rng, ap_height=AP_HEIGHT,
              user_height=USER_HEIGHT, wrap_margin=WRAP_MARGIN):
    """Draws ``count`` AP positions i.i.d. uniform over the square.

    Arguments:
    ----------
        count (int):
            Number of APs, B.
        area_side (float):
            Side of the square area in meters.
        rng (numpy.random.Generator):
            Seeded random source.

    Returns:
    --------
        layout (NetworkLayout)
    """
    if count < 1:
        raise ConfigurationError('At least one AP is required.')
    if area_side <= 0:
        raise ConfigurationError('area_side must be positive.')
    positions = rng.uniform(0.0, area_side, size=(count, 2))
    return NetworkLayout(area_side=area_side, ap_positions=positions,
                         ap_height=ap_height, user_height=user_height,
                         wrap_margin=wrap_margin)


def start_trajectory(layout, speed, step_duration, rng, offset=(0.0, 0.0)):
    """Starts a straight-line trip at the network center (plus ``offset``)
    with a heading drawn uniformly from the seeded generator.
    """
    angle = rng.uniform(0.0, 2 * np.pi)
    heading = np.array([np.cos(angle), np.sin(angle)])
    heading = heading / np.linalg.norm(heading)
    position = np.mod(layout.center + np.asarray(offset, dtype=float),
                      layout.area_side)
    return TrajectoryState(position=position, heading=heading, speed=speed,
                           step_duration=step_duration, cycle_index=0)


def advance(traj, layout):
    """Moves the user by one decision cycle.

    The new position is canonicalized to [0, area_side) on the torus.

    Arguments:
    ----------
        traj (TrajectoryState):
            Current trajectory state.
        layout (NetworkLayout):
            Network the user moves in.

    Returns:
    --------
        traj (TrajectoryState):
            State at ``cycle_index + 1``.
    """
    side = layout.area_side
    position = np.mod(traj.position + traj.heading * traj.step_length, side)
    return replace(traj, position=position, cycle_index=traj.cycle_index + 1)


def min_image_offsets(position, points, area_side):
    """Per-axis minimum-image separations between ``position`` and each row
    of ``points`` on a torus of side ``area_side``.
    """
    delta = np.abs(np.asarray(points, dtype=float) - np.asarray(position, dtype=float))
    delta = np.mod(delta, area_side)
    return np.minimum(delta, area_side - delta)


def distance_2d(traj_position, ap_index, layout):
    """Minimum-image planar distance between the user and one AP.

    Arguments:
    ----------
        traj_position (array_like object):
            User position in meters.
        ap_index (int):
            Index of the AP in ``layout.ap_positions``.
        layout (NetworkLayout):
            Network layout.

    Returns:
    --------
        (float):
            Distance in meters.
    """
    if not 0 <= ap_index < layout.n_aps:
        raise ContractViolation(f'AP index {ap_index} out of range.')
    offsets = min_image_offsets(traj_position, layout.ap_positions[ap_index],
                                layout.area_side)
    return float(np.hypot(*offsets))


def distances_2d(traj_position, layout):
    """Vectorized :func:`distance_2d` to every AP, shape (B,)."""
    offsets = min_image_offsets(traj_position, layout.ap_positions,
                                layout.area_side)
    return np.hypot(offsets[:, 0], offsets[:, 1])


def inter_ap_distances(layout):
    """Matrix of minimum-image distances between every pair of APs."""
    positions = layout.ap_positions
    delta = np.abs(positions[:, None, :] - positions[None, :, :])
    delta = np.minimum(delta, layout.area_side - delta)
    return np.hypot(delta[..., 0], delta[..., 1])


def torus_distance_bruteforce(point, other_point, area_side):
    """Smallest Euclidean distance between ``point`` and the nine translated
    copies of ``other_point``. Reference for the minimum-image shortcut.
    """
    other_point = np.asarray(other_point, dtype=float)
    shifts = (-area_side, 0.0, area_side)
    return min(euclidean_distance(point, other_point + np.array([dx, dy]))
               for dx in shifts for dy in shifts)
