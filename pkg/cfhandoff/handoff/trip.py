"""Ground truth of one user trip: positions along the straight line and the
LSF towards every AP at every decision cycle.

A trip is generated once per trial and shared by every handoff scheme, so
schemes never perturb the channel they are compared on.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from cfhandoff.network.channel import init_lsf, step_lsf, quantize_state
from cfhandoff.network.geometry import advance, distances_2d, start_trajectory
from cfhandoff.radio.rate import snr_rate, rate_lb, ServingConfig


@dataclass
class Trip:
    """Trajectory and LSF trace of a trip of ``n_cycles`` decision cycles.

    Parameters:
    -----------
        layout (cfhandoff.network.geometry.NetworkLayout):
            AP deployment.
        trajectory (list of cfhandoff.network.geometry.TrajectoryState):
            States at cycles 0..n_cycles; extended on demand for predictions
            past the end of the trip.
        lsf (numpy.ndarray):
            Shape (n_cycles + 1, B), true LSF at every cycle.
        params (cfhandoff.pomdp.model.LinkParams):
            Channel and radio parameters.
        loads (numpy.ndarray, optional):
            Per-AP loads, defaults to one.
        interferers (tuple, optional):
            Static interfering users for multi-user rates.
    """
    layout: object = field(repr=False)
    trajectory: list = field(repr=False)
    lsf: np.ndarray = field(repr=False)
    params: object = field(repr=False)
    loads: np.ndarray = field(default=None, repr=False)
    interferers: tuple = ()

    def __post_init__(self):
        if self.loads is None:
            self.loads = np.ones(self.layout.n_aps)

    @property
    def n_cycles(self):
        return len(self.lsf) - 1

    @property
    def n_aps(self):
        return self.layout.n_aps

    def state_at(self, cycle):
        """Trajectory state at ``cycle``, extrapolating the straight line."""
        while len(self.trajectory) <= cycle:
            self.trajectory.append(advance(self.trajectory[-1], self.layout))
        return self.trajectory[cycle]

    def distances(self, cycle):
        return distances_2d(self.state_at(cycle).position, self.layout)

    def predicted_distances(self, first, horizon):
        """Distances to every AP at cycles ``first - 1 .. first - 1 + horizon``,
        shape (horizon + 1, B)."""
        return np.array([self.distances(c) for c in range(first - 1, first + horizon)])

    def states(self, cycle, aps):
        """Quantized labels of ``aps`` at ``cycle``."""
        return {b: quantize_state(self.lsf[cycle][b], self.params.quantizer) for b in aps}

    def rate(self, serving_set, cycle):
        """Single-user rate of ``serving_set`` at ``cycle`` on the true LSF."""
        aps = list(serving_set)
        return snr_rate(self.lsf[cycle][aps], self.loads[aps], self.params.aging,
                        self.params.radio)

    def multi_user_rate(self, serving_set, cycle):
        """Lower-bound rate including the interference of ``interferers``."""
        serving = ServingConfig(serving_set=tuple(serving_set), lsf=self.lsf[cycle],
                                loads=self.loads)
        interferers = tuple(replace(other, lsf_to_typical=self.lsf[cycle])
                            for other in self.interferers)
        return rate_lb(serving, interferers, self.params.aging, self.params.radio)


def generate_trip(layout, params, n_cycles, heading_rng, lsf_rng, offset=(0.0, 0.0)):
    """Simulates the ground truth of a trip.

    Arguments:
    ----------
        layout (cfhandoff.network.geometry.NetworkLayout):
            AP deployment.
        params (cfhandoff.pomdp.model.LinkParams):
            Channel and radio parameters.
        n_cycles (int):
            Number of decision cycles after cycle 0.
        heading_rng (numpy.random.Generator):
            Stream for the heading.
        lsf_rng (numpy.random.Generator):
            Stream for the shadowing.
        offset (tuple):
            Start position relative to the network center.

    Returns:
    --------
        trip (Trip)
    """
    traj = start_trajectory(layout, params.mobility.speed, params.mobility.step_duration,
                            heading_rng, offset)
    process = init_lsf(layout, params.shadowing, params.path_loss, traj, lsf_rng)
    trajectory, lsf = [traj], [process.lsf]
    for _ in range(n_cycles):
        traj = advance(traj, layout)
        process = step_lsf(process, traj, lsf_rng)
        trajectory.append(traj)
        lsf.append(process.lsf)
    return Trip(layout=layout, trajectory=trajectory, lsf=np.array(lsf), params=params)
