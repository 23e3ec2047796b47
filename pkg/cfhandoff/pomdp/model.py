"""Finite-horizon POMDP of one candidate AP pool: the user keeps B_con of the
pool's APs connected, observes their channel states exactly, and collects the
single-user reward of the quantized states.
"""
from functools import reduce
from itertools import combinations
from dataclasses import dataclass, field

import numpy as np

from cfhandoff.errors import ConfigurationError
from cfhandoff.network.channel import trans_probs, prob_good, GOOD
from cfhandoff.pomdp.belief import Belief
from cfhandoff.radio.rate import reward


# Discount factor and horizon of a derived policy.
DISCOUNT = 0.95
HORIZON = 10

# Initial beliefs of APs without an observed state.
INITIAL_BELIEFS = ('closed_form', 'uniform')


@dataclass(frozen=True)
class LinkParams:
    """Channel and radio parameters a model is built from.

    Parameters:
    -----------
        quantizer (cfhandoff.network.channel.StateQuantizer)
        shadowing (cfhandoff.network.channel.ShadowingParams)
        path_loss (cfhandoff.network.channel.PathLossParams)
        mobility (cfhandoff.network.channel.MobilityParams)
        radio (cfhandoff.radio.rate.RadioParams)
        aging (cfhandoff.network.channel.AgingProfile)
    """
    quantizer: object
    shadowing: object
    path_loss: object
    mobility: object
    radio: object
    aging: object = field(hash=False, compare=False)


@dataclass
class PomdpModel:
    """Time-indexed POMDP over a candidate AP pool.

    ``trans[k - 1, j]`` holds (p11, p01) of pool AP j for the transition into
    stage k, ``obs_marginals[k - 1, j]`` the probability of a good state at
    stage k.
    """
    pool: tuple
    b_con: int
    horizon: int
    discount: float
    states: np.ndarray = field(repr=False)
    actions: np.ndarray = field(repr=False)
    trans: np.ndarray = field(repr=False)
    obs_marginals: np.ndarray = field(repr=False)
    reward_table: np.ndarray = field(repr=False)
    initial_belief: Belief = field(repr=False)

    @property
    def n_states(self):
        return len(self.states)

    @property
    def n_actions(self):
        return len(self.actions)

    @property
    def n_observations(self):
        return self.n_states

    def action_positions(self, action):
        """Pool positions selected by an action."""
        return tuple(int(j) for j in np.flatnonzero(self.actions[action]))

    def action_aps(self, action):
        """AP indices selected by an action."""
        return tuple(self.pool[j] for j in self.action_positions(action))

    def stage_transitions(self, stage):
        if not 1 <= stage <= self.horizon:
            raise ConfigurationError(f'Stage {stage} outside 1..{self.horizon}.')
        return self.trans[stage - 1, :, 0], self.trans[stage - 1, :, 1]

    def transition_matrix(self, stage):
        """Joint transition matrix into ``stage``, rows indexed by the
        previous state."""
        p11, p01 = self.stage_transitions(stage)
        blocks = [np.array([[1.0 - b, b], [1.0 - g, g]]) for g, b in zip(p11, p01)]
        return reduce(np.kron, blocks, np.ones((1, 1)))

    def observation_tensor(self, stage=1, literal=False):
        """Observation probabilities of shape (actions, states, observations).

        The marginalized form only carries the states of the connected APs
        (2^B_con observations); the literal form also draws a label for each
        unconnected AP from its good-state marginal (2^n observations).
        """
        if not literal:
            tensor = np.zeros((self.n_actions, self.n_states, 2 ** self.b_con))
            for a in range(self.n_actions):
                connected = self.states[:, self.actions[a]]
                index = connected @ (2 ** np.arange(self.b_con)[::-1])
                tensor[a, np.arange(self.n_states), index] = 1.0
            return tensor

        marginals = self.obs_marginals[stage - 1]
        tensor = np.zeros((self.n_actions, self.n_states, self.n_states))
        for a in range(self.n_actions):
            mask = self.actions[a]
            for o, labels in enumerate(self.states):
                unconnected = np.where(labels[~mask] == GOOD, marginals[~mask],
                                       1.0 - marginals[~mask])
                match = np.all(self.states[:, mask] == labels[mask], axis=1)
                tensor[a, :, o] = match * np.prod(unconnected)
        return tensor


def enumerate_states(n):
    """All 2^n label vectors, AP 0 as most significant bit."""
    index = np.arange(2 ** n)[:, None]
    return (index >> np.arange(n - 1, -1, -1)[None, :]) & 1


def enumerate_actions(n, b_con):
    """Binary selection vectors of every B_con-subset, lexicographic order."""
    return np.array([[j in subset for j in range(n)]
                     for subset in combinations(range(n), b_con)], dtype=bool)


def reward_matrix(n, b_con, loads, params):
    """Reward of every (state, action) pair for a pool of ``n`` APs."""
    states = enumerate_states(n)
    actions = enumerate_actions(n, b_con)
    table = np.zeros((len(states), len(actions)))
    for s, state in enumerate(states):
        for a, action in enumerate(actions):
            table[s, a] = reward(state, action, loads, params.aging, params.radio,
                                 params.quantizer, b_con)
    return table


def build_model(pool, known_states, predicted_distances, params, b_con,
                horizon=HORIZON, discount=DISCOUNT, loads=None,
                initial='closed_form', rewards=None):
    """Constructs the POMDP of one candidate pool.

    Arguments:
    ----------
        pool (sequence of int):
            AP indices of the candidate pool, size B_con + 1.
        known_states (dict):
            Observed labels of base APs, keyed by AP index.
        predicted_distances (numpy.ndarray):
            Shape (T_H + 1, n); row 0 is the cycle the known states were
            observed at, row k the distance at stage k.
        params (LinkParams):
            Channel and radio parameters.
        b_con (int):
            Number of connected APs.
        horizon (int):
            Number of stages, T_H.
        discount (float):
            Discount factor in [0, 1).
        loads (array_like object, optional):
            Loads of the pool APs, defaults to one.
        initial (str):
            ``closed_form`` or ``uniform`` belief for unobserved APs.
        rewards (numpy.ndarray, optional):
            Precomputed :func:`reward_matrix`.

    Returns:
    --------
        model (PomdpModel)
    """
    pool = tuple(int(b) for b in pool)
    n = len(pool)
    if n != b_con + 1:
        raise ConfigurationError(f'Pool of {n} APs does not match B_con={b_con}.')
    if horizon < 1 or not 0 <= discount < 1:
        raise ConfigurationError('Need T_H >= 1 and discount in [0, 1).')
    if initial not in INITIAL_BELIEFS:
        raise ConfigurationError(f'Unknown initial belief {initial!r}.')
    distances = np.asarray(predicted_distances, dtype=float)
    if distances.ndim != 2 or distances.shape[0] < horizon + 1 or distances.shape[1] != n:
        raise ConfigurationError('Missing distance prediction for some stage.')

    trans = np.zeros((horizon, n, 2))
    marginals = np.zeros((horizon, n))
    for k in range(1, horizon + 1):
        for j in range(n):
            trans[k - 1, j] = trans_probs(float(distances[k - 1, j]), float(distances[k, j]),
                                          params.quantizer, params.shadowing,
                                          params.path_loss, params.mobility)
            marginals[k - 1, j] = prob_good(distances[k, j], params.quantizer,
                                            params.shadowing, params.path_loss)

    upsilon = np.zeros(n)
    for j, ap in enumerate(pool):
        if ap in known_states:
            upsilon[j] = 1.0 if known_states[ap] == GOOD else 0.0
        elif initial == 'uniform':
            upsilon[j] = 0.5
        else:
            upsilon[j] = prob_good(distances[0, j], params.quantizer,
                                   params.shadowing, params.path_loss)

    loads = np.ones(n) if loads is None else np.asarray(loads, dtype=float)
    if rewards is None:
        rewards = reward_matrix(n, b_con, loads, params)

    return PomdpModel(pool=pool, b_con=b_con, horizon=horizon, discount=discount,
                      states=enumerate_states(n), actions=enumerate_actions(n, b_con),
                      trans=trans, obs_marginals=marginals, reward_table=rewards,
                      initial_belief=Belief(upsilon))

