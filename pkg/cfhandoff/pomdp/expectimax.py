"""Exhaustive action/observation tree search on small models, the reference
the point-based solver is checked against.
"""
from dataclasses import replace

import numpy as np

from cfhandoff.errors import ContractViolation
from cfhandoff.pomdp.belief import expand_belief


# Largest pool and horizon the exhaustive search accepts.
MAX_POOL = 3
MAX_HORIZON = 4


def bayes_update(omega, action, observation, model, stage, literal=True):
    """Exact Bayes filter of a joint belief.

    Conditions ``omega`` (a belief at ``stage``) on ``observation`` under
    ``action`` and predicts it into ``stage + 1``.

    Returns:
    --------
        (tuple):
            (probability of the observation, next joint belief or None).
    """
    likelihood = model.observation_tensor(stage, literal=literal)[action, :, observation]
    joint = omega * likelihood
    chance = joint.sum()
    if chance <= 0:
        return 0.0, None
    posterior = joint / chance
    if stage < model.horizon:
        posterior = posterior @ model.transition_matrix(stage + 1)
    return float(chance), posterior


def _value(omega, stage, model):
    best = -np.inf
    n_obs = model.n_states
    for a in range(model.n_actions):
        total = float(omega @ model.reward_table[:, a])
        if stage < model.horizon:
            future = 0.0
            for o in range(n_obs):
                chance, posterior = bayes_update(omega, a, o, model, stage)
                if chance > 0:
                    future += chance * _value(posterior, stage + 1, model)
            total += model.discount * future
        best = max(best, total)
    return best


def exact_expectimax(model, horizon=None):
    """Optimal discounted expected reward from the model's initial belief.

    Arguments:
    ----------
        model (cfhandoff.pomdp.model.PomdpModel):
            Model with at most 3 pool APs.
        horizon (int, optional):
            Number of stages searched (at most 4 and at most T_H), defaults
            to the model horizon.

    Returns:
    --------
        (float):
            Optimal value.
    """
    horizon = model.horizon if horizon is None else horizon
    if len(model.pool) > MAX_POOL or horizon > MAX_HORIZON or horizon > model.horizon:
        raise ContractViolation(f'Exhaustive search limited to {MAX_POOL} APs and '
                                f'{MAX_HORIZON} stages.')
    if horizon < model.horizon:
        model = replace(model, horizon=horizon, trans=model.trans[:horizon],
                        obs_marginals=model.obs_marginals[:horizon])
    return _value(expand_belief(model.initial_belief), 1, model)
