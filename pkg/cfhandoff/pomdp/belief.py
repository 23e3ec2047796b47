"""Factorized beliefs over the channel states of a candidate AP pool.
"""
from functools import reduce
from dataclasses import dataclass

import numpy as np

from cfhandoff.errors import ContractViolation


# Marker for a pool AP whose state was not observed.
UNOBSERVED = -1


@dataclass(frozen=True)
class Belief:
    """Probability ``upsilon[j]`` that pool AP j is in the good state; the
    joint belief is the product over APs.
    """
    upsilon: np.ndarray

    def __post_init__(self):
        upsilon = np.asarray(self.upsilon, dtype=float)
        if upsilon.ndim != 1 or np.any(upsilon < 0) or np.any(upsilon > 1):
            raise ContractViolation('Belief entries must lie in [0, 1].')
        object.__setattr__(self, 'upsilon', upsilon)

    def __len__(self):
        return len(self.upsilon)


def expand_belief(belief):
    """Joint probability vector over the 2^n pool states.

    State i has AP j good iff bit (n - 1 - j) of i is set, so AP 0 is the
    most significant bit.

    Arguments:
    ----------
        belief (Belief or numpy.ndarray):
            Factorized belief or raw upsilon vector.

    Returns:
    --------
        omega (numpy.ndarray):
            Vector of length 2^n summing to one.
    """
    upsilon = belief.upsilon if isinstance(belief, Belief) else np.asarray(belief, dtype=float)
    factors = [np.array([1.0 - u, u]) for u in upsilon]
    return reduce(np.kron, factors, np.ones(1))


def propagate(upsilon, observed, p11, p01):
    """One factorized filtering step.

    Observed APs restart from p11 or p01, unobserved ones are pushed through
    their two-state chain.

    Arguments:
    ----------
        upsilon (numpy.ndarray):
            Current good-state probabilities.
        observed (numpy.ndarray):
            Observed labels per AP, ``UNOBSERVED`` where not observed.
        p11 (numpy.ndarray):
            Per-AP probability of staying good.
        p01 (numpy.ndarray):
            Per-AP probability of turning good from bad.

    Returns:
    --------
        (numpy.ndarray):
            Next good-state probabilities.
    """
    observed = np.asarray(observed)
    predicted = upsilon * p11 + (1.0 - upsilon) * p01
    updated = np.where(observed == 1, p11, np.where(observed == 0, p01, predicted))
    return np.clip(updated, 0.0, 1.0)


def belief_update(belief, action, observation, model, stage):
    """Updates the belief after serving with ``action`` and observing the
    channel states of the connected APs.

    Arguments:
    ----------
        belief (Belief):
            Belief at the previous stage.
        action (int):
            Action index of ``model``.
        observation (dict):
            Maps every connected AP (by AP index) to its observed label.
        model (cfhandoff.pomdp.model.PomdpModel):
            Model providing the transition probabilities.
        stage (int):
            Stage whose transition is applied, 1..T_H.

    Returns:
    --------
        belief (Belief)
    """
    connected = {model.pool[j] for j in model.action_positions(action)}
    if set(observation) != connected:
        raise ContractViolation('Observation must cover exactly the connected APs.')
    observed = np.full(len(model.pool), UNOBSERVED)
    for ap, label in observation.items():
        observed[model.pool.index(ap)] = int(label)
    return observe_and_predict(belief, observed, model, stage)


def observe_and_predict(belief, observed, model, stage):
    """Filtering step with an arbitrary set of observed pool APs.

    Used when the APs actually connected differ from the ones an action
    selects (e.g. when a handoff is withheld).
    """
    p11, p01 = model.stage_transitions(stage)
    return Belief(propagate(belief.upsilon, observed, p11, p01))
