"""Finite-horizon point-based value iteration over factorized pool beliefs.

Each stage keeps a set of alpha vectors tagged with the action whose backup
produced them; the value of a belief at a stage is the best alpha vector
dotted with the expanded belief.
"""
from dataclasses import dataclass, field

import numpy as np

from scipy.spatial.distance import cdist

from cfhandoff.errors import ContractViolation
from cfhandoff.pomdp.belief import Belief, expand_belief, propagate, UNOBSERVED
from cfhandoff.utils import get_logger


logger = get_logger(__name__)

# Number of belief points backed up per stage.
BELIEF_BUDGET = 128

# Depth of the forward simulation seeding the belief set.
EXPANSION_DEPTH = 3

# Observations sampled per action when expanding a belief; None enumerates
# every observation with positive probability.
OBSERVATION_SAMPLES = 3

# Relative tolerance under which two alpha values count as tied.
TIE_TOLERANCE = 1e-12


@dataclass
class AlphaSet:
    """Alpha vectors of one stage, ``vectors[k]`` tagged with ``actions[k]``."""
    vectors: np.ndarray = field(repr=False)
    actions: np.ndarray

    def __len__(self):
        return len(self.actions)


@dataclass
class StagePolicy:
    """Alpha sets of stages 1..T_H (``stages[0]`` is stage 1)."""
    pool: tuple
    stages: list = field(repr=False)

    @property
    def horizon(self):
        return len(self.stages)


def _stage_beliefs(model, rng, depth, samples, limit):
    """Beliefs reachable from the initial belief in up to ``depth`` stages."""
    reached = []
    frontier = [model.initial_belief.upsilon]
    n_obs = 2 ** model.b_con
    for stage in range(2, min(depth + 1, model.horizon) + 1):
        p11, p01 = model.stage_transitions(stage)
        successors = []
        for upsilon in frontier:
            for a in range(model.n_actions):
                positions = np.array(model.action_positions(a))
                if samples is None:
                    labels = (np.arange(n_obs)[:, None] >> np.arange(model.b_con - 1, -1, -1)) & 1
                    chance = np.where(labels == 1, upsilon[positions], 1.0 - upsilon[positions])
                    labels = labels[np.prod(chance, axis=1) > 0]
                else:
                    draws = rng.random((samples, model.b_con)) < upsilon[positions]
                    labels = np.unique(draws.astype(int), axis=0)
                for label in labels:
                    observed = np.full(len(upsilon), UNOBSERVED)
                    observed[positions] = label
                    successors.append(propagate(upsilon, observed, p11, p01))
        if not successors:
            break
        frontier = np.unique(np.array(successors), axis=0)
        if len(frontier) > limit:
            frontier = frontier[np.sort(rng.permutation(len(frontier))[:limit])]
        reached.extend(frontier)
    return reached


def build_belief_set(model, belief_budget=BELIEF_BUDGET, expansion_depth=EXPANSION_DEPTH,
                     rng=None, observation_samples=OBSERVATION_SAMPLES):
    """Selects the belief points PBVI backs up.

    The set holds every corner belief, the initial belief and, within the
    budget, the reachable beliefs farthest (in L1 distance) from the points
    already chosen.

    Arguments:
    ----------
        model (cfhandoff.pomdp.model.PomdpModel):
            Model to plan for.
        belief_budget (int):
            Maximum number of points.
        expansion_depth (int):
            Stages simulated forward from the initial belief.
        rng (numpy.random.Generator, optional):
            Source for sampled observations and corner subsampling.
        observation_samples (int or None):
            Observations sampled per action, None to enumerate.

    Returns:
    --------
        beliefs (numpy.ndarray):
            Expanded beliefs of shape (N, 2^n).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    corners = np.eye(model.n_states)
    initial = expand_belief(model.initial_belief)

    if belief_budget < model.n_states + 1:
        logger.warning(f'Belief budget {belief_budget} below {model.n_states} corners; '
                       f'subsampling corners.')
        keep = np.sort(rng.choice(model.n_states, size=max(belief_budget - 1, 0),
                                  replace=False))
        return np.vstack([corners[keep], initial])

    selected = np.vstack([corners, initial])
    reached = _stage_beliefs(model, rng, expansion_depth, observation_samples, belief_budget)
    if not reached:
        return selected

    candidates = np.array([expand_belief(upsilon) for upsilon in reached])
    gap = cdist(candidates, selected, 'cityblock').min(axis=1)
    chosen = []
    while len(selected) + len(chosen) < belief_budget:
        best = int(np.argmax(gap))
        if gap[best] <= 0:
            break
        chosen.append(best)
        gap = np.minimum(gap, cdist(candidates, candidates[best:best + 1], 'cityblock')[:, 0])
    return np.vstack([selected, candidates[chosen]]) if chosen else selected


def _backup(beliefs, next_set, transition, observations, rewards, discount):
    """Point-based Bellman backup of one stage."""
    if transition is None:
        projected = np.zeros((1, rewards.shape[0]))
    else:
        projected = next_set.vectors @ transition.T
    scores = np.einsum('bs,aso,ks->baok', beliefs, observations, projected, optimize=True)
    best = np.argmax(scores, axis=3)
    future = np.einsum('aso,baos->bas', observations, projected[best], optimize=True)
    candidates = rewards.T[None, :, :] + discount * future
    values = np.einsum('bs,bas->ba', beliefs, candidates)
    action = np.argmax(values, axis=1)
    vectors = candidates[np.arange(len(beliefs)), action]
    tagged = np.unique(np.column_stack([action, vectors]), axis=0)
    return AlphaSet(vectors=tagged[:, 1:], actions=tagged[:, 0].astype(int))


def solve_pbvi(model, belief_budget=BELIEF_BUDGET, expansion_depth=EXPANSION_DEPTH,
               rng=None, observation_samples=OBSERVATION_SAMPLES, literal=False):
    """Solves the finite-horizon POMDP by point-based backward induction.

    Arguments:
    ----------
        model (cfhandoff.pomdp.model.PomdpModel):
            Model to solve.
        belief_budget (int):
            Maximum number of belief points.
        expansion_depth (int):
            Stages simulated forward to seed the belief set.
        rng (numpy.random.Generator, optional):
            Stream of this sub-problem.
        observation_samples (int or None):
            Observations sampled per action during expansion.
        literal (bool):
            Back up with the literal observation model (labels drawn for
            unconnected APs) instead of the marginalized one.

    Returns:
    --------
        (tuple):
            (StagePolicy, value of the initial belief).
    """
    beliefs = build_belief_set(model, belief_budget, expansion_depth, rng, observation_samples)
    observations = None if literal else model.observation_tensor()

    stages = [None] * model.horizon
    next_set = None
    for stage in range(model.horizon, 0, -1):
        if literal:
            observations = model.observation_tensor(stage, literal=True)
        transition = model.transition_matrix(stage + 1) if stage < model.horizon else None
        next_set = _backup(beliefs, next_set, transition, observations,
                           model.reward_table, model.discount)
        stages[stage - 1] = next_set
        logger.debug(f'Stage {stage}: {len(next_set)} alpha vectors.')

    policy = StagePolicy(pool=model.pool, stages=stages)
    value = float(np.max(stages[0].vectors @ expand_belief(model.initial_belief)))
    return policy, value


def act(policy, belief, stage):
    """Action of the alpha vector maximizing the value of ``belief`` at
    ``stage``; ties go to the lowest action index.
    """
    if not 1 <= stage <= policy.horizon:
        raise ContractViolation(f'Stage {stage} outside 1..{policy.horizon}.')
    alphas = policy.stages[stage - 1]
    omega = expand_belief(belief) if isinstance(belief, Belief) else np.asarray(belief)
    values = alphas.vectors @ omega
    best = values.max()
    tied = values >= best - TIE_TOLERANCE * max(1.0, abs(best))
    return int(alphas.actions[tied].min())


def policy_value(policy, belief, stage=1):
    """Value of ``belief`` under the stage's alpha set."""
    omega = expand_belief(belief) if isinstance(belief, Belief) else np.asarray(belief)
    return float(np.max(policy.stages[stage - 1].vectors @ omega))
