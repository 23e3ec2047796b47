"""Handoff decisions from POMDP policies.

``derive_policy`` splits the choice of serving APs into one small POMDP per
AP outside the base set and keeps the best one. ``run_pomdp_plain`` applies
derived policies for T_H cycles at a time; ``run_pomdp_ho_min`` re-derives
every cycle but only hands off when the rate of the previous cycle fell below
the threshold.
"""
from math import comb
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from cfhandoff.errors import ConfigurationError, ContractViolation
from cfhandoff.network.channel import quantize_state
from cfhandoff.pomdp.belief import belief_update, observe_and_predict, UNOBSERVED
from cfhandoff.pomdp.model import build_model, reward_matrix
from cfhandoff.pomdp.solver import solve_pbvi, act
from cfhandoff.utils import get_logger, derive_rng, top_k


logger = get_logger(__name__)

# Number of APs serving the user at every cycle.
B_CON = 5

# Rate (nats/s/Hz) below which the threshold-triggered schemes hand off.
R_THRESHOLD = 7.0

SCHEME_NAMES = ('pomdp_plain', 'pomdp_ho_min', 'lsf_time', 'lsf_threshold')


@dataclass(frozen=True)
class EngineConfig:
    """Parameters of a handoff scheme.

    Parameters:
    -----------
        b_con (int):
            Number of serving APs.
        horizon (int):
            Policy horizon T_H in cycles.
        r_threshold (float):
            Rate threshold in nats/s/Hz.
        gamma (float):
            Discount factor.
        scheme (str):
            One of ``SCHEME_NAMES``.
        belief_budget (int):
            Belief points per sub-problem.
        expansion_depth (int):
            Forward-simulation depth seeding the belief set.
        observation_samples (int or None):
            Sampled observations per action during expansion.
        initial_belief (str):
            ``closed_form`` or ``uniform`` for unobserved APs.
        reuse_policy (bool):
            Let the rate-controlled scheme reuse a policy while its base set
            is unchanged.
        workers (int):
            Threads solving sub-problems concurrently.
    """
    b_con: int = B_CON
    horizon: int = 10
    r_threshold: float = R_THRESHOLD
    gamma: float = 0.95
    scheme: str = 'pomdp_ho_min'
    belief_budget: int = 128
    expansion_depth: int = 3
    observation_samples: int = 3
    initial_belief: str = 'closed_form'
    reuse_policy: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.b_con < 1 or self.horizon < 1 or self.r_threshold < 0:
            raise ConfigurationError('Need B_con >= 1, T_H >= 1 and R_threshold >= 0.')
        if not 0 <= self.gamma < 1:
            raise ConfigurationError('gamma must lie in [0, 1).')
        if self.scheme not in SCHEME_NAMES:
            raise ConfigurationError(f'Unknown scheme {self.scheme!r}.')


@dataclass(frozen=True)
class HandoffDecision:
    """Serving set chosen at ``cycle`` and the number of APs added to it."""
    cycle: int
    serving_set: tuple
    n_ho: int
    triggered: bool


@dataclass
class DerivedPolicy:
    """Best sub-problem found by :func:`derive_policy`."""
    policy: object = field(repr=False)
    model: object = field(repr=False)
    pool: tuple
    value: float
    n_subproblems: int


class SubproblemResult:
    def __init__(self, index, model, policy, value):
        """Solved sub-problem of one candidate pool.

        Comparison operators for ``SubproblemResult`` are determined by the
        total expected reward, the lower index winning ties.

        Parameters:
        -----------
            index (int):
                Position of the extra AP in the list of other APs.
            model (cfhandoff.pomdp.model.PomdpModel):
                Sub-problem model.
            policy (cfhandoff.pomdp.solver.StagePolicy):
                Solved policy.
            value (float):
                Total expected reward from the initial belief.
        """
        self.index = index
        self.model = model
        self.policy = policy
        self.value = value

    def __key(self):
        return (self.value, -self.index)

    def __eq__(self, other):
        if isinstance(other, self.__class__) and \
           self.__key() == other.__key():
            return True
        return False

    def __gt__(self, other):
        if isinstance(other, self.__class__) and \
           self.__key() > other.__key():
            return True
        return False

    def __lt__(self, other):
        if isinstance(other, self.__class__) and \
           self.__key() < other.__key():
            return True
        return False

    def __hash__(self):
        return hash(self.__key())


def count_handoffs(serving_set, previous):
    """Number of APs in ``serving_set`` that were not serving before."""
    return len(set(serving_set) - set(previous))


def initial_serving(trip, b_con):
    """Serving set at cycle 0: the B_con strongest APs."""
    if trip.n_aps <= b_con:
        raise ConfigurationError(f'Need more than B_con={b_con} APs, got {trip.n_aps}.')
    return top_k(trip.lsf[0], b_con)


def derive_policy(trip, cycle, base_set, known_lsf, cfg, seed_key=(0,)):
    """Derives the handoff policy valid from ``cycle`` on.

    Every AP outside ``base_set`` in turn joins the base set to form a
    candidate pool; each pool's POMDP is built and solved and the pool with
    the largest total expected reward wins.

    Arguments:
    ----------
        trip (cfhandoff.handoff.trip.Trip):
            Ground truth, used for the predicted distances.
        cycle (int):
            First cycle the policy acts at.
        base_set (iterable of int):
            B_con APs every candidate pool contains.
        known_lsf (dict):
            Observed LSF of base APs at ``cycle - 1``; base APs missing from
            it are treated as unobserved.
        cfg (EngineConfig):
            Scheme parameters.
        seed_key (tuple):
            Prefix of the random streams of the sub-problems.

    Returns:
    --------
        derived (DerivedPolicy)
    """
    base = sorted(int(b) for b in base_set)
    if len(base) != cfg.b_con:
        raise ContractViolation(f'Base set has {len(base)} APs, expected {cfg.b_con}.')
    others = [b for b in range(trip.n_aps) if b not in base]
    if not others:
        raise ConfigurationError(f'Need more than B_con={cfg.b_con} APs.')

    params = trip.params
    known_states = {b: quantize_state(known_lsf[b], params.quantizer)
                    for b in base if b in known_lsf}
    distances = trip.predicted_distances(cycle, cfg.horizon)
    rewards = {}

    def solve(index):
        pool = tuple(sorted(base + [others[index]]))
        loads = tuple(trip.loads[list(pool)])
        if loads not in rewards:
            rewards[loads] = reward_matrix(len(pool), cfg.b_con, np.array(loads), params)
        model = build_model(pool, known_states, distances[:, list(pool)], params, cfg.b_con,
                            horizon=cfg.horizon, discount=cfg.gamma, loads=loads,
                            initial=cfg.initial_belief, rewards=rewards[loads])
        policy, value = solve_pbvi(model, cfg.belief_budget, cfg.expansion_depth,
                                   derive_rng(*seed_key, index), cfg.observation_samples)
        logger.debug(f'Cycle {cycle}: pool {pool} value {value:.4f}.')
        return SubproblemResult(index, model, policy, value)

    if cfg.workers > 1:
        # The first solve fills the reward cache the threads share.
        results = [solve(0)]
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            results += list(executor.map(solve, range(1, len(others))))
    else:
        results = [solve(index) for index in range(len(others))]

    best = max(results)
    return DerivedPolicy(policy=best.policy, model=best.model, pool=best.model.pool,
                         value=best.value, n_subproblems=len(results))


def run_pomdp_plain(trip, cfg, seed=0):
    """Applies derived policies for T_H cycles before re-deriving them from
    the current serving set.

    Every epoch starts from the new model's initial belief, built from the
    serving-set states observed at the previous cycle.
    """
    serving = initial_serving(trip, cfg.b_con)
    decisions = []
    t = 1
    while t <= trip.n_cycles:
        known = {b: trip.lsf[t - 1][b] for b in serving}
        derived = derive_policy(trip, t, serving, known, cfg, seed_key=(seed, t))
        model = derived.model
        belief = model.initial_belief

        for stage in range(1, cfg.horizon + 1):
            if t > trip.n_cycles:
                break
            action = act(derived.policy, belief, stage)
            selected = model.action_aps(action)
            decisions.append(HandoffDecision(cycle=t, serving_set=selected,
                                             n_ho=count_handoffs(selected, serving),
                                             triggered=True))
            serving = selected
            if stage < cfg.horizon:
                belief = belief_update(belief, action, trip.states(t, selected), model,
                                       stage + 1)
            t += 1
    return decisions


def run_pomdp_ho_min(trip, cfg, seed=0):
    """Re-derives the policy every cycle from the potential serving set and
    hands off to the policy's choice only if the previous cycle's rate fell
    below ``cfg.r_threshold``.
    """
    serving = initial_serving(trip, cfg.b_con)
    potential = serving
    rate = trip.rate(serving, 0)
    decisions = []
    cache = None
    for t in range(1, trip.n_cycles + 1):
        if cfg.reuse_policy and cache is not None and cache['base'] == potential \
                and t - cache['start'] < cfg.horizon:
            model = cache['derived'].model
            observed = np.full(len(model.pool), UNOBSERVED)
            for j, ap in enumerate(model.pool):
                if ap in serving:
                    observed[j] = quantize_state(trip.lsf[t - 1][ap], trip.params.quantizer)
            stage = t - cache['start'] + 1
            belief = observe_and_predict(cache['belief'], observed, model, stage)
        else:
            known = {b: trip.lsf[t - 1][b] for b in serving}
            derived = derive_policy(trip, t, potential, known, cfg, seed_key=(seed, t))
            cache = {'base': potential, 'start': t, 'derived': derived}
            stage, belief = 1, derived.model.initial_belief

        derived = cache['derived']
        cache['belief'] = belief
        potential = derived.model.action_aps(act(derived.policy, belief, stage))

        triggered = rate < cfg.r_threshold
        selected = potential if triggered else serving
        decisions.append(HandoffDecision(cycle=t, serving_set=selected,
                                         n_ho=count_handoffs(selected, serving),
                                         triggered=triggered))
        serving = selected
        rate = trip.rate(serving, t)
    return decisions


def complexity_summary(n_aps, b_con):
    """Sizes of the monolithic POMDP against the divide-and-conquer split.

    Arguments:
    ----------
        n_aps (int):
            Number of APs, B.
        b_con (int):
            Number of serving APs.

    Returns:
    --------
        (dict):
            State, action and observation counts of both formulations.
    """
    if not 1 <= b_con < n_aps:
        raise ConfigurationError('Need 1 <= B_con < B.')
    pool = b_con + 1
    return {
        'monolithic': {'states': 2 ** n_aps, 'actions': comb(n_aps, b_con),
                       'observations': 2 ** n_aps},
        'divide_and_conquer': {'subproblems': n_aps - b_con, 'states': 2 ** pool,
                               'actions': comb(pool, b_con), 'observations': 2 ** pool},
    }
