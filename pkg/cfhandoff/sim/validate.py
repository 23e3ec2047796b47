"""Oracle suites checking the closed forms and the solver against brute force.

Each suite returns a :class:`SuiteResult`; :func:`run_suites` raises
:class:`ValidationFailure` when any of them fails.
"""
from dataclasses import dataclass, field

import numpy as np

from cfhandoff.errors import ValidationFailure
from cfhandoff.network.channel import (ShadowingParams, MobilityParams, GOOD,
                                       path_loss, prob_good, trans_probs, bvn_upper_rect,
                                       lsf_values)
from cfhandoff.pomdp.belief import Belief, belief_update, expand_belief
from cfhandoff.pomdp.expectimax import exact_expectimax, bayes_update
from cfhandoff.pomdp.model import build_model
from cfhandoff.pomdp.solver import solve_pbvi
from cfhandoff.radio.oracle import mc_signal_oracle
from cfhandoff.radio.rate import ServingConfig, Interferer, signal_powers
from cfhandoff.sim.config import ExperimentConfig
from cfhandoff.utils import get_logger, derive_rng


logger = get_logger(__name__)

# Tolerances of the oracle comparisons.
RATE_RELATIVE_TOLERANCE = 0.03
RATE_SIGMAS = 3.0
TRANSITION_TOLERANCE = 5e-3
ORTHANT_TOLERANCE = 1e-8
BVN_MC_TOLERANCE = 1e-3
SOLVER_TOLERANCE = 1e-9
BELIEF_TOLERANCE = 1e-12

# Distance pairs (m) one 10 m step apart, straddling the quantizer threshold.
DISTANCE_PAIRS = ((100.0, 110.0), (120.0, 130.0), (140.0, 150.0),
                  (150.0, 160.0), (180.0, 190.0))
IOTAS = (0.0, 0.5, 1.0)

# (a, b, correlation) points of the bivariate normal Monte Carlo check.
BVN_POINTS = ((0.5, -0.3, 0.6), (-1.0, 1.0, -0.4), (1.2, 0.8, 0.95), (0.0, 0.7, 0.2))

SAMPLE_CHUNK = 1_000_000

# Largest accepted ratio of the threshold-triggered POMDP scheme's cumulative
# handoffs to each LSF baseline's.
HO_RATIO_LIMITS = {
    'pomdp_ho_min_vs_lsf_time': 0.60,
    'pomdp_ho_min_vs_lsf_threshold': 0.55,
}


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    max_error: float = 0.0

    @property
    def passed(self):
        return not self.failures

    def check(self, label, error, tolerance):
        self.checks += 1
        self.max_error = max(self.max_error, float(error))
        if not error <= tolerance:
            self.failures.append(f'{label}: error {error:.3g} > {tolerance:.3g}')


def _random_rate_case(rng, n_aps=6, area=300.0):
    positions = rng.uniform(0.0, area, size=(n_aps, 2))
    pl = ExperimentConfig().link_params().path_loss

    def draw_lsf():
        user = rng.uniform(0.0, area, size=2)
        d = np.linalg.norm(positions - user, axis=1)
        return path_loss(d, pl) * 10.0 ** (6.0 * rng.standard_normal(n_aps) / 10.0)

    typical = draw_lsf()
    chosen = rng.choice(n_aps, size=rng.integers(1, 6), replace=False)
    serving_set = tuple(sorted(int(b) for b in chosen))
    interferers = []
    for k in range(int(rng.integers(0, 4))):
        chosen = rng.choice(n_aps, size=rng.integers(1, 4), replace=False)
        aps = tuple(sorted(int(b) for b in chosen))
        interferers.append(Interferer(serving_set=aps, lsf_to_typical=typical,
                                      own_lsf=draw_lsf(), copilot=(k == 0)))
    loads = np.ones(n_aps)
    for other in interferers:
        loads[list(other.serving_set)] += 1
    serving = ServingConfig(serving_set=serving_set, lsf=typical, loads=loads)
    return serving, tuple(interferers)


def validate_rate(n_configs=10, n_realizations=100_000, seed=0):
    """Closed-form signal powers against the Monte Carlo signal model."""
    result = SuiteResult('rate-vs-mc')
    params = ExperimentConfig().link_params()
    for index in range(n_configs):
        rng = derive_rng(seed, index)
        serving, interferers = _random_rate_case(rng)
        oracle = mc_signal_oracle(serving, interferers, params.aging, params.radio,
                                  n_realizations, rng)
        closed = signal_powers(serving, interferers, params.aging, params.radio,
                               lags=[oracle.lag])
        pairs = [('xi1', closed['xi1'][0], oracle.ds, oracle.ds_se),
                 ('xi23', closed['xi23'][0], oracle.bu_ca, oracle.bu_ca_se)]
        pairs += [(f'xi4[{k}]', closed['xi4'][k, 0], oracle.mi[k], oracle.mi_se[k])
                  for k in range(len(interferers))]
        for name, expected, observed, se in pairs:
            tolerance = max(RATE_RELATIVE_TOLERANCE * abs(expected), RATE_SIGMAS * se)
            # Error in units of the allowed deviation.
            result.check(f'config {index} {name}',
                         abs(observed - expected) / max(tolerance, 1e-300),
                         1.0)
    return result


def simulate_labels(d_prev, d_curr, q, sh, pl, mobility, n_samples, rng):
    """Good-state indicators of one AP at two consecutive cycles."""
    c = mobility.step_corr(sh.d_decorr)
    previous, current = [], []
    for start in range(0, n_samples, SAMPLE_CHUNK):
        size = min(SAMPLE_CHUNK, n_samples - start)
        kappa1 = rng.standard_normal(size)
        kappa2 = rng.standard_normal(size)
        kappa2_next = c * kappa2 + np.sqrt(1.0 - c ** 2) * rng.standard_normal(size)
        previous.append(lsf_values(d_prev, kappa1, kappa2, sh, pl) > q.beta_threshold)
        current.append(lsf_values(d_curr, kappa1, kappa2_next, sh, pl) > q.beta_threshold)
    return np.concatenate(previous), np.concatenate(current)


def validate_transitions(n_samples=1_000_000, seed=0):
    """Closed-form p1, p11 and p01 against correlated-shadowing samples."""
    result = SuiteResult('transition-vs-mc')
    base = ExperimentConfig().link_params()
    mobility = MobilityParams(base.mobility.speed, base.mobility.step_duration)
    for i, iota in enumerate(IOTAS):
        sh = ShadowingParams(base.shadowing.sigma_sh_db, base.shadowing.d_decorr, iota)
        for j, (d_prev, d_curr) in enumerate(DISTANCE_PAIRS):
            rng = derive_rng(seed, i, j)
            previous, current = simulate_labels(d_prev, d_curr, base.quantizer, sh,
                                                base.path_loss, mobility, n_samples, rng)
            p11, p01 = trans_probs(d_prev, d_curr, base.quantizer, sh, base.path_loss, mobility)
            label = f'iota={iota} d={d_prev:.0f}->{d_curr:.0f}'
            result.check(f'{label} p1', abs(current.mean() -
                                             prob_good(d_curr, base.quantizer, sh, base.path_loss)),
                         TRANSITION_TOLERANCE)
            if previous.any():
                result.check(f'{label} p11', abs(current[previous].mean() - p11),
                             TRANSITION_TOLERANCE)
            if not previous.all():
                result.check(f'{label} p01', abs(current[~previous].mean() - p01),
                             TRANSITION_TOLERANCE)
    return result


def validate_bvn(n_samples=10_000_000, seed=0):
    """Rectangle probabilities against the orthant identity and sampling."""
    result = SuiteResult('bvn')
    for corr in np.round(np.arange(-0.9, 0.91, 0.1), 10):
        exact = 0.25 + np.arcsin(corr) / (2 * np.pi)
        result.check(f'orthant corr={corr}', abs(bvn_upper_rect(0.0, 0.0, corr) - exact),
                     ORTHANT_TOLERANCE)
    for index, (a, b, corr) in enumerate(BVN_POINTS):
        rng = derive_rng(seed, index)
        hits = 0
        for start in range(0, n_samples, SAMPLE_CHUNK):
            size = min(SAMPLE_CHUNK, n_samples - start)
            x = rng.standard_normal(size)
            y = corr * x + np.sqrt(1.0 - corr ** 2) * rng.standard_normal(size)
            hits += int(np.count_nonzero((x > a) & (y > b)))
        result.check(f'mc a={a} b={b} corr={corr}',
                     abs(hits / n_samples - bvn_upper_rect(a, b, corr)), BVN_MC_TOLERANCE)
    return result


def toy_model(horizon, pool_size=2, b_con=1, rng=None, known=True):
    """Small model on synthetic distances; the first AP is observed good
    unless ``known`` is False."""
    params = ExperimentConfig().link_params()
    if rng is None:
        start = np.linspace(100.0, 200.0, pool_size)
        step = np.linspace(10.0, -10.0, pool_size)
    else:
        start = rng.uniform(60.0, 240.0, size=pool_size)
        step = rng.uniform(-10.0, 10.0, size=pool_size)
    distances = np.abs(start[None, :] + step[None, :] * np.arange(horizon + 1)[:, None])
    known_states = {0: GOOD} if known else {}
    return build_model(tuple(range(pool_size)), known_states, distances, params, b_con,
                       horizon=horizon)


def validate_solver(horizons=(1, 2, 3), n_random=5, seed=0):
    """PBVI on full reachable belief sets against exhaustive search, and the
    lower-bound property of PBVI on small budgets."""
    result = SuiteResult('pbvi-vs-expectimax')
    for horizon in horizons:
        model = toy_model(horizon)
        _, value = solve_pbvi(model, belief_budget=4096, expansion_depth=horizon,
                              rng=derive_rng(seed, horizon), observation_samples=None)
        result.check(f'toy T_H={horizon}', abs(value - exact_expectimax(model)),
                     SOLVER_TOLERANCE)
    for index in range(n_random):
        rng = derive_rng(seed, 100 + index)
        model = toy_model(3, pool_size=3, b_con=2, rng=rng, known=bool(index % 2))
        _, value = solve_pbvi(model, belief_budget=10, expansion_depth=2, rng=rng)
        result.check(f'random {index} bound', max(0.0, value - exact_expectimax(model)),
                     SOLVER_TOLERANCE)
    return result


def validate_beliefs(n_triples=1000, seed=0):
    """Factorized belief updates against exact Bayes filtering of the joint
    belief."""
    result = SuiteResult('belief-consistency')
    rng = derive_rng(seed)
    model = toy_model(3, pool_size=3, b_con=2, rng=rng)
    for index in range(n_triples):
        belief = Belief(rng.uniform(0.0, 1.0, size=len(model.pool)))
        action = int(rng.integers(model.n_actions))
        stage = int(rng.integers(1, model.horizon))
        positions = model.action_positions(action)
        labels = rng.integers(0, 2, size=len(positions))
        observation = {model.pool[j]: int(label) for j, label in zip(positions, labels)}
        factorized = belief_update(belief, action, observation, model, stage + 1)

        omega = expand_belief(belief)
        index_obs = int(labels @ (2 ** np.arange(len(labels))[::-1]))
        chance, exact = bayes_update(omega, action, index_obs, model, stage, literal=False)
        if chance <= 0:
            continue
        result.check(f'triple {index}', np.abs(expand_belief(factorized) - exact).max(),
                     BELIEF_TOLERANCE)
        result.check(f'triple {index} mass', abs(expand_belief(factorized).sum() - 1.0),
                     BELIEF_TOLERANCE)
    return result


SUITES = {
    'rate': validate_rate,
    'transition': validate_transitions,
    'bvn': validate_bvn,
    'solver': validate_solver,
    'belief': validate_beliefs,
}


def run_suites(names=None, seed=0, raise_on_failure=True):
    """Runs the named suites (all by default) and logs their verdicts.

    Returns:
    --------
        results (list of SuiteResult)
    """
    names = list(SUITES) if names is None else list(names)
    results = []
    for name in names:
        if name not in SUITES:
            raise ValidationFailure(f'Unknown validation suite {name!r}.')
        logger.info(f'Running suite {name}...')
        outcome = SUITES[name](seed=seed)
        verdict = 'passed' if outcome.passed else 'FAILED'
        logger.info(f'Suite {outcome.name} {verdict}: {outcome.checks} checks, '
                    f'max error {outcome.max_error:.3g}.')
        for failure in outcome.failures:
            logger.error(f'{outcome.name}: {failure}')
        results.append(outcome)
    failed = [r.name for r in results if not r.passed]
    if failed and raise_on_failure:
        raise ValidationFailure(f'Suites failed: {", ".join(failed)}.')
    return results


def check_reduction(summary, limits=None):
    """Checks the handoff reduction ratios of a run summary against
    ``limits``.

    Arguments:
    ----------
        summary (dict):
            Contents of ``summary.json``.
        limits (dict, optional):
            Largest accepted ratio per ``<pomdp>_vs_<baseline>`` key,
            defaults to ``HO_RATIO_LIMITS``.

    Returns:
    --------
        ratios (dict):
            Checked ratios.
    """
    limits = HO_RATIO_LIMITS if limits is None else limits
    ratios = summary.get('ho_reduction_ratios', {})
    breaches = []
    for key, limit in limits.items():
        ratio = ratios.get(key)
        if ratio is None:
            breaches.append(f'{key} missing')
        elif ratio > limit:
            breaches.append(f'{key}={ratio:.3f} above {limit:.2f}')
        else:
            logger.info(f'Handoff ratio {key}={ratio:.3f} within {limit:.2f}.')
    if breaches:
        raise ValidationFailure(f'Handoff reduction not met: {"; ".join(breaches)}.')
    return {key: ratios[key] for key in limits}
