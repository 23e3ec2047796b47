"""Runs handoff schemes over seeded trials and collects per-cycle metrics.

Every trial derives its random streams from ``(master_seed, trial)`` alone,
so results do not depend on the order or the process trials run in. All
schemes of a trial are evaluated on the same trip.
"""
from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from tqdm import tqdm

from cfhandoff.errors import ConfigurationError
from cfhandoff.handoff.baselines import run_lsf_time, run_lsf_threshold
from cfhandoff.handoff.engine import run_pomdp_plain, run_pomdp_ho_min
from cfhandoff.handoff.trip import generate_trip
from cfhandoff.network.channel import init_lsf
from cfhandoff.network.geometry import place_aps, TrajectoryState
from cfhandoff.radio.rate import Interferer
from cfhandoff.utils import get_logger, top_k


logger = get_logger(__name__)

SCHEMES = {
    'pomdp_plain': run_pomdp_plain,
    'pomdp_ho_min': run_pomdp_ho_min,
    'lsf_time': run_lsf_time,
    'lsf_threshold': run_lsf_threshold,
}

# Independent child streams of a trial, in spawn order.
STREAMS = ('layout', 'heading', 'lsf', 'interferers', 'solver')


@dataclass(frozen=True)
class CycleRecord:
    """Outcome of one scheme at one decision cycle of one trial."""
    trial: int
    t: int
    scheme: str
    serving_set: tuple
    se_nats: float
    n_ho: int
    cum_ho: int
    se_adj: float
    triggered: bool = True


@dataclass
class SimMetrics:
    """Per-cycle records of an experiment, ordered by trial, scheme and cycle.

    Parameters:
    -----------
        schemes (tuple):
            Schemes in the order they were run.
        n_trials (int):
            Number of trials.
        records (list of CycleRecord):
            Per-cycle records.
        delta (float):
            Overhead fraction the ``se_adj`` values were computed with.
        rule (str):
            Overhead rule of ``se_adj``.
    """
    schemes: tuple
    n_trials: int
    records: list = field(default_factory=list, repr=False)
    delta: float = 0.0
    rule: str = 'linear'

    def by_scheme(self, scheme):
        return [r for r in self.records if r.scheme == scheme]

    def cumulative_handoffs(self, scheme):
        """Array (n_trials, n_cycles) of cumulative handoff counts."""
        records = self.by_scheme(scheme)
        if not records:
            return np.zeros((self.n_trials, 0))
        table = {}
        for r in records:
            table.setdefault(r.trial, []).append(r.cum_ho)
        return np.array([table[trial] for trial in sorted(table)], dtype=float)


def overhead_adjusted_se(se, n_ho, delta, rule='linear'):
    """Spectral efficiency left after ``n_ho`` handoffs each used a fraction
    ``delta`` of the frame.

    Arguments:
    ----------
        se (float):
            Spectral efficiency, nats/s/Hz.
        n_ho (int):
            Handoffs performed in the cycle.
        delta (float):
            Per-handoff fraction of the frame, in [0, 1].
        rule (str):
            ``linear`` gives max(0, 1 - delta n_ho) se, ``geometric`` gives
            (1 - delta)^n_ho se.

    Returns:
    --------
        (float):
            Adjusted spectral efficiency, never above ``se``.
    """
    if not 0 <= delta <= 1:
        raise ConfigurationError('delta must lie in [0, 1].')
    if n_ho < 0:
        raise ConfigurationError('n_ho must be non-negative.')
    if rule == 'linear':
        factor = max(0.0, 1.0 - delta * n_ho)
    elif rule == 'geometric':
        factor = (1.0 - delta) ** n_ho
    else:
        raise ConfigurationError(f'Unknown overhead rule {rule!r}.')
    return factor * se


def overhead_curve(records, deltas, rule='linear'):
    """Mean overhead-adjusted SE of every scheme over a grid of ``deltas``.

    Arguments:
    ----------
        records (iterable of CycleRecord):
            Per-cycle records.
        deltas (iterable of float):
            Overhead fractions.
        rule (str):
            Overhead rule.

    Returns:
    --------
        curve (dict):
            Scheme -> list of ``{'delta', 'mean_se_adj_nats'}`` points.
    """
    grouped = {}
    for r in records:
        grouped.setdefault(r.scheme, []).append((r.se_nats, r.n_ho))
    curve = {}
    for scheme in sorted(grouped):
        points = []
        for delta in deltas:
            values = [overhead_adjusted_se(se, n_ho, delta, rule) for se, n_ho in grouped[scheme]]
            points.append({'delta': float(delta), 'mean_se_adj_nats': float(np.mean(values))})
        curve[scheme] = points
    return curve


def trial_streams(master_seed, trial):
    """Named generators of a trial, spawned from ``(master_seed, trial)``."""
    children = np.random.SeedSequence([int(master_seed), int(trial)]).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}


def shared_layout(cfg):
    """Layout used by every trial when APs are not redrawn."""
    rng = np.random.default_rng(np.random.SeedSequence([int(cfg.seeds.master_seed)]))
    return _place(cfg, rng)


def _place(cfg, rng):
    net = cfg.network
    return place_aps(net.n_aps, net.area_side, rng, ap_height=net.ap_height,
                     user_height=net.user_height, wrap_margin=net.wrap_margin)


def draw_interferers(layout, params, count, b_con, rng):
    """Static users sharing the network with the trip's user.

    Each is placed uniformly, gets its own shadowing field, is served by its
    ``b_con`` strongest APs and reuses the typical pilot with probability
    1 / tau_p.
    """
    interferers = []
    for _ in range(count):
        position = rng.uniform(0.0, layout.area_side, size=2)
        still = TrajectoryState(position=position, heading=np.array([1.0, 0.0]), speed=0.0,
                                step_duration=params.mobility.step_duration)
        own = init_lsf(layout, params.shadowing, params.path_loss, still, rng).lsf
        copilot = bool(rng.random() < 1.0 / params.radio.tau_p)
        interferers.append(Interferer(serving_set=top_k(own, b_con),
                                      lsf_to_typical=np.zeros(layout.n_aps),
                                      own_lsf=own, copilot=copilot))
    return tuple(interferers)


def build_trip(cfg, trial, layout=None):
    """Ground truth of ``trial`` and the seed its POMDP solvers start from."""
    streams = trial_streams(cfg.seeds.master_seed, trial)
    params = cfg.link_params()
    if layout is None:
        layout = _place(cfg, streams['layout'])
    trip = generate_trip(layout, params, cfg.mobility.trip_cycles, streams['heading'],
                         streams['lsf'], offset=cfg.mobility.start_offset)
    loads = np.full(layout.n_aps, float(cfg.radio.load))
    if cfg.radio.multi_user and cfg.radio.n_interferers:
        trip.interferers = draw_interferers(layout, params, cfg.radio.n_interferers,
                                            cfg.engine.b_con, streams['interferers'])
        for other in trip.interferers:
            loads[list(other.serving_set)] += 1
    trip.loads = loads
    solver_seed = int(streams['solver'].integers(2 ** 31))
    return trip, solver_seed


def run_trial(cfg, trial, layout=None):
    """Runs every configured scheme on the trip of ``trial``.

    Returns:
    --------
        records (list of CycleRecord):
            Ordered by scheme (configuration order) then cycle.
    """
    trip, solver_seed = build_trip(cfg, trial, layout)
    records = []
    for scheme in cfg.schemes:
        decisions = SCHEMES[scheme](trip, cfg.engine_config(scheme), seed=solver_seed)
        cum_ho = 0
        for decision in decisions:
            if cfg.radio.multi_user:
                se = trip.multi_user_rate(decision.serving_set, decision.cycle)
            else:
                se = trip.rate(decision.serving_set, decision.cycle)
            cum_ho += decision.n_ho
            records.append(CycleRecord(
                trial=trial, t=decision.cycle, scheme=scheme,
                serving_set=decision.serving_set, se_nats=float(se), n_ho=decision.n_ho,
                cum_ho=cum_ho,
                se_adj=overhead_adjusted_se(float(se), decision.n_ho, cfg.overhead.delta,
                                            cfg.overhead.rule),
                triggered=decision.triggered))
    return records


def run_experiment(cfg, workers=None, progress=True):
    """Runs ``cfg.seeds.trials`` trials of every configured scheme.

    Arguments:
    ----------
        cfg (cfhandoff.sim.config.ExperimentConfig):
            Resolved configuration.
        workers (int, optional):
            Worker processes, defaults to ``cfg.seeds.workers``.
        progress (bool):
            Show a progress bar over trials.

    Returns:
    --------
        metrics (SimMetrics)
    """
    cfg.validate()
    workers = cfg.seeds.workers if workers is None else workers
    layout = None if cfg.network.redraw_aps else shared_layout(cfg)
    trials = range(cfg.seeds.trials)
    logger.info(f'Running {len(trials)} trials of {", ".join(cfg.schemes)} '
                f'(B={cfg.network.n_aps}, {cfg.mobility.trip_cycles} cycles).')

    job = partial(run_trial, cfg, layout=layout)
    if workers > 1 and len(trials) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(tqdm(executor.map(job, trials), total=len(trials),
                                desc='Trials', disable=not progress))
    else:
        results = [job(trial) for trial in tqdm(trials, desc='Trials', disable=not progress)]

    metrics = SimMetrics(schemes=tuple(cfg.schemes), n_trials=len(trials),
                         delta=cfg.overhead.delta, rule=cfg.overhead.rule)
    for records in results:
        metrics.records.extend(records)
    logger.info(f'Collected {len(metrics.records)} cycle records.')
    return metrics
