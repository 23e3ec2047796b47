"""Writes experiment results to disk.

``records.csv`` holds one row per scheme, trial and cycle; ``summary.json``
the per-scheme distributions derived from it; ``manifest.json`` the resolved
configuration; ``overhead.json`` the SE-versus-overhead curve when a sweep is
configured. Identical metrics always produce identical bytes.
"""
import csv
import json
from pathlib import Path

import numpy as np

from cfhandoff import __version__
from cfhandoff.errors import ExportError
from cfhandoff.handoff.engine import complexity_summary
from cfhandoff.sim.config import config_to_dict
from cfhandoff.sim.harness import overhead_curve
from cfhandoff.utils import get_logger, format_float


logger = get_logger(__name__)

CSV_COLUMNS = ('trial', 't', 'scheme', 'se_nats', 'n_ho', 'cum_ho', 'se_adj')

# Quantile levels of the exported SE distributions, a 1% grid.
QUANTILE_LEVELS = np.linspace(0.0, 1.0, 101)

FORMATS = ('csv', 'summary', 'manifest')

POMDP_SCHEMES = ('pomdp_plain', 'pomdp_ho_min')
LSF_SCHEMES = ('lsf_time', 'lsf_threshold')


def _rounded(value):
    if value is None:
        return None
    return float(format_float(value))


def _rounded_list(values):
    return [_rounded(v) for v in values]


def csv_rows(records):
    yield list(CSV_COLUMNS)
    for r in records:
        yield [str(r.trial), str(r.t), r.scheme, format_float(r.se_nats), str(r.n_ho),
               str(r.cum_ho), format_float(r.se_adj)]


def scheme_summary(metrics, scheme):
    """Distribution and handoff statistics of one scheme.

    Arguments:
    ----------
        metrics (cfhandoff.sim.harness.SimMetrics):
            Collected records.
        scheme (str):
            Scheme name.

    Returns:
    --------
        (dict):
            JSON-ready summary with unit-suffixed keys.
    """
    records = metrics.by_scheme(scheme)
    se = np.array([r.se_nats for r in records], dtype=float)
    se_adj = np.array([r.se_adj for r in records], dtype=float)
    cumulative = metrics.cumulative_handoffs(scheme)

    per_trial = {}
    for r in records:
        entry = per_trial.setdefault(r.trial, {'se': [], 'ho': 0})
        entry['se'].append(r.se_nats)
        entry['ho'] += r.n_ho

    return {
        'n_cycle_records': len(records),
        'se_quantiles_nats': _rounded_list(np.quantile(se, QUANTILE_LEVELS)) if se.size else [],
        'se_adj_quantiles_nats': (_rounded_list(np.quantile(se_adj, QUANTILE_LEVELS))
                                  if se_adj.size else []),
        'se_p10_nats': _rounded(np.quantile(se, 0.1)) if se.size else None,
        'se_mean_nats': _rounded(se.mean()) if se.size else None,
        'se_adj_mean_nats': _rounded(se_adj.mean()) if se_adj.size else None,
        'mean_cum_ho_curve_aps': (_rounded_list(cumulative.mean(axis=0))
                                  if cumulative.size else []),
        'total_ho_aps': int(sum(r.n_ho for r in records)),
        'mean_total_ho_per_trial_aps': (_rounded(cumulative[:, -1].mean())
                                        if cumulative.size else 0.0),
        'per_trial': [{'trial': trial,
                       'total_ho_aps': per_trial[trial]['ho'],
                       'se_p10_nats': _rounded(np.quantile(per_trial[trial]['se'], 0.1))}
                      for trial in sorted(per_trial)],
    }


def reduction_ratios(summaries):
    """Ratio of every POMDP scheme's mean cumulative handoffs to every LSF
    baseline's, on the paired trials of one run. ``None`` when the baseline
    performed no handoffs."""
    ratios = {}
    for pomdp in POMDP_SCHEMES:
        for lsf in LSF_SCHEMES:
            if pomdp not in summaries or lsf not in summaries:
                continue
            base = summaries[lsf]['mean_total_ho_per_trial_aps']
            value = summaries[pomdp]['mean_total_ho_per_trial_aps']
            ratios[f'{pomdp}_vs_{lsf}'] = _rounded(value / base) if base else None
    return ratios


def summarize(metrics):
    summaries = {scheme: scheme_summary(metrics, scheme) for scheme in metrics.schemes}
    return {
        'n_trials': metrics.n_trials,
        'overhead_delta': _rounded(metrics.delta),
        'overhead_rule': metrics.rule,
        'quantile_levels': _rounded_list(QUANTILE_LEVELS),
        'schemes': summaries,
        'ho_reduction_ratios': reduction_ratios(summaries),
    }


def build_manifest(cfg):
    return {
        'version': __version__,
        'master_seed': cfg.seeds.master_seed,
        'config': config_to_dict(cfg),
        'complexity': complexity_summary(cfg.network.n_aps, cfg.engine.b_con),
    }


def write_json(data, path):
    """Dumps ``data`` with sorted keys; raises :class:`ExportError`."""
    try:
        with open(path, 'w') as json_file:
            json.dump(data, json_file, indent=2, sort_keys=True)
            json_file.write('\n')
    except (OSError, TypeError) as error:
        raise ExportError(path, error)
    logger.info(f'Wrote {path}.')
    return Path(path)


def write_csv(records, path):
    try:
        with open(path, 'w', newline='') as csv_file:
            writer = csv.writer(csv_file, lineterminator='\n')
            writer.writerows(csv_rows(records))
    except OSError as error:
        raise ExportError(path, error)
    logger.info(f'Wrote {path}.')
    return Path(path)


def export(metrics, out_dir, cfg=None, formats=FORMATS):
    """Writes the requested files into ``out_dir``.

    Arguments:
    ----------
        metrics (cfhandoff.sim.harness.SimMetrics):
            Collected records.
        out_dir (str or pathlib.Path):
            Directory, created if missing.
        cfg (cfhandoff.sim.config.ExperimentConfig, optional):
            Resolved configuration; required for the manifest and the
            overhead sweep.
        formats (iterable of str):
            Any of ``csv``, ``summary`` and ``manifest``.

    Returns:
    --------
        paths (list of pathlib.Path):
            Files written.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise ExportError(out_dir, error)

    paths = []
    if 'csv' in formats:
        paths.append(write_csv(metrics.records, out_dir / 'records.csv'))
    if 'summary' in formats:
        paths.append(write_json(summarize(metrics), out_dir / 'summary.json'))
    if cfg is not None and 'manifest' in formats:
        paths.append(write_json(build_manifest(cfg), out_dir / 'manifest.json'))
    if cfg is not None and cfg.overhead.sweep:
        curve = overhead_curve(metrics.records, cfg.overhead.sweep, cfg.overhead.rule)
        curve = {scheme: [{k: _rounded(v) for k, v in point.items()} for point in points]
                 for scheme, points in curve.items()}
        paths.append(write_json({'rule': cfg.overhead.rule, 'curves': curve},
                                out_dir / 'overhead.json'))
    return paths
