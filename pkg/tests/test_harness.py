import csv
import json
import math

import numpy as np
import pytest

from cfhandoff.errors import ConfigurationError, ExportError, ValidationFailure
from cfhandoff.sim.config import (ExperimentConfig, load_config, noise_power, parse_override,
                                  with_override)
from cfhandoff.sim.export import CSV_COLUMNS, QUANTILE_LEVELS, export, summarize
from cfhandoff.sim.harness import (build_trip, overhead_adjusted_se, overhead_curve,
                                   run_experiment, trial_streams)
from cfhandoff.sim.validate import check_reduction


def test_noise_power_of_default_receiver():
    assert noise_power(-174.0, 8.0, 20e6) == pytest.approx(5.02e-13, rel=1e-3)
    assert ExperimentConfig().noise_power() == pytest.approx(5.02e-13, rel=1e-3)


def test_noise_power_per_hertz():
    assert noise_power(-174.0, 0.0, 1.0) == pytest.approx(10.0 ** -20.4)


def test_noise_power_doubles_with_bandwidth():
    ratio = noise_power(-174.0, 8.0, 40e6) / noise_power(-174.0, 8.0, 20e6)
    assert 10.0 * math.log10(ratio) == pytest.approx(3.0103, abs=1e-4)


def test_noise_power_needs_bandwidth():
    with pytest.raises(ConfigurationError):
        noise_power(-174.0, 8.0, 0.0)


def test_overhead_adjusted_se():
    assert overhead_adjusted_se(5.0, 4, 0.05) == pytest.approx(4.0)
    assert overhead_adjusted_se(5.0, 30, 0.05) == 0.0
    assert overhead_adjusted_se(5.0, 0, 0.5) == 5.0
    assert overhead_adjusted_se(5.0, 2, 0.1, rule='geometric') == pytest.approx(4.05)


@pytest.mark.parametrize('args', [(5.0, 1, 1.5), (5.0, -1, 0.1), (5.0, 1, 0.1, 'cubic')])
def test_overhead_adjusted_se_rejects_invalid(args):
    with pytest.raises(ConfigurationError):
        overhead_adjusted_se(*args)


def test_defaults_and_reference_profile_agree():
    assert load_config() == ExperimentConfig()
    assert load_config(profile='reference') == ExperimentConfig()


def test_desk_profile():
    cfg = load_config(profile='desk')
    assert cfg.network.n_aps == 60
    assert cfg.network.area_side == 700.0
    assert cfg.overhead.sweep == (0.0, 0.02, 0.05, 0.1, 0.2)
    assert cfg.engine.b_con == 5


def test_overrides_take_precedence():
    cfg = load_config(profile='desk', overrides=['engine.r_threshold=5',
                                                 'engine.initial_belief=uniform',
                                                 'mobility.start_offset=[10, -10]'])
    assert cfg.engine.r_threshold == 5
    assert cfg.engine.initial_belief == 'uniform'
    assert cfg.mobility.start_offset == (10, -10)
    assert cfg.engine_config('lsf_time').initial_belief == 'uniform'


def test_parse_override_nests_keys():
    assert parse_override('a.b.c=1.5') == {'a': {'b': {'c': 1.5}}}
    with pytest.raises(ConfigurationError):
        parse_override('engine.horizon')


@pytest.mark.parametrize('override', ['engine.speed=3', 'network.n_aps=5', 'network=3',
                                      'schemes=["round_robin"]', 'overhead.delta=2',
                                      'overhead.rule=cubic'])
def test_invalid_overrides(override):
    with pytest.raises(ConfigurationError):
        load_config(overrides=[override])


def test_unknown_profile():
    with pytest.raises(ConfigurationError):
        load_config(profile='campus')


def test_user_file_selects_profile(tmp_path):
    path = tmp_path / 'experiment.json'
    path.write_text(json.dumps({'profile': 'desk', 'seeds': {'trials': 3}}))
    cfg = load_config(path)
    assert cfg.network.n_aps == 60
    assert cfg.seeds.trials == 3
    assert load_config(path, profile='reference').network.n_aps == 125


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / 'missing.json')
    broken = tmp_path / 'broken.json'
    broken.write_text('{"network": ')
    with pytest.raises(ConfigurationError):
        load_config(broken)


def test_with_override_keeps_other_values(small_config):
    cfg = with_override(small_config, 'engine.r_threshold=3.5')
    assert cfg.engine.r_threshold == 3.5
    assert cfg.network == small_config.network
    assert cfg.schemes == small_config.schemes


def test_trial_streams_are_independent_of_order():
    first = trial_streams(1, 4)['lsf'].random(3)
    trial_streams(1, 3)
    again = trial_streams(1, 4)['lsf'].random(3)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, trial_streams(1, 5)['lsf'].random(3))


def test_schemes_share_the_trip(small_config):
    trip, seed = build_trip(small_config, 1)
    same, same_seed = build_trip(small_config, 1)
    other, _ = build_trip(small_config, 0)
    np.testing.assert_array_equal(trip.lsf, same.lsf)
    assert seed == same_seed
    assert not np.array_equal(trip.lsf, other.lsf)


def test_fixed_layout_across_trials(small_config):
    cfg = with_override(small_config, 'network.redraw_aps=false')
    metrics = run_experiment(cfg, progress=False)
    assert len(metrics.records) == 2 * 4 * 3


def test_record_counts_and_handoff_totals(small_metrics):
    assert len(small_metrics.records) == 2 * 4 * 3
    for scheme in small_metrics.schemes:
        cumulative = small_metrics.cumulative_handoffs(scheme)
        assert cumulative.shape == (2, 3)
        assert np.all(np.diff(cumulative, axis=1) >= 0)
    for r in small_metrics.records:
        assert r.se_nats >= 0
        assert r.se_adj <= r.se_nats
        assert len(r.serving_set) == 2


def test_summary_quantiles_are_monotone(small_metrics):
    summary = summarize(small_metrics)
    assert summary['n_trials'] == 2
    assert len(summary['quantile_levels']) == len(QUANTILE_LEVELS)
    for scheme, values in summary['schemes'].items():
        assert np.all(np.diff(values['se_quantiles_nats']) >= 0)
        assert values['n_cycle_records'] == 6
        assert len(values['mean_cum_ho_curve_aps']) == 3
    assert set(summary['ho_reduction_ratios']) <= {
        'pomdp_plain_vs_lsf_time', 'pomdp_plain_vs_lsf_threshold',
        'pomdp_ho_min_vs_lsf_time', 'pomdp_ho_min_vs_lsf_threshold'}


def test_zero_overhead_curve_is_mean_rate(small_metrics):
    curve = overhead_curve(small_metrics.records, [0.0, 0.5])
    for scheme, points in curve.items():
        se = [r.se_nats for r in small_metrics.by_scheme(scheme)]
        assert points[0]['mean_se_adj_nats'] == pytest.approx(np.mean(se))
        assert points[1]['mean_se_adj_nats'] <= points[0]['mean_se_adj_nats']


def test_export_writes_every_file(small_metrics, small_config, tmp_path):
    cfg = with_override(small_config, 'overhead.sweep=[0, 0.1]')
    paths = export(small_metrics, tmp_path / 'out', cfg)
    assert sorted(p.name for p in paths) == ['manifest.json', 'overhead.json', 'records.csv',
                                             'summary.json']
    with open(tmp_path / 'out' / 'records.csv', newline='') as csv_file:
        rows = list(csv.reader(csv_file))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + len(small_metrics.records)
    manifest = json.loads((tmp_path / 'out' / 'manifest.json').read_text())
    assert manifest['master_seed'] == 1
    assert manifest['complexity']['divide_and_conquer']['subproblems'] == 6


def test_export_into_a_file_fails(small_metrics, tmp_path):
    target = tmp_path / 'taken'
    target.write_text('')
    with pytest.raises(ExportError):
        export(small_metrics, target)


def test_empty_trip(small_config, tmp_path):
    cfg = with_override(small_config, 'mobility.trip_cycles=0')
    metrics = run_experiment(cfg, progress=False)
    assert metrics.records == []
    export(metrics, tmp_path, cfg)
    assert (tmp_path / 'records.csv').read_text() == ','.join(CSV_COLUMNS) + '\n'
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['schemes']['lsf_time']['total_ho_aps'] == 0
    assert summary['schemes']['lsf_time']['se_p10_nats'] is None


def test_results_are_reproducible(small_config, small_metrics, tmp_path):
    export(small_metrics, tmp_path / 'first', small_config)
    export(run_experiment(small_config, workers=2, progress=False), tmp_path / 'second',
           small_config)
    for name in ('records.csv', 'summary.json', 'manifest.json'):
        assert (tmp_path / 'first' / name).read_bytes() == \
            (tmp_path / 'second' / name).read_bytes()


def test_multi_user_loads(small_config):
    cfg = with_override(with_override(small_config, 'radio.multi_user=true'),
                        'radio.n_interferers=3')
    trip, _ = build_trip(cfg, 0)
    assert len(trip.interferers) == 3
    assert trip.loads.sum() == pytest.approx(8 + 3 * 2)
    metrics = run_experiment(cfg, progress=False)
    assert all(np.isfinite(r.se_nats) and r.se_nats >= 0 for r in metrics.records)


def test_reduction_within_limits():
    ratios = {'pomdp_ho_min_vs_lsf_time': 0.45, 'pomdp_ho_min_vs_lsf_threshold': 0.55,
              'pomdp_plain_vs_lsf_time': 1.4}
    checked = check_reduction({'ho_reduction_ratios': ratios})
    assert checked == {'pomdp_ho_min_vs_lsf_time': 0.45, 'pomdp_ho_min_vs_lsf_threshold': 0.55}


@pytest.mark.parametrize('ratios', [
    {'pomdp_ho_min_vs_lsf_time': 0.61, 'pomdp_ho_min_vs_lsf_threshold': 0.4},
    {'pomdp_ho_min_vs_lsf_time': 0.5, 'pomdp_ho_min_vs_lsf_threshold': None},
    {'pomdp_ho_min_vs_lsf_time': 0.5},
])
def test_reduction_breach_fails(ratios):
    with pytest.raises(ValidationFailure):
        check_reduction({'ho_reduction_ratios': ratios})


def test_reduction_of_a_run_summary(small_metrics):
    summary = summarize(small_metrics)
    limits = {key: math.inf for key in summary['ho_reduction_ratios']
              if summary['ho_reduction_ratios'][key] is not None}
    assert set(check_reduction(summary, limits)) == set(limits)
