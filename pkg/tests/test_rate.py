import numpy as np
import pytest

from cfhandoff.errors import ConfigurationError, ContractViolation
from cfhandoff.network.channel import aging_profile
from cfhandoff.pomdp.model import reward_matrix
from cfhandoff.radio.rate import (Interferer, RadioParams, ServingConfig, eta, psi, rate_lb,
                                  reward, signal_powers, snr_rate)


LSF = np.array([2e-7, 8e-8, 3e-8, 1e-8])


def test_radio_defaults():
    radio = RadioParams()
    assert radio.pilot_index == radio.tau_p == 16
    assert radio.n_est == 17
    assert len(radio.data_lags) == 184


@pytest.mark.parametrize('kwargs', [{'tau_p': 200}, {'pilot_index': 17}, {'antennas': 0}])
def test_radio_rejects_invalid(kwargs):
    with pytest.raises(ConfigurationError):
        RadioParams(**kwargs)


def test_psi_perfect_estimation_limit():
    assert psi(1e-3, 1.0, RadioParams()) == pytest.approx(1e-3, rel=1e-6)


def test_psi_fully_aged_pilot():
    assert psi(1e-7, 0.0, RadioParams()) == 0.0


def test_psi_copilots_reduce_quality():
    radio = RadioParams()
    assert psi(1e-7, 1.0, radio, [5e-8]) < psi(1e-7, 1.0, radio)


def test_eta_scaling():
    assert eta(1e-8, 8, 2, 1.0) == pytest.approx(eta(1e-8, 8, 1, 1.0) / 2)
    assert eta(1 / 8, 8, 1, 1.0) == pytest.approx(1.0)


def test_eta_needs_positive_estimate():
    with pytest.raises(ContractViolation):
        eta(0.0, 8, 1, 1.0)


def test_single_ap_static_user_reduction():
    radio = RadioParams()
    static = aging_profile(0.0, radio.tau_c)
    beta = 1e-7
    serving = ServingConfig(serving_set=(0,), lsf=np.array([beta]))
    psi_b = psi(beta, 1.0, radio)
    sinr = radio.antennas * radio.p_dl * psi_b / (radio.p_dl * beta + radio.noise_power)
    expected = (radio.tau_c - radio.n_est + 1) / radio.tau_c * np.log1p(sinr)
    assert rate_lb(serving, (), static, radio) == pytest.approx(expected)


@pytest.mark.parametrize('speed', [1.0, 10.0, 30.0])
def test_fresh_channel_bounds_aged_rate(speed):
    radio = RadioParams()
    serving = ServingConfig(serving_set=(0, 1, 2), lsf=LSF)
    fresh = rate_lb(serving, (), aging_profile(0.0, radio.tau_c), radio)
    aged = rate_lb(serving, (), aging_profile(speed, radio.tau_c), radio)
    assert fresh > aged > 0.0


def test_rate_of_empty_serving_set(params):
    serving = ServingConfig(serving_set=(), lsf=LSF)
    assert rate_lb(serving, (), params.aging, params.radio) == 0.0
    assert snr_rate([], [], params.aging, params.radio) == 0.0


def test_non_copilot_interference_has_no_coherent_term(params):
    loads = np.array([1.0, 2.0, 1.0, 1.0])
    serving = ServingConfig(serving_set=(0, 1), lsf=LSF, loads=loads)
    other = Interferer(serving_set=(1, 2), lsf_to_typical=LSF, own_lsf=LSF[::-1].copy())
    powers = signal_powers(serving, (other,), params.aging, params.radio)
    expected = params.radio.p_dl * (LSF[1] / 2.0 + LSF[2] / 1.0)
    assert powers['xi4'][0] == pytest.approx(np.full(len(params.radio.data_lags), expected))


def test_copilot_adds_coherent_interference(params):
    serving = ServingConfig(serving_set=(0, 1), lsf=LSF)
    plain = Interferer(serving_set=(1, 2), lsf_to_typical=LSF, own_lsf=LSF[::-1].copy())
    copilot = Interferer(serving_set=(1, 2), lsf_to_typical=LSF, own_lsf=LSF[::-1].copy(),
                         copilot=True)
    low = signal_powers(serving, (plain,), params.aging, params.radio)['xi4']
    high = signal_powers(serving, (copilot,), params.aging, params.radio)['xi4']
    assert np.all(high > low)
    assert rate_lb(serving, (copilot,), params.aging, params.radio) < \
        rate_lb(serving, (plain,), params.aging, params.radio)


def test_interference_lowers_rate(params):
    serving = ServingConfig(serving_set=(0, 1), lsf=LSF)
    other = Interferer(serving_set=(0,), lsf_to_typical=LSF, own_lsf=LSF.copy())
    assert rate_lb(serving, (other,), params.aging, params.radio) < \
        rate_lb(serving, (), params.aging, params.radio)


def test_reward_prefers_good_states(params):
    loads = np.ones(6)
    action = np.array([1, 1, 1, 1, 1, 0])
    args = (loads, params.aging, params.radio, params.quantizer, 5)
    assert reward(np.ones(6, dtype=int), action, *args) > reward(np.zeros(6, dtype=int), action, *args)


def test_reward_symmetric_in_selected_good_aps(params):
    state = np.array([1, 1, 1, 0])
    args = (np.ones(4), params.aging, params.radio, params.quantizer, 2)
    assert reward(state, [1, 1, 0, 0], *args) == pytest.approx(reward(state, [0, 1, 1, 0], *args))


def test_reward_rejects_wrong_cardinality(params):
    with pytest.raises(ContractViolation):
        reward(np.ones(6, dtype=int), np.ones(6), np.ones(6), params.aging, params.radio,
               params.quantizer, 5)


def test_reward_table_size(params):
    table = reward_matrix(6, 5, np.ones(6), params)
    assert table.shape == (64, 6)
    assert table.size == 384
    assert np.all(table >= 0)
