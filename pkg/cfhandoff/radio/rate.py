"""Closed-form downlink spectral efficiency under channel aging: LMMSE
estimate variance, conjugate-beamforming power control, the multi-user
lower bound and the single-user reward used by the POMDP.

All rates are in nats/s/Hz.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from cfhandoff.errors import ConfigurationError, ContractViolation


# Downlink and uplink transmit powers (W): 30 dBm and 20 dBm.
P_DL = 1.0
P_UL = 0.1

# Antennas per AP.
ANTENNAS = 8

# Frame and pilot lengths in samples.
TAU_C = 200
TAU_P = 16


@dataclass(frozen=True)
class RadioParams:
    """Link-level parameters of one frame.

    Parameters:
    -----------
        p_dl (float):
            Downlink power budget per AP, watts.
        p_ul (float):
            Uplink pilot power, watts.
        noise_power (float):
            Receiver noise power, watts.
        antennas (int):
            Antennas per AP, M.
        tau_c (int):
            Samples per frame.
        tau_p (int):
            Pilot samples per frame.
        pilot_index (int, optional):
            Pilot slot i of the typical user, defaults to ``tau_p``.
    """
    p_dl: float = P_DL
    p_ul: float = P_UL
    noise_power: float = 5.02e-13
    antennas: int = ANTENNAS
    tau_c: int = TAU_C
    tau_p: int = TAU_P
    pilot_index: int = None

    def __post_init__(self):
        if self.pilot_index is None:
            object.__setattr__(self, 'pilot_index', self.tau_p)
        if not 0 < self.tau_p < self.tau_c:
            raise ConfigurationError('Need 0 < tau_p < tau_c.')
        if not 1 <= self.pilot_index <= self.tau_p:
            raise ConfigurationError('pilot_index must lie in [1, tau_p].')
        if min(self.p_dl, self.p_ul, self.noise_power) <= 0 or self.antennas < 1:
            raise ConfigurationError('Powers and antenna count must be positive.')

    @property
    def n_est(self):
        """Sample at which the channel is estimated."""
        return self.tau_p + 1

    @property
    def estimation_lag(self):
        return self.n_est - self.pilot_index

    @property
    def data_lags(self):
        """Aging lags n - n_est of the data samples n = n_est..tau_c."""
        return np.arange(self.tau_c - self.n_est + 1)


@dataclass(frozen=True)
class ServingConfig:
    """Serving set of the typical user.

    ``lsf`` and ``loads`` are dense vectors indexed by AP; ``loads[b]`` is the
    number of users AP b serves.
    """
    serving_set: Tuple[int, ...]
    lsf: np.ndarray = field(repr=False)
    loads: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        lsf = np.asarray(self.lsf, dtype=float)
        loads = np.ones_like(lsf) if self.loads is None else np.asarray(self.loads, dtype=float)
        object.__setattr__(self, 'serving_set', tuple(int(b) for b in self.serving_set))
        object.__setattr__(self, 'lsf', lsf)
        object.__setattr__(self, 'loads', loads)
        if np.any(loads < 1):
            raise ConfigurationError('AP loads must be at least 1.')


@dataclass(frozen=True)
class Interferer:
    """Another user u' served by ``serving_set``.

    Parameters:
    -----------
        serving_set (tuple):
            APs serving the interferer.
        lsf_to_typical (numpy.ndarray):
            LSF from every AP to the typical user (dense, indexed by AP).
        own_lsf (numpy.ndarray):
            LSF from every AP to the interferer itself.
        copilot (bool):
            Whether the interferer reuses the typical user's pilot.
    """
    serving_set: Tuple[int, ...]
    lsf_to_typical: np.ndarray = field(repr=False)
    own_lsf: np.ndarray = field(repr=False)
    copilot: bool = False


InterfererPopulation = Tuple[Interferer, ...]


def psi(beta, rho_est, radio, copilot_betas=()):
    """Variance of the LMMSE channel estimate.

    Arguments:
    ----------
        beta (float):
            LSF of the estimated link.
        rho_est (float):
            Aging between the pilot slot and the estimation sample.
        radio (RadioParams):
            Link parameters.
        copilot_betas (iterable of float):
            LSF from the same AP to the other users sharing the pilot.

    Returns:
    --------
        (float):
            rho^2 p_u beta^2 / (p_u (beta + sum copilots) + noise).
    """
    if beta <= 0 or not 0 <= rho_est <= 1:
        raise ContractViolation('psi needs beta > 0 and rho_est in [0, 1].')
    received = radio.p_ul * (beta + float(np.sum(copilot_betas))) + radio.noise_power
    return rho_est ** 2 * radio.p_ul * beta ** 2 / received


def eta(psi_val, antennas, load, p_dl):
    """Conjugate-beamforming power coefficient p / (M load psi)."""
    if psi_val <= 0:
        raise ContractViolation('eta is undefined for a zero estimate variance.')
    if load < 1:
        raise ContractViolation('load must be at least 1.')
    return p_dl / (antennas * load * psi_val)


def _copilot_sum(interferers, ap):
    return sum(i.own_lsf[ap] for i in interferers if i.copilot)


def signal_powers(serving, interferers, aging, radio, lags=None):
    """Powers of the desired signal, beamforming uncertainty, channel aging
    and per-interferer multi-user terms at the given aging lags.

    Arguments:
    ----------
        serving (ServingConfig):
            Serving set of the typical user.
        interferers (InterfererPopulation):
            Other users.
        aging (cfhandoff.network.channel.AgingProfile):
            Aging profile of the typical user.
        radio (RadioParams):
            Link parameters.
        lags (numpy.ndarray, optional):
            Lags n - n_est, defaults to every data sample.

    Returns:
    --------
        powers (dict):
            Arrays ``xi1``, ``xi2``, ``xi3``, ``xi23`` over lags and
            ``xi4`` of shape (n_interferers, n_lags).
    """
    lags = radio.data_lags if lags is None else np.atleast_1d(lags)
    rho = aging.rho[lags]
    rho_bar = aging.rho_bar[lags]
    rho_est = aging.rho[radio.estimation_lag]
    p, m = radio.p_dl, radio.antennas

    coherent, incoherent = 0.0, 0.0
    for b in serving.serving_set:
        beta = serving.lsf[b]
        psi_b = psi(beta, rho_est, radio, [_copilot_sum(interferers, b)]) if beta > 0 else 0.0
        if psi_b <= 0:
            continue
        coherent += np.sqrt(psi_b / serving.loads[b])
        incoherent += p * beta / serving.loads[b]

    xi1 = m * p * rho ** 2 * coherent ** 2
    xi2 = rho ** 2 * incoherent
    xi3 = rho_bar ** 2 * incoherent

    xi4 = np.zeros((len(interferers), len(lags)))
    for k, other in enumerate(interferers):
        leak, copilot_coherent = 0.0, 0.0
        for b in other.serving_set:
            if other.own_lsf[b] <= 0:
                continue
            leak += p * other.lsf_to_typical[b] / serving.loads[b]
            if other.copilot:
                received = radio.p_ul * (other.lsf_to_typical[b] + _copilot_sum(interferers, b)) \
                    + radio.noise_power
                psi_typ = rho_est ** 2 * radio.p_ul * other.lsf_to_typical[b] ** 2 / received
                copilot_coherent += np.sqrt(psi_typ / serving.loads[b])
        xi4[k] = leak + m * p * rho ** 2 * copilot_coherent ** 2

    return {'xi1': xi1, 'xi2': xi2, 'xi3': xi3, 'xi23': xi2 + xi3, 'xi4': xi4}


def rate_lb(serving, interferers, aging, radio):
    """Achievable downlink rate of the typical user over one frame.

    (1 / tau_c) * sum_n log(1 + xi1[n] / (xi23[n] + sum_u' xi4[n] + noise))
    over the data samples n = n_est..tau_c. An empty serving set gives 0.
    """
    if not serving.serving_set:
        return 0.0
    powers = signal_powers(serving, tuple(interferers), aging, radio)
    denominator = powers['xi23'] + powers['xi4'].sum(axis=0) + radio.noise_power
    return float(np.sum(np.log1p(powers['xi1'] / denominator)) / radio.tau_c)


def snr_rate(values, loads, aging, radio):
    """Single-user SNR-based rate of a serving set.

    Arguments:
    ----------
        values (numpy.ndarray):
            LSF values of the serving APs (true or quantized).
        loads (numpy.ndarray):
            Loads of the same APs.
        aging (cfhandoff.network.channel.AgingProfile):
            Aging profile.
        radio (RadioParams):
            Link parameters.

    Returns:
    --------
        (float):
            Rate in nats/s/Hz.
    """
    values = np.asarray(values, dtype=float)
    loads = np.asarray(loads, dtype=float)
    if values.size == 0:
        return 0.0
    p, m, noise = radio.p_dl, radio.antennas, radio.noise_power
    rho = aging.rho[radio.data_lags]
    psi_s = aging.rho[radio.estimation_lag] ** 2 * radio.p_ul * values ** 2 / noise
    xi1 = m * p * rho ** 2 * np.sum(np.sqrt(psi_s / loads)) ** 2
    xi23 = m * p * np.sum(values / loads)
    return float(np.sum(np.log1p(xi1 / (xi23 + noise))) / radio.tau_c)


def reward(state, action, loads, aging, radio, quantizer, b_con):
    """POMDP reward of serving the user with the APs flagged in ``action``
    while the pool is in channel ``state``.

    Arguments:
    ----------
        state (array_like object):
            Channel-state labels of the pool APs (0 bad, 1 good).
        action (array_like object):
            Binary selection vector over the pool.
        loads (array_like object):
            Loads of the pool APs.
        aging (cfhandoff.network.channel.AgingProfile):
            Aging profile.
        radio (RadioParams):
            Link parameters.
        quantizer (cfhandoff.network.channel.StateQuantizer):
            Maps labels to representative LSF values.
        b_con (int):
            Required number of selected APs.

    Returns:
    --------
        (float):
            Rate in nats/s/Hz.
    """
    action = np.asarray(action, dtype=bool)
    if int(action.sum()) != b_con:
        raise ContractViolation(f'Action selects {int(action.sum())} APs, expected {b_con}.')
    values = quantizer.value(np.asarray(state))[action]
    return snr_rate(values, np.asarray(loads, dtype=float)[action], aging, radio)
