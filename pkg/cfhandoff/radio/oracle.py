"""Monte Carlo simulation of the aged-channel downlink signal model, used to
check the closed-form power terms of :mod:`cfhandoff.radio.rate`.

Realizations are generated in chunks, each with its own child stream of the
given generator; results depend only on the seed and the chunk size.
"""
from dataclasses import dataclass, field

import numpy as np

from cfhandoff.errors import ContractViolation
from cfhandoff.radio.rate import psi, eta, _copilot_sum


# Realizations simulated per chunk.
CHUNK_SIZE = 5000

# Smallest number of realizations accepted.
MIN_REALIZATIONS = 10_000


@dataclass
class OraclePowers:
    """Empirical powers of the four received-signal terms at one data sample.

    ``*_se`` fields are batch-means standard errors across chunks.
    """
    lag: int
    n_realizations: int
    ds: float
    bu: float
    ca: float
    mi: np.ndarray = field(repr=False)
    tx_power: dict = field(repr=False)
    ds_se: float = 0.0
    bu_se: float = 0.0
    ca_se: float = 0.0
    mi_se: np.ndarray = field(default=None, repr=False)
    bu_ca_se: float = 0.0

    @property
    def bu_ca(self):
        return self.bu + self.ca


def _cn(rng, shape):
    """Circularly-symmetric standard complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _simulate_chunk(rng, size, serving, interferers, aging, radio, lag, aps):
    m = radio.antennas
    p_u = radio.p_ul
    noise = radio.noise_power
    rho_est = aging.rho[radio.estimation_lag]
    rho_bar_est = aging.rho_bar[radio.estimation_lag]
    rho_d, rho_bar_d = aging.rho[lag], aging.rho_bar[lag]
    column = {b: j for j, b in enumerate(aps)}
    shape = (size, len(aps), m)

    # Typical user: channel at the estimation sample, at its pilot slot and at
    # the data sample share the same base realization.
    g_est = _cn(rng, shape)
    g_pilot = rho_est * g_est + rho_bar_est * _cn(rng, shape)
    innovation = _cn(rng, shape)
    g_data = rho_d * g_est + rho_bar_d * innovation

    beta_typ = serving.lsf[aps]
    received = np.sqrt(p_u * beta_typ)[None, :, None] * g_pilot
    received = received + np.sqrt(noise) * _cn(rng, shape)
    denominator = p_u * beta_typ + noise

    own_pilot = []
    for other in interferers:
        g_other = _cn(rng, shape)
        gains = other.own_lsf[aps]
        signal = np.sqrt(p_u * gains)[None, :, None] * g_other
        if other.copilot:
            received = received + signal
            denominator = denominator + p_u * gains
            own_pilot.append(None)
        else:
            own_pilot.append((signal + np.sqrt(noise) * _cn(rng, shape),
                              p_u * gains + noise))

    def estimate(gains, observation, power):
        coefficient = rho_est * np.sqrt(p_u) * gains / power
        return coefficient[None, :, None] * observation

    h_hat = estimate(beta_typ, received, denominator)

    desired = np.zeros(size, dtype=complex)
    aging_term = np.zeros(size, dtype=complex)
    tx_power = {}
    for b in serving.serving_set:
        j = column[b]
        psi_b = psi(serving.lsf[b], rho_est, radio, [_copilot_sum(interferers, b)])
        eta_b = eta(psi_b, m, serving.loads[b], radio.p_dl)
        inner = np.sum(np.sqrt(serving.lsf[b]) * g_est[:, j] * np.conj(h_hat[:, j]), axis=1)
        desired += rho_d * np.sqrt(eta_b) * inner
        inner = np.sum(innovation[:, j] * np.conj(h_hat[:, j]), axis=1)
        aging_term += rho_bar_d * np.sqrt(eta_b * serving.lsf[b]) * inner
        tx_power[b] = eta_b * np.sum(np.abs(h_hat[:, j]) ** 2, axis=1)

    interference = np.zeros((len(interferers), size), dtype=complex)
    for k, other in enumerate(interferers):
        gains = other.own_lsf[aps]
        if other.copilot:
            other_hat = estimate(gains, received, denominator)
        else:
            other_hat = estimate(gains, *own_pilot[k])
        for b in other.serving_set:
            j = column[b]
            copilots = _copilot_sum(interferers, b) + serving.lsf[b] - other.own_lsf[b] \
                if other.copilot else 0.0
            psi_other = psi(other.own_lsf[b], rho_est, radio, [copilots])
            eta_other = eta(psi_other, m, serving.loads[b], radio.p_dl)
            h_typ = np.sqrt(other.lsf_to_typical[b]) * g_data[:, j]
            interference[k] += np.sqrt(eta_other) * np.sum(h_typ * np.conj(other_hat[:, j]), axis=1)
            if b in tx_power:
                tx_power[b] = tx_power[b] + eta_other * np.sum(np.abs(other_hat[:, j]) ** 2, axis=1)

    return desired, aging_term, interference, tx_power


def mc_signal_oracle(serving, interferers, aging, radio, n_realizations, rng,
                     lag=None, chunk_size=CHUNK_SIZE):
    """Estimates the desired-signal, beamforming-uncertainty, channel-aging
    and multi-user interference powers by direct simulation.

    Arguments:
    ----------
        serving (cfhandoff.radio.rate.ServingConfig):
            Serving set of the typical user.
        interferers (tuple of cfhandoff.radio.rate.Interferer):
            Other users.
        aging (cfhandoff.network.channel.AgingProfile):
            Aging profile, shared by all users.
        radio (cfhandoff.radio.rate.RadioParams):
            Link parameters.
        n_realizations (int):
            Number of channel realizations, at least 10^4.
        rng (numpy.random.Generator):
            Parent generator; one child stream is spawned per chunk.
        lag (int, optional):
            Data-sample lag n - n_est, defaults to the end of the frame.
        chunk_size (int):
            Realizations per chunk.

    Returns:
    --------
        powers (OraclePowers)
    """
    if n_realizations < MIN_REALIZATIONS:
        raise ContractViolation(f'Need at least {MIN_REALIZATIONS} realizations.')
    interferers = tuple(interferers)
    lag = int(radio.data_lags[-1] if lag is None else lag)
    aps = sorted(set(serving.serving_set).union(*(i.serving_set for i in interferers)))

    sizes = [chunk_size] * (n_realizations // chunk_size)
    if n_realizations % chunk_size:
        sizes.append(n_realizations % chunk_size)
    streams = rng.spawn(len(sizes))

    sums = {'x': 0j, 'x2': 0.0, 'ca': 0.0, 'mi': np.zeros(len(interferers))}
    tx_sums = {b: 0.0 for b in serving.serving_set}
    batches = []
    for stream, size in zip(streams, sizes):
        desired, aging_term, interference, tx_power = _simulate_chunk(
            stream, size, serving, interferers, aging, radio, lag, aps)
        mean = desired.mean()
        batches.append((np.abs(mean) ** 2,
                        np.var(desired),
                        np.mean(np.abs(aging_term) ** 2),
                        np.mean(np.abs(interference) ** 2, axis=1)))
        sums['x'] += desired.sum()
        sums['x2'] += np.sum(np.abs(desired) ** 2)
        sums['ca'] += np.sum(np.abs(aging_term) ** 2)
        sums['mi'] += np.sum(np.abs(interference) ** 2, axis=1)
        for b, power in tx_power.items():
            tx_sums[b] += power.sum()

    n = float(n_realizations)
    mean = sums['x'] / n
    ds = float(np.abs(mean) ** 2)
    bu = float(sums['x2'] / n - ds)

    ds_b, bu_b, ca_b, mi_b = (np.array(values) for values in zip(*batches))
    n_batches = len(batches)

    def standard_error(values):
        if n_batches < 2:
            return float('nan')
        return np.std(values, axis=0, ddof=1) / np.sqrt(n_batches)

    return OraclePowers(lag=lag, n_realizations=n_realizations, ds=ds, bu=bu,
                        ca=float(sums['ca'] / n), mi=sums['mi'] / n,
                        tx_power={b: total / n for b, total in tx_sums.items()},
                        ds_se=float(standard_error(ds_b)),
                        bu_se=float(standard_error(bu_b)),
                        ca_se=float(standard_error(ca_b)),
                        mi_se=np.atleast_1d(standard_error(mi_b)) if len(interferers) else np.zeros(0),
                        bu_ca_se=float(standard_error(bu_b + ca_b)))
