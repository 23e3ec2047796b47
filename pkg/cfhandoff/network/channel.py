"""Large-scale fading with spatially and temporally correlated shadowing,
Jakes channel aging, two-level channel-state quantization and the closed-form
probabilities of observing a good channel state.
"""
from functools import lru_cache
from dataclasses import dataclass, field, replace

import numpy as np

from scipy import linalg
from scipy.special import j0
from scipy.stats import norm
from scipy.integrate import quad

from cfhandoff.errors import ConfigurationError, ContractViolation, NumericalError
from cfhandoff.network.geometry import distances_2d, inter_ap_distances
from cfhandoff.utils import get_logger, q_function


logger = get_logger(__name__)

# COST231 Walfisch-Ikegami reference distance (m) and path-loss exponent.
D0 = 1.1
ALPHA_PL = 3.8

# Shadowing standard deviation (dB), decorrelation distance (m) and the
# weight of the AP-side component.
SIGMA_SH_DB = 6.0
D_DECORR = 100.0
IOTA = 0.5

# Carrier frequency (Hz), speed of light (m/s) and sample period (s).
CARRIER_HZ = 1.8e9
SPEED_OF_LIGHT = 3e8
SAMPLE_PERIOD = 66.7e-6

# Distances (m) whose path loss defines the quantizer threshold and the two
# representative state values.
THRESHOLD_DISTANCE = 150.0
GOOD_DISTANCE = 50.0
BAD_DISTANCE = 200.0

# Channel-state labels.
BAD = 0
GOOD = 1

# Conditioning probabilities below this are treated as numerically zero.
CONDITIONING_EPS = 1e-10

# Eigenvalues of the AP-side covariance above -JITTER are clipped to zero.
JITTER = 1e-10

# Standard-normal mass beyond this many deviations is ignored by quadrature.
QUAD_LIMIT = 40.0


@dataclass(frozen=True)
class PathLossParams:
    d0: float = D0
    alpha_pl: float = ALPHA_PL
    d_h: float = 13.5

    def __post_init__(self):
        if self.d0 <= 0 or self.alpha_pl <= 2 or self.d_h < 0:
            raise ConfigurationError('Invalid path-loss parameters.')


@dataclass(frozen=True)
class ShadowingParams:
    sigma_sh_db: float = SIGMA_SH_DB
    d_decorr: float = D_DECORR
    iota: float = IOTA

    def __post_init__(self):
        if self.sigma_sh_db < 0 or self.d_decorr <= 0 or not 0 <= self.iota <= 1:
            raise ConfigurationError('Invalid shadowing parameters.')


@dataclass(frozen=True)
class MobilityParams:
    """Speed (m/s) and decision-cycle duration (s) of the user."""
    speed: float = 10.0
    step_duration: float = 1.0

    def __post_init__(self):
        if self.speed < 0 or self.step_duration <= 0:
            raise ConfigurationError('Invalid mobility parameters.')

    def step_corr(self, d_decorr):
        """Correlation c = 2^(-v * step / d_decorr) of the user-side shadowing
        between consecutive cycles."""
        return 2.0 ** (-self.speed * self.step_duration / d_decorr)


@dataclass(frozen=True)
class StateQuantizer:
    """Two-level quantizer mapping an LSF value to a good or bad state.

    Parameters:
    -----------
        beta_threshold (float):
            Values strictly above it are good.
        beta_good (float):
            Representative value of the good state.
        beta_bad (float):
            Representative value of the bad state.
        levels (int):
            Number of levels, only 2 is supported.
    """
    beta_threshold: float
    beta_good: float
    beta_bad: float
    levels: int = 2

    def __post_init__(self):
        if not self.beta_bad < self.beta_threshold < self.beta_good:
            raise ConfigurationError('Quantizer needs beta_bad < threshold < beta_good.')
        if self.levels != 2:
            raise ConfigurationError('Only two-level quantization is implemented.')

    @classmethod
    def from_distances(cls, pl, threshold=THRESHOLD_DISTANCE, good=GOOD_DISTANCE,
                       bad=BAD_DISTANCE):
        """Quantizer whose levels are path-loss values at given distances."""
        return cls(beta_threshold=path_loss(threshold, pl),
                   beta_good=path_loss(good, pl),
                   beta_bad=path_loss(bad, pl))

    def value(self, state):
        """Representative LSF value of a state label (or array of labels)."""
        return np.where(np.asarray(state) == GOOD, self.beta_good, self.beta_bad)


@dataclass(frozen=True)
class AgingProfile:
    """Jakes temporal correlation of the small-scale fading over one frame.

    ``rho[k]`` is the correlation at a lag of ``k`` samples, k = 0..tau_c.
    """
    f_doppler: float
    sample_period: float
    rho: np.ndarray = field(repr=False)
    rho_bar: np.ndarray = field(repr=False)

    @property
    def tau_c(self):
        return len(self.rho) - 1


@dataclass
class LsfProcess:
    """Ground-truth large-scale fading of one user towards every AP.

    Parameters:
    -----------
        kappa1 (numpy.ndarray):
            AP-side standard-normal shadowing field, static for the trial.
        kappa2 (float):
            User-side standard-normal shadowing at the current cycle.
        step_corr (float):
            AR(1) coefficient of ``kappa2`` between cycles.
        lsf (numpy.ndarray):
            Linear LSF gain to every AP at the current cycle.
        layout (cfhandoff.network.geometry.NetworkLayout):
            Network the process lives on.
        shadowing (ShadowingParams):
            Shadowing parameters.
        path_loss_params (PathLossParams):
            Path-loss parameters.
        cycle_index (int):
            Cycle of ``kappa2`` and ``lsf``.
    """
    kappa1: np.ndarray
    kappa2: float
    step_corr: float
    lsf: np.ndarray
    layout: object = field(repr=False)
    shadowing: ShadowingParams = field(repr=False)
    path_loss_params: PathLossParams = field(repr=False)
    cycle_index: int = 0


def path_loss(d_2d, p):
    """COST231 Walfisch-Ikegami path loss as a linear gain.

    Arguments:
    ----------
        d_2d (float or numpy.ndarray):
            Planar distance in meters.
        p (PathLossParams):
            Path-loss parameters.

    Returns:
    --------
        (float or numpy.ndarray):
            (sqrt(d^2 + d_h^2))^(-alpha) * d0^alpha.
    """
    d_2d = np.asarray(d_2d, dtype=float)
    if np.any(d_2d < 0):
        raise ContractViolation('Distances must be non-negative.')
    d_3d = np.sqrt(d_2d ** 2 + p.d_h ** 2)
    gain = d_3d ** (-p.alpha_pl) * p.d0 ** p.alpha_pl
    return float(gain) if gain.ndim == 0 else gain


def jakes_rho(lag, f_doppler, sample_period):
    """Jakes correlation J0(2 pi lag f_D T_s) at a lag given in samples."""
    if np.any(np.asarray(lag) < 0):
        raise ContractViolation('Lag must be non-negative.')
    value = j0(2 * np.pi * np.asarray(lag, dtype=float) * f_doppler * sample_period)
    return float(value) if np.ndim(value) == 0 else value


def aging_profile(speed, tau_c, carrier_hz=CARRIER_HZ, sample_period=SAMPLE_PERIOD):
    """Builds the :class:`AgingProfile` of a user moving at ``speed``.

    Arguments:
    ----------
        speed (float):
            User speed in m/s.
        tau_c (int):
            Frame length in samples; lags 0..tau_c are tabulated.
        carrier_hz (float):
            Carrier frequency.
        sample_period (float):
            Duration of one sample in seconds.

    Returns:
    --------
        profile (AgingProfile)
    """
    f_doppler = speed / (SPEED_OF_LIGHT / carrier_hz)
    rho = np.asarray(jakes_rho(np.arange(tau_c + 1), f_doppler, sample_period))
    rho_bar = np.sqrt(np.clip(1.0 - rho ** 2, 0.0, 1.0))
    return AgingProfile(f_doppler=f_doppler, sample_period=sample_period,
                        rho=rho, rho_bar=rho_bar)


def symmetric_factor(cov):
    """Returns F with F @ F.T == cov for a positive semi-definite ``cov``.

    Uses an eigendecomposition so that perfectly correlated entries (e.g.
    co-located APs) receive identical rows.
    """
    try:
        eigvals, eigvecs = linalg.eigh(cov)
    except linalg.LinAlgError as error:
        raise NumericalError(f'Covariance factorization failed: {error}')
    if eigvals.min() < -JITTER * max(1.0, eigvals.max()):
        raise NumericalError('Covariance is not positive semi-definite.')
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def lsf_values(distances, kappa1, kappa2, sh, pl):
    """beta = PL(d) * 10^(sigma * (sqrt(iota) kappa1 + sqrt(1 - iota) kappa2) / 10)."""
    kappa = np.sqrt(sh.iota) * kappa1 + np.sqrt(1.0 - sh.iota) * kappa2
    return path_loss(distances, pl) * 10.0 ** (sh.sigma_sh_db * kappa / 10.0)


def init_lsf(layout, sh, pl, traj, rng):
    """Draws the shadowing field and the LSF of the first cycle.

    Arguments:
    ----------
        layout (cfhandoff.network.geometry.NetworkLayout):
            AP deployment.
        sh (ShadowingParams):
            Shadowing parameters.
        pl (PathLossParams):
            Path-loss parameters.
        traj (cfhandoff.network.geometry.TrajectoryState):
            Trajectory at the first cycle.
        rng (numpy.random.Generator):
            Seeded random source.

    Returns:
    --------
        process (LsfProcess)
    """
    cov = 2.0 ** (-inter_ap_distances(layout) / sh.d_decorr)
    kappa1 = symmetric_factor(cov) @ rng.standard_normal(layout.n_aps)
    kappa2 = float(rng.standard_normal())
    mobility = MobilityParams(traj.speed, traj.step_duration)
    lsf = lsf_values(distances_2d(traj.position, layout), kappa1, kappa2, sh, pl)
    return LsfProcess(kappa1=kappa1, kappa2=kappa2,
                      step_corr=mobility.step_corr(sh.d_decorr), lsf=lsf,
                      layout=layout, shadowing=sh, path_loss_params=pl,
                      cycle_index=traj.cycle_index)


def step_lsf(proc, traj, rng):
    """Advances the user-side shadowing by one AR(1) step and recomputes the
    LSF at the position of ``traj``.
    """
    if traj.cycle_index < 1:
        raise ContractViolation('step_lsf needs a trajectory at cycle >= 1.')
    c = proc.step_corr
    kappa2 = c * proc.kappa2 + np.sqrt(1.0 - c ** 2) * float(rng.standard_normal())
    lsf = lsf_values(distances_2d(traj.position, proc.layout), proc.kappa1,
                     kappa2, proc.shadowing, proc.path_loss_params)
    return replace(proc, kappa2=kappa2, lsf=lsf, cycle_index=traj.cycle_index)


def quantize_state(beta, q):
    """GOOD if ``beta`` exceeds the threshold, BAD otherwise (ties are BAD)."""
    states = np.where(np.asarray(beta) > q.beta_threshold, GOOD, BAD)
    return int(states) if states.ndim == 0 else states


def k_dot(d_2d, q, sh, pl):
    """Normalized threshold (10 / sigma) * log10(beta_threshold / PL(d))."""
    gain = path_loss(d_2d, pl)
    if sh.sigma_sh_db == 0:
        return -np.inf if gain > q.beta_threshold else np.inf
    return 10.0 / sh.sigma_sh_db * np.log10(q.beta_threshold / gain)


def prob_good(d_2d_t, q, sh, pl):
    """Probability that the quantized state at distance ``d_2d_t`` is good.

    Arguments:
    ----------
        d_2d_t (float):
            Planar distance in meters.
        q (StateQuantizer):
            Quantizer.
        sh (ShadowingParams):
            Shadowing parameters.
        pl (PathLossParams):
            Path-loss parameters.

    Returns:
    --------
        (float):
            Q(k_dot); without shadowing 1 if PL > threshold else 0.
    """
    return float(q_function(k_dot(d_2d_t, q, sh, pl)))


def bvn_upper_rect(a, b, corr):
    """P(X > a, Y > b) for a standard bivariate normal pair with correlation
    ``corr``.

    Integrates phi(x) * Q((b - corr x) / sqrt(1 - corr^2)) over x > a with
    adaptive quadrature; the perfectly correlated cases are closed form.

    Arguments:
    ----------
        a (float):
            Lower bound on X.
        b (float):
            Lower bound on Y.
        corr (float):
            Correlation in [-1, 1].

    Returns:
    --------
        (float):
            Probability.
    """
    if not -1.0 <= corr <= 1.0:
        raise ContractViolation('Correlation must lie in [-1, 1].')
    if a == np.inf or b == np.inf:
        return 0.0
    if a == -np.inf:
        return float(q_function(b))
    if b == -np.inf:
        return float(q_function(a))
    if corr == 1.0:
        return float(q_function(max(a, b)))
    if corr == -1.0:
        return float(max(0.0, norm.cdf(-b) - norm.cdf(a)))
    if corr == 0.0:
        return float(q_function(a) * q_function(b))

    scale = np.sqrt(1.0 - corr ** 2)
    lower, upper = max(a, -QUAD_LIMIT), QUAD_LIMIT
    if lower >= upper:
        return 0.0

    def integrand(x):
        return norm.pdf(x) * norm.sf((b - corr * x) / scale)

    points = None
    kink = b / corr
    if lower < kink < upper:
        points = [kink]
    value, _ = quad(integrand, lower, upper, points=points, limit=200,
                    epsabs=1e-13, epsrel=1e-11)
    bound = min(q_function(a), q_function(b))
    return float(min(max(value, 0.0), bound))


@lru_cache(maxsize=1 << 16)
def trans_probs(d_prev, d_curr, q, sh, pl, mobility):
    """Probabilities of a good state at the current cycle given a good
    (``p11``) or bad (``p01``) state at the previous cycle.

    Arguments:
    ----------
        d_prev (float):
            Distance at the previous cycle, meters.
        d_curr (float):
            Distance at the current cycle, meters.
        q (StateQuantizer):
            Quantizer.
        sh (ShadowingParams):
            Shadowing parameters.
        pl (PathLossParams):
            Path-loss parameters.
        mobility (MobilityParams):
            Speed and cycle duration.

    Returns:
    --------
        (tuple):
            (p11, p01), both clamped to [0, 1].
    """
    if d_prev < 0 or d_curr < 0:
        raise ContractViolation('Distances must be non-negative.')
    p_curr = prob_good(d_curr, q, sh, pl)
    if sh.sigma_sh_db == 0:
        return p_curr, p_curr

    k_prev = k_dot(d_prev, q, sh, pl)
    k_curr = k_dot(d_curr, q, sh, pl)
    corr = sh.iota + (1.0 - sh.iota) * mobility.step_corr(sh.d_decorr)
    p_prev = float(q_function(k_prev))
    joint = bvn_upper_rect(k_curr, k_prev, min(corr, 1.0))

    if p_prev > CONDITIONING_EPS:
        p11 = joint / p_prev
    else:
        logger.warning(f'p11 undefined at d={d_prev:.1f} m; using p1={p_curr:.3g}.')
        p11 = p_curr
    if 1.0 - p_prev > CONDITIONING_EPS:
        p01 = (p_curr - joint) / (1.0 - p_prev)
    else:
        logger.warning(f'p01 undefined at d={d_prev:.1f} m; using p1={p_curr:.3g}.')
        p01 = p_curr
    return float(np.clip(p11, 0.0, 1.0)), float(np.clip(p01, 0.0, 1.0))
