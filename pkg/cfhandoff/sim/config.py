"""Experiment configuration: reference defaults, JSON profiles, dotted-key
overrides and the translation into the domain parameter objects.
"""
import json
import math
from dataclasses import dataclass, field, fields, asdict, replace, is_dataclass

from cfhandoff import pathfinder
from cfhandoff.errors import ConfigurationError
from cfhandoff.handoff.engine import EngineConfig, SCHEME_NAMES
from cfhandoff.network.channel import (PathLossParams, ShadowingParams, MobilityParams,
                                       StateQuantizer, aging_profile)
from cfhandoff.pomdp.model import LinkParams
from cfhandoff.radio.rate import RadioParams
from cfhandoff.utils import dbm_to_watts, get_logger


logger = get_logger(__name__)

# Rules combining the per-handoff overhead fraction with the cycle's rate.
OVERHEAD_RULES = ('linear', 'geometric')


@dataclass
class NetworkConfig:
    n_aps: int = 125
    area_side: float = 1000.0       # m
    antennas: int = 8
    ap_height: float = 15.0         # m
    user_height: float = 1.5        # m
    wrap_margin: float = 200.0      # m
    redraw_aps: bool = True


@dataclass
class MobilityConfig:
    speed: float = 10.0             # m/s
    step_duration: float = 1.0      # s
    trip_cycles: int = 100
    start_offset: tuple = (0.0, 0.0)


@dataclass
class RadioConfig:
    p_dl_dbm: float = 30.0
    p_ul_dbm: float = 20.0
    tau_c: int = 200
    tau_p: int = 16
    pilot_index: int = None
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 8.0
    bandwidth_hz: float = 20e6
    carrier_hz: float = 1.8e9
    sample_period: float = 66.7e-6  # s
    load: float = 1.0
    multi_user: bool = False
    n_interferers: int = 0


@dataclass
class ChannelConfig:
    d0: float = 1.1                 # m
    alpha_pl: float = 3.8
    sigma_sh_db: float = 6.0
    d_decorr: float = 100.0         # m
    iota: float = 0.5


@dataclass
class QuantizerConfig:
    threshold_distance: float = 150.0   # m
    good_distance: float = 50.0         # m
    bad_distance: float = 200.0         # m


@dataclass
class SolverConfig:
    b_con: int = 5
    horizon: int = 10
    r_threshold: float = 7.0        # nats/s/Hz
    gamma: float = 0.95
    belief_budget: int = 128
    expansion_depth: int = 3
    observation_samples: int = 3
    initial_belief: str = 'closed_form'
    reuse_policy: bool = False
    workers: int = 1


@dataclass
class OverheadConfig:
    delta: float = 0.05
    rule: str = 'linear'
    sweep: tuple = ()


@dataclass
class SeedConfig:
    master_seed: int = 1
    trials: int = 50
    workers: int = 1


@dataclass
class ExperimentConfig:
    """Complete description of an experiment campaign."""
    network: NetworkConfig = field(default_factory=NetworkConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    engine: SolverConfig = field(default_factory=SolverConfig)
    overhead: OverheadConfig = field(default_factory=OverheadConfig)
    seeds: SeedConfig = field(default_factory=SeedConfig)
    schemes: tuple = ('pomdp_ho_min', 'lsf_time', 'lsf_threshold')

    def validate(self):
        """Raises :class:`ConfigurationError` on infeasible settings."""
        if self.network.n_aps <= self.engine.b_con:
            raise ConfigurationError(f'B={self.network.n_aps} must exceed '
                                     f'B_con={self.engine.b_con}.')
        if not self.schemes:
            raise ConfigurationError('At least one scheme is required.')
        for scheme in self.schemes:
            if scheme not in SCHEME_NAMES:
                raise ConfigurationError(f'Unknown scheme {scheme!r}.')
        if not 0 <= self.overhead.delta <= 1 or \
           any(not 0 <= d <= 1 for d in self.overhead.sweep):
            raise ConfigurationError('Overhead fractions must lie in [0, 1].')
        if self.overhead.rule not in OVERHEAD_RULES:
            raise ConfigurationError(f'Unknown overhead rule {self.overhead.rule!r}.')
        if self.mobility.trip_cycles < 0 or self.seeds.trials < 0:
            raise ConfigurationError('trip_cycles and trials must be non-negative.')
        if self.radio.multi_user and self.radio.n_interferers < 0:
            raise ConfigurationError('n_interferers must be non-negative.')
        self.link_params()
        self.engine_config(self.schemes[0])
        return self

    def noise_power(self):
        return noise_power(self.radio.noise_density_dbm_hz, self.radio.noise_figure_db,
                           self.radio.bandwidth_hz)

    def link_params(self):
        """Channel and radio parameter objects of this configuration."""
        net, ch, radio = self.network, self.channel, self.radio
        pl = PathLossParams(d0=ch.d0, alpha_pl=ch.alpha_pl,
                            d_h=net.ap_height - net.user_height)
        quantizer = StateQuantizer.from_distances(pl, self.quantizer.threshold_distance,
                                                  self.quantizer.good_distance,
                                                  self.quantizer.bad_distance)
        radio_params = RadioParams(p_dl=float(dbm_to_watts(radio.p_dl_dbm)),
                                   p_ul=float(dbm_to_watts(radio.p_ul_dbm)),
                                   noise_power=self.noise_power(), antennas=net.antennas,
                                   tau_c=radio.tau_c, tau_p=radio.tau_p,
                                   pilot_index=radio.pilot_index)
        return LinkParams(
            quantizer=quantizer,
            shadowing=ShadowingParams(ch.sigma_sh_db, ch.d_decorr, ch.iota),
            path_loss=pl,
            mobility=MobilityParams(self.mobility.speed, self.mobility.step_duration),
            radio=radio_params,
            aging=aging_profile(self.mobility.speed, radio.tau_c, radio.carrier_hz,
                                radio.sample_period))

    def engine_config(self, scheme):
        return EngineConfig(scheme=scheme, **asdict(self.engine))


def noise_power(density_dbm_hz, figure_db, bandwidth_hz):
    """Thermal noise power in watts.

    Arguments:
    ----------
        density_dbm_hz (float):
            Noise spectral density, dBm/Hz.
        figure_db (float):
            Receiver noise figure, dB.
        bandwidth_hz (float):
            Bandwidth, Hz.

    Returns:
    --------
        (float):
            10^((S + F + 10 log10(BW) - 30) / 10).
    """
    if bandwidth_hz <= 0:
        raise ConfigurationError('Bandwidth must be positive.')
    return float(dbm_to_watts(density_dbm_hz + figure_db + 10.0 * math.log10(bandwidth_hz)))


def _build(cls, values, prefix=''):
    template = cls()
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigurationError(f'Unknown configuration key {prefix + key!r}.')
        default = getattr(template, key)
        if is_dataclass(default):
            if not isinstance(value, dict):
                raise ConfigurationError(f'{prefix + key!r} must be a section.')
            kwargs[key] = _build(type(default), value, prefix + key + '.')
        elif isinstance(value, dict):
            raise ConfigurationError(f'{prefix + key!r} is not a section.')
        elif isinstance(default, tuple) and isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def deep_merge(base, update):
    """Recursively merges dictionary ``update`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def parse_override(text):
    """Turns ``section.key=value`` into a nested dictionary.

    Values are parsed as JSON and kept as strings if that fails, so
    ``engine.scheme=lsf_time`` and ``engine.r_threshold=7`` both work.
    """
    if '=' not in text:
        raise ConfigurationError(f'Override {text!r} is not of the form key=value.')
    key, raw = text.split('=', 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    nested = value
    for part in reversed(key.strip().split('.')):
        nested = {part: nested}
    return nested


def read_json(path):
    try:
        with open(path, 'r') as config_file:
            return json.load(config_file)
    except FileNotFoundError:
        raise ConfigurationError(f'Configuration file {path} not found.')
    except json.JSONDecodeError as error:
        raise ConfigurationError(f'Configuration file {path} is not valid JSON: {error}')


def load_config(path=None, profile=None, overrides=()):
    """Resolves an :class:`ExperimentConfig`.

    Precedence, lowest first: reference defaults, the profile named by
    ``profile`` (or by a ``profile`` key of the file), the file at ``path``
    and the dotted-key ``overrides``.

    Arguments:
    ----------
        path (str or pathlib.Path, optional):
            JSON configuration file.
        profile (str, optional):
            Shipped profile, ``reference`` or ``desk``.
        overrides (iterable of str):
            ``section.key=value`` strings.

    Returns:
    --------
        cfg (ExperimentConfig)
    """
    values = {}
    user = read_json(path) if path is not None else {}
    file_profile = user.pop('profile', None)
    profile = profile or file_profile
    if profile is not None:
        profile_file = pathfinder.profile_path(profile)
        if not profile_file.is_file():
            raise ConfigurationError(f'Unknown profile {profile!r}.')
        values = read_json(profile_file)
    values = deep_merge(values, user)
    for text in overrides:
        values = deep_merge(values, parse_override(text))
    return _build(ExperimentConfig, values).validate()


def config_to_dict(cfg):
    """Resolved configuration as plain JSON-serializable data."""
    return json.loads(json.dumps(asdict(cfg)))


def with_override(cfg, text):
    """Copy of ``cfg`` with one dotted-key override applied."""
    values = deep_merge(config_to_dict(cfg), parse_override(text))
    return _build(ExperimentConfig, values).validate()


def restrict_schemes(cfg, schemes):
    return replace(cfg, schemes=tuple(schemes)).validate()
