"""Scenario files: JSON with nested sections mirroring the config types.

Every field has a default, so a minimal scenario is just a name and the
handful of values under study. Unknown keys and type mismatches are
rejected with the dotted path of the offending entry. A loaded scenario
is fully resolved (network jitter and comm range filled in), and its
serialized form round-trips.
"""

import dataclasses
import json
from dataclasses import dataclass, field

from .adaptation import ADAPTED_VARIABLES, AsaConfig
from .bidding import BidWeights
from .costs import CostProfile
from .meshnet import NetworkConfig
from .optimizer import DEParams
from .world import Heterogeneity, WorldConfig


class ConfigError(ValueError):
    """Scenario file problem; message names the dotted config path."""


@dataclass
class Scenario:
    name: str = "scenario"
    n_agents: int = 5
    n_seeds: int = 20
    master_seed: int = 0
    world: WorldConfig = field(default_factory=WorldConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    profile: CostProfile = field(default_factory=CostProfile)
    asa: AsaConfig = field(default_factory=AsaConfig)
    heterogeneity: Heterogeneity = field(default_factory=Heterogeneity)
    de: DEParams = field(default_factory=DEParams)
    bid_weights: BidWeights = field(default_factory=BidWeights)

    def resolved(self) -> "Scenario":
        return dataclasses.replace(
            self, network=self.network.resolve(self.world.comm_range))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self.resolved())

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


_SECTIONS = {
    "world": WorldConfig,
    "network": NetworkConfig,
    "profile": CostProfile,
    "asa": AsaConfig,
    "heterogeneity": Heterogeneity,
    "de": DEParams,
    "bid_weights": BidWeights,
}

_SCALARS = {
    "name": str,
    "n_agents": int,
    "n_seeds": int,
    "master_seed": int,
}


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario root must be an object")
    kwargs = {}
    for key, value in data.items():
        if key in _SCALARS:
            kwargs[key] = _coerce(value, _SCALARS[key], key)
        elif key in _SECTIONS:
            kwargs[key] = _fill_section(_SECTIONS[key], value, key)
        else:
            raise ConfigError("unknown scenario key %r" % key)
    scenario = Scenario(**kwargs).resolved()
    _validate(scenario)
    return scenario


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read scenario file: %s" % exc) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("scenario file is not valid JSON: %s" % exc) from exc
    return scenario_from_dict(data)


def _kind_of(tp) -> str:
    """Classify a dataclass field annotation (type object or string)."""
    if tp is int:
        return "int"
    if tp is bool:
        return "bool"
    if tp is str:
        return "str"
    if tp is float:
        return "float"
    text = tp if isinstance(tp, str) else str(tp)
    if "Optional[float]" in text:
        return "opt_float"
    if "Dict[" in text:
        return "bounds"
    for name in ("int", "bool", "str"):
        if text == name:
            return name
    return "float"


def _fill_section(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError("%s must be an object" % path)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ConfigError("unknown key %s.%s" % (path, key))
        kind = _kind_of(fields[key].type)
        dotted = "%s.%s" % (path, key)
        if kind == "int":
            kwargs[key] = _coerce(value, int, dotted)
        elif kind == "bool":
            kwargs[key] = _coerce(value, bool, dotted)
        elif kind == "str":
            kwargs[key] = _coerce(value, str, dotted)
        elif kind == "opt_float":
            kwargs[key] = None if value is None else _coerce(value, float, dotted)
        elif kind == "bounds":
            kwargs[key] = _parse_bounds(value, dotted)
        else:
            kwargs[key] = _coerce(value, float, dotted)
    return cls(**kwargs)


def _parse_bounds(value, dotted: str):
    """Per-variable [low, high] overrides; unnamed variables keep defaults."""
    if not isinstance(value, dict):
        raise ConfigError("%s must be an object of [low, high] pairs" % dotted)
    out = dict(ADAPTED_VARIABLES)
    for name, pair in value.items():
        sub = "%s.%s" % (dotted, name)
        if name not in ADAPTED_VARIABLES:
            raise ConfigError("%s is not an adapted variable" % sub)
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError("%s must be a [low, high] pair" % sub)
        out[name] = (_coerce(pair[0], float, sub), _coerce(pair[1], float, sub))
    return out


def _coerce(value, target, dotted: str):
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("%s must be a number, got %r" % (dotted, value))
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("%s must be an integer, got %r" % (dotted, value))
        return value
    if target is bool:
        if not isinstance(value, bool):
            raise ConfigError("%s must be a boolean, got %r" % (dotted, value))
        return value
    if target is str:
        if not isinstance(value, str):
            raise ConfigError("%s must be a string, got %r" % (dotted, value))
        return value
    raise ConfigError("unsupported type at %s" % dotted)


def _validate(s: Scenario) -> None:
    if s.n_agents < 1:
        raise ConfigError("n_agents must be at least 1")
    if s.n_seeds < 1:
        raise ConfigError("n_seeds must be at least 1")
    w = s.world
    for name in ("area_width", "area_height", "tile_size", "sim_dt", "t_update",
                 "t_broadcast", "t_auction", "comm_range", "max_speed",
                 "plan_horizon"):
        if getattr(w, name) <= 0:
            raise ConfigError("world.%s must be positive" % name)
    if w.t_max < 0:
        raise ConfigError("world.t_max must be non-negative")
    if not w.sim_dt <= w.t_update <= w.t_broadcast <= w.t_auction:
        raise ConfigError(
            "world timing must satisfy sim_dt <= t_update <= t_broadcast"
            " <= t_auction")
    if not 0.0 < w.search_radius < w.tile_size / 2.0:
        raise ConfigError(
            "world.search_radius must lie in (0, tile_size/2)")
    if not w.z_min < w.search_altitude < w.z_max:
        raise ConfigError(
            "world altitude band must satisfy z_min < search_altitude < z_max")
    try:
        w.grid_shape()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = s.network
    if n.mean_delay < 0:
        raise ConfigError("network.mean_delay must be non-negative")
    if not 0.0 <= n.drop_probability <= 1.0:
        raise ConfigError("network.drop_probability must lie in [0, 1]")
    if n.max_hops < 0:
        raise ConfigError("network.max_hops must be non-negative")
    try:
        s.de.validate()
    except ValueError as exc:
        raise ConfigError("de: %s" % exc) from exc
    if s.asa.max_trials < 0:
        raise ConfigError("asa.max_trials must be non-negative")
    if not 0.0 < s.asa.temperature_decay < 1.0:
        raise ConfigError("asa.temperature_decay must lie in (0, 1)")
    if s.asa.reanneal_period < 1:
        raise ConfigError("asa.reanneal_period must be at least 1")
    if s.asa.trials_per_eval < 1:
        raise ConfigError("asa.trials_per_eval must be at least 1")
    for name, (low, high) in s.asa.bounds.items():
        ref = ADAPTED_VARIABLES.get(name)
        if ref is None:
            raise ConfigError("asa.bounds.%s is not an adapted variable" % name)
        if not ref[0] <= low <= high <= ref[1]:
            raise ConfigError(
                "asa.bounds.%s must be a sub-interval of [%g, %g]"
                % (name, ref[0], ref[1]))
    for name in ("velocity_noise_sigma", "acceleration_noise_sigma"):
        if getattr(s.heterogeneity, name) < 0:
            raise ConfigError("heterogeneity.%s must be non-negative" % name)
