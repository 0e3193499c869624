"""Scenario configuration: defaults, INI loading, overrides and presets.

Config files are INI style.  Sections only group keys for readability; key
names are unique across sections.  Quantities in dB carry a ``_db`` (or
``_dbm``) suffix and are converted to linear scale when the scenario is
built.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .channel import SPEED_OF_LIGHT, FrequencyGrid, LinkBudget
from .codebook import design_codebook
from .geometry import PolarPosition, RisGeometry
from .metrics import SCHEMES, FrameSpec
from .robust_rate import OutageSpec


class ConfigError(ValueError):
    pass


SECTIONS = {
    "geometry": ("r_inn", "r_out", "bs_x", "bs_y", "bs_z", "n_x", "n_z",
                 "spacing_wavelengths", "radius_law"),
    "radio": ("f0", "delta_f", "n_rb", "tx_power_dbm", "noise_power_dbm",
              "rician_k_db", "antenna_gain_db", "pl_exponent", "beta0_db"),
    "frame": ("n_slots", "tau_ofdm", "tau_d", "tau_l", "epsilon", "tau"),
    "experiment": ("n_users", "objective", "schemes", "trials", "seed",
                   "lemma_literal", "sweep_var", "sweep_values"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry
    r_inn: float = 9.0
    r_out: float = 30.0
    bs_x: float = 10.0
    bs_y: float = 100.0
    bs_z: float = 0.0
    n_x: int = 10
    n_z: int = 10
    spacing_wavelengths: float = 0.5
    radius_law: str = "area_uniform"
    # radio
    f0: float = 1.8e9
    delta_f: float = 180e3
    n_rb: int = 50
    tx_power_dbm: float = 20.0
    noise_power_dbm: float = -112.45
    rician_k_db: float = -9.0
    antenna_gain_db: float = 12.85
    pl_exponent: float = 2.7
    beta0_db: float = -31.53
    # frame
    n_slots: int = 11
    tau_ofdm: int = 14
    tau_d: int = 7
    tau_l: int = 7
    epsilon: float = 0.95
    tau: float = 0.5
    # experiment
    n_users: int = 55
    objective: str = "max_rate"
    schemes: tuple = SCHEMES
    trials: int = 500
    seed: int = 0
    lemma_literal: bool = False
    sweep_var: str = "n_users"
    sweep_values: tuple = field(default=())

    def __post_init__(self):
        try:
            self.validate()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self):
        if self.objective not in ("max_rate", "max_min"):
            raise ConfigError(f"objective must be max_rate or max_min, got {self.objective!r}")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEMES}, got {self.schemes}")
        if self.radius_law not in ("area_uniform", "range_uniform"):
            raise ConfigError(f"unknown radius_law {self.radius_law!r}")
        if not 0 < self.r_inn < self.r_out:
            raise ConfigError("ring radii must satisfy 0 < r_inn < r_out")
        if self.n_users < 1 or self.trials < 1:
            raise ConfigError("n_users and trials must be positive")
        if self.sweep_var not in ("n_users", "rician_k_db"):
            raise ConfigError(f"sweep_var must be n_users or rician_k_db, got {self.sweep_var!r}")
        # downstream type invariants
        self.ris()
        self.grid()
        self.budget()
        self.frame()
        self.outage()
        if self.bs_position().range <= 0:
            raise ConfigError("BS cannot sit on the RIS")

    # -- derived objects -----------------------------------------------------
    def ris(self) -> RisGeometry:
        d = self.spacing_wavelengths * SPEED_OF_LIGHT / self.f0
        return RisGeometry(self.n_x, self.n_z, d, d)

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.f0, self.delta_f, self.n_rb)

    def budget(self) -> LinkBudget:
        return LinkBudget(
            tx_power=db_to_linear(self.tx_power_dbm - 30),
            noise_power=db_to_linear(self.noise_power_dbm - 30),
            rician_k=db_to_linear(self.rician_k_db),
            beta0=db_to_linear(self.beta0_db),
            pl_exponent=self.pl_exponent,
            antenna_gain_product=db_to_linear(self.antenna_gain_db),
        )

    def frame(self) -> FrameSpec:
        return FrameSpec(self.n_slots, self.tau_ofdm, self.tau_d, self.tau_l)

    def outage(self) -> OutageSpec:
        return OutageSpec(self.epsilon)

    def bs_position(self) -> PolarPosition:
        return PolarPosition.from_cartesian((self.bs_x, self.bs_y, self.bs_z))

    def codebook(self):
        return design_codebook(self.ris(), self.bs_position().azimuth, self.f0, self.tau)

    # -- serialization -------------------------------------------------------
    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schemes"] = list(self.schemes)
        d["sweep_values"] = list(self.sweep_values)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_ini(self) -> str:
        d = self.as_dict()
        lines = []
        for section, keys in SECTIONS.items():
            lines.append(f"[{section}]")
            for k in keys:
                v = d[k]
                if isinstance(v, list):
                    v = ", ".join(str(x) for x in v)
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = _FIELDS[key].default
    raw = raw.strip()
    try:
        if key == "schemes":
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if key == "sweep_values":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        out[k] = _coerce(k, v)
    return out


def load_config(path=None, overrides=None, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read an INI config (optional) on top of ``base`` and apply overrides."""
    values = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}] in {path}")
            for k, v in parser.items(section):
                if k not in SECTIONS[section]:
                    raise ConfigError(f"unknown key {k!r} in section [{section}]")
                values[k] = _coerce(k, v)
    if overrides:
        values.update(overrides if isinstance(overrides, dict) else parse_overrides(overrides))
    try:
        return dataclasses.replace(base or ScenarioConfig(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


PRESETS = {
    "fig4a": dict(objective="max_rate", rician_k_db=-9.0, sweep_var="n_users",
                  sweep_values=(55, 110, 275, 550, 1100, 2750, 5500)),
    "fig4b": dict(objective="max_rate", n_users=55, sweep_var="rician_k_db",
                  sweep_values=tuple(float(k) for k in range(-12, 13, 3))),
    "fig5a": dict(objective="max_min", rician_k_db=-9.0, sweep_var="n_users",
                  sweep_values=(50, 150, 250, 350, 450, 550)),
    "fig5b": dict(objective="max_min", n_users=550, sweep_var="rician_k_db",
                  sweep_values=tuple(float(k) for k in range(-12, 13, 3))),
}


def preset_config(name: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return (base or ScenarioConfig()).replace(**PRESETS[name])
