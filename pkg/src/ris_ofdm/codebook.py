"""Half-power-overlapping beam codebook for the RIS."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .channel import SPEED_OF_LIGHT
from .geometry import RisGeometry


@dataclass(frozen=True)
class Configuration:
    index: int
    center_azimuth: float
    hp_minus: float
    hp_plus: float
    phases: np.ndarray

    def wrapped_phases(self) -> np.ndarray:
        return np.mod(self.phases, 2 * np.pi)


@dataclass(frozen=True)
class Codebook:
    configs: tuple
    tau: float
    x_tau: float

    def __len__(self):
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)

    def __getitem__(self, i):
        return self.configs[i]

    @property
    def center_azimuths(self) -> np.ndarray:
        return np.array([c.center_azimuth for c in self.configs])

    @property
    def hp_edges(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([c.hp_minus for c in self.configs]),
                np.array([c.hp_plus for c in self.configs]))

    def to_csv(self, path):
        """One row per configuration: index, center/HP angles in degrees, phases in radians."""
        n_x = len(self.configs[0].phases) if self.configs else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["config", "center_deg", "hp_minus_deg", "hp_plus_deg"]
                       + [f"phase_{n}" for n in range(1, n_x + 1)])
            for c in self.configs:
                w.writerow([c.index, repr(math.degrees(c.center_azimuth)),
                            repr(math.degrees(c.hp_minus)), repr(math.degrees(c.hp_plus))]
                           + [repr(float(p)) for p in c.wrapped_phases()])


def solve_x_tau(tau: float, tol: float = 1e-12) -> float:
    """Smallest non-negative ``x`` with ``sinc(x)**2 == tau`` (``sinc(x) = sin x / x``)."""
    if not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    if tau == 1:
        return 0.0
    target = math.sqrt(tau)
    lo, hi = 0.0, math.pi
    # sinc is strictly decreasing on (0, pi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if math.sin(mid) / mid > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cosine_step(ris: RisGeometry, f0: float, x_tau: float) -> float:
    """Cosine-domain half beamwidth ``nu x_tau / (pi d_x N_x f0)``."""
    return SPEED_OF_LIGHT * x_tau / (math.pi * ris.d_x * ris.n_x * f0)


def raw_num_configs(ris: RisGeometry, f0: float, x_tau: float) -> int:
    """Closed-form ceiling count ``ceil(pi d_x N_x f0 / (x_tau nu))``."""
    return math.ceil(math.pi * ris.d_x * ris.n_x * f0 / (x_tau * SPEED_OF_LIGHT))


def num_configs(ris: RisGeometry, f0: float, x_tau: float) -> int:
    """Number of beams whose center cosine stays in ``[-1, 1]``."""
    step = cosine_step(ris, f0, x_tau)
    # cos phi_c = 1 - (2c - 1) step >= -1
    c = math.floor((2 / step + 1) / 2 + 1e-12)
    return max(c, 1)


def phase_profile(center_azimuth: float, bs_azimuth: float, ris: RisGeometry,
                  f0: float) -> np.ndarray:
    """Unwrapped column phases steering ``center_azimuth`` toward the BS at f0."""
    slope = math.cos(bs_azimuth) + math.cos(center_azimuth)
    residual = slope * (ris.n_x + 1) / 2 * ris.d_x
    n = np.arange(1, ris.n_x + 1)
    return 2 * np.pi / SPEED_OF_LIGHT * f0 * (residual - n * ris.d_x * slope)


def design_codebook(ris: RisGeometry, bs_azimuth: float, f0: float,
                    tau: float = 0.5) -> Codebook:
    """Build the codebook whose consecutive beams cross at gain ``tau``.

    Beam ``c`` (1-based) has ``cos phi_c = 1 - (2c - 1) u`` and half-power
    edges at ``1 - (2c - 2) u`` and ``1 - 2c u`` with ``u`` the cosine
    half-width.  Only beams with a physical center are kept; the last beam's
    upper edge is clipped to pi when its cosine falls below -1.
    """
    x_tau = solve_x_tau(tau)
    if x_tau == 0:
        raise ValueError("tau = 1 gives zero-width beams")
    u = cosine_step(ris, f0, x_tau)
    configs = []
    for c in range(1, num_configs(ris, f0, x_tau) + 1):
        cos_c = 1 - (2 * c - 1) * u
        cos_lo = 1 - (2 * c - 2) * u
        cos_hi = 1 - 2 * c * u
        center = math.acos(cos_c)
        configs.append(Configuration(
            index=c,
            center_azimuth=center,
            hp_minus=math.acos(min(1.0, max(-1.0, cos_lo))),
            hp_plus=math.acos(min(1.0, max(-1.0, cos_hi))),
            phases=phase_profile(center, bs_azimuth, ris, f0),
        ))
    return Codebook(tuple(configs), tau, x_tau)
