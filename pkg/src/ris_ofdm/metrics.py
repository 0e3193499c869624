"""System metrics and the perfect-CSI benchmark."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import FrequencyGrid, LinkBudget, reflected_channels, sample_direct_many
from .robust_rate import OutageSpec, direct_distances

SCHEMES = ("jnt", "seq", "csi")


class UndefinedMetric(ValueError):
    pass


@dataclass(frozen=True)
class FrameSpec:
    n_slots: int
    tau_ofdm: int
    tau_d: int
    tau_l: int

    def __post_init__(self):
        if self.tau_d + self.tau_l != self.tau_ofdm:
            raise ValueError("data and localization symbols must fill the slot")
        if self.n_slots < 1 or self.tau_d < 1 or self.tau_l < 0:
            raise ValueError("invalid frame dimensions")


@dataclass
class MetricsReport:
    scheme: str
    mean_throughput: float
    jain: float
    per_user_throughput: float
    efficiency: float
    extra: dict = field(default_factory=dict)


def csi_pilot_length(K: int, n_x: int) -> int:
    return math.ceil(K * (n_x + 1))


def efficiency(scheme: str, frame: FrameSpec, spec: OutageSpec, K: int, n_x: int) -> float:
    """Fraction of the frame carrying useful data for ``scheme``.

    Localization-based schemes lose the localization symbols and the outage
    probability; the CSI scheme loses the pilot phase.
    """
    if scheme in ("jnt", "seq"):
        return spec.epsilon * frame.tau_d / (frame.tau_d + frame.tau_l)
    if scheme == "csi":
        data = frame.n_slots * frame.tau_ofdm
        return data / (data + csi_pilot_length(K, n_x))
    raise ValueError(f"unknown scheme {scheme!r}")


def throughput(rates, frame: FrameSpec, delta_f: float, eta: float) -> float:
    """Average system throughput in bit/s from per-user spectral efficiencies."""
    return float(eta * delta_f / frame.n_slots * np.sum(rates))


def jain_index(rates) -> float:
    rates = np.asarray(rates, dtype=float)
    sq = np.sum(rates**2)
    if rates.size == 0 or sq == 0:
        raise UndefinedMetric("Jain index undefined for all-zero rates")
    return float(np.sum(rates) ** 2 / (rates.size * sq))


def csi_rate_arrays(ue_ranges, ue_azimuths, bs, config_azimuths, ris,
                    grid: FrequencyGrid, budget: LinkBudget,
                    rng: np.random.Generator, h=None, g=None) -> np.ndarray:
    """Instantaneous capacities ``log2(1 + SNR)`` for one fading realization.

    The direct channel is drawn once per user and RB and held over the slots;
    pass ``h`` (shape (K, F)) to reuse a given realization and ``g`` to
    reuse reflected coefficients.
    """
    ue_ranges = np.atleast_1d(np.asarray(ue_ranges, dtype=float))
    ue_azimuths = np.atleast_1d(np.asarray(ue_azimuths, dtype=float))
    if h is None:
        h = sample_direct_many(direct_distances(ue_ranges, ue_azimuths, bs),
                               grid, budget, rng)
    if g is None:
        g = reflected_channels(ue_ranges, ue_azimuths, bs, config_azimuths, ris, grid,
                               budget)
    s = h[:, :, None] + g
    return np.log2(1 + budget.snr_scale * (s.real**2 + s.imag**2))


def csi_rate_tensor(scenario, codebook, grid: FrequencyGrid, budget: LinkBudget,
                    rng: np.random.Generator) -> np.ndarray:
    return csi_rate_arrays(scenario.user_ranges(), scenario.user_azimuths(), scenario.bs,
                           codebook.center_azimuths, scenario.ris, grid, budget, rng)
