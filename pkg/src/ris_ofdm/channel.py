"""Channel terms of the RIS-aided uplink.

Direct path: Rician with a LOS phasor over the RBs.  Reflected path: pure
LOS through the RIS, shaped by the normalized array factor of the loaded
phase profile.  Everything is vectorized over leading axes; the scalar
helpers at the bottom wrap the array versions for single links.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PolarPosition, RisGeometry, bs_ue_distance

SPEED_OF_LIGHT = 2.998e8
MAX_RBS = 350
_SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyGrid:
    f0: float
    delta_f: float
    n_rb: int

    def __post_init__(self):
        if self.f0 <= 0 or self.delta_f <= 0:
            raise ValueError("carrier and RB bandwidth must be positive")
        if not 1 <= self.n_rb <= MAX_RBS:
            raise ValueError(f"n_rb must lie in [1, {MAX_RBS}], got {self.n_rb}")

    @property
    def frequencies(self) -> np.ndarray:
        return self.f0 + np.arange(self.n_rb) * self.delta_f

    @property
    def wavelengths(self) -> np.ndarray:
        return SPEED_OF_LIGHT / self.frequencies

    @property
    def wavelength0(self) -> float:
        return SPEED_OF_LIGHT / self.f0


@dataclass(frozen=True)
class LinkBudget:
    """Linear-scale link parameters (watts, plain ratios)."""

    tx_power: float
    noise_power: float
    rician_k: float
    beta0: float
    pl_exponent: float
    antenna_gain_product: float

    def __post_init__(self):
        for name in ("tx_power", "noise_power", "beta0", "antenna_gain_product"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rician_k < 0 or self.pl_exponent < 0:
            raise ValueError("rician_k and pl_exponent must be non-negative")

    @property
    def snr_scale(self) -> float:
        return self.tx_power / self.noise_power


def pathloss(r, budget: LinkBudget):
    """``beta0 * G_b G_k / r**eps``; ``r`` is a distance or a distance product."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("path-loss argument must be positive")
    out = budget.beta0 * budget.antenna_gain_product / r**budget.pl_exponent
    return out if out.ndim else float(out)


def los_vector(r, grid: FrequencyGrid) -> np.ndarray:
    """Per-RB propagation phasors ``exp(-j 2 pi f r / nu)``, shape ``r.shape + (F,)``."""
    r = np.asarray(r, dtype=float)
    # reduce each factor mod 1 cycle before multiplying, keeps phases exact
    # for r of a few hundred meters at GHz carriers
    cyc0 = np.mod(grid.f0 * r / SPEED_OF_LIGHT, 1.0)
    cyc_step = np.mod(grid.delta_f * r / SPEED_OF_LIGHT, 1.0)
    f = np.arange(grid.n_rb)
    cycles = cyc0[..., None] + np.mod(cyc_step[..., None] * f, 1.0)
    return np.exp(-2j * np.pi * cycles)


def steering_argument(ue_azimuth, bs_azimuth, config_azimuth, f, grid: FrequencyGrid):
    """``psi = f0 (cos phi_k - cos phi_c) + f dF (cos phi_k + cos phi_b)`` in Hz."""
    ck = np.cos(ue_azimuth)
    return (grid.f0 * (ck - np.cos(config_azimuth))
            + np.asarray(f, dtype=float) * grid.delta_f * (ck + np.cos(bs_azimuth)))


def dirichlet(x, n: int):
    """``sin(n x) / (n sin x)`` with the removable singularities filled in."""
    x = np.asarray(x, dtype=float)
    m = np.round(x / np.pi)
    near = np.abs(x - m * np.pi) < _SINGULAR_TOL
    den = n * np.sin(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(near, 0.0, np.sin(n * x) / np.where(near, 1.0, den))
    # limit at x = m pi is (-1)**(m (n - 1))
    limit = np.where(np.mod(m * (n - 1), 2) == 0, 1.0, -1.0)
    out = np.where(near, limit, out)
    return out if out.ndim else float(out)


def array_factor(ue_azimuth, bs_azimuth, config_azimuth, f, ris: RisGeometry,
                 grid: FrequencyGrid):
    """Closed-form normalized array factor of a linear-phase configuration.

    Real valued in ``[-1, 1]``; equal to 1 at ``f = 0`` when the user sits at
    the configuration's beam center.  ``f`` may be fractional to probe
    frequency offsets between RB centers.
    """
    psi = steering_argument(ue_azimuth, bs_azimuth, config_azimuth, f, grid)
    return dirichlet(np.pi * ris.d_x / SPEED_OF_LIGHT * psi, ris.n_x)


def array_factor_from_phases(ue_azimuth, bs_azimuth, phases, f, ris: RisGeometry,
                             grid: FrequencyGrid):
    """Array factor summed element by element for an arbitrary phase profile.

    ``phases`` holds the ``N_x`` column phases (rows along z share them).
    Returns the complex coefficient including the ``N_z / N`` prefactor, so a
    surface with ``N_z`` identical rows contributes ``N_z`` times this sum
    once multiplied by ``N``.
    """
    phases = np.asarray(phases, dtype=float)
    n = np.arange(1, ris.n_x + 1)
    freq = grid.f0 + np.asarray(f, dtype=float) * grid.delta_f
    geo = np.cos(ue_azimuth) + np.cos(bs_azimuth)
    k = 2 * np.pi / SPEED_OF_LIGHT * freq * ris.d_x * geo
    k = np.asarray(k)[..., None]
    terms = np.exp(1j * phases) * np.exp(1j * k * n)
    pre = np.exp(-1j * k[..., 0] * (ris.n_x + 1) / 2)
    return ris.n_z / ris.n_elements * pre * terms.sum(axis=-1)


def reflected_gain(ue_range, bs_range, ris: RisGeometry, budget: LinkBudget):
    """Amplitude ``sqrt(beta(r_k r_b)) * N`` of the reflected path."""
    return np.sqrt(pathloss(np.asarray(ue_range) * bs_range, budget)) * ris.n_elements


def reflected_channels(ue_ranges, ue_azimuths, bs: PolarPosition, config_azimuths,
                       ris: RisGeometry, grid: FrequencyGrid,
                       budget: LinkBudget) -> np.ndarray:
    """Reflected coefficients for every user, RB and configuration, shape (K, F, C)."""
    ue_ranges = np.atleast_1d(np.asarray(ue_ranges, dtype=float))
    ue_azimuths = np.atleast_1d(np.asarray(ue_azimuths, dtype=float))
    config_azimuths = np.atleast_1d(np.asarray(config_azimuths, dtype=float))
    f = np.arange(grid.n_rb)
    af = array_factor(ue_azimuths[:, None, None], bs.azimuth,
                      config_azimuths[None, None, :], f[None, :, None], ris, grid)
    amp = reflected_gain(ue_ranges, bs.range, ris, budget)
    d = los_vector(ue_ranges + bs.range, grid)
    return (amp[:, None] * d)[:, :, None] * af


def reflected_channel(ue: PolarPosition, bs: PolarPosition, config, ris: RisGeometry,
                      grid: FrequencyGrid, budget: LinkBudget) -> np.ndarray:
    """Reflected coefficients of one user over the RBs for one configuration.

    ``config`` is anything with a ``center_azimuth`` attribute, or a bare
    beam-center azimuth in radians.
    """
    az = getattr(config, "center_azimuth", config)
    return reflected_channels(ue.range, ue.azimuth, bs, az, ris, grid, budget)[0, :, 0]


def direct_los(r_bk, grid: FrequencyGrid, budget: LinkBudget) -> np.ndarray:
    """Mean of the direct channel, ``sqrt(beta kappa/(kappa+1)) d(r_bk)``."""
    r_bk = np.asarray(r_bk, dtype=float)
    k = budget.rician_k
    scale = np.sqrt(pathloss(r_bk, budget) * k / (k + 1))
    return np.asarray(scale)[..., None] * los_vector(r_bk, grid)


def sample_direct_many(r_bk, grid: FrequencyGrid, budget: LinkBudget,
                       rng: np.random.Generator) -> np.ndarray:
    """One Rician draw per user and RB, shape ``r_bk.shape + (F,)``."""
    r_bk = np.asarray(r_bk, dtype=float)
    shape = r_bk.shape + (grid.n_rb,)
    k = budget.rician_k
    nlos = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    beta = np.asarray(pathloss(r_bk, budget))[..., None]
    if np.isinf(k):
        return np.sqrt(beta) * los_vector(r_bk, grid)
    return direct_los(r_bk, grid, budget) + np.sqrt(beta / (k + 1)) * nlos


def sample_direct(ue: PolarPosition, bs: PolarPosition, grid: FrequencyGrid,
                  budget: LinkBudget, rng: np.random.Generator) -> np.ndarray:
    return sample_direct_many(bs_ue_distance(bs, ue), grid, budget, rng)


def snr(h, g, budget: LinkBudget):
    """Instantaneous SNR ``P |h + g|^2 / sigma^2``."""
    out = budget.snr_scale * np.abs(np.asarray(h) + np.asarray(g)) ** 2
    return out if np.ndim(out) else float(out)
