"""Outage-robust spectral efficiency.

With a Rician direct path and a deterministic reflection, the normalized
received power ``2 (kappa + 1) / beta_h * |h + g|**2`` is noncentral
chi-squared with two degrees of freedom.  The rate that is decodable with
probability ``epsilon`` follows from its ``1 - epsilon`` quantile.

The quantile machinery (first-order Marcum Q, CDF, inverse CDF) is written
as a Poisson mixture of regularized incomplete gamma functions, which stays
finite for any noncentrality.  Large rate tensors go through
:class:`QuantileTable`, a spline of the exact quantile in square-root
coordinates.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammainc, gammaincc, gammaln, i0e, ndtri, xlogy

from .channel import (LinkBudget, FrequencyGrid, los_vector, pathloss,
                      reflected_channels)
from .geometry import PolarPosition, Scenario, bs_ue_distance, polar_to_cartesian

_TAIL_SIGMAS = 12.0
_CHUNK = 2_000_000
# past this noncentrality the asymptotic quantile is accurate to ~1e-12
_ASYMPTOTIC_XI = 1e6


@dataclass(frozen=True)
class OutageSpec:
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def quantile_level(self) -> float:
        return 1.0 - self.epsilon


# ---------------------------------------------------------------------------
# noncentral chi-squared (2 dof)

def _poisson_mixture(x, xi, upper: bool):
    """sum_j Pois(j; xi/2) * P(j + 1, x/2), or Q(...) when ``upper``."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    x, xi = np.broadcast_arrays(x, xi)
    shape = x.shape
    x = x.ravel()
    m = 0.5 * xi.ravel()
    out = np.empty_like(x)
    # sort by mean so each chunk needs a short window of Poisson terms
    order = np.argsort(m, kind="stable")
    ms, xs = m[order], x[order]
    gam = gammaincc if upper else gammainc
    res = np.empty_like(ms)
    pos, n = 0, ms.size
    while pos < n:
        end = min(n, pos + 4096)
        width = int(math.ceil(2 * _TAIL_SIGMAS * math.sqrt(ms[end - 1]) + 30))
        end = min(end, pos + max(1, _CHUNK // width))
        width = int(math.ceil(2 * _TAIL_SIGMAS * math.sqrt(ms[end - 1]) + 30))
        mm = ms[pos:end, None]
        j0 = np.maximum(0.0, np.floor(mm - _TAIL_SIGMAS * np.sqrt(mm) - 10))
        j = j0 + np.arange(width)
        logw = xlogy(j, mm) - mm - gammaln(j + 1)
        res[pos:end] = (np.exp(logw) * gam(j + 1, 0.5 * xs[pos:end, None])).sum(axis=1)
        pos = end
    out[order] = res
    return out.reshape(shape)


def nc_chi2_cdf(x, xi):
    """CDF of the two-dof noncentral chi-squared with noncentrality ``xi``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, _poisson_mixture(np.maximum(x, 0), xi, upper=False), 0.0)
    return np.minimum(out, 1.0) if out.ndim else float(min(out, 1.0))


def nc_chi2_pdf(x, xi):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    xc = np.maximum(x, 0)
    out = 0.5 * np.exp(-0.5 * (np.sqrt(xc) - np.sqrt(xi)) ** 2) * i0e(np.sqrt(xi * xc))
    out = np.where(x >= 0, out, 0.0)
    return out if out.ndim else float(out)


def marcum_q1(a, b):
    """First-order Marcum Q function ``Q_1(a, b)``.

    Equals ``P[X > b**2]`` for ``X`` two-dof noncentral chi-squared with
    noncentrality ``a**2``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("Marcum Q arguments must be non-negative")
    out = np.clip(_poisson_mixture(b * b, a * a, upper=True), 0.0, 1.0)
    out = np.where(b == 0, 1.0, out)
    return out if out.ndim else float(out)


def inv_cdf_nc_chi2(p, xi, rtol: float = 1e-12, max_iter: int = 200):
    """Quantile of the two-dof noncentral chi-squared.

    Safeguarded Newton iteration inside the bracket
    ``[0, xi + 2 + 20 sqrt(xi + 1)]``, vectorized over ``p`` and ``xi``.
    Very large noncentralities use :func:`asymptotic_quantile` instead,
    where the Poisson mixture would need millions of terms.
    """
    p = np.asarray(p, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probability must lie in (0, 1)")
    if np.any(xi < 0):
        raise ValueError("noncentrality must be non-negative")
    p, xi = np.broadcast_arrays(p, xi)
    shape = p.shape
    p = p.ravel().copy()
    xi = xi.ravel().copy()
    big = xi > _ASYMPTOTIC_XI
    out = np.empty_like(p)
    out[big] = asymptotic_quantile(p[big], xi[big])
    out[~big] = _newton_quantile(p[~big], xi[~big], rtol, max_iter)
    out = out.reshape(shape)
    return out if out.ndim else float(out)


def asymptotic_quantile(p, xi):
    """Large-``xi`` quantile from the expansion of the Rice distribution.

    ``sqrt(x_p) = sqrt(xi) + z + 1/(2 sqrt(xi)) - z/(4 xi) + O(xi**-1.5)``
    with ``z`` the standard normal ``p``-quantile.
    """
    nu = np.sqrt(np.asarray(xi, dtype=float))
    z = ndtri(np.asarray(p, dtype=float))
    return (nu + z + 0.5 / nu - 0.25 * z / nu**2) ** 2


def _newton_quantile(p, xi, rtol, max_iter):
    if p.size == 0:
        return p.copy()
    lo = np.zeros_like(p)
    hi = xi + 2 + 20 * np.sqrt(xi + 1)
    # widen for extreme upper quantiles
    while True:
        bad = nc_chi2_cdf(hi, xi) < p
        if not bad.any():
            break
        hi = np.where(bad, 2 * hi, hi)

    # (sqrt(xi) + z)^2 style starting point, central case exact
    x = np.clip(-2 * np.log1p(-p) + xi, lo, hi)
    x = np.where(xi == 0, -2 * np.log1p(-p), x)
    active = np.ones(p.size, dtype=bool)
    for _ in range(max_iter):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            break
        xa, xia, pa = x[ia], xi[ia], p[ia]
        F = nc_chi2_cdf(xa, xia) - pa
        below = F < 0
        lo[ia] = np.where(below, np.maximum(lo[ia], xa), lo[ia])
        hi[ia] = np.where(below, hi[ia], np.minimum(hi[ia], xa))
        dens = nc_chi2_pdf(xa, xia)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = F / dens
        xn = xa - step
        outside = ~np.isfinite(xn) | (xn < lo[ia]) | (xn > hi[ia])
        xn = np.where(outside, 0.5 * (lo[ia] + hi[ia]), xn)
        xn = np.where(F == 0, xa, xn)
        done = (np.abs(xn - xa) <= rtol * np.abs(xn)) \
            | (hi[ia] - lo[ia] <= rtol * hi[ia])
        x[ia] = xn
        active[ia[done]] = False
    return x


class QuantileTable:
    """Fast quantile ``x_p(xi)`` at one probability level.

    Stores ``sqrt(x_p)`` on a grid in ``sqrt(xi)`` (finer near zero) and interpolates
    with a cubic spline; noncentralities past the table range fall back to
    :func:`inv_cdf_nc_chi2`.
    """

    def __init__(self, p: float, xi_max: float = 4096.0, fine_step: float = 0.01,
                 coarse_step: float = 0.05, knee: float = 8.0):
        self.p = float(p)
        # curvature concentrates at small noncentrality
        u = np.concatenate([np.arange(0.0, knee, fine_step),
                            np.arange(knee, math.sqrt(xi_max) + coarse_step, coarse_step)])
        self.u_max = float(u[-1])
        s = np.sqrt(inv_cdf_nc_chi2(self.p, u * u))
        # s is an even function of u
        self._spline = CubicSpline(u, s, bc_type=((1, 0.0), "not-a-knot"))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        u = np.sqrt(np.maximum(xi, 0.0))
        out = self._spline(np.minimum(u, self.u_max)) ** 2
        far = u > self.u_max
        if np.any(far):
            out = np.array(out, copy=True)
            out[far] = inv_cdf_nc_chi2(self.p, xi[far])
        return out if out.ndim else float(out)


@functools.lru_cache(maxsize=8)
def quantile_table(p: float) -> QuantileTable:
    return QuantileTable(p)


# ---------------------------------------------------------------------------
# rates

def noncentrality_array(beta_h, d, g, kappa: float, literal: bool = False):
    """Noncentrality of ``2 (kappa+1)/beta_h |h + g|^2``.

    ``beta_h`` is the direct-path gain, ``d`` the unit LOS phasor of the
    direct path and ``g`` the reflected coefficient; all broadcast.  With
    ``literal=True`` the cross term drops the ``sqrt(kappa)`` factor and the
    conjugate on ``d``; the result is clipped at zero.
    """
    beta_h = np.asarray(beta_h, dtype=float)
    g = np.asarray(g)
    d = np.asarray(d)
    a = (kappa + 1) / beta_h
    if literal:
        cross = 2 * np.sqrt(a) * np.real(d * g)
    else:
        cross = 2 * np.sqrt(kappa * a) * np.real(np.conj(d) * g)
    xi = 2 * (kappa + a * (g.real**2 + g.imag**2) + cross)
    return np.maximum(xi, 0.0)


def noncentrality(ue: PolarPosition, bs: PolarPosition, g_kf: complex,
                  budget: LinkBudget, f: int, grid: FrequencyGrid,
                  literal: bool = False) -> float:
    r_bk = bs_ue_distance(bs, ue)
    d = los_vector(r_bk, grid)[f]
    return float(noncentrality_array(pathloss(r_bk, budget), d, g_kf,
                                     budget.rician_k, literal))


def rate_from_quantile(q, beta_h, budget: LinkBudget, literal: bool = False):
    """``log2(1 + P beta_h q / (2 sigma^2 (kappa + 1)))``; ``literal`` drops beta_h."""
    gain = 1.0 if literal else np.asarray(beta_h, dtype=float)
    scale = budget.snr_scale * gain / (2 * (budget.rician_k + 1))
    return np.log2(1 + scale * np.asarray(q))


def robust_se(ue: PolarPosition, bs: PolarPosition, g_kf: complex, budget: LinkBudget,
              spec: OutageSpec, grid: FrequencyGrid, f: int = 0,
              literal: bool = False) -> float:
    """Rate decodable with probability ``spec.epsilon`` on RB ``f``."""
    r_bk = bs_ue_distance(bs, ue)
    d = los_vector(r_bk, grid)[f]
    beta_h = pathloss(r_bk, budget)
    xi = noncentrality_array(beta_h, d, g_kf, budget.rician_k, literal)
    q = inv_cdf_nc_chi2(spec.quantile_level, xi)
    return float(rate_from_quantile(q, beta_h, budget, literal))


def direct_distances(ue_ranges, ue_azimuths, bs: PolarPosition) -> np.ndarray:
    """BS-user distances for users on the azimuth plane."""
    b = polar_to_cartesian(bs)
    x = ue_ranges * np.cos(ue_azimuths) - b[0]
    y = ue_ranges * np.sin(ue_azimuths) - b[1]
    return np.sqrt(x * x + y * y + b[2] ** 2)


def robust_rate_arrays(ue_ranges, ue_azimuths, bs: PolarPosition, config_azimuths,
                       ris, grid: FrequencyGrid, budget: LinkBudget, spec: OutageSpec,
                       literal: bool = False, exact: bool = False, g=None) -> np.ndarray:
    """Epsilon-robust rates for every (user, RB, configuration), shape (K, F, C).

    ``g`` may carry precomputed reflected coefficients of the same shape.
    """
    ue_ranges = np.atleast_1d(np.asarray(ue_ranges, dtype=float))
    ue_azimuths = np.atleast_1d(np.asarray(ue_azimuths, dtype=float))
    if g is None:
        g = reflected_channels(ue_ranges, ue_azimuths, bs, config_azimuths, ris, grid,
                               budget)
    r_bk = direct_distances(ue_ranges, ue_azimuths, bs)
    beta_h = np.asarray(pathloss(r_bk, budget))
    d = los_vector(r_bk, grid)
    xi = noncentrality_array(beta_h[:, None, None], d[:, :, None], g,
                             budget.rician_k, literal)
    p = spec.quantile_level
    q = inv_cdf_nc_chi2(p, xi) if exact else quantile_table(p)(xi)
    return rate_from_quantile(q, beta_h[:, None, None], budget, literal)


def build_rate_tensor(scenario: Scenario, codebook, grid: FrequencyGrid,
                      budget: LinkBudget, spec: OutageSpec, literal: bool = False,
                      exact: bool = False) -> np.ndarray:
    if len(codebook) < 1:
        raise ValueError("empty codebook")
    if scenario.ris.n_x != len(codebook[0].phases):
        raise ValueError("codebook was designed for a different RIS")
    return robust_rate_arrays(scenario.user_ranges(), scenario.user_azimuths(),
                              scenario.bs, codebook.center_azimuths, scenario.ris,
                              grid, budget, spec, literal, exact)


def rate_tensor_to_csv(rates, path):
    rates = np.asarray(rates)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "f", "c", "rate"])
        for (k, f, c), v in np.ndenumerate(rates):
            w.writerow([k, f, c, repr(float(v))])
