from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import i0e
from scipy.stats import ncx2

from ris_ofdm.channel import array_factor, los_vector, pathloss, reflected_channel, sample_direct_many
from ris_ofdm.geometry import PolarPosition, Scenario, bs_ue_distance
from ris_ofdm.robust_rate import (OutageSpec, QuantileTable, build_rate_tensor,
                                  inv_cdf_nc_chi2, marcum_q1, nc_chi2_cdf, nc_chi2_pdf,
                                  noncentrality, noncentrality_array, rate_tensor_to_csv,
                                  robust_rate_arrays, robust_se)


def marcum_quad(a, b):
    f = lambda x: x * np.exp(-0.5 * (x - a) ** 2) * i0e(a * x)
    return integrate.quad(f, b, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


# ---------------------------------------------------------------- Marcum Q

def test_marcum_central_case():
    assert marcum_q1(0.0, 2.0) == pytest.approx(np.exp(-2), abs=1e-14)
    assert marcum_q1(0.0, 2.0) == pytest.approx(0.135335, abs=1e-6)
    assert marcum_q1(1.7, 0.0) == 1.0


def test_marcum_q11_quadrature():
    # numerical integration of the Marcum integral gives 0.7328798...
    ref = marcum_quad(1.0, 1.0)
    assert ref == pytest.approx(0.732880, abs=1e-6)
    assert marcum_q1(1.0, 1.0) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("a", [0.0, 0.3, 1.0, 2.5, 6.0, 15.0])
@pytest.mark.parametrize("b", [0.1, 0.9, 2.0, 5.0, 12.0, 20.0])
def test_marcum_against_quadrature(a, b):
    assert marcum_q1(a, b) == pytest.approx(marcum_quad(a, b), abs=1e-12)


def test_marcum_large_arguments_against_scipy():
    a = np.array([100.0, 300.0, 1000.0])
    b = a + np.array([-1.0, 0.5, 2.0])
    np.testing.assert_allclose(marcum_q1(a, b), ncx2.sf(b**2, 2, a**2), atol=1e-11)


def test_marcum_monotone_and_bounded():
    a = np.linspace(0, 10, 41)
    b = np.linspace(0, 10, 41)
    q = marcum_q1(a[:, None], b[None, :])
    assert np.all((q >= 0) & (q <= 1))
    # monotone up to the stated 1e-12 absolute accuracy
    assert np.all(np.diff(q, axis=0) >= -1e-12)
    assert np.all(np.diff(q, axis=1) <= 1e-12)
    with pytest.raises(ValueError):
        marcum_q1(-1.0, 1.0)


def test_pdf_integrates_to_cdf():
    for xi in (0.0, 2.0, 30.0):
        for x in (0.5, 5.0, 40.0):
            val = integrate.quad(lambda t: nc_chi2_pdf(t, xi), 0, x, epsabs=1e-13)[0]
            assert nc_chi2_cdf(x, xi) == pytest.approx(val, abs=1e-10)


# ---------------------------------------------------------------- quantile

def test_quantile_central_closed_form():
    assert inv_cdf_nc_chi2(0.05, 0.0) == pytest.approx(-2 * np.log(0.95), abs=1e-9)
    assert inv_cdf_nc_chi2(0.05, 0.0) == pytest.approx(0.10259, abs=1e-5)
    assert inv_cdf_nc_chi2(0.95, 0.0) == pytest.approx(-2 * np.log(0.05), abs=1e-9)
    assert inv_cdf_nc_chi2(0.95, 0.0) == pytest.approx(5.9915, abs=1e-4)


def test_quantile_sampling_oracle():
    rng = np.random.default_rng(99)
    n = 10_000_000
    xi = 4.0
    z = (rng.standard_normal(n) + np.sqrt(xi)) ** 2 + rng.standard_normal(n) ** 2
    # 99.9% CI for the 5% quantile from binomial order statistics
    p = 0.05
    half = 3.3 * np.sqrt(p * (1 - p) * n)
    z.sort()
    lo, hi = z[int(p * n - half)], z[int(p * n + half)]
    assert lo <= inv_cdf_nc_chi2(p, xi) <= hi


def test_quantile_inverts_cdf_on_grid():
    ps = np.array([0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99])
    xis = np.array([0.0, 0.1, 1.0, 10.0, 100.0])
    P, XI = np.meshgrid(ps, xis)
    q = inv_cdf_nc_chi2(P, XI)
    np.testing.assert_allclose(nc_chi2_cdf(q, XI), P, atol=1e-8)
    ref = ncx2.ppf(P, 2, np.maximum(XI, 1e-300))
    np.testing.assert_allclose(q, ref, rtol=1e-8)


def test_quantile_monotone():
    ps = np.linspace(0.01, 0.99, 30)
    xis = np.linspace(0, 60, 30)
    q = inv_cdf_nc_chi2(ps[:, None], xis[None, :])
    assert np.all(np.diff(q, axis=0) > 0)
    assert np.all(np.diff(q, axis=1) > 0)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
def test_quantile_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        inv_cdf_nc_chi2(p, 1.0)


def test_quantile_table_matches_exact():
    table = QuantileTable(0.05)
    xi = np.concatenate([np.linspace(0, 2, 41), np.geomspace(2, 4000, 300),
                         [5000.0, 20000.0]])
    np.testing.assert_allclose(table(xi), inv_cdf_nc_chi2(0.05, xi), rtol=1e-9)


# ---------------------------------------------------------------- noncentrality

def test_noncentrality_special_cases(defaults):
    budget, grid, bs = defaults.budget, defaults.grid, defaults.bs
    ue = PolarPosition(20.0, 1.0)
    assert noncentrality(ue, bs, 0j, budget, 0, grid) == pytest.approx(2 * budget.rician_k)
    ray = replace(budget, rician_k=0.0)
    g = 2e-4 * np.exp(0.3j)
    beta_h = pathloss(bs_ue_distance(bs, ue), budget)
    assert noncentrality(ue, bs, g, ray, 0, grid) == pytest.approx(2 * abs(g) ** 2 / beta_h)


def test_noncentrality_literal_form():
    beta, kappa = 0.01, 0.5
    d, g = np.exp(0.4j), 0.03 * np.exp(1.1j)
    a = (kappa + 1) / beta
    lit = 2 * (kappa + a * abs(g) ** 2 + 2 * np.sqrt(a) * np.real(d * g))
    assert noncentrality_array(beta, d, g, kappa, literal=True) == pytest.approx(max(lit, 0))
    der = 2 * (kappa + a * abs(g) ** 2 + 2 * np.sqrt(kappa * a) * np.real(np.conj(d) * g))
    assert noncentrality_array(beta, d, g, kappa) == pytest.approx(der)


@pytest.mark.parametrize("kappa_db", [-9.0, 0.0, 6.0])
def test_noncentrality_monte_carlo_mean(defaults, kappa_db):
    budget = replace(defaults.budget, rician_k=10 ** (kappa_db / 10))
    grid, bs = defaults.grid, defaults.bs
    cfg = defaults.codebook[4]
    ue = PolarPosition(14.0, cfg.center_azimuth + 0.05)
    r_bk = bs_ue_distance(bs, ue)
    beta_h = pathloss(r_bk, budget)
    g = reflected_channel(ue, bs, cfg, defaults.ris, grid, budget)
    h = sample_direct_many(np.full(20_000, r_bk), grid, budget, np.random.default_rng(5))
    x = 2 * (budget.rician_k + 1) / beta_h * np.abs(h + g) ** 2
    xi = noncentrality_array(beta_h, los_vector(r_bk, grid), g, budget.rician_k)
    # mean of chi2_2(xi) is 2 + xi
    np.testing.assert_allclose(x.mean(axis=0), 2 + xi, rtol=0.03)
    assert x.mean() == pytest.approx(np.mean(2 + xi), rel=0.01)


# ---------------------------------------------------------------- robust SE

def _link(defaults, offset=0.0, r=15.0, c=5):
    cfg = defaults.codebook[c]
    ue = PolarPosition(r, cfg.center_azimuth + offset)
    g = reflected_channel(ue, defaults.bs, cfg, defaults.ris, defaults.grid, defaults.budget)
    return ue, g


def test_robust_se_vanishes_as_reliability_saturates(defaults):
    ue, g = _link(defaults)
    rates = [robust_se(ue, defaults.bs, g[0], defaults.budget, OutageSpec(e), defaults.grid)
             for e in (0.5, 0.9, 0.99, 0.999999, 1 - 1e-13)]
    assert np.all(np.diff(rates) < 0)
    assert rates[-1] < 1e-3


def test_robust_se_deterministic_limit(defaults):
    budget = replace(defaults.budget, rician_k=1e6)
    ue, g = _link(defaults)
    spec = OutageSpec(0.5)
    r_bk = bs_ue_distance(defaults.bs, ue)
    h_los = np.sqrt(pathloss(r_bk, budget) * budget.rician_k / (budget.rician_k + 1)) \
        * los_vector(r_bk, defaults.grid)
    for f in (0, 17, 49):
        r = robust_se(ue, defaults.bs, g[f], budget, spec, defaults.grid, f)
        ref = np.log2(1 + budget.snr_scale * abs(h_los[f] + g[f]) ** 2)
        assert r == pytest.approx(ref, rel=0.05)
    # reflection phase-aligned with the direct LOS adds amplitudes
    g_al = abs(g[0]) * los_vector(r_bk, defaults.grid)[0]
    r = robust_se(ue, defaults.bs, g_al, budget, spec, defaults.grid, 0)
    ref = np.log2(1 + budget.snr_scale * (abs(h_los[0]) + abs(g_al)) ** 2)
    assert r == pytest.approx(ref, rel=0.05)


def test_robust_se_outage_definition(defaults):
    spec = defaults.outage
    budget, grid, bs = defaults.budget, defaults.grid, defaults.bs
    rng = np.random.default_rng(11)
    n = 100_000
    for offset, r in [(0.0, 10.0), (0.1, 25.0), (-0.3, 18.0)]:
        ue, g = _link(defaults, offset, r)
        f = int(rng.integers(grid.n_rb))
        rate = robust_se(ue, bs, g[f], budget, spec, grid, f)
        h = sample_direct_many(np.full(n // grid.n_rb, bs_ue_distance(bs, ue)), grid, budget, rng)
        # every RB shares the same marginal law after removing its LOS phase
        d = los_vector(bs_ue_distance(bs, ue), grid)
        hf = (h / d * d[f]).ravel()
        cap = np.log2(1 + budget.snr_scale * np.abs(hf + g[f]) ** 2)
        out = np.mean(cap < rate)
        sigma = np.sqrt(0.05 * 0.95 / cap.size)
        assert out <= 0.05 + 3 * sigma


def test_robust_se_monotone_in_epsilon(defaults, rng):
    for _ in range(20):
        ue, g = _link(defaults, rng.uniform(-0.3, 0.3), rng.uniform(9, 30), int(rng.integers(11)))
        rates = [robust_se(ue, defaults.bs, g[0], defaults.budget, OutageSpec(e), defaults.grid)
                 for e in (0.6, 0.8, 0.9, 0.95, 0.99)]
        assert np.all(np.diff(rates) <= 0)


def test_robust_se_monotone_in_coherent_reflection(defaults):
    ue = PolarPosition(20.0, 1.2)
    d0 = los_vector(bs_ue_distance(defaults.bs, ue), defaults.grid)[0]
    amps = np.linspace(0, 1e-3, 25)
    rates = [robust_se(ue, defaults.bs, a * d0, defaults.budget, defaults.outage, defaults.grid)
             for a in amps]
    assert np.all(np.diff(rates) >= 0)


# ---------------------------------------------------------------- tensor

def _scenario(defaults, r, phi):
    return Scenario(defaults.bs, [PolarPosition(a, b) for a, b in zip(r, phi)], defaults.ris,
                    (9, 30))


def test_rate_tensor_shape_and_scalar_case(defaults, rng):
    r, phi = rng.uniform(9, 30, 7), rng.uniform(0.1, 3.0, 7)
    sc = _scenario(defaults, r, phi)
    T = build_rate_tensor(sc, defaults.codebook, defaults.grid, defaults.budget, defaults.outage)
    assert T.shape == (7, 50, 11)
    assert np.all(T >= 0) and np.all(np.isfinite(T))
    k, f, c = 3, 21, 6
    g = reflected_channel(sc.users[k], defaults.bs, defaults.codebook[c], defaults.ris, defaults.grid,
                          defaults.budget)
    single = robust_se(sc.users[k], defaults.bs, g[f], defaults.budget, defaults.outage, defaults.grid, f)
    assert T[k, f, c] == pytest.approx(single, rel=1e-9)


def test_rate_tensor_degenerate_single_entry(defaults):
    from ris_ofdm.channel import FrequencyGrid
    grid = FrequencyGrid(defaults.grid.f0, defaults.grid.delta_f, 1)
    c = defaults.codebook[2]
    T = robust_rate_arrays(12.0, c.center_azimuth + 0.02, defaults.bs, [c.center_azimuth],
                           defaults.ris, grid, defaults.budget, defaults.outage)
    ue = PolarPosition(12.0, c.center_azimuth + 0.02)
    g = reflected_channel(ue, defaults.bs, c, defaults.ris, grid, defaults.budget)
    assert T.shape == (1, 1, 1)
    assert T[0, 0, 0] == pytest.approx(robust_se(ue, defaults.bs, g[0], defaults.budget,
                                                 defaults.outage, grid), rel=1e-9)


def test_rate_tensor_exact_and_table_agree(defaults, rng):
    r, phi = rng.uniform(9, 30, 4), rng.uniform(0.1, 3.0, 4)
    args = (r, phi, defaults.bs, defaults.codebook.center_azimuths, defaults.ris, defaults.grid,
            defaults.budget, defaults.outage)
    np.testing.assert_allclose(robust_rate_arrays(*args), robust_rate_arrays(*args, exact=True),
                               rtol=1e-10)


def test_rate_tensor_literal_flag_changes_scale(defaults, rng):
    r, phi = rng.uniform(9, 30, 3), rng.uniform(0.1, 3.0, 3)
    args = (r, phi, defaults.bs, defaults.codebook.center_azimuths, defaults.ris, defaults.grid,
            defaults.budget, defaults.outage)
    assert np.all(robust_rate_arrays(*args, literal=True) > robust_rate_arrays(*args))


def test_best_config_is_nearest_cosine_center(defaults, rng):
    # inside the covered band; past the last half-power edge the grating lobe
    # of the first beam (d_x = lambda/2) can outgain the nearest beam
    cb = defaults.codebook
    centers = cb.center_azimuths
    phi = rng.uniform(cb[0].hp_minus, cb[-1].hp_plus, 1000)
    af2 = array_factor(phi[:, None], defaults.bs.azimuth, centers[None, :], 0,
                       defaults.ris, defaults.grid) ** 2
    nearest = np.argmin(np.abs(np.cos(phi)[:, None] - np.cos(centers)[None, :]), axis=1)
    np.testing.assert_array_equal(np.argmax(af2, axis=1), nearest)


def test_rate_tensor_errors_and_csv(tmp_path, defaults):
    from ris_ofdm.codebook import Codebook
    sc = _scenario(defaults, [15.0], [1.0])
    with pytest.raises(ValueError):
        build_rate_tensor(sc, Codebook((), 0.5, 1.39), defaults.grid, defaults.budget, defaults.outage)
    T = build_rate_tensor(sc, defaults.codebook, defaults.grid, defaults.budget, defaults.outage)
    p = tmp_path / "rates.csv"
    rate_tensor_to_csv(T, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,f,c,rate" and len(lines) == 1 + T.size


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 200.0))
def test_quantile_roundtrip_property(p, xi):
    q = inv_cdf_nc_chi2(p, xi)
    assert nc_chi2_cdf(q, xi) == pytest.approx(p, abs=1e-9)


def test_outage_spec_validation():
    for e in (0.0, 1.0, 1.2):
        with pytest.raises(ValueError):
            OutageSpec(e)


def test_asymptotic_quantile_matches_newton():
    from ris_ofdm.robust_rate import _newton_quantile, asymptotic_quantile
    xi = np.array([1e5, 5e5, 1e6])
    for p in (0.01, 0.05, 0.5, 0.95):
        exact = _newton_quantile(np.full(3, p), xi.copy(), 1e-13, 200)
        np.testing.assert_allclose(asymptotic_quantile(p, xi), exact, rtol=1e-9)


def test_inv_cdf_huge_noncentrality_fast():
    import time
    t = time.perf_counter()
    q = inv_cdf_nc_chi2(0.05, np.array([1e7, 1e9, 1e12]))
    assert time.perf_counter() - t < 1.0
    nu = np.sqrt([1e7, 1e9, 1e12])
    np.testing.assert_allclose(np.sqrt(q) - nu, -1.6448536, atol=1e-3)
