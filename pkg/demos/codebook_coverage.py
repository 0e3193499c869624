"""
Designing the beam codebook
===========================

A linear phase profile across the surface steers the reflected beam toward
one azimuth.  The codebook tiles the half-plane in front of the surface with
beams that overlap at their half-power points.
"""
import numpy as np

from ris_ofdm import ScenarioConfig, array_factor
from ris_ofdm.codebook import cosine_step, raw_num_configs

cfg = ScenarioConfig()
ris, grid, bs = cfg.ris(), cfg.grid(), cfg.bs_position()
cb = cfg.codebook()

# The beams are spaced uniformly in the cosine of the azimuth, not in the
# angle itself, so they look wider toward the end-fire directions.
step = cosine_step(ris, cfg.f0, cb.x_tau)
print(f"half-power root x_tau = {cb.x_tau:.5f}, cosine half-width = {step:.5f}")
print(f"{len(cb)} beams with centers inside the half-plane "
      f"(closed-form ceiling gives {raw_num_configs(ris, cfg.f0, cb.x_tau)})")
print()
print(" beam  center   -3 dB edges")
for c in cb:
    print(f"{c.index:5d} {np.degrees(c.center_azimuth):7.2f}  "
          f"[{np.degrees(c.hp_minus):6.2f}, {np.degrees(c.hp_plus):6.2f}]")

# Scan the azimuth on a fine grid and keep the best beam at each angle.  Inside
# the covered band the best power gain never drops below one half.
phi = np.radians(np.arange(0.0, 180.0, 0.5))
gain = array_factor(phi[:, None], bs.azimuth, cb.center_azimuths[None, :], 0, ris, grid) ** 2
best = gain.max(axis=1)
covered = (phi >= cb[0].hp_minus) & (phi <= cb[-1].hp_plus)
print()
print(f"worst best-beam gain inside the band: {best[covered].min():.3f}")
print(f"worst best-beam gain outside the band: {best[~covered].min():.3f}")

# a crude text plot of the envelope
print()
for deg in range(0, 180, 10):
    g = best[np.argmin(np.abs(np.degrees(phi) - deg))]
    print(f"{deg:4d} deg |{'#' * int(round(40 * g))}")
