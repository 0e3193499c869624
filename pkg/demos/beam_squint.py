"""
Beam squint across the OFDM band
================================

The phase profile is tuned at the carrier.  On other subcarriers the same
phases point the beam elsewhere, so a user at the beam center loses gain as
the resource block moves away from the carrier.
"""
import numpy as np
from scipy.optimize import brentq

from ris_ofdm import FrequencyGrid, RisGeometry, array_factor
from ris_ofdm.channel import SPEED_OF_LIGHT

f0 = 1.8e9
lam = SPEED_OF_LIGHT / f0
ris = RisGeometry(8, 8, lam / 2, lam / 2)
grid = FrequencyGrid(f0, 1.0, 1)  # one "RB" per Hz, so f is an offset in Hz

bs, ue = np.radians(150.0), np.radians(170.0)

# Gain seen by a user sitting exactly at the beam center.
for mhz in (0, 20, 40, 60, 80, 100, 150):
    g = array_factor(ue, bs, ue, mhz * 1e6, ris, grid) ** 2
    print(f"offset {mhz:4d} MHz: power gain {g:.3f}")

# Offset where the gain has fallen by 20%.
off = brentq(lambda f: array_factor(ue, bs, ue, f, ris, grid) ** 2 - 0.8, 1e6, 2e8)
print(f"\n20% loss at {off / 1e6:.2f} MHz")

# The squint vanishes when cos(phi_k) = -cos(phi_b): the frequency term in the
# steering argument is then identically zero.
mirror = np.pi - bs
g = array_factor(mirror, bs, mirror, np.array([0.0, 5e7, 1e8]), ris, grid) ** 2
print(f"user mirrored across broadside: gains {np.round(g, 12)}")
