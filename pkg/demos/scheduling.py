"""
Scheduling one deployment
=========================

Draw users in the service ring, build the robust-rate tensor over users,
resource blocks and beams, then compare joint scheduling with the
sector-by-sector baseline under both objectives.
"""
import numpy as np

from ris_ofdm import ScenarioConfig
from ris_ofdm.allocation import (allocation_grid, assign_configs, max_min_allocate,
                                 max_rate_allocate, sequential_allocate, user_rates)
from ris_ofdm.geometry import sample_ring_arrays
from ris_ofdm.metrics import jain_index
from ris_ofdm.robust_rate import robust_rate_arrays

cfg = ScenarioConfig(n_users=40)
ris, grid, budget, bs = cfg.ris(), cfg.grid(), cfg.budget(), cfg.bs_position()
centers = cfg.codebook().center_azimuths
rng = np.random.default_rng(3)

r, phi = sample_ring_arrays(cfg.n_users, (cfg.r_inn, cfg.r_out), rng)
rates = robust_rate_arrays(r, phi, bs, centers, ris, grid, budget, cfg.outage())
print("rate tensor (users, RBs, beams):", rates.shape)

# The baseline binds each user to the beam nearest in azimuth.
part = assign_configs(phi, centers)
print("users per beam:", np.bincount(part, minlength=len(centers)))

for objective, joint in (("max_rate", max_rate_allocate), ("max_min", max_min_allocate)):
    a = user_rates(rates, joint(rates))
    b = user_rates(rates, sequential_allocate(rates, part, objective, overload="truncate"))
    print(f"\n{objective}:")
    print(f"  joint      sum {a.sum():9.1f}  min {a.min():7.2f}  Jain {jain_index(a):.3f}")
    print(f"  sequential sum {b.sum():9.1f}  min {b.min():7.2f}  Jain {jain_index(b):.3f}")

# Which user holds each (beam, RB) cell under joint max-min; -1 marks an idle cell.
grid_owner = allocation_grid(max_min_allocate(rates))
print("\nowners of the first 10 RBs per beam:")
print(grid_owner[:, :10])
