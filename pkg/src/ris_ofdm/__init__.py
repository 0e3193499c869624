"""Localization-based OFDM scheduling for RIS-aided uplinks."""

__version__ = "0.1.0"

from .allocation import (InfeasibleAllocation, assign_configs, max_min_allocate,
                         max_rate_allocate, sequential_allocate, user_rates)
from .channel import (FrequencyGrid, LinkBudget, array_factor, los_vector, pathloss,
                      reflected_channel, sample_direct, snr)
from .codebook import Codebook, Configuration, design_codebook, num_configs, solve_x_tau
from .config import ScenarioConfig, load_config, preset_config
from .geometry import (PolarPosition, RisGeometry, Scenario, bs_ue_distance,
                       element_center, polar_to_cartesian, sample_ring)
from .harness import ExperimentResult, run_sweep, run_trial
from .metrics import FrameSpec, csi_rate_tensor, efficiency, jain_index, throughput
from .robust_rate import (OutageSpec, build_rate_tensor, inv_cdf_nc_chi2, marcum_q1,
                          noncentrality, robust_se)
