"""Hierarchical passive beamforming for RIS-aided single-user downlinks."""
from ._kernels import BACKEND
from .channel_model import (ChannelRealization, SystemConfig, assemble_bs_ris_channel,
                            assemble_ris_user_channel, path_loss, sample_realization,
                            ula_steering, ura_steering)
from .harness import ExperimentSpec, SweepRow, load_config, run_sweep, run_trial, write_results
from .optimizers import (DegenerateChannelError, OptimizerParams, RunResult, achievable_rate,
                         hpb_ao, hpb_es, hpb_spp, mrt, objective, pb_sca, random_phases,
                         sca_v_step)
from .phase_synthesis import (CascadedChannel, ElementPhases, PhaseProfile, compact_channel,
                              direct_cascaded_channel, dirichlet_gain, gain_factor,
                              q_from_angles, snell_element_phases, wrap_q)

__version__ = "0.1.0"
