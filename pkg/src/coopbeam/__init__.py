"""Distributed regularized zero-forcing beamforming for cooperating base stations.

Belief propagation, approximate message passing, a covariance-aided AMP
variant and an ADMM baseline, all targeting the centralized RZF
precoder ``H^H (H H^H + beta I)^{-1} s``, plus a round-synchronous
harness and CLI for comparing them.
"""

from .admm import ADMMState, admm_init, admm_messages, admm_round
from .amp import AMPState, amp_bs_update, amp_init, amp_messages, amp_round, amp_ue_update
from .bp import BPState, bp_estimate, bp_init, bp_messages, bp_round
from .ccoi import (CCoIState, CCoIStatics, ccoi_init, ccoi_messages, ccoi_precompute,
                   ccoi_round)
from .channel import ChannelSet, assemble_global, synthesize_channel
from .config import ExperimentConfig, parse_config
from .harness import RoundTrace, avg_throughput, draw_symbols, oracle_precoder, run_experiment
from .oracle import mmse_virtual, power_normalize, rzfbf_centralized
from .topology import MessageCount, NetworkTopology, build_topology

__version__ = "0.1.0"
