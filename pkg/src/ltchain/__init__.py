"""LT-coded blockchain storage: encoding, decoders, mirroring costs and DoS adversaries."""

from .gf2 import BitMatrix, BitVector, DimensionError, PivotBasis, rank, rank_would_increase
from .lt import (
    DegreeDistribution,
    Droplet,
    Epoch,
    FullNode,
    build_rsd,
    encode_droplet,
    generate_full_node,
    read_full_node,
    write_full_node,
)
from .decoders import DecodeOutcome, bp_decode, brh_decode, crh_decode, crh_decode_sequence, ofg_decode
from .cost import (
    avg_degree,
    c_bp,
    k_bp,
    k_ofg,
    mirroring_cost,
    pf_upper_bound,
    solve_problem_brh,
    solve_problem_crh,
)
from .adversary import (
    AttackModel,
    AttackPlan,
    ReadSet,
    attack_blind,
    attack_cost,
    attack_degree,
    attack_for_decoder,
    attack_min_rank,
    attack_score,
    compute_scores,
    optimize_attack,
    sample_read_set,
)
from .sim import ExperimentConfig, FailureRateResult, run_experiment, run_trial

__version__ = "0.1.0"
