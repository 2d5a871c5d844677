"""Semantic information measures and many-to-one semantic channel coding."""

from .errors import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    NumericError,
    SemcommError,
    ValidationError,
)
from .info import (
    JointDist,
    ProbVector,
    Sequence,
    conditional_entropy,
    conditional_mutual_information,
    empirical_rate_bits,
    entropy,
    entropy_bits,
    is_jointly_typical,
    joint_entropy,
    mutual_information,
)
from .semantics import (
    ContinuousKernel,
    DecompositionTerms,
    DifferentialEntropy,
    GaussianDensity,
    KnowledgeBase,
    SemanticTriple,
    UniformDensity,
    compression_gain,
    decomposition_terms,
    differential_semantic_entropy,
    knowledge_entropy,
    load_triple,
    semantic_distribution,
    semantic_entropy,
)
from .capacity import (
    CapacityResult,
    Dmc,
    awgn_capacity,
    blahut_arimoto,
    mutual_information_for_input,
    semantic_capacity,
)
from .channels import ChannelRng, PskConfig, bsc, mpsk_hard_dmc, transmit
from .coding import (
    CampaignReport,
    CodeConfig,
    Codebook,
    ConverseChain,
    DecodeOutcome,
    ERASURE,
    ExactEvaluation,
    FanoCheck,
    FanoInstance,
    SemanticPartition,
    SimulationReport,
    check_fano,
    converse_chain,
    decode_ml,
    decode_typicality,
    encode,
    exact_evaluate,
    fano_bound,
    generate_codebook,
    generate_full_codebook,
    make_partition,
    partition_from_counts,
    random_fano_instance,
    run_fano_campaign,
    semantic_map,
    simulate,
    simulate_full_codebook,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConfigError",
    "ConvergenceError",
    "NumericError",
    "SemcommError",
    "ValidationError",
    "JointDist",
    "ProbVector",
    "Sequence",
    "conditional_entropy",
    "conditional_mutual_information",
    "empirical_rate_bits",
    "entropy",
    "entropy_bits",
    "is_jointly_typical",
    "joint_entropy",
    "mutual_information",
    "ContinuousKernel",
    "DecompositionTerms",
    "DifferentialEntropy",
    "GaussianDensity",
    "KnowledgeBase",
    "SemanticTriple",
    "UniformDensity",
    "compression_gain",
    "decomposition_terms",
    "differential_semantic_entropy",
    "knowledge_entropy",
    "load_triple",
    "semantic_distribution",
    "semantic_entropy",
    "CapacityResult",
    "Dmc",
    "awgn_capacity",
    "blahut_arimoto",
    "mutual_information_for_input",
    "semantic_capacity",
    "ChannelRng",
    "PskConfig",
    "bsc",
    "mpsk_hard_dmc",
    "transmit",
    "CampaignReport",
    "CodeConfig",
    "Codebook",
    "ConverseChain",
    "DecodeOutcome",
    "ERASURE",
    "ExactEvaluation",
    "FanoCheck",
    "FanoInstance",
    "SemanticPartition",
    "SimulationReport",
    "check_fano",
    "converse_chain",
    "decode_ml",
    "decode_typicality",
    "encode",
    "exact_evaluate",
    "fano_bound",
    "generate_codebook",
    "generate_full_codebook",
    "make_partition",
    "partition_from_counts",
    "random_fano_instance",
    "run_fano_campaign",
    "semantic_map",
    "simulate",
    "simulate_full_codebook",
    "wilson_interval",
]
