"""Simulator for star-topology quantum key distribution networks.

A central hub shares a fiber link with every branch office. The library
models per-link key production, hub-mediated key relay under one-time
pads, hybrid master/session ciphers with quantum-fed rotation, security
horizons against classical and quantum attackers, an encryption policy
matrix over sensitivity and retention classes, and threshold secret
sharing with key-budgeted refresh. The `starqkd` command drives full
scenario runs from JSON files.
"""

from .errors import (
    BadDimensions,
    BadField,
    ClockRegression,
    DomainError,
    DuplicateId,
    DuplicateX,
    FieldTooLarge,
    IndexOutOfBounds,
    InsufficientAuthKey,
    InsufficientKey,
    IoError,
    KeyAlreadyConsumed,
    LengthMismatch,
    MissingKey,
    MissingShares,
    MixedRounds,
    NoBranches,
    NotEnoughShares,
    ParseError,
    ScenarioInvalid,
    StarQkdError,
    ValidationError,
    WrongProvenance,
)
from .keycore import (
    AuthBudget,
    KeyMaterial,
    KeyPool,
    Provenance,
    mix_keys,
    otp_decrypt,
    otp_encrypt,
)
from .qkdlink import (
    LinkParams,
    LinkState,
    TickOutcome,
    binary_entropy,
    raw_rate,
    secret_fraction,
    secret_rate,
    tick,
)
from .hybrid import (
    AttackerModel,
    HybridCipherState,
    MigrationTimeline,
    SecurityHorizon,
    decrypt_hybrid,
    due_rotations,
    encrypt_hybrid,
    estimate_t_s,
    estimate_t_sq,
    horizon_for,
    mosca_at_risk,
    rotate_master,
)
from .starnet import (
    BranchSpec,
    Node,
    NodeKind,
    RelayRecord,
    StarTopology,
    build_star,
    hub_cpu_step,
    relay_key,
    schedule_channels,
)
from .sharing import Share, ShareConfig, reconstruct, refresh, secrecy_oracle, split
from .policy import (
    DataState,
    InfoAsset,
    PolicyMatrix,
    Recommendation,
    Technique,
    TechniqueKind,
    default_matrix,
    recommend,
    validate_matrix,
)
from .scenario import Scenario, ingest_scenario, scenario_from_dict, with_overrides
from .report import MetricsReport, emit_report
from .engine import run
from .rng import StreamRegistry, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AttackerModel",
    "AuthBudget",
    "BadDimensions",
    "BadField",
    "BranchSpec",
    "ClockRegression",
    "DataState",
    "DomainError",
    "DuplicateId",
    "DuplicateX",
    "FieldTooLarge",
    "HybridCipherState",
    "IndexOutOfBounds",
    "InfoAsset",
    "InsufficientAuthKey",
    "InsufficientKey",
    "IoError",
    "KeyAlreadyConsumed",
    "KeyMaterial",
    "KeyPool",
    "LengthMismatch",
    "LinkParams",
    "LinkState",
    "MetricsReport",
    "MigrationTimeline",
    "MissingKey",
    "MissingShares",
    "MixedRounds",
    "NoBranches",
    "Node",
    "NodeKind",
    "NotEnoughShares",
    "ParseError",
    "PolicyMatrix",
    "Provenance",
    "Recommendation",
    "RelayRecord",
    "Scenario",
    "ScenarioInvalid",
    "SecurityHorizon",
    "Share",
    "ShareConfig",
    "StarQkdError",
    "StarTopology",
    "StreamRegistry",
    "Technique",
    "TechniqueKind",
    "TickOutcome",
    "ValidationError",
    "WrongProvenance",
    "binary_entropy",
    "build_star",
    "decrypt_hybrid",
    "default_matrix",
    "derive_seed",
    "due_rotations",
    "emit_report",
    "encrypt_hybrid",
    "estimate_t_s",
    "estimate_t_sq",
    "horizon_for",
    "hub_cpu_step",
    "ingest_scenario",
    "mix_keys",
    "mosca_at_risk",
    "otp_decrypt",
    "otp_encrypt",
    "raw_rate",
    "recommend",
    "reconstruct",
    "refresh",
    "relay_key",
    "rotate_master",
    "run",
    "scenario_from_dict",
    "schedule_channels",
    "secrecy_oracle",
    "secret_fraction",
    "secret_rate",
    "split",
    "tick",
    "validate_matrix",
    "with_overrides",
]
