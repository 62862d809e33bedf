"""Authenticated append-only skip lists: tamper-evident logs with succinct proofs."""

from .authenticator import (
    DEFAULT_HASH,
    HashConfig,
    element_authenticator,
    encode_hash_input,
    genesis_digest,
    partial_authenticator,
)
from .log import ElementEntry, Log, LogConfig, create_log
from .proofs import AdvancementProof, MembershipProof, ProofComponent
from .skiplist import hop_level, max_level, traversal_path
from .storage import audit_file, open_or_create
from .verifier import (
    AdvancementInvalid,
    Basis,
    ComponentInvalid,
    MembershipClaim,
    Ordering,
    ProofInvalid,
    Verifier,
    VerifierState,
    check_temporal_order,
    process_advancement_component,
    process_component,
    verify_advancement,
    verify_membership,
)

__version__ = "0.1.0"
