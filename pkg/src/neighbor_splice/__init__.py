"""Shortest splice derivations of target sequences from retrieved neighbor sequences."""

from .core import (
    BOS,
    EOS,
    MASK,
    ExpandedNeighborSet,
    ProvenanceTrace,
    SpliceAction,
    TokenSequence,
    Vocabulary,
    check_non_interleaving,
    ginsert,
    replay,
)
from .extract import Derivation, extract_actions, verify_derivation
from .oracles import derive_all, expand_neighbors, oracle_full, oracle_l2rs, oracle_l2rt
from .parser import Chart, parse_min_cost

__all__ = [
    "BOS", "EOS", "MASK", "Chart", "Derivation", "ExpandedNeighborSet", "ProvenanceTrace",
    "SpliceAction", "TokenSequence", "Vocabulary", "check_non_interleaving", "derive_all",
    "expand_neighbors", "extract_actions", "ginsert", "oracle_full", "oracle_l2rs", "oracle_l2rt",
    "parse_min_cost", "replay", "verify_derivation",
]
