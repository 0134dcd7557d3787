"""Language models over the output of a finite-state transducer applied to a
source language model."""

from .builders import (build_comma_rule, build_delimiter_segmenter, build_dna2aa, build_identity,
                       build_lowercase, build_newspeak, build_safety_showcase, build_token_to_byte)
from .decompose import BacktrackConfig, Decomposer, Decomposition, NextDecomposition, PruneConfig, backtrack
from .errors import DeadEnd, NonTerminationError, UsageError
from .finiteness import DfaDecomposition, SafetyReport, check_safety, dfa_decomposition, has_finite_closure
from .fst import (EPS, AmbiguityError, Fst, FstError, apply, compose, compute_ip_universal, load_fst_text,
                  push_output_labels, save_fst_text)
from .lm import EOS, CachedLm, FiniteSupportLm, GeometricUniformLm, SourceLm, load_lm
from .oracle import oracle_decompose, oracle_prefix_prob
from .precover import Precover
from .transduced import TransducedLm

__version__ = "0.1.0"

__all__ = [
    "build_comma_rule",
    "build_delimiter_segmenter",
    "build_dna2aa",
    "build_identity",
    "build_lowercase",
    "build_newspeak",
    "build_safety_showcase",
    "build_token_to_byte",
    "BacktrackConfig",
    "Decomposer",
    "Decomposition",
    "NextDecomposition",
    "PruneConfig",
    "backtrack",
    "DeadEnd",
    "NonTerminationError",
    "UsageError",
    "DfaDecomposition",
    "SafetyReport",
    "check_safety",
    "dfa_decomposition",
    "has_finite_closure",
    "EPS",
    "AmbiguityError",
    "Fst",
    "FstError",
    "apply",
    "compose",
    "compute_ip_universal",
    "load_fst_text",
    "push_output_labels",
    "save_fst_text",
    "EOS",
    "CachedLm",
    "FiniteSupportLm",
    "GeometricUniformLm",
    "SourceLm",
    "load_lm",
    "oracle_decompose",
    "oracle_prefix_prob",
    "Precover",
    "TransducedLm",
]
