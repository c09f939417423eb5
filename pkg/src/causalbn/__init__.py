"""Causal Bayesian-network toolkit: structure discovery (BIC search and
information-based pruning), LLM expert elicitation, SEM-style validation,
CPT fitting, and exact inference."""

from .bayesnet import BayesNet, Cpt, Evidence, Posterior, all_marginals, fit_cpts, posterior
from .data import BinsConfig, BinSpec, Column, ColumnSpec, DataTable, RawTable, preprocess
from .discovery import ScoredStructure, bic_score, hill_climb, miic_skeleton
from .elicitation import (
    EdgeClaim,
    ElicitationTranscript,
    PromptContext,
    VerificationVerdict,
    run_protocol,
)
from .errors import CausalError
from .graph import Dag, StructureFile, to_dot
from .validation import EntropyReport, PathReport, compare_methods, node_entropies, sem_validate

__version__ = "0.1.0"

__all__ = [
    "BayesNet", "Cpt", "Evidence", "Posterior", "all_marginals", "fit_cpts", "posterior",
    "BinsConfig", "BinSpec", "Column", "ColumnSpec", "DataTable", "RawTable", "preprocess",
    "ScoredStructure", "bic_score", "hill_climb", "miic_skeleton",
    "EdgeClaim", "ElicitationTranscript", "PromptContext", "VerificationVerdict", "run_protocol",
    "CausalError", "Dag", "StructureFile", "to_dot",
    "EntropyReport", "PathReport", "compare_methods", "node_entropies", "sem_validate",
    "__version__",
]
