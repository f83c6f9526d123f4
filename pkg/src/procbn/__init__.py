"""Bayesian Network process mining with a Markov-chain baseline."""

__version__ = "0.1.0"

from .bayesnet import (
    BayesianNetwork,
    Cpt,
    Posterior,
    infer,
    joint_probability,
    marginals,
    query_masses,
    sequence_probability,
)
from .eventlog import EventLog, LogConfig, PresenceMatrix, Trace, encode_presence, parse_log
from .graph import break_cycles, build_transition_graph, to_structure
from .learning import ExclusionGroup, LearnConfig, apply_absent_propagation, apply_mutual_exclusion, mle_learn
from .markov import MarkovChain, build_markov_chain, chain_probability, step

__all__ = [
    "BayesianNetwork",
    "Cpt",
    "EventLog",
    "ExclusionGroup",
    "LearnConfig",
    "LogConfig",
    "MarkovChain",
    "Posterior",
    "PresenceMatrix",
    "Trace",
    "apply_absent_propagation",
    "apply_mutual_exclusion",
    "break_cycles",
    "build_markov_chain",
    "build_transition_graph",
    "chain_probability",
    "encode_presence",
    "infer",
    "joint_probability",
    "marginals",
    "mle_learn",
    "parse_log",
    "query_masses",
    "sequence_probability",
    "step",
    "to_structure",
]
