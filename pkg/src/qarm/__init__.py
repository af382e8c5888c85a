"""Frequent itemset mining with classical Apriori and the quantum qARM pipeline."""

from .pipeline import PipelineConfig, build_pae, build_qarm_iteration, compare_with_classical, decode_supports, mine
from .transactions import (
    FrequentSet,
    TransactionDatabase,
    apriori_mine,
    generate_candidates,
    pad_to_power_of_two,
    parse_database,
    support,
)

__all__ = [
    "FrequentSet",
    "PipelineConfig",
    "TransactionDatabase",
    "apriori_mine",
    "build_pae",
    "build_qarm_iteration",
    "compare_with_classical",
    "decode_supports",
    "generate_candidates",
    "mine",
    "pad_to_power_of_two",
    "parse_database",
    "support",
]
