"""Top-K dependency rule mining with detection of specious rules."""

from .dataset import Dataset, DataError, attrset, load, load_csv, load_fimi, pair_counts, support
from .measures import (
    ConditionalStats,
    PairCounts,
    birch_p,
    birch_p_nested_sub,
    birch_p_nested_super,
    conditional_leverages,
    conditional_mi,
    leverage,
    mi_upper_bound,
    rule_mi,
    signed_conditional_mi,
)
from .miner import MinerConfig, Rule, TopKList, mine_top_k, rank_key
from .specdetect import Verdict, VerdictKind, spec_detect
from .synthgen import PlantSpec, plant_equivalent, plant_simpson

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DataError", "attrset", "load", "load_csv", "load_fimi", "pair_counts",
    "support", "ConditionalStats", "PairCounts", "birch_p", "birch_p_nested_sub",
    "birch_p_nested_super", "conditional_leverages", "conditional_mi", "leverage",
    "mi_upper_bound", "rule_mi", "signed_conditional_mi", "MinerConfig", "Rule", "TopKList",
    "mine_top_k", "rank_key", "Verdict", "VerdictKind", "spec_detect", "PlantSpec",
    "plant_equivalent", "plant_simpson",
]
