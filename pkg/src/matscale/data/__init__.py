"""Material records, synthetic generation, loading, splitting and batching."""

from matscale.data.batching import Batch, collate, iter_batches, shard
from matscale.data.cache import CachedDataset, cache
from matscale.data.geometry import cell_volume, minimum_image_shifts, to_cartesian, to_fractional
from matscale.data.loader import JsonlDataset, dump_jsonl, load_jsonl
from matscale.data.records import MaterialRecord, matrix_to_voigt, voigt_to_matrix
from matscale.data.split import DatasetSplit, SplitMeta, split
from matscale.data.stats import SummaryStats, mean_abs_force_component, summary_stats
from matscale.data.synthetic import LJParams, generate_synthetic, lj_energy_forces_stress

__all__ = [
    "Batch",
    "CachedDataset",
    "DatasetSplit",
    "JsonlDataset",
    "LJParams",
    "MaterialRecord",
    "SplitMeta",
    "SummaryStats",
    "cache",
    "cell_volume",
    "collate",
    "dump_jsonl",
    "generate_synthetic",
    "iter_batches",
    "lj_energy_forces_stress",
    "load_jsonl",
    "matrix_to_voigt",
    "mean_abs_force_component",
    "minimum_image_shifts",
    "shard",
    "split",
    "summary_stats",
    "to_cartesian",
    "to_fractional",
    "voigt_to_matrix",
]
