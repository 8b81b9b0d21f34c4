"""Denoise binary matrices whose rows and columns carry individual background bias."""
from .background import (
    HitProfile,
    MarginProfile,
    MonteCarlo,
    WeightedDistribution,
    hit_profile,
    margins,
    quantile,
    weighted_distribution,
)
from .binmat import BinaryMatrix, FormatError, dumps, hadamard_mask, load, loads, save
from .bind import BindResult, DetectorError, compact, denoise, expand_factors, run_pipeline
from .detect import PatternFactors, greedy_rank1
from .evaluate import benchmark, jaccard, lemma2_bound, lemma3_bound
from .quantile_shift import ShiftWeight, WeightVector, all_weights, line_weight
from .synth import GroundTruth, ScenarioSpec, full_grid, generate

__version__ = "0.1.0"
