"""Experiments: superlevel measures, box counts, sup-moments, fits and identities."""

from .boxcount import BoxCountReport, box_count_experiment, box_counts, ceil_power
from .dilation import DilationCheck, TrigPolynomial, dilation_invariance_check
from .fitting import ExponentFit, fit_exponent, level_set_moment_exponent
from .majorant import majorant_ratio, pointwise_majorant
from .moments import (
    MeasureEstimate,
    MomentEstimate,
    SupSamples,
    discrepancy_moment_estimate,
    measure_from_samples,
    measure_superlevel,
    moment_estimate,
    moment_from_samples,
    sample_discrepancy,
    sample_short,
    sample_sup,
    short_moment_estimate,
    torus_grid_moment,
)
from .report import dump_json, write_samples_csv
from .sampling import default_threads, parallel_chunks, uniform_points

__all__ = [
    "BoxCountReport",
    "box_count_experiment",
    "box_counts",
    "ceil_power",
    "DilationCheck",
    "TrigPolynomial",
    "dilation_invariance_check",
    "ExponentFit",
    "fit_exponent",
    "level_set_moment_exponent",
    "majorant_ratio",
    "pointwise_majorant",
    "MeasureEstimate",
    "MomentEstimate",
    "SupSamples",
    "discrepancy_moment_estimate",
    "measure_from_samples",
    "measure_superlevel",
    "moment_estimate",
    "moment_from_samples",
    "sample_discrepancy",
    "sample_short",
    "sample_sup",
    "short_moment_estimate",
    "torus_grid_moment",
    "dump_json",
    "write_samples_csv",
    "default_threads",
    "parallel_chunks",
    "uniform_points",
]
