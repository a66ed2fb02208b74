"""Numerical estimation of information dimension and information loss of
static (memoryless) deterministic maps, with exact closed-form cross-checks
for the structured system catalog."""

__version__ = "0.1.0"

from .dimension import DimensionFit, conditional_dimension, fit_dimension, \
    marginal_dimension, output_dimension
from .entropy import BinCounts, ConditioningKey, EntropyCurve, \
    component_curves, conditional_entropy, entropy_curve, plugin_entropy
from .errors import ConfigurationError, DataError, InsufficientDataError, \
    UndefinedRelativeLossError
from .loss import ComponentBound, FanoResult, LossReport, RelativeLoss, \
    absolute_loss, componentwise_bound, conditional_growth, conjecture_gap, \
    relative_loss
from .measure import Box, DistributionSpec, FiniteDiscrete, Mixture, \
    ProductDistribution, SampleBatch, TruncatedGaussian, UniformBox, \
    distribution_from_config, region_prob, sample, support_diameter
from .quantizer import BinIndex, cell_count_bound, cell_midpoint, quantize, \
    quantize_batch, refine
from .reconstruct import Reconstructor, error_curve, error_probability, \
    fano_check, train_map_reconstructor
from .systems import Affine, Atom, AtomTable, CenterClipper, Componentwise, \
    Composition, CoordinateProjection, Identity, Magnitude, \
    MagnitudeClipper, Square, SystemSpec, UniformQuantizer, \
    analytic_relative_loss, atom_table, system_from_config

__all__ = [
    "__version__",
    "Affine", "Atom", "AtomTable", "BinCounts", "BinIndex", "Box",
    "CenterClipper", "ComponentBound", "Componentwise", "Composition",
    "ConditioningKey", "ConfigurationError", "CoordinateProjection",
    "DataError", "DimensionFit", "DistributionSpec", "EntropyCurve",
    "FanoResult", "FiniteDiscrete", "Identity", "InsufficientDataError",
    "LossReport", "Magnitude", "MagnitudeClipper", "Mixture",
    "ProductDistribution", "Reconstructor", "RelativeLoss", "SampleBatch",
    "Square", "SystemSpec", "TruncatedGaussian",
    "UndefinedRelativeLossError", "UniformBox", "UniformQuantizer",
    "absolute_loss", "analytic_relative_loss", "atom_table",
    "cell_count_bound", "cell_midpoint", "component_curves",
    "componentwise_bound", "conditional_dimension", "conditional_entropy",
    "conditional_growth", "conjecture_gap", "distribution_from_config",
    "entropy_curve", "error_curve", "error_probability", "fano_check",
    "fit_dimension", "marginal_dimension", "output_dimension",
    "plugin_entropy", "quantize", "quantize_batch", "refine", "region_prob",
    "relative_loss", "sample", "support_diameter", "system_from_config",
    "train_map_reconstructor",
]
