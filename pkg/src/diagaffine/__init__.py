"""Dimension theory of diagonal self-affine systems: dimensions, entropies of
non-conformal partitions, separation diagnostics and covering experiments."""

__version__ = "0.1.0"

from .dimension import (
    DimensionReport,
    affinity_dimension,
    closed_form_example_dim,
    dimension_report,
    iterate_system,
    kappa_value,
    lyapunov_dimension,
    lyapunov_max_profile,
    natural_weights,
    pressure,
)
from .ifs_core import (
    AffineMap1,
    BudgetExceeded,
    DiagonalIFS,
    DiagonalMap,
    SubgroupConditionError,
    WeightedIFS,
    bounding_box,
    compose,
    example_system,
    lyapunov_exponents,
    one_dim_subgroup_check,
    stopping_words,
)
from .measures import DiscreteMeasure, GaussianSpec, PartitionSpec

__all__ = [
    "AffineMap1",
    "BudgetExceeded",
    "DiagonalIFS",
    "DiagonalMap",
    "DimensionReport",
    "DiscreteMeasure",
    "GaussianSpec",
    "PartitionSpec",
    "SubgroupConditionError",
    "WeightedIFS",
    "affinity_dimension",
    "bounding_box",
    "closed_form_example_dim",
    "compose",
    "dimension_report",
    "example_system",
    "iterate_system",
    "kappa_value",
    "lyapunov_dimension",
    "lyapunov_exponents",
    "lyapunov_max_profile",
    "natural_weights",
    "one_dim_subgroup_check",
    "pressure",
    "stopping_words",
]
