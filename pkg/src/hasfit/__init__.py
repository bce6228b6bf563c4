"""Multiplicative association models for incomplete binary sample spaces."""

__version__ = "0.1.0"

from .fit import (
    ConvergenceError,
    FitError,
    FitResult,
    GammaBracketError,
    InfeasibleTargetError,
    ObservedCounts,
    bregman_project,
    chisq_sf,
    gipf,
    mle,
)
from .lattice import (
    ParitySplit,
    SubsetClass,
    ascending_classes,
    ascending_closure,
    cell_label,
    descending_complement,
    parity_split,
    parse_cell_label,
    phi,
    revlex_cells,
    revlex_subsets,
)
from .models import (
    BinomialGenerator,
    Model,
    ModelSpec,
    ascending_from_brackets,
    binomial_generators,
    binomial_string,
    build_model,
    dehomogenize,
    full_independence_class,
    has_overall_effect,
    homogenize,
    parity_witness,
    parse_model_string,
)
from .param import (
    CornerParams,
    DesignMatrix,
    ExtendedMean,
    MeanParams,
    build_design,
    corner_params,
    extended_mean,
    generalized_ratio,
    invert_corner,
    mean_params,
    mixed_split,
    probs_from_mean,
)
from .search import SearchState, eh_search, hierarchical_classes, simulate_counts

__all__ = [name for name in dir() if not name.startswith("_")]
