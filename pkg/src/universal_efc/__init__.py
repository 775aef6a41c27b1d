"""Economic fitness and complexity on universal (goods plus services) export panels.

The package covers the whole chain: loading and merging country x activity
x year panels, reconstructing missing services exports on the BOP
taxonomy, RCA and market-share matrices, the fitness-complexity fixed
point, BiCM-validated progression networks and lagged correlation with
GDP.
"""
from .analysis import IndicatorSeries, bootstrap_band, lagged_correlation, load_indicator
from .complexity import (
    CompetitivenessMatrix,
    FitnessResult,
    binarize,
    competitiveness_series,
    fitness_complexity,
    market_share,
    rank_series,
    rca,
    yearly_fitness,
)
from .errors import EFCError
from .imputation import ImputerConfig, evaluate_mae, impute
from .panel import (
    MISSING,
    ExportPanel,
    PanelMask,
    SmoothingConfig,
    exp_smooth,
    load_panel,
    mask_random,
    merge_universal,
    write_panel,
)
from .progression import assist_matrix, bicm_fit, bicm_sample, progression_network, validate_delta
from .taxonomy import (
    TaxonomyTree,
    check_sum_consistency,
    missing_share,
    parse_taxonomy,
    rollup,
)

__version__ = "0.1.0"

__all__ = [
    "MISSING", "ExportPanel", "PanelMask", "SmoothingConfig", "exp_smooth", "load_panel",
    "mask_random", "merge_universal", "write_panel",
    "TaxonomyTree", "check_sum_consistency", "missing_share", "parse_taxonomy", "rollup",
    "ImputerConfig", "evaluate_mae", "impute",
    "CompetitivenessMatrix", "FitnessResult", "binarize", "competitiveness_series",
    "fitness_complexity", "market_share", "rank_series", "rca", "yearly_fitness",
    "assist_matrix", "bicm_fit", "bicm_sample", "progression_network", "validate_delta",
    "IndicatorSeries", "bootstrap_band", "lagged_correlation", "load_indicator",
    "EFCError",
]
