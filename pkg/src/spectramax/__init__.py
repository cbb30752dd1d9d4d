"""Spectral multiplier calculus and maximal-function experiments on the
discrete torus."""

__version__ = "0.1.0"

from .grid import (
    FREQUENCY,
    SPACE,
    EigenIndex,
    Field,
    TorusGrid,
    field_to_csv,
    lp_norm,
    make_grid,
    read_field,
    transform,
    write_field,
)
from .symbols import (
    DyadicPartition,
    HormanderParams,
    Symbol,
    SymbolFamily,
    build_partition,
    constant_symbol,
    default_band_count,
    dyadic_piece,
    family_to_csv,
    frequency_bump,
    hormander_norm,
    indicator_symbol,
    make_hormander_params,
    partition_to_csv,
    product_symbol,
    random_sign_family,
    symbol_from_spec,
    symbol_one,
    symbol_zero,
    table_symbol,
)
from .operators import (
    KernelProfile,
    apply_kernel,
    apply_multiplier,
    cluster_2_to_infty_norm,
    cluster_mode_count,
    maximal_multiplier,
    multiplier_kernel,
    operator_norm_lower_bound,
    spectral_projection,
    weighted_kernel_norm,
)
from .martingale import (
    DyadicCubeSystem,
    LevelSetReport,
    cw_report,
    expectation,
    g_functional,
    hl_maximal,
    martingale_difference,
    square_function,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    GrowthReport,
    parse_config,
    run_cluster_suite,
    run_experiment,
    run_kernel_suite,
    run_logn_growth,
    run_martingale_suite,
)

__all__ = [name for name in dir() if not name.startswith("_")]
