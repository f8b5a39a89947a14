"""FLOC-based analysis of cyclostationary time series with heavy tails."""

from .calibration import CalibrationCache
from .errors import (
    DegenerateDataError,
    EstimationError,
    IngestionError,
    InsufficientDataError,
    NonCausalModelError,
    PeflocError,
    ShapeError,
    SingularSystemError,
)
from .inference import (
    OrderResult,
    ParFit,
    PortmanteauResult,
    calibration_kappa_sample,
    fit_par_yw,
    identify_par_order,
    identify_pma_order,
    kappa_stats,
    portmanteau_test,
    residual_series,
    residuals,
)
from .measures import (
    NullBands,
    SeasonalLagTable,
    mc_average_table,
    null_bands,
    pefloacf_table,
    peflopacf_table,
    sample_pefloacf,
    sample_pefloacvf,
    sample_peflopacf,
    sample_peflopacf_acvf_variant,
)
from .models import (
    PeriodicModel,
    PeriodicSeries,
    gen_ipd_stable,
    gen_parma,
    local_orders,
    monodromy_spectral_radius,
)
from .pipeline import (
    ExperimentGrid,
    huber_location,
    ingest_csv,
    load_grid,
    preprocess_log_huber,
    replicate_order_grid,
    replicate_power_grid,
    save_grid,
)
from .stable import (
    FlocParams,
    StableParams,
    estimate_alpha,
    floc_pairs,
    flom_sample,
    sample_sym_stable,
    signed_power,
    stream,
)

__version__ = "0.1.0"
