"""Figure emitter for per-user spectral-efficiency CSV results."""

from .figures import (
    CDF_KIND,
    PERCENTILE_VS_PHASE,
    PERCENTILE_VS_RHO,
    CdfCurve,
    CdfFigure,
    PercentileFigure,
    PlotJob,
    plot_cdf,
    plot_percentiles,
    render_job,
)
from .io import (
    MissingScenarioError,
    ResultRecord,
    SchemaError,
    SummaryRecord,
    read_result_records,
    read_summary_records,
    sniff_schema,
)

__all__ = [
    "CDF_KIND",
    "PERCENTILE_VS_PHASE",
    "PERCENTILE_VS_RHO",
    "CdfCurve",
    "CdfFigure",
    "MissingScenarioError",
    "PercentileFigure",
    "PlotJob",
    "ResultRecord",
    "SchemaError",
    "SummaryRecord",
    "plot_cdf",
    "plot_percentiles",
    "read_result_records",
    "read_summary_records",
    "render_job",
    "sniff_schema",
]

__version__ = "0.1.0"
