"""PRB demand forecasting and energy-aware allocation."""

import json

from ._core import (
    ForecasterConfig,
    MetricsError,
    ModelKind,
    PipelineError,
    PowerParams,
    PrbSeries,
    TraceConfig,
    TraceError,
    TrainedModel,
    TrainingError,
    allocate_value,
    coverage,
    fit,
    forecast_quantile,
    generate_synthetic,
    load_csv,
    load_model,
    normalized_deviation,
    parse_model_kind,
    point_errors,
    power_saving,
    predict,
    provisioning,
    quantile_loss,
    split,
    to_csv,
    total_power,
)
from ._core import run_experiment as _run_experiment


def run_experiment(config=None, seed=None, base_dir=""):
    """Run the full pipeline and return the report as a dict.

    `config` may be a dict, JSON text, or None for the built-in defaults.
    """
    if isinstance(config, dict):
        config = json.dumps(config)
    return json.loads(_run_experiment(config or "", seed, base_dir))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
