from ._alphascreen import (
    ConfigError,
    ContractError,
    DimensionError,
    SingularityError,
    bh_procedure,
    estimate_alpha,
    generate_panel,
    run_method,
    run_study,
    scenario_json,
    select_threshold,
    sbh_statistics,
    sn_statistics,
    split_statistics,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "SingularityError",
    "bh_procedure",
    "estimate_alpha",
    "generate_panel",
    "run_method",
    "run_study",
    "scenario_json",
    "select_threshold",
    "sbh_statistics",
    "sn_statistics",
    "split_statistics",
]
