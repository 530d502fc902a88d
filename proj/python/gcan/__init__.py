"""Python interface to the GCAN C++ core (the `_gcan` extension module)."""

from _gcan import (  # noqa: F401
    Dataset,
    GcanConfig,
    GeneratorConfig,
    Model,
    Prediction,
    Story,
    UserRecord,
    evaluate,
    explain_json,
    generate,
    grad_check,
    load_dataset,
    oracle_baseline,
    run_experiment,
    split,
    train,
)

__all__ = [
    "Dataset",
    "GcanConfig",
    "GeneratorConfig",
    "Model",
    "Prediction",
    "Story",
    "UserRecord",
    "evaluate",
    "explain_json",
    "generate",
    "grad_check",
    "load_dataset",
    "oracle_baseline",
    "run_experiment",
    "split",
    "train",
]
