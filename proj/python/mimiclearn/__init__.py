from ._mimiclearn import (
    Dataset,
    auc,
    cross_validate,
    distill,
    flatten,
    gbt_fit_export_dot,
    gradient_check_lstm,
    gradient_check_mlp,
    gradient_check_sda,
    impute_missing,
    load_dataset,
    run_benchmark,
    save_dataset_csv,
    synth,
)

__all__ = [
    "Dataset",
    "auc",
    "cross_validate",
    "distill",
    "flatten",
    "gbt_fit_export_dot",
    "gradient_check_lstm",
    "gradient_check_mlp",
    "gradient_check_sda",
    "impute_missing",
    "load_dataset",
    "run_benchmark",
    "save_dataset_csv",
    "synth",
]
