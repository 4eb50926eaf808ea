"""Python bindings for the tempxai C++ core."""

from ._tempxai import (
    ArgumentError,
    Cohort,
    ConfigError,
    DataError,
    Error,
    Patient,
    ShapeError,
    StateError,
    SynthConfig,
    TrainConfig,
    TrainedModel,
    attention_matrix,
    background_matrix,
    cmi_scores,
    conditional_mutual_information,
    entropy,
    evaluate,
    explain_patient,
    forward,
    load_checkpoint,
    load_cohort,
    mutual_information,
    planted_features,
    roc_auc,
    run_cli,
    save_checkpoint,
    save_cohort,
    sens_spec,
    split_train_test,
    synth_cohort,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
