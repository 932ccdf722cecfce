"""Dialog state tracking via weighted collective matrix factorization."""

from ._cmftrack import (
    NONE_VALUE,
    BeliefState,
    DataError,
    DialogLog,
    Error,
    EvalOptions,
    FactorConfig,
    FactorModel,
    IoError,
    NumericError,
    ObservationVector,
    SchemaError,
    StateSchema,
    SyntheticWorld,
    TrackerOptions,
    TransitionMatrix,
    Turn,
    VariableSpec,
    Vocabulary,
    WorldConfig,
    assemble_transitions,
    decode_argmax,
    encode_observation,
    encode_state,
    evaluate_corpus,
    fit,
    generate_corpus,
    generate_world,
    infer_schema,
    joint_goal_accuracy,
    load_dialogs,
    normalize_scores,
    predict_next_state,
    project_transition,
    save_dialogs,
    slot_accuracy,
    tokenize,
    track_dialog,
    track_dialog_dicts,
    train_model,
)

__all__ = [
    "NONE_VALUE",
    "BeliefState",
    "DataError",
    "DialogLog",
    "Error",
    "EvalOptions",
    "FactorConfig",
    "FactorModel",
    "IoError",
    "NumericError",
    "ObservationVector",
    "SchemaError",
    "StateSchema",
    "SyntheticWorld",
    "TrackerOptions",
    "TransitionMatrix",
    "Turn",
    "VariableSpec",
    "Vocabulary",
    "WorldConfig",
    "assemble_transitions",
    "decode_argmax",
    "encode_observation",
    "encode_state",
    "evaluate_corpus",
    "fit",
    "generate_corpus",
    "generate_world",
    "infer_schema",
    "joint_goal_accuracy",
    "load_dialogs",
    "normalize_scores",
    "predict_next_state",
    "project_transition",
    "save_dialogs",
    "slot_accuracy",
    "tokenize",
    "track_dialog",
    "track_dialog_dicts",
    "train_model",
]

__version__ = "0.1.0"
