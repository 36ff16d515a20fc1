"""margin-forge: a soft-margin SVM toolkit for clinical and genotype cohorts.

Encode categorical/numeric records into feature vectors, train a
maximal-margin classifier through the dual problem, and produce tabular
error reports, all deterministically under a single seed.
"""

from margin_forge.encoding import (
    Binary,
    Categorical,
    CategoricalMode,
    EncoderState,
    FieldSpec,
    LabelRule,
    MissingPolicy,
    Numeric,
    Record,
    Schema,
    encode_record,
    encode_records,
    fit_encoder,
    label_record,
    scalar_code,
)
from margin_forge.errors import (
    ConvergenceError,
    DimensionError,
    EncodingError,
    InvalidDataError,
    MarginForgeError,
    MissingValueError,
    ParseError,
    SchemaError,
    SingleClassError,
    VersionError,
)
from margin_forge.dataio import (
    SparseExample,
    dataset_to_examples,
    examples_to_dataset,
    load_model,
    load_schema,
    parse_schema,
    read_csv,
    read_sparse,
    save_model,
    write_sparse,
)
from margin_forge.evaluation import (
    ConfusionReport,
    SyntheticCohortSpec,
    evaluate,
    generate_cohort,
    render_report,
    render_report_csv,
    split,
)
from margin_forge.kernels import (
    Kernel,
    LinearKernel,
    PolynomialKernel,
    RbfKernel,
    kernel_eval,
)
from margin_forge.svm import (
    Model,
    TrainConfig,
    TrainDiagnostics,
    decision_value,
    decision_values,
    expansion_decision_values,
    predict,
    predict_all,
    total_slack,
    train,
)
from margin_forge.vectors import FeatureVector

__version__ = "0.1.0"

__all__ = [
    "Binary",
    "Categorical",
    "CategoricalMode",
    "ConfusionReport",
    "ConvergenceError",
    "DimensionError",
    "EncoderState",
    "EncodingError",
    "FeatureVector",
    "FieldSpec",
    "InvalidDataError",
    "Kernel",
    "LabelRule",
    "LinearKernel",
    "MarginForgeError",
    "MissingPolicy",
    "MissingValueError",
    "Model",
    "Numeric",
    "ParseError",
    "PolynomialKernel",
    "RbfKernel",
    "Record",
    "Schema",
    "SchemaError",
    "SingleClassError",
    "SparseExample",
    "SyntheticCohortSpec",
    "TrainConfig",
    "TrainDiagnostics",
    "VersionError",
    "dataset_to_examples",
    "decision_value",
    "decision_values",
    "encode_record",
    "encode_records",
    "evaluate",
    "examples_to_dataset",
    "expansion_decision_values",
    "fit_encoder",
    "generate_cohort",
    "kernel_eval",
    "label_record",
    "load_model",
    "load_schema",
    "parse_schema",
    "predict",
    "predict_all",
    "read_csv",
    "read_sparse",
    "render_report",
    "render_report_csv",
    "save_model",
    "scalar_code",
    "split",
    "total_slack",
    "train",
    "write_sparse",
]
