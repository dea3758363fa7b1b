"""Nearness recognition from ambient sensor streams, at desk scale.

Synthesizes steady and human-perturbed multi-sensor time series, windows
them into 512-reading instances, extracts 25 features per sensor, ranks the
features by information gain, trains an SVM (sequential minimal
optimization), Gaussian naive Bayes, or multilayer perceptron, and
evaluates with precision/recall/F, sensitivity/specificity, ROC/AUC, and
leave-one-sensor-out ablation.
"""

from .classifiers import (
    GaussianNaiveBayes,
    MultilayerPerceptron,
    SMOClassifier,
    load_model,
    save_model,
)
from .config import RunConfig, TrainConfig, default_config, load_config, parse_config
from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    LabelingError,
    NearsenseError,
    ParseError,
    SchemaError,
    TrainingError,
)
from .evaluation import (
    AblationRow,
    ConfusionMatrix,
    EvalReport,
    ablation,
    evaluate_run,
    f_measure,
    metrics_from_confusion,
    roc_curve,
    split_60_40,
    train_test_indices,
)
from .features import (
    WindowFeatureExtractor,
    base_feature_names,
    cdf_transform,
    detect_peaks,
    entropy,
    erf,
    extract_all,
    feature_names_for_sensors,
    fft_adpi,
    gapi,
    gcs,
    instances_to_frame,
    mad,
    mean,
    mrw,
    pdf_transform,
    read_feature_matrix,
    std_dev,
    write_feature_matrix,
)
from .fourier import fft_magnitudes, fft_radix2
from .ingest import (
    RawInstance,
    ReadingWindow,
    assemble_instances,
    parse_log,
    read_labels,
    windowize,
    write_labels,
    write_raw_log,
    write_window_manifest,
)
from .selection import (
    InfoGainSelector,
    class_entropy,
    info_gain,
    mdl_cut_points,
    rank_features,
)
from .signals import (
    HumanConfig,
    SensorProfile,
    SensorTrace,
    SinusoidSpec,
    SpaceConfig,
    gen_dataset,
    gen_nonsteady,
    gen_steady,
)

__version__ = "0.1.0"

__all__ = [
    "AblationRow",
    "ConfigError",
    "ConfusionMatrix",
    "DataError",
    "DivergenceError",
    "EvalReport",
    "GaussianNaiveBayes",
    "HumanConfig",
    "InfoGainSelector",
    "LabelingError",
    "MultilayerPerceptron",
    "NearsenseError",
    "ParseError",
    "RawInstance",
    "ReadingWindow",
    "RunConfig",
    "SMOClassifier",
    "SchemaError",
    "SensorProfile",
    "SensorTrace",
    "SinusoidSpec",
    "SpaceConfig",
    "TrainConfig",
    "TrainingError",
    "WindowFeatureExtractor",
    "ablation",
    "assemble_instances",
    "base_feature_names",
    "cdf_transform",
    "class_entropy",
    "default_config",
    "detect_peaks",
    "entropy",
    "erf",
    "evaluate_run",
    "extract_all",
    "f_measure",
    "feature_names_for_sensors",
    "fft_adpi",
    "fft_magnitudes",
    "fft_radix2",
    "gapi",
    "gcs",
    "gen_dataset",
    "gen_nonsteady",
    "gen_steady",
    "info_gain",
    "instances_to_frame",
    "load_config",
    "load_model",
    "mad",
    "mdl_cut_points",
    "mean",
    "metrics_from_confusion",
    "mrw",
    "parse_config",
    "parse_log",
    "pdf_transform",
    "rank_features",
    "read_feature_matrix",
    "read_labels",
    "roc_curve",
    "save_model",
    "split_60_40",
    "std_dev",
    "train_test_indices",
    "windowize",
    "write_feature_matrix",
    "write_labels",
    "write_raw_log",
    "write_window_manifest",
]
