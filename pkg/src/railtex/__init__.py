"""Rail surface defect classification from co-occurrence texture features.

Stages: image IO, rail-region masking and filtering, GLCM texture
features, PCA reduction, and three classical classifiers (KNN, random
forest, linear SVM) with a six-metric evaluation report.
"""

from .classify import (
    ForestModel,
    KnnModel,
    LabeledSet,
    Standardizer,
    SvmModel,
    apply_standardizer,
    fit_knn,
    fit_rf,
    fit_standardizer,
    fit_svm,
    predict_knn,
    predict_rf,
    predict_svm,
)
from .config import RunConfig, load_config
from .dataset import DatasetIndex, ingest_dataset, stratified_split
from .errors import RailTexError
from .image_io import load_image, resize, save_pgm, save_ppm, to_grayscale
from .metrics import (
    BinaryCounts,
    ConfusionMatrix,
    EvalReport,
    MetricSuite,
    binary_counts,
    confusion_matrix,
    macro_report,
    metric_suite,
)
from .model_store import ModelBundle, load_model, save_model
from .pca import PcaModel, fit_pca, inverse_transform, jacobi_eigh, transform
from .pipeline import predict_image, run_experiment, train_model
from .preprocess import (
    FilterConfig,
    adaptive_hist_eq,
    apply_mask,
    gaussian_blur,
    histogram_match,
    laplacian_sharpen,
    make_mask,
    median_filter,
    otsu_threshold,
    preprocess_pipeline,
)
from .synth import generate_synthetic_dataset
from .texture import (
    FeatureConfig,
    FeatureVector,
    Glcm,
    angle_to_offset,
    compute_glcm,
    extract_features,
    feature_schema,
    first_order_stats,
    glcm_contrast,
    glcm_correlation,
    glcm_energy,
    glcm_entropy,
    glcm_homogeneity,
    quantize,
)

__version__ = "0.1.0"
