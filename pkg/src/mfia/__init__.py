"""Multifractal image analysis.

Grayscale images become normalized box measures; from a measure the
package estimates mass exponents tau(q), generalized dimensions D(q),
and (alpha, f) spectra by the moment, direct, large-deviation, and
geometric routes; pointwise Holder exponent maps drive inverse
segmentation (select pixels by exponent or by spectrum value); and
per-image feature vectors feed one-way ANOVA plus leave-one-out linear
discriminant classification. Multiplicative cascades with closed-form
spectra serve as exact ground truth throughout.
"""

__version__ = "0.1.0"

from .cascade import AnalyticSpectrum, CascadeSpec, analytic_tau_spectrum, generate_cascade
from .classify import (
    ConfusionMatrix,
    LabeledDataset,
    LdaModel,
    anova_oneway,
    dataset_from_features,
    fit_lda,
    loocv,
    loocv_groups,
    predict,
)
from .features import (
    CSV_COLUMNS,
    FEATURE_NAMES,
    PRIMARY_FEATURES,
    FeatureVector,
    extract_features,
    features_to_csv,
    geometric_features,
    moment_features,
    read_features_csv,
)
from .holder import (
    AlphaHistogram,
    AlphaMap,
    alpha_map,
    coarse_alpha_histogram,
    hausdorff_spectrum,
    large_deviation_spectrum,
)
from .measures import (
    GrayImage,
    MeasureGrid,
    as_measure,
    crop_dyadic,
    load_image,
    load_measure,
    save_measure,
    to_measure,
)
from .segment import BitMask, box_dimension, select_by_alpha, select_by_f
from .spectra import (
    DEFAULT_Q_GRID,
    DQCurve,
    SpectrumCurve,
    TauCurve,
    chhabra_spectrum,
    default_scales,
    estimate_tau,
    generalized_dimensions,
    legendre_spectrum,
    partition_function,
)

__all__ = [name for name in dir() if not name.startswith("_")]
