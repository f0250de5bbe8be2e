"""One-way ANOVA, pooled-covariance linear discriminants, and
leave-one-out cross-validation over labeled feature vectors.

The discriminant assigns a sample to the class minimizing half the
squared Mahalanobis distance to the class mean (pooled covariance)
minus the log prior; priors default to equal. The pooled covariance is
population-style (divisor n, not n - k), so duplicating every row
leaves the model unchanged, and it carries a small ridge term to keep
it positive definite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import DimensionMismatch, SingularCovariance
from .features import PRIMARY_FEATURES

RIDGE_SCALE = 1e-6  # ridge = RIDGE_SCALE * mean diagonal of the pooled covariance


@dataclass(frozen=True)
class LabeledDataset:
    """Numeric feature matrix with one non-empty label per row.

    Needs at least two classes and two rows per class; values must be
    finite.
    """

    x: np.ndarray
    labels: tuple
    feature_names: tuple

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        labels = tuple(str(lb) for lb in self.labels)
        names = tuple(self.feature_names)
        if x.ndim != 2 or x.shape[0] != len(labels) or x.shape[1] != len(names):
            raise ValueError("x must be (n_rows, n_features) matching labels and names")
        if not all(labels):
            raise ValueError("every row needs a non-empty label")
        if not np.all(np.isfinite(x)):
            raise ValueError("feature values must be finite (no missing values)")
        classes = sorted(set(labels))
        if len(classes) < 2:
            raise ValueError("at least two classes are required")
        for c in classes:
            if labels.count(c) < 2:
                raise ValueError("class %r has fewer than 2 rows" % c)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "class_names", tuple(classes))

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    def column(self, feature: str) -> np.ndarray:
        if feature not in self.feature_names:
            raise ValueError("unknown feature %r" % feature)
        return self.x[:, self.feature_names.index(feature)]

    def filter_classes(self, keep) -> "LabeledDataset":
        keep = tuple(keep)
        for c in keep:
            if c not in self.class_names:
                raise ValueError("unknown class %r" % c)
        rows = [i for i, lb in enumerate(self.labels) if lb in keep]
        return LabeledDataset(
            x=self.x[rows], labels=[self.labels[i] for i in rows], feature_names=self.feature_names
        )


def dataset_from_features(rows, feature_names=None) -> LabeledDataset:
    """Assemble a dataset from FeatureVectors (all rows must be labeled)."""
    names = tuple(feature_names) if feature_names is not None else PRIMARY_FEATURES
    x = np.array([[getattr(fv, name) for name in names] for fv in rows], dtype=np.float64)
    return LabeledDataset(x=x, labels=[fv.label for fv in rows], feature_names=names)


# --------------------------------------------------------------------------
# One-way ANOVA
# --------------------------------------------------------------------------

def anova_oneway(ds: LabeledDataset, feature: str):
    """Classical one-way F test for one feature across the classes.

    Returns (F, p) with p from the upper tail of the F distribution via
    the regularized incomplete beta. Zero within-group variance with any
    between-group spread reports the sentinel (inf, 0.0); completely
    identical data reports (0.0, 1.0).
    """
    values = ds.column(feature)
    groups = [values[np.array([lb == c for lb in ds.labels])] for c in ds.class_names]
    k = len(groups)
    n = values.size
    grand = values.mean()
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    df_between = k - 1
    df_within = n - k

    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0, 1.0
        return math.inf, 0.0
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(betainc(df_within / 2.0, df_between / 2.0, df_within / (df_within + df_between * f_stat)))
    return float(f_stat), p


# --------------------------------------------------------------------------
# Linear discriminant
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LdaModel:
    class_names: tuple
    means: np.ndarray  # (n_classes, n_features)
    pooled_cov: np.ndarray  # ridge already applied
    priors: np.ndarray
    ridge: float

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def _fit_arrays(x, labels, classes, priors, ridge_scale) -> LdaModel:
    """Core fit on raw arrays; LOOCV folds may have single-row classes."""
    d = x.shape[1]
    means = np.empty((len(classes), d))
    scatter = np.zeros((d, d))
    for i, c in enumerate(classes):
        rows = x[labels == c]
        if rows.shape[0] == 0:
            raise ValueError("class %r has no training rows" % c)
        means[i] = rows.mean(axis=0)
        centered = rows - means[i]
        scatter += centered.T @ centered
    pooled = scatter / x.shape[0]  # population-style pooling

    ridge = ridge_scale * float(np.trace(pooled)) / d
    pooled = pooled + ridge * np.eye(d)
    try:
        np.linalg.cholesky(pooled)
    except np.linalg.LinAlgError:
        raise SingularCovariance(
            "pooled covariance is not positive definite (ridge %g)" % ridge
        ) from None

    if priors is None:
        priors = np.full(len(classes), 1.0 / len(classes))
    else:
        priors = np.asarray(priors, dtype=np.float64)
        if priors.shape != (len(classes),) or abs(priors.sum() - 1.0) > 1e-9 or priors.min() <= 0:
            raise ValueError("priors must be positive per-class values summing to 1")
    return LdaModel(
        class_names=classes, means=means, pooled_cov=pooled, priors=priors, ridge=ridge
    )


def fit_lda(ds: LabeledDataset, priors=None, ridge_scale: float = RIDGE_SCALE) -> LdaModel:
    """Fit class means and ridged pooled covariance.

    Raises SingularCovariance when the covariance is not positive
    definite even after the ridge term; it never hands back NaNs.
    """
    return _fit_arrays(ds.x, np.array(ds.labels), ds.class_names, priors, ridge_scale)


def _scores(model: LdaModel, x: np.ndarray) -> np.ndarray:
    """Half squared Mahalanobis distance minus log prior, per class."""
    diffs = model.means - x[None, :]
    solved = np.linalg.solve(model.pooled_cov, diffs.T)
    d2 = np.einsum("ij,ji->i", diffs, solved)
    return 0.5 * d2 - np.log(model.priors)


def predict(model: LdaModel, x) -> str:
    """Classify one sample; exact score ties go to the first class in
    sort order."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (model.n_features,):
        raise DimensionMismatch(
            "sample has %d features, model expects %d" % (x.size, model.n_features)
        )
    return model.class_names[int(np.argmin(_scores(model, x)))]


# --------------------------------------------------------------------------
# Leave-one-out cross-validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Integer truth-by-prediction counts."""

    class_names: tuple
    counts: np.ndarray  # rows = truth

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def recall(self, class_name: str) -> float:
        i = self.class_names.index(class_name)
        row = self.counts[i].sum()
        return float(self.counts[i, i]) / row if row else math.nan


def loocv(ds: LabeledDataset, class_filter=None, ridge_scale: float = RIDGE_SCALE) -> ConfusionMatrix:
    """Leave-one-out: fit on all but one row, predict it, accumulate.

    `class_filter` restricts the run to a pair of classes first. A fit
    failure inside any fold propagates; folds are never skipped
    silently.
    """
    if class_filter is not None:
        ds = ds.filter_classes(class_filter)
    classes = ds.class_names
    labels = np.array(ds.labels)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for i in range(ds.n_rows):
        keep = np.arange(ds.n_rows) != i
        model = _fit_arrays(ds.x[keep], labels[keep], classes, None, ridge_scale)
        predicted = predict(model, ds.x[i])
        counts[index[labels[i]], index[predicted]] += 1
    return ConfusionMatrix(class_names=classes, counts=counts)


def loocv_groups(ds: LabeledDataset, groups, ridge_scale: float = RIDGE_SCALE) -> ConfusionMatrix:
    """Leave-one-group-out variant: all rows sharing a group id are held
    out together (non-independent repeat photographs, for instance)."""
    groups = list(groups)
    if len(groups) != ds.n_rows:
        raise ValueError("one group id per row is required")
    classes = ds.class_names
    labels = np.array(ds.labels)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for gid in sorted(set(groups)):
        held = [i for i, g in enumerate(groups) if g == gid]
        rest = np.array([g != gid for g in groups])
        model = _fit_arrays(ds.x[rest], labels[rest], classes, None, ridge_scale)
        for i in held:
            counts[index[labels[i]], index[predict(model, ds.x[i])]] += 1
    return ConfusionMatrix(class_names=classes, counts=counts)


# --------------------------------------------------------------------------
# Plain-text report
# --------------------------------------------------------------------------

def _pct(value: float) -> str:
    return "%.1f%%" % (100.0 * value)


def render_report(ds: LabeledDataset, overall: ConfusionMatrix, pairwise, anova_rows) -> str:
    """Classification report: overall and pairwise accuracies, per-class
    recall, and the per-feature ANOVA table."""
    lines = []
    lines.append(
        "overall LOOCV accuracy: %s (%d/%d)"
        % (_pct(overall.accuracy), int(np.trace(overall.counts)), overall.total)
    )
    lines.append("")
    lines.append("per-class recall:")
    for c in overall.class_names:
        i = overall.class_names.index(c)
        lines.append(
            "  %-20s %s (%d/%d)"
            % (c, _pct(overall.recall(c)), overall.counts[i, i], overall.counts[i].sum())
        )
    if pairwise:
        lines.append("")
        lines.append("pairwise LOOCV accuracy:")
        for (a, b), cm in pairwise:
            lines.append("  %-30s %s (%d/%d)" % ("%s:%s" % (a, b), _pct(cm.accuracy), int(np.trace(cm.counts)), cm.total))
    lines.append("")
    lines.append("one-way ANOVA per feature:")
    lines.append("  %-20s %12s %12s" % ("feature", "F", "p"))
    for name, f_stat, p in anova_rows:
        f_txt = "inf" if math.isinf(f_stat) else "%.6g" % f_stat
        lines.append("  %-20s %12s %12.6g" % (name, f_txt, p))
    return "\n".join(lines) + "\n"
