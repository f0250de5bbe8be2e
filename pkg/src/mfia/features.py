"""Reduce spectrum curves and exponent maps to per-image scalar features.

Two families of features feed the classifier:

* moment-route: extrema of D(q) and of the direct (alpha, f) spectrum;
* geometric-route: moments of the exponent-bin dimension spectrum, plus
  the exponent at its peak.

The diagnostic map_alpha_mean / map_alpha_std columns carry the plain
pixel statistics of the exponent map; they duplicate nothing above and
make the alternative "over pixels" reading of the mean/std features
testable downstream.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCurve, SchemaMismatch
from .holder import AlphaMap, alpha_map, hausdorff_spectrum
from .measures import MeasureGrid
from .spectra import DQCurve, SpectrumCurve, chhabra_spectrum, estimate_tau, generalized_dimensions

#: Feature CSV column order. The two map_* columns are diagnostics.
CSV_COLUMNS = (
    "source_id",
    "label",
    "d_max",
    "q_at_dmax",
    "alpha_at_fmin",
    "f_min",
    "alpha_at_fmax",
    "f_max",
    "alpha_mean",
    "f_mean",
    "alpha_at_fmax_hd",
    "alpha_std",
    "f_std",
    "map_alpha_mean",
    "map_alpha_std",
)

#: Numeric feature names in CSV order (everything after source_id,label).
FEATURE_NAMES = CSV_COLUMNS[2:]

#: Default classification subset: the named features, without diagnostics.
PRIMARY_FEATURES = CSV_COLUMNS[2:13]


@dataclass(frozen=True)
class FeatureVector:
    """All per-image features; unknown values stay NaN."""

    source_id: str = ""
    label: str = ""
    d_max: float = math.nan
    q_at_dmax: float = math.nan
    alpha_at_fmin: float = math.nan
    f_min: float = math.nan
    alpha_at_fmax: float = math.nan
    f_max: float = math.nan
    alpha_mean: float = math.nan
    f_mean: float = math.nan
    alpha_at_fmax_hd: float = math.nan
    alpha_std: float = math.nan
    f_std: float = math.nan
    map_alpha_mean: float = math.nan
    map_alpha_std: float = math.nan


def moment_features(dq: DQCurve, spectrum: SpectrumCurve) -> dict:
    """Moment-route features from D(q) and a q-indexed spectrum.

    Ties (constant curves) resolve to the smallest q, so the extraction
    is deterministic.
    """
    if dq.q.size == 0 or len(spectrum) == 0:
        raise EmptyCurve("curves must be non-empty")
    if spectrum.q is None or not np.array_equal(dq.q, spectrum.q):
        raise ValueError("curves must share one q grid")

    i_dmax = int(np.argmax(dq.d))  # argmax returns the smallest q on ties
    i_fmin = int(np.argmin(spectrum.f))
    i_fmax = int(np.argmax(spectrum.f))
    return {
        "d_max": float(dq.d[i_dmax]),
        "q_at_dmax": float(dq.q[i_dmax]),
        "alpha_at_fmin": float(spectrum.alpha[i_fmin]),
        "f_min": float(spectrum.f[i_fmin]),
        "alpha_at_fmax": float(spectrum.alpha[i_fmax]),
        "f_max": float(spectrum.f[i_fmax]),
    }


def geometric_features(spectrum: SpectrumCurve) -> dict:
    """Geometric-route features: unweighted mean / population std over
    the spectrum's sampled points, and the exponent at the f peak
    (ties resolve to the smaller exponent).

    A single-point spectrum (degenerate monofractal input) is allowed
    and yields zero standard deviations.
    """
    if len(spectrum) == 0:
        raise EmptyCurve("spectrum has no points")
    alpha, f = spectrum.alpha, spectrum.f
    peak = f.max()
    alpha_at_peak = alpha[f == peak].min()
    return {
        "alpha_mean": float(alpha.mean()),
        "f_mean": float(f.mean()),
        "alpha_at_fmax_hd": float(alpha_at_peak),
        "alpha_std": float(alpha.std()),
        "f_std": float(f.std()),
    }


def map_summary(amap: AlphaMap) -> dict:
    """Diagnostic pixel statistics of the exponent map."""
    values = amap.alpha[amap.defined]
    if values.size == 0:
        return {"map_alpha_mean": math.nan, "map_alpha_std": math.nan}
    return {
        "map_alpha_mean": float(values.mean()),
        "map_alpha_std": float(values.std()),
    }


def extract_features(
    measure: MeasureGrid,
    *,
    q_grid=None,
    scales=None,
    window_sides=None,
    bin_width=None,
    source_id: str = "",
    label: str = "",
) -> FeatureVector:
    """Full per-image pipeline: tau -> D(q) + direct spectrum, exponent
    map -> geometric spectrum, reduced to one FeatureVector."""
    from .holder import DEFAULT_BIN_WIDTH, DEFAULT_WINDOWS

    window_sides = DEFAULT_WINDOWS if window_sides is None else window_sides
    bin_width = DEFAULT_BIN_WIDTH if bin_width is None else bin_width

    tau = estimate_tau(measure, q_grid=q_grid, scales=scales)
    dq = generalized_dimensions(tau)
    direct = chhabra_spectrum(measure, q_grid=q_grid, scales=scales)
    amap = alpha_map(measure, window_sides=window_sides)
    geometric = hausdorff_spectrum(amap, bin_width=bin_width, box_sides=scales)

    parts = {}
    parts.update(moment_features(dq, direct))
    parts.update(geometric_features(geometric))
    parts.update(map_summary(amap))
    return FeatureVector(source_id=source_id, label=label, **parts)


# --------------------------------------------------------------------------
# Feature CSV
# --------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return "%.9g" % value


def features_to_csv(rows, header_lines=()) -> str:
    """Render FeatureVectors as CSV text with optional '#' header lines."""
    out = io.StringIO()
    for line in header_lines:
        out.write("# %s\n" % line)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for fv in rows:
        record = [fv.source_id, fv.label]
        record += [_fmt(getattr(fv, name)) for name in FEATURE_NAMES]
        writer.writerow(record)
    return out.getvalue()


def read_features_csv(path_or_text) -> list:
    """Parse a feature CSV (ignoring '#' comments) back to FeatureVectors.

    Raises SchemaMismatch naming the first offending column when the
    header deviates from CSV_COLUMNS.
    """
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise SchemaMismatch("no CSV header found")
    reader = csv.reader(lines)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        for got, want in zip(header, CSV_COLUMNS):
            if got != want:
                raise SchemaMismatch("expected column %r, found %r" % (want, got))
        raise SchemaMismatch(
            "expected %d columns, found %d" % (len(CSV_COLUMNS), len(header))
        )
    rows = []
    for record in reader:
        if len(record) != len(CSV_COLUMNS):
            raise SchemaMismatch("row has %d fields, expected %d" % (len(record), len(CSV_COLUMNS)))
        values = {}
        for name, cell in zip(FEATURE_NAMES, record[2:]):
            try:
                values[name] = float(cell)
            except ValueError:
                raise SchemaMismatch("non-numeric value %r in column %r" % (cell, name)) from None
        rows.append(FeatureVector(source_id=record[0], label=record[1], **values))
    return rows
