"""Moment-route multifractal estimation on dyadic boxes.

The partition function Z(q, delta) = sum_i mu_i(delta)^q over non-empty
boxes scales as delta^tau(q); tau comes from an ordinary least-squares
fit of ln Z against ln delta over a set of dyadic box sides. From tau
follow the generalized dimensions D(q) and, via a numerical Legendre
transform, the (alpha, f) spectrum. The direct method computes the
spectrum without the transform, from q-normalized box weights:

    w_i(q, delta) = mu_i^q / sum_j mu_j^q
    alpha(q) = slope of sum_i w_i ln mu_i   vs ln delta
    f(q)     = slope of sum_i w_i ln w_i    vs ln delta

Zero-mass boxes are excluded from every sum; nothing is epsilon-floored.
All heavy sums run in the log domain so large |q| stays finite.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._regression import fit_line, fit_lines_stacked
from .errors import EmptyMeasure, QGridTooCoarse
from .measures import KIND_MAX, KIND_MIN, MeasureGrid

EMBEDDING_DIM = 2
F_SLACK = 0.1  # estimation slack on the embedding-dimension bound

DEFAULT_Q_GRID = np.linspace(-5.0, 5.0, 41)  # step 0.25, contains -5..5
DEFAULT_Q_GRID.flags.writeable = False

METHOD_CHHABRA = "chhabra"
METHOD_LEGENDRE = "legendre"
METHOD_LARGE_DEVIATION = "large_deviation"
METHOD_HAUSDORFF = "hausdorff"
SPECTRUM_METHODS = (
    METHOD_CHHABRA,
    METHOD_LEGENDRE,
    METHOD_LARGE_DEVIATION,
    METHOD_HAUSDORFF,
)


def default_scales(side: int):
    """Dyadic box sides keeping at least 16 boxes at the coarsest scale
    (falls back to smaller grids when that leaves fewer than 3 scales)."""
    top = side // 4
    scales = [s for s in _pow2_upto(top) if s >= 2]
    if len(scales) < 3:
        scales = [s for s in _pow2_upto(side // 2)]
    if len(scales) < 3:
        raise ValueError("grid side %d is too small for 3 scales" % side)
    return tuple(scales)


def _pow2_upto(top):
    s = 1
    while s <= top:
        yield s
        s *= 2


def check_scales(box_sides, side: int):
    """Validate a scale set: >=3 strictly increasing powers of two, each
    dividing the measure side."""
    scales = tuple(int(s) for s in box_sides)
    if len(scales) < 3:
        raise ValueError("at least 3 box sides are required")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("box sides must be strictly increasing")
    for s in scales:
        if s < 1 or (s & (s - 1)):
            raise ValueError("box side %d is not a power of two" % s)
        if s > side or side % s:
            raise ValueError("box side %d does not divide measure side %d" % (s, side))
    return scales


def check_q_grid(q_grid):
    """Validate a q grid: strictly increasing, finite, containing 0, 1, 2."""
    q = np.asarray(q_grid, dtype=np.float64)
    if q.ndim != 1 or q.size < 3:
        raise ValueError("q grid must be a 1-D array with at least 3 values")
    if not np.all(np.isfinite(q)) or np.any(np.diff(q) <= 0):
        raise ValueError("q grid must be finite and strictly increasing")
    for required in (0.0, 1.0, 2.0):
        if not np.any(q == required):
            raise ValueError("q grid must contain %g" % required)
    return q


def coarse_masses(measure: MeasureGrid, box_side: int) -> np.ndarray:
    """Coarse-grain the measure to (side/box_side)^2 boxes.

    "sum" adds the covered mass; "max"/"min" take the extreme covered
    value and renormalize so each scale again carries total mass one.
    """
    side = measure.side
    if box_side < 1 or side % box_side:
        raise ValueError("box side %d does not divide measure side %d" % (box_side, side))
    n = side // box_side
    blocks = measure.mass.reshape(n, box_side, n, box_side)
    if measure.kind == KIND_MAX:
        coarse = blocks.max(axis=(1, 3))
    elif measure.kind == KIND_MIN:
        coarse = blocks.min(axis=(1, 3))
    else:
        coarse = blocks.sum(axis=(1, 3))
    if measure.kind in (KIND_MAX, KIND_MIN):
        total = coarse.sum()
        if total <= 0.0:
            raise EmptyMeasure("no box has positive mass at box side %d" % box_side)
        coarse = coarse / total
    return coarse


def partition_function(measure: MeasureGrid, q: float, box_side: int) -> float:
    """Z(q, delta) summed over boxes with positive mass only."""
    coarse = coarse_masses(measure, box_side)
    positive = coarse[coarse > 0.0]
    if positive.size == 0:
        raise EmptyMeasure("no box has positive mass at box side %d" % box_side)
    return float((positive ** q).sum())


@dataclass(frozen=True)
class TauCurve:
    """Mass exponents tau(q) with per-q fit quality.

    log_delta and entropy_sum keep the per-scale ln(delta) abscissa and
    sum(mu ln mu) ordinates so the information dimension can be fitted
    later without touching the measure again.
    """

    q: np.ndarray
    tau: np.ndarray
    r2: np.ndarray
    log_delta: np.ndarray
    entropy_sum: np.ndarray


@dataclass(frozen=True)
class DQCurve:
    """Generalized dimensions D(q)."""

    q: np.ndarray
    d: np.ndarray


@dataclass(frozen=True)
class SpectrumCurve:
    """Sampled (alpha, f) pairs, optionally indexed by q.

    f may not exceed the embedding dimension by more than the estimation
    slack; alphas must be finite.
    """

    alpha: np.ndarray
    f: np.ndarray
    method: str
    q: np.ndarray | None = None

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        if alpha.shape != f.shape or alpha.ndim != 1:
            raise ValueError("alpha and f must be 1-D arrays of equal length")
        if self.method not in SPECTRUM_METHODS:
            raise ValueError("unknown spectrum method %r" % (self.method,))
        if alpha.size and not np.all(np.isfinite(alpha)):
            raise ValueError("spectrum alphas must be finite")
        if alpha.size and not np.all(np.isfinite(f)):
            raise ValueError("spectrum f values must be finite")
        if alpha.size and f.max() > EMBEDDING_DIM + F_SLACK:
            raise ValueError(
                "spectrum f exceeds the embedding bound %g + %g" % (EMBEDDING_DIM, F_SLACK)
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "f", f)

    def __len__(self):
        return self.alpha.size


def _log_masses_per_scale(measure, scales):
    """[(ln delta, ln mu of positive boxes)] per scale."""
    side = measure.side
    out = []
    for s in scales:
        coarse = coarse_masses(measure, s)
        positive = coarse[coarse > 0.0]
        if positive.size == 0:
            raise EmptyMeasure("no box has positive mass at box side %d" % s)
        out.append((np.log(s / side), np.log(positive)))
    return out


def estimate_tau(measure: MeasureGrid, q_grid=None, scales=None) -> TauCurve:
    """Fit tau(q) = slope of ln Z(q, delta) vs ln delta per q.

    tau(1) is not forced to zero; with unit total mass it emerges from
    the fit and serves as a self-check on the implementation.
    """
    q = check_q_grid(DEFAULT_Q_GRID if q_grid is None else q_grid)
    scales = check_scales(default_scales(measure.side) if scales is None else scales, measure.side)
    per_scale = _log_masses_per_scale(measure, scales)

    log_delta = np.array([ld for ld, _ in per_scale])
    log_z = np.empty((q.size, len(scales)))
    entropy = np.empty(len(scales))
    for j, (_, log_mu) in enumerate(per_scale):
        log_z[:, j] = logsumexp(q[:, None] * log_mu[None, :], axis=1)
        mu = np.exp(log_mu)
        entropy[j] = float(np.dot(mu, log_mu))

    tau, r2 = fit_lines_stacked(log_delta, log_z)
    return TauCurve(q=q, tau=tau, r2=r2, log_delta=log_delta, entropy_sum=entropy)


def generalized_dimensions(tau: TauCurve) -> DQCurve:
    """D(q) = tau(q)/(q-1); at q = 1 the information dimension is fitted
    from the stored per-scale entropy sums."""
    q = tau.q
    with np.errstate(divide="ignore", invalid="ignore"):
        d = tau.tau / (q - 1.0)
    at_one = q == 1.0
    if at_one.any():
        slope, _, _ = fit_line(tau.log_delta, tau.entropy_sum)
        d[at_one] = slope
    return DQCurve(q=q, d=d)


def chhabra_spectrum(measure: MeasureGrid, q_grid=None, scales=None) -> SpectrumCurve:
    """Direct (alpha, f) estimation from q-normalized box weights."""
    q = check_q_grid(DEFAULT_Q_GRID if q_grid is None else q_grid)
    scales = check_scales(default_scales(measure.side) if scales is None else scales, measure.side)
    per_scale = _log_masses_per_scale(measure, scales)

    log_delta = np.array([ld for ld, _ in per_scale])
    a_sum = np.empty((q.size, len(scales)))  # sum w ln mu
    f_sum = np.empty((q.size, len(scales)))  # sum w ln w
    for j, (_, log_mu) in enumerate(per_scale):
        scaled = q[:, None] * log_mu[None, :]
        log_norm = logsumexp(scaled, axis=1)
        log_w = scaled - log_norm[:, None]
        w = np.exp(log_w)
        a_sum[:, j] = w @ log_mu
        f_sum[:, j] = np.einsum("ij,ij->i", w, log_w)

    alpha, _ = fit_lines_stacked(log_delta, a_sum)
    f, _ = fit_lines_stacked(log_delta, f_sum)
    return SpectrumCurve(alpha=alpha, f=f, method=METHOD_CHHABRA, q=q)


def legendre_spectrum(tau: TauCurve) -> SpectrumCurve:
    """Numerical Legendre transform of tau(q).

    alpha = d tau/dq by central differences (one-sided at the ends) on a
    uniformly spaced q grid; f = q*alpha - tau.
    """
    q, t = tau.q, tau.tau
    if q.size < 5:
        raise QGridTooCoarse("Legendre transform needs at least 5 q values")
    steps = np.diff(q)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("Legendre transform needs a uniformly spaced q grid")

    alpha = np.empty_like(t)
    alpha[1:-1] = (t[2:] - t[:-2]) / (q[2:] - q[:-2])
    alpha[0] = (t[1] - t[0]) / (q[1] - q[0])
    alpha[-1] = (t[-1] - t[-2]) / (q[-1] - q[-2])
    f = q * alpha - t
    return SpectrumCurve(alpha=alpha, f=f, method=METHOD_LEGENDRE, q=q)


# --------------------------------------------------------------------------
# Tab-separated export
# --------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return "%.9g" % value


def curve_to_tsv(curve, scales=None) -> str:
    """Render a TauCurve, DQCurve, or SpectrumCurve as TSV text.

    One header comment line `# method=... scales=... q=...`, then one row
    per point with 9 significant digits. Spectrum rows without a q tag
    write nan in the q column.
    """
    scales_txt = ",".join(str(s) for s in scales) if scales else "-"
    if isinstance(curve, TauCurve):
        method, q = "tau", curve.q
        rows = zip(curve.q, curve.tau, curve.r2)
    elif isinstance(curve, DQCurve):
        method, q = "dq", curve.q
        rows = zip(curve.q, curve.d)
    elif isinstance(curve, SpectrumCurve):
        method, q = curve.method, curve.q
        q_col = q if q is not None else np.full(len(curve), np.nan)
        rows = zip(q_col, curve.alpha, curve.f)
    else:
        raise TypeError("unsupported curve type %r" % type(curve).__name__)
    q_txt = ",".join(_fmt(v) for v in q) if q is not None else "-"
    lines = ["# method=%s scales=%s q=%s" % (method, scales_txt, q_txt)]
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_curve_tsv(curve, path, scales=None, header_lines=()) -> None:
    text = curve_to_tsv(curve, scales=scales)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write("# %s\n" % line)
        fh.write(text)
