"""Ordinary least-squares helpers shared by the slope estimators."""

import numpy as np


def fit_line(x, y):
    """OLS fit of y against x. Returns (slope, intercept, r2).

    R^2 is defined as 1.0 when y has zero variance: a constant is fitted
    exactly, and the estimators rely on that convention for degenerate
    (monofractal) inputs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("fit_line needs two 1-D arrays of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    if sxx == 0.0:
        raise ValueError("fit_line: x values are all identical")
    slope = np.dot(dx, dy) / sxx
    intercept = y.mean() - slope * x.mean()
    ss_tot = np.dot(dy, dy)
    if ss_tot == 0.0:
        return float(slope), float(intercept), 1.0
    resid = y - (slope * x + intercept)
    r2 = 1.0 - np.dot(resid, resid) / ss_tot
    return float(slope), float(intercept), float(r2)


def fit_lines_stacked(x, ys):
    """Vectorized OLS of each row of `ys` against the shared abscissa `x`.

    ys has shape (n_fits, len(x)). Returns (slopes, r2) arrays of length
    n_fits, with the same zero-variance R^2 convention as fit_line.
    """
    x = np.asarray(x, dtype=float)
    ys = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    sxx = np.dot(dx, dx)
    if sxx == 0.0:
        raise ValueError("fit_lines_stacked: x values are all identical")
    ym = ys.mean(axis=1, keepdims=True)
    dy = ys - ym
    slopes = dy @ dx / sxx
    ss_tot = np.einsum("ij,ij->i", dy, dy)
    resid = dy - slopes[:, None] * dx[None, :]
    ss_res = np.einsum("ij,ij->i", resid, resid)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(ss_tot > 0.0, 1.0 - ss_res / ss_tot, 1.0)
    return slopes, r2
