"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line (run with -s or -rA to see them on success).

Pipeline-level thresholds were frozen after a single calibration run:
3-class cascade study -> overall 1.000, worst pair 1.000; identical-weight
control -> 0.380; LD-vs-direct envelope on C8 -> 0.151 max; edge-mask box
dimension -> 1.056 vs 1.056 for the ideal one-pixel boundary.
"""

import time

import numpy as np

from conftest import ANALYTIC, WEIGHTS
from mfia import cascade, classify, features, holder, measures, segment, spectra
from mfia.cli import main


def gate(number, description, checks):
    failed = [text for ok, text in checks if not ok]
    status = "FAIL" if failed else "PASS"
    print("%s criterion %d: %s" % (status, number, description))
    assert not failed, "criterion %d: %s" % (number, "; ".join(failed))


def timed(fn):
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def test_c1_monofractal_identity(uniform256):
    def run():
        tau = spectra.estimate_tau(uniform256)
        dq = spectra.generalized_dimensions(tau)
        ch = spectra.chhabra_spectrum(uniform256)
        amap = holder.alpha_map(uniform256)
        return dq, ch, amap

    (dq, ch, amap), elapsed = timed(run)
    gate(1, "monofractal identity on the uniform measure", [
        (np.max(np.abs(dq.d - 2.0)) <= 1e-3, "D(q) within 1e-3 of 2"),
        (np.max(np.abs(ch.alpha - 2.0)) <= 1e-3, "direct-spectrum alpha within 1e-3 of 2"),
        (np.max(np.abs(ch.f - 2.0)) <= 1e-3, "direct-spectrum f within 1e-3 of 2"),
        (np.nanmax(np.abs(amap.alpha - 2.0)) <= 1e-6, "exponent map constant 2 within 1e-6"),
        (elapsed < 2.0, "runtime under 2 s (got %.2f s)" % elapsed),
    ])


def test_c2_cascade_tau_oracle(c8):
    def run():
        return spectra.estimate_tau(c8)

    tau, elapsed = timed(run)
    an = cascade.analytic_tau_spectrum(WEIGHTS, tau.q)
    err = np.abs(tau.tau - an.tau)
    gate(2, "mass exponents match the cascade closed form", [
        (np.all(err[tau.q >= 0.0] <= 0.05), "tau within 0.05 for q in [0, 5]"),
        (np.all(err[tau.q < 0.0] <= 0.15), "tau within 0.15 for q in [-5, 0)"),
        (abs(tau.tau[tau.q == 1.0][0]) <= 1e-6, "tau(1) within 1e-6 of 0"),
        (elapsed < 5.0, "runtime under 5 s (got %.2f s)" % elapsed),
    ])


def test_c3_cascade_direct_spectrum_oracle(c8):
    ch = spectra.chhabra_spectrum(c8)
    checks = []
    for qq in (0.0, 1.0, 2.0):
        i = int(np.where(ch.q == qq)[0][0])
        key = str(int(qq))
        checks.append((
            abs(ch.alpha[i] - ANALYTIC["alpha" + key]) <= 0.08,
            "alpha(%g) within 0.08" % qq,
        ))
        checks.append((
            abs(ch.f[i] - ANALYTIC["f" + key]) <= 0.08,
            "f(%g) within 0.08" % qq,
        ))
    gate(3, "direct spectrum matches the closed form at q in {0, 1, 2}", checks)


def test_c4_spectrum_shape(c8):
    tau = spectra.estimate_tau(c8)
    dq = spectra.generalized_dimensions(tau)
    leg = spectra.legendre_spectrum(tau)
    i1 = int(np.where(leg.q == 1.0)[0][0])
    gate(4, "spectrum shape: concavity, tangency, peak, monotone D(q)", [
        (np.all(np.diff(leg.f, 2) <= 0.03), "Legendre f concave within 0.03"),
        (abs(leg.f[i1] - leg.alpha[i1]) <= 0.02, "f(alpha(1)) = alpha(1) within 0.02"),
        (abs(np.max(leg.f) - 2.0) <= 0.05, "max f = 2 within 0.05"),
        (np.all(np.diff(dq.d) <= 0.05), "D(q) non-increasing within 0.05"),
    ])


def test_c5_large_deviation_vs_direct(c8_shuffled):
    ld = holder.large_deviation_spectrum(
        c8_shuffled, scales=(1, 2, 4, 8, 16, 32, 64), bin_width=0.15
    )
    ch = spectra.chhabra_spectrum(c8_shuffled)
    order = np.argsort(ch.alpha)
    f_ch = np.interp(ld.alpha, ch.alpha[order], ch.f[order], left=np.nan, right=np.nan)
    overlap = np.isfinite(f_ch)
    worst = float(np.max(np.abs(f_ch[overlap] - ld.f[overlap])))
    gate(5, "large-deviation vs direct spectrum within 0.25 on shared support", [
        (overlap.sum() >= 5, "at least 5 overlapping bins"),
        (worst <= 0.25, "max |f_LD - f_direct| = %.3f <= 0.25" % worst),
    ])


def test_c6_edge_extraction(square_image, uniform256):
    measure = measures.to_measure(square_image)
    amap = holder.alpha_map(measure)
    sp = holder.hausdorff_spectrum(amap)
    mask = segment.select_by_f(amap, sp, f_target=1.0, tol=0.2)
    # smallest box side matches the window-induced edge smear (~3 px), the
    # largest still resolves the one-box-wide frame
    dim = segment.box_dimension(mask, (4, 8, 16, 32))

    uniform_map = holder.alpha_map(uniform256)
    usp = holder.hausdorff_spectrum(uniform_map)
    full = segment.select_by_f(uniform_map, usp, f_target=2.0, tol=0.1)

    gate(6, "inverse-analysis edge extraction", [
        (mask.count > 0, "edge mask is non-empty"),
        (abs(dim - 1.0) <= 0.15, "edge mask box dimension %.3f within 1 +/- 0.15" % dim),
        (bool(full.bits.all()), "f ~ 2 selects the whole uniform image"),
    ])


def _cascade_dataset(weights_by_class, images_per_class=50):
    rows = []
    for class_index, (label, weights) in enumerate(sorted(weights_by_class.items())):
        for i in range(images_per_class):
            spec = cascade.CascadeSpec(
                weights=weights, depth=8, shuffle=True, seed=1000 * (class_index + 1) + i
            )
            grid = cascade.generate_cascade(spec)
            rows.append(
                features.extract_features(grid, source_id="%s/%03d" % (label, i), label=label)
            )
    return classify.dataset_from_features(rows)


def test_c7_end_to_end_classification():
    def run():
        separated = _cascade_dataset({
            "alpha": (0.40, 0.30, 0.20, 0.10),
            "beta": (0.34, 0.28, 0.22, 0.16),
            "gamma": (0.28, 0.26, 0.24, 0.22),
        })
        overall = classify.loocv(separated)
        best_pair = classify.loocv(separated, class_filter=("alpha", "gamma"))
        control_ds = _cascade_dataset({
            "alpha": (0.40, 0.30, 0.20, 0.10),
            "beta": (0.40, 0.30, 0.20, 0.10),
            "gamma": (0.40, 0.30, 0.20, 0.10),
        })
        control = classify.loocv(control_ds)
        return overall, best_pair, control

    (overall, best_pair, control), elapsed = timed(run)
    gate(7, "end-to-end synthetic three-class protocol", [
        (best_pair.accuracy >= 0.90, "well-separated pair accuracy %.3f >= 0.90" % best_pair.accuracy),
        (overall.accuracy >= 0.60, "overall accuracy %.3f >= 0.60" % overall.accuracy),
        (abs(control.accuracy - 1.0 / 3.0) <= 0.15,
         "identical-weight control %.3f within chance +/- 0.15" % control.accuracy),
        (elapsed < 180.0, "runtime under 3 min (got %.0f s)" % elapsed),
    ])


def test_c8_statistics_unit_oracles():
    groups = classify.LabeledDataset(
        x=np.array([[v] for v in (1, 2, 3, 4, 3, 4, 5, 6)], dtype=float),
        labels=["a"] * 4 + ["b"] * 4,
        feature_names=("v",),
    )
    f_stat, p = classify.anova_oneway(groups, "v")

    # a dataset genuinely producing F = 6.0 at df (1, 6): shift by sqrt(5)
    shift = 5.0 ** 0.5
    f6 = classify.LabeledDataset(
        x=np.array([[v] for v in (0.0, 1.0, 2.0, 3.0, shift, 1 + shift, 2 + shift, 3 + shift)]),
        labels=["a"] * 4 + ["b"] * 4,
        feature_names=("v",),
    )
    f_stat6, p6 = classify.anova_oneway(f6, "v")

    toy = classify.LabeledDataset(
        x=np.array([[0, 0], [0, 1], [1, 0], [5, 5], [5, 6], [6, 5]], dtype=float),
        labels=["a"] * 3 + ["b"] * 3,
        feature_names=("u", "v"),
    )
    cm = classify.loocv(toy)

    perm = np.random.default_rng(5).permutation(toy.n_rows)
    permuted = classify.LabeledDataset(
        x=toy.x[perm], labels=[toy.labels[i] for i in perm], feature_names=toy.feature_names
    )
    dup = classify.LabeledDataset(
        x=np.vstack([toy.x, toy.x]), labels=list(toy.labels) * 2, feature_names=toy.feature_names
    )
    model, dup_model = classify.fit_lda(toy), classify.fit_lda(dup)

    gate(8, "statistics unit oracles", [
        (abs(f_stat - 4.8) <= 1e-9, "hand-derived F = 24/5 (stated groups)"),
        (abs(p - 23.0 / 324.0) <= 1e-6, "hand-derived p = 23/324"),
        (abs(f_stat6 - 6.0) <= 1e-9, "F = 6.0 on the sqrt(5)-shifted groups"),
        (abs(p6 - 0.0498252627805768) <= 1e-3, "p ~ 0.0498 at F = 6.0, df (1, 6)"),
        (cm.accuracy == 1.0, "toy LDA LOOCV = 100%"),
        (np.array_equal(classify.loocv(permuted).counts, cm.counts), "row-permutation invariance"),
        (np.allclose(model.means, dup_model.means, atol=1e-12)
         and np.allclose(model.pooled_cov, dup_model.pooled_cov, atol=1e-12),
         "duplication invariance of the fitted model"),
    ])


def test_c9_cli_determinism(tmp_path):
    root = tmp_path / "data"
    rng = np.random.default_rng(77)
    for label in ("adenoma", "carcinoma", "normal"):
        d = root / label
        d.mkdir(parents=True)
        for i in range(2):
            pixels = rng.integers(1, 256, size=(64, 64)).astype(np.uint8)
            measures.save_pgm(measures.GrayImage(pixels), d / ("img_%d.pgm" % i))

    outputs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        out = tmp_path / name
        rc = main(["analyze", "--input", str(root), "--output", str(out), "--threads", threads])
        assert rc == 0
        outputs.append((out / "features.csv").read_bytes())

    gate(9, "byte-identical feature CSV across reruns and thread counts", [
        (outputs[0] == outputs[1], "rerun is byte-identical"),
        (outputs[0] == outputs[2], "--threads 8 matches --threads 1"),
    ])
