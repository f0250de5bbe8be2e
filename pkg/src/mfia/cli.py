"""Command-line batch pipeline.

Subcommands: synth, analyze, spectrum, segment, classify, anova. All
flags are long-form. `analyze` walks a labeled directory tree (one
subdirectory per class), extracts one feature row per image, exports
the per-image curves, and records per-image failures in a sidecar
errors.log; it exits 0 only when every image succeeded (1 on partial
failure, 2 on bad invocation).

Every text output starts with header comments carrying the tool
version, the analysis configuration, and an input digest. Outputs are
byte-identical across reruns and across --threads settings: work is
parallelized per image, and results are sorted before writing (the
thread count is therefore not part of the echoed configuration).
"""

import argparse
import concurrent.futures
import hashlib
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, classify, features, formats, holder, measures, segment, spectra
from .cascade import DEFAULT_SIDE_CAP, CascadeSpec, generate_cascade
from .errors import EmptyDataset, MfiaError

THREADS_ENV = "MFIA_THREADS"


@dataclass(frozen=True)
class RunConfig:
    """Validated analysis parameters, echoed into output headers.

    `scales`, `q_grid`, and `windows` stay None for per-image defaults.
    """

    kind: str = measures.KIND_SUM
    scales: tuple | None = None
    q_grid: tuple | None = None
    windows: tuple | None = None
    bin_width: float = holder.DEFAULT_BIN_WIDTH
    min_side: int = 16
    ridge_scale: float = classify.RIDGE_SCALE
    feature_subset: tuple = features.PRIMARY_FEATURES
    threads: int = 1
    seed: int = 0

    def echo(self) -> str:
        def show(value):
            if value is None:
                return "auto"
            if isinstance(value, tuple):
                return ",".join("%.9g" % v if isinstance(v, float) else str(v) for v in value)
            return "%.9g" % value if isinstance(value, float) else str(value)

        pairs = [
            ("kind", self.kind),
            ("scales", self.scales),
            ("q", self.q_grid),
            ("windows", self.windows),
            ("bin_width", self.bin_width),
            ("min_side", self.min_side),
            ("ridge", self.ridge_scale),
            ("features", ",".join(self.feature_subset)),
            ("seed", self.seed),
        ]
        return " ".join("%s=%s" % (k, show(v)) for k, v in pairs)


def _header_lines(config: RunConfig, digest: str):
    return ["mfia %s" % __version__, "config: %s" % config.echo(), "input sha256: %s" % digest]


# --------------------------------------------------------------------------
# flag parsing helpers
# --------------------------------------------------------------------------

def _parse_floats(text, count=None):
    parts = [p for p in text.split(",") if p != ""]
    values = tuple(float(p) for p in parts)
    if count is not None and len(values) != count:
        raise ValueError("expected %d comma-separated values, got %d" % (count, len(values)))
    return values


def _parse_ints(text):
    return tuple(int(p) for p in text.split(",") if p != "")


def _parse_q_spec(text):
    """`lo:hi:step` or a comma-separated list."""
    if ":" in text:
        lo_txt, hi_txt, step_txt = text.split(":")
        lo, hi, step = float(lo_txt), float(hi_txt), float(step_txt)
        if step <= 0 or hi <= lo:
            raise ValueError("q spec needs hi > lo and step > 0")
        count = int(round((hi - lo) / step)) + 1
        if abs(lo + (count - 1) * step - hi) > 1e-9:
            raise ValueError("q range is not a whole number of steps")
        return tuple(np.linspace(lo, hi, count))
    return _parse_floats(text)


def _parse_pair(text):
    parts = text.split(":")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ValueError("expected a pair like classA:classB")
    return tuple(parts)


def _threads_default():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_digest(path) -> str:
    with open(path, "rb") as fh:
        return _sha256(fh.read())


# --------------------------------------------------------------------------
# input loading shared by spectrum / segment
# --------------------------------------------------------------------------

def _load_any_measure(path, config: RunConfig):
    """Load an image or a native measure file; images are cropped to a
    dyadic square first. Returns (measure, image-or-None)."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if formats.sniff_format(head) == "mfm":
        return measures.load_measure(path, kind=config.kind), None
    img = measures.load_image(path)
    img = measures.crop_dyadic(img, min_side=config.min_side)
    return measures.to_measure(img, kind=config.kind), img


def _scales_for(measure, config: RunConfig):
    return config.scales if config.scales is not None else spectra.default_scales(measure.side)


def _windows_for(config: RunConfig):
    return config.windows if config.windows is not None else holder.DEFAULT_WINDOWS


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------

def _cmd_synth(args):
    weights = _parse_floats(args.weights, count=4)
    spec = CascadeSpec(weights=weights, depth=args.depth, shuffle=args.shuffle, seed=args.seed)
    measure = generate_cascade(spec, side_cap=args.side_cap)
    measures.save_measure(measure, args.out)
    if args.pgm:
        comments = [
            "mfia %s" % __version__,
            "config: weights=%s depth=%d shuffle=%s seed=%d"
            % (args.weights, args.depth, args.shuffle, args.seed),
            "preview only; mass rescaled to 8 bits",
        ]
        with open(args.pgm, "wb") as fh:
            fh.write(formats.write_pgm(formats.rescale_to_u8(measure.mass), comments=comments))
    print("wrote %s (side %d)" % (args.out, measure.side))
    return 0


# --------------------------------------------------------------------------
# analyze
# --------------------------------------------------------------------------

def _scan_dataset(root: Path):
    """Labeled images: one subdirectory per class, files sorted."""
    if not root.is_dir():
        raise EmptyDataset("input %s is not a directory" % root)
    entries = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for file in sorted(p for p in class_dir.iterdir() if p.is_file()):
            entries.append((class_dir.name, file))
    if not entries:
        raise EmptyDataset("no class subdirectories with files under %s" % root)
    return entries


def _analyze_one(label, path, config: RunConfig):
    """Worker: per-image features plus rendered curve TSVs."""
    img = measures.load_image(path)
    img = measures.crop_dyadic(img, min_side=config.min_side)
    measure = measures.to_measure(img, kind=config.kind)
    scales = _scales_for(measure, config)
    q_grid = config.q_grid

    tau = spectra.estimate_tau(measure, q_grid=q_grid, scales=scales)
    dq = spectra.generalized_dimensions(tau)
    direct = spectra.chhabra_spectrum(measure, q_grid=q_grid, scales=scales)
    amap = holder.alpha_map(measure, window_sides=_windows_for(config))
    geometric = holder.hausdorff_spectrum(amap, bin_width=config.bin_width, box_sides=scales)

    source_id = "%s/%s" % (label, path.name)
    parts = {}
    parts.update(features.moment_features(dq, direct))
    parts.update(features.geometric_features(geometric))
    parts.update(features.map_summary(amap))
    fv = features.FeatureVector(source_id=source_id, label=label, **parts)

    header = _header_lines(config, _file_digest(path))
    curve_text = {}
    for name, curve in (("tau", tau), ("dq", dq), ("chhabra", direct), ("hausdorff", geometric)):
        body = spectra.curve_to_tsv(curve, scales=scales)
        curve_text[name] = "".join("# %s\n" % h for h in header) + body
    return fv, curve_text


def _cmd_analyze(args, config: RunConfig):
    in_root = Path(args.input)
    out_root = Path(args.output)
    entries = _scan_dataset(in_root)
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "curves").mkdir(exist_ok=True)

    results = {}
    errors = {}

    def run(entry):
        label, path = entry
        try:
            return entry, _analyze_one(label, path, config), None
        except (MfiaError, ValueError, OSError) as exc:
            return entry, None, "%s: %s" % (type(exc).__name__, exc)

    if config.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run, entries))
    else:
        outcomes = [run(e) for e in entries]

    for (label, path), ok, err in outcomes:
        key = (label, path.name)
        if err is None:
            results[key] = ok
        else:
            errors[key] = err

    dataset_digest = _sha256(
        "\n".join(
            "%s/%s %s" % (label, path.name, _file_digest(path)) for label, path in entries
        ).encode()
    )
    ordered = sorted(results)
    rows = [results[k][0] for k in ordered]
    csv_text = features.features_to_csv(rows, header_lines=_header_lines(config, dataset_digest))
    (out_root / "features.csv").write_text(csv_text, encoding="utf-8", newline="\n")

    for label, name in ordered:
        stem = name.rsplit(".", 1)[0]
        for curve_name, text in results[(label, name)][1].items():
            out = out_root / "curves" / ("%s__%s.%s.tsv" % (label, stem, curve_name))
            out.write_text(text, encoding="utf-8", newline="\n")

    if errors:
        log_lines = ["%s/%s\t%s" % (label, name, errors[(label, name)]) for label, name in sorted(errors)]
        (out_root / "errors.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8", newline="\n")
        print(
            "analyzed %d/%d images; %d failed (see errors.log)"
            % (len(results), len(entries), len(errors)),
            file=sys.stderr,
        )
        return 1
    print("analyzed %d images -> %s" % (len(results), out_root / "features.csv"))
    return 0


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

_SPECTRUM_METHODS = ("tau", "dq", "chhabra", "legendre", "large-deviation", "hausdorff")


def _compute_curve(method, measure, config: RunConfig):
    scales = _scales_for(measure, config)
    if method == "tau":
        return spectra.estimate_tau(measure, q_grid=config.q_grid, scales=scales), scales
    if method == "dq":
        tau = spectra.estimate_tau(measure, q_grid=config.q_grid, scales=scales)
        return spectra.generalized_dimensions(tau), scales
    if method == "chhabra":
        return spectra.chhabra_spectrum(measure, q_grid=config.q_grid, scales=scales), scales
    if method == "legendre":
        tau = spectra.estimate_tau(measure, q_grid=config.q_grid, scales=scales)
        return spectra.legendre_spectrum(tau), scales
    if method == "large-deviation":
        return holder.large_deviation_spectrum(measure, scales=scales, bin_width=config.bin_width), scales
    if method == "hausdorff":
        amap = holder.alpha_map(measure, window_sides=_windows_for(config))
        return holder.hausdorff_spectrum(amap, bin_width=config.bin_width, box_sides=scales), scales
    raise ValueError("unknown method %r" % method)


def _cmd_spectrum(args, config: RunConfig):
    measure, _ = _load_any_measure(args.input, config)
    curve, scales = _compute_curve(args.method, measure, config)
    header = _header_lines(config, _file_digest(args.input))
    spectra.write_curve_tsv(curve, args.out, scales=scales, header_lines=header)
    print("wrote %s" % args.out)
    return 0


# --------------------------------------------------------------------------
# segment
# --------------------------------------------------------------------------

def _cmd_segment(args, config: RunConfig):
    by_alpha = args.alpha_lo is not None or args.alpha_hi is not None
    by_f = args.f_target is not None
    if by_alpha == by_f:
        print("error: use either --alpha-lo/--alpha-hi or --f-target/--tol", file=sys.stderr)
        return 2
    if by_alpha and (args.alpha_lo is None or args.alpha_hi is None):
        print("error: --alpha-lo and --alpha-hi go together", file=sys.stderr)
        return 2

    measure, img = _load_any_measure(args.input, config)
    amap = holder.alpha_map(measure, window_sides=_windows_for(config))
    if by_alpha:
        mask = segment.select_by_alpha(amap, args.alpha_lo, args.alpha_hi)
    else:
        method = args.spectrum_method
        if method == "hausdorff":
            spectrum = holder.hausdorff_spectrum(
                amap, bin_width=config.bin_width, box_sides=_scales_for(measure, config)
            )
        else:
            spectrum, _ = _compute_curve(method, measure, config)
        mask = segment.select_by_f(amap, spectrum, args.f_target, args.tol)

    comments = _header_lines(config, _file_digest(args.input)) + ["selection: %s" % mask.provenance]
    with open(args.out, "wb") as fh:
        fh.write(formats.write_pgm(np.where(mask.bits, 255, 0).astype(np.uint8), comments=comments))
    if args.overlay:
        if img is None:
            print("error: --overlay needs an image input, not a measure file", file=sys.stderr)
            return 2
        segment.save_mask_overlay_pgm(img, mask, args.overlay)

    fraction = mask.count / mask.bits.size
    line = "selected %d/%d pixels (%.1f%%)" % (mask.count, mask.bits.size, 100.0 * fraction)
    if 0 < mask.count:
        line += "; box dimension %.3f" % segment.box_dimension(mask)
    print(line)
    return 0


# --------------------------------------------------------------------------
# classify / anova
# --------------------------------------------------------------------------

def _group_prefix(source_id: str) -> str:
    """Preparation id: the filename stem up to the last underscore field."""
    stem = source_id.rsplit(".", 1)[0]
    head, sep, _ = stem.rpartition("_")
    return head if sep else stem


def _load_dataset(args, config: RunConfig):
    rows = features.read_features_csv(args.csv)
    unlabeled = [fv.source_id for fv in rows if not fv.label]
    if unlabeled:
        raise ValueError("unlabeled rows: %s" % ", ".join(unlabeled[:5]))
    ds = classify.dataset_from_features(rows, feature_names=config.feature_subset)
    return ds, rows


def _anova_rows(ds):
    return [(name,) + classify.anova_oneway(ds, name) for name in ds.feature_names]


def _cmd_classify(args, config: RunConfig):
    ds, rows = _load_dataset(args, config)
    grouped = args.group_by_prefix
    groups = [_group_prefix(fv.source_id) for fv in rows]

    def run_loocv(subset_ds, subset_groups):
        if grouped:
            return classify.loocv_groups(subset_ds, subset_groups, ridge_scale=config.ridge_scale)
        return classify.loocv(subset_ds, ridge_scale=config.ridge_scale)

    if args.pair:
        pair = _parse_pair(args.pair)
        keep = [i for i, fv in enumerate(rows) if fv.label in pair]
        sub = ds.filter_classes(pair)
        cm = run_loocv(sub, [groups[i] for i in keep])
        report = classify.render_report(sub, cm, [], _anova_rows(sub))
    else:
        overall = run_loocv(ds, groups)
        pairwise = []
        names = ds.class_names
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                pair = (names[i], names[j])
                keep = [k for k, fv in enumerate(rows) if fv.label in pair]
                sub = ds.filter_classes(pair)
                pairwise.append((pair, run_loocv(sub, [groups[k] for k in keep])))
        report = classify.render_report(ds, overall, pairwise, _anova_rows(ds))

    header = "".join("# %s\n" % h for h in _header_lines(config, _file_digest(args.csv)))
    text = header + report
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        print("wrote %s" % args.out)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_anova(args, config: RunConfig):
    ds, _ = _load_dataset(args, config)
    lines = _header_lines(config, _file_digest(args.csv))
    out = ["# %s" % h for h in lines]
    out.append("%-20s %12s %12s" % ("feature", "F", "p"))
    for name, f_stat, p in _anova_rows(ds):
        f_txt = "inf" if f_stat == float("inf") else "%.6g" % f_stat
        out.append("%-20s %12s %12.6g" % (name, f_txt, p))
    text = "\n".join(out) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        print("wrote %s" % args.out)
    else:
        sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------------
# argument wiring
# --------------------------------------------------------------------------

def _add_analysis_flags(sub):
    sub.add_argument("--kind", choices=measures.MEASURE_KINDS, default=measures.KIND_SUM)
    sub.add_argument("--scales", help="comma-separated dyadic box sides (default: per image)")
    sub.add_argument("--q", help="q grid as lo:hi:step or a comma list (default -5:5:0.25)")
    sub.add_argument("--windows", help="comma-separated odd window sides (default 1,3,5,7,9)")
    sub.add_argument("--bin-width", type=float, default=holder.DEFAULT_BIN_WIDTH)
    sub.add_argument("--min-side", type=int, default=16)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mfia",
        description="Multifractal image analysis: spectra, exponent maps, "
        "segmentation, and texture classification.",
    )
    parser.add_argument("--version", action="version", version="mfia %s" % __version__)
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="generate a cascade measure")
    synth.add_argument("--weights", required=True, help="four comma-separated weights summing to 1")
    synth.add_argument("--depth", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--shuffle", action="store_true")
    synth.add_argument("--side-cap", type=int, default=DEFAULT_SIDE_CAP)
    synth.add_argument("--out", required=True, help="output measure file (MFM1)")
    synth.add_argument("--pgm", help="optional 8-bit preview")

    analyze = commands.add_parser("analyze", help="extract features for a labeled directory tree")
    analyze.add_argument("--input", required=True)
    analyze.add_argument("--output", required=True)
    _add_analysis_flags(analyze)
    analyze.add_argument("--threads", type=int, default=None, help="default: $%s or 1" % THREADS_ENV)

    spectrum = commands.add_parser("spectrum", help="export one curve for one input")
    spectrum.add_argument("--input", required=True, help="image or MFM1 measure")
    spectrum.add_argument("--method", choices=_SPECTRUM_METHODS, required=True)
    spectrum.add_argument("--out", required=True)
    _add_analysis_flags(spectrum)

    seg = commands.add_parser("segment", help="select pixels by exponent or spectrum value")
    seg.add_argument("--input", required=True, help="image or MFM1 measure")
    seg.add_argument("--out", required=True, help="mask PGM (0/255)")
    seg.add_argument("--overlay", help="optional overlay PGM")
    seg.add_argument("--alpha-lo", type=float)
    seg.add_argument("--alpha-hi", type=float)
    seg.add_argument("--f-target", type=float)
    seg.add_argument("--tol", type=float, default=0.2)
    seg.add_argument(
        "--spectrum-method",
        choices=("hausdorff", "chhabra", "legendre", "large-deviation"),
        default="hausdorff",
    )
    _add_analysis_flags(seg)

    cls = commands.add_parser("classify", help="LOOCV report from a feature CSV")
    cls.add_argument("--csv", required=True)
    cls.add_argument("--features", help="comma-separated feature subset")
    cls.add_argument("--ridge", type=float, default=classify.RIDGE_SCALE)
    cls.add_argument("--pair", help="restrict to one class pair, classA:classB")
    cls.add_argument("--group-by-prefix", action="store_true")
    cls.add_argument("--out")

    anova = commands.add_parser("anova", help="per-feature one-way ANOVA table")
    anova.add_argument("--csv", required=True)
    anova.add_argument("--features", help="comma-separated feature subset")
    anova.add_argument("--out")

    return parser


def _config_from(args) -> RunConfig:
    """Parse and validate everything up front; no work starts on a bad config."""
    subset = features.PRIMARY_FEATURES
    if getattr(args, "features", None):
        subset = tuple(p for p in args.features.split(",") if p)
        unknown = [n for n in subset if n not in features.FEATURE_NAMES]
        if unknown:
            raise ValueError("unknown features: %s" % ", ".join(unknown))
    threads = getattr(args, "threads", None)
    if threads is None:
        threads = _threads_default()
    if threads < 1:
        raise ValueError("--threads must be >= 1")

    scales = _parse_ints(args.scales) if getattr(args, "scales", None) else None
    if scales is not None:
        if len(scales) < 3 or any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("--scales needs >= 3 strictly increasing values")
        if any(s < 1 or s & (s - 1) for s in scales):
            raise ValueError("--scales values must be powers of two")
    q_grid = _parse_q_spec(args.q) if getattr(args, "q", None) else None
    if q_grid is not None:
        spectra.check_q_grid(np.array(q_grid))
    windows = _parse_ints(args.windows) if getattr(args, "windows", None) else None
    if windows is not None:
        if len(windows) < 2 or any(s < 1 or s % 2 == 0 for s in windows):
            raise ValueError("--windows needs >= 2 odd positive values")
        if any(b <= a for a, b in zip(windows, windows[1:])):
            raise ValueError("--windows values must be strictly increasing")
    bin_width = getattr(args, "bin_width", holder.DEFAULT_BIN_WIDTH)
    if bin_width <= 0:
        raise ValueError("--bin-width must be positive")
    min_side = getattr(args, "min_side", 16)
    if min_side < 2:
        raise ValueError("--min-side must be >= 2")

    return RunConfig(
        kind=getattr(args, "kind", measures.KIND_SUM),
        scales=scales,
        q_grid=q_grid,
        windows=windows,
        bin_width=bin_width,
        min_side=min_side,
        ridge_scale=getattr(args, "ridge", classify.RIDGE_SCALE),
        feature_subset=subset,
        threads=threads,
    )


# flags whose values may start with '-' (negative q ranges, exponents, f
# targets); fused with '=' so argparse does not read them as options
_DASH_VALUE_FLAGS = {"--q", "--alpha-lo", "--alpha-hi", "--f-target", "--tol"}


def _fuse_dash_values(argv):
    out = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in _DASH_VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append("%s=%s" % (token, argv[i + 1]))
            skip = True
        else:
            out.append(token)
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_fuse_dash_values(list(argv)))
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        config = _config_from(args)
        if args.command == "analyze":
            return _cmd_analyze(args, config)
        if args.command == "spectrum":
            return _cmd_spectrum(args, config)
        if args.command == "segment":
            return _cmd_segment(args, config)
        if args.command == "classify":
            return _cmd_classify(args, config)
        if args.command == "anova":
            return _cmd_anova(args, config)
    except EmptyDataset as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (MfiaError, ValueError, OSError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 2
    raise AssertionError("unreachable command %r" % args.command)


if __name__ == "__main__":
    sys.exit(main())
