"""Command-line interface.

Subcommands: encode, register, metrics, diff, benchmark.  Every option can
also come from a plain-text ``key=value`` config file (``--config``);
command-line flags override config values.

Exit codes: 0 success, 2 bad usage or config, 3 image/file I/O error,
4 registration failed at every grid cell, 5 metric undefined,
6 invalid parameter or encoding range.
"""

import argparse
import csv
import os
import sys


from . import bench, imageio
from .errors import (
    EncodingError,
    ImageIOError,
    MetricError,
    ParameterError,
    WalshRegError,
)
from .geometry import difference_image, warp
from .metrics import intensity_cc, mutual_information
from .registration import SearchSpec, pyramid_search, register
from .structure_codes import encode_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_REGISTRATION = 4
EXIT_METRIC = 5
EXIT_PARAMETER = 6


def _parse_range(text):
    lo, _, hi = text.partition(":")
    return (float(lo), float(hi))


def read_config(path):
    """Parse a key=value config file; blank lines and # comments ignored."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONFIG_KEYS = {
    "backend": str,
    "base": int,
    "ordering": str,
    "t_range": _parse_range,
    "s_range": _parse_range,
    "theta_range": _parse_range,
    "steps": str,
    "pyramid": int,
    "bins": int,
    "workers": int,
    "seed": int,
    "spacing": float,
    "out": str,
    "interp": str,
}


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--backend", choices=["walsh3", "fwht4"])
    parser.add_argument("--base", type=int)
    parser.add_argument("--ordering", choices=["IA", "IB", "IIA", "IIB", "rowmajor"])
    parser.add_argument("--t-range", dest="t_range", type=_parse_range, metavar="LO:HI")
    parser.add_argument("--s-range", dest="s_range", type=_parse_range, metavar="LO:HI")
    parser.add_argument("--theta-range", dest="theta_range", type=_parse_range, metavar="LO:HI")
    parser.add_argument("--steps", help="T,S,THETA step sizes (or one value for all)")
    parser.add_argument("--pyramid", type=int, help="pyramid levels (1 = plain exhaustive)")
    parser.add_argument("--bins", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--spacing", type=float, help="pixel spacing in mm/pixel")
    parser.add_argument("--interp", choices=["nearest", "bilinear"])
    parser.add_argument("--out", help="output directory", default=None)


_DEFAULTS = {
    "backend": "fwht4",
    "base": 10,
    "ordering": None,
    "t_range": (-25.0, 25.0),
    "s_range": (-25.0, 25.0),
    "theta_range": (-25.0, 25.0),
    "steps": "1,1,1",
    "pyramid": 1,
    "bins": 256,
    "workers": 1,
    "seed": 0,
    "spacing": 1.0,
    "interp": "bilinear",
    "out": ".",
}


def _settings(args):
    """Merge defaults, config file and explicit flags, in that order."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        raw = read_config(args.config)
        for key, val in raw.items():
            if key not in _CONFIG_KEYS:
                raise ParameterError(f"unknown config key {key!r}")
            merged[key] = _CONFIG_KEYS[key](val)
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _search_spec(cfg):
    parts = str(cfg["steps"]).split(",")
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise ParameterError(f"--steps wants 1 or 3 values, got {cfg['steps']!r}")
    t_step, s_step = int(float(parts[0])), int(float(parts[1]))
    theta_step = float(parts[2])
    return SearchSpec(
        t_range=(int(cfg["t_range"][0]), int(cfg["t_range"][1])),
        s_range=(int(cfg["s_range"][0]), int(cfg["s_range"][1])),
        theta_range=tuple(cfg["theta_range"]),
        t_step=t_step,
        s_step=s_step,
        theta_step=theta_step,
        pyramid_levels=cfg["pyramid"],
        backend=cfg["backend"],
        base=cfg["base"],
        ordering=cfg["ordering"],
        bins=cfg["bins"],
        workers=cfg["workers"],
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def cmd_encode(args):
    cfg = _settings(args)
    img = imageio.load_image(args.image, spacing=cfg["spacing"])
    from .structure_codes import digit_ordering

    ordering = None
    if cfg["ordering"] is not None:
        ndigits = 8 if cfg["backend"] == "walsh3" else 15
        ordering = digit_ordering(cfg["ordering"], ndigits)
    sci = encode_image(img, backend=cfg["backend"], base=cfg["base"], ordering=ordering)
    os.makedirs(cfg["out"], exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.image))[0]
    vis_path = os.path.join(cfg["out"], f"{stem}_codes.pgm")
    dump_path = os.path.join(cfg["out"], f"{stem}_codes.txt")
    imageio.save_code_visualization(sci, vis_path)
    imageio.save_code_dump(sci, dump_path)
    print(f"wrote {vis_path} and {dump_path}")
    return EXIT_OK


REPORT_HEADER = [
    "t",
    "s",
    "theta",
    "score",
    "mi_after",
    "cc_after",
    "elapsed_seconds",
    "status",
    "error_kind",
]


def cmd_register(args):
    cfg = _settings(args)
    reference = imageio.load_image(args.reference, spacing=cfg["spacing"])
    moving = imageio.load_image(args.moving, spacing=cfg["spacing"])
    spec = _search_spec(cfg)
    search = pyramid_search if spec.pyramid_levels > 1 else register
    result = search(reference, moving, spec)
    os.makedirs(cfg["out"], exist_ok=True)
    report = os.path.join(cfg["out"], "report.csv")
    if result.status == "ok":
        registered, mask = warp(moving, result.params, interp=cfg["interp"])
        imageio.save_image(registered, os.path.join(cfg["out"], "registered.pgm"))
        imageio.save_image(
            difference_image(reference, registered, mask),
            os.path.join(cfg["out"], "difference.pgm"),
        )
        row = [
            _fmt(result.params.t),
            _fmt(result.params.s),
            _fmt(result.params.theta),
            _fmt(result.score),
            _fmt(result.mi_after),
            _fmt(result.cc_after),
            _fmt(result.elapsed_seconds),
            result.status,
            "",
        ]
        _write_csv(report, REPORT_HEADER, [row])
        print(
            f"registered: t={result.params.t:g} s={result.params.s:g} "
            f"theta={result.params.theta:g} cc={result.cc_after:.4f} "
            f"mi={result.mi_after:.4f} ({result.elapsed_seconds:.2f}s)"
        )
        return EXIT_OK
    row = ["", "", "", "", "", "", _fmt(result.elapsed_seconds), "error", result.error_kind]
    _write_csv(report, REPORT_HEADER, [row])
    print(f"registration error: {result.error_kind}", file=sys.stderr)
    return EXIT_REGISTRATION


def cmd_metrics(args):
    cfg = _settings(args)
    a = imageio.load_image(args.image_a, spacing=cfg["spacing"])
    b = imageio.load_image(args.image_b, spacing=cfg["spacing"])
    mi = mutual_information(a.pixels, b.pixels, bins=cfg["bins"])
    cc = intensity_cc(a.pixels, b.pixels)
    print(f"mi_bits={mi:.6f} cc={cc:.6f}")
    if cfg["out"] != ".":
        os.makedirs(cfg["out"], exist_ok=True)
        _write_csv(
            os.path.join(cfg["out"], "metrics.csv"),
            ["mi_bits", "cc"],
            [[f"{mi:.6f}", f"{cc:.6f}"]],
        )
    return EXIT_OK


def cmd_diff(args):
    cfg = _settings(args)
    a = imageio.load_image(args.image_a, spacing=cfg["spacing"])
    b = imageio.load_image(args.image_b, spacing=cfg["spacing"])
    os.makedirs(cfg["out"], exist_ok=True)
    out_path = os.path.join(cfg["out"], "difference.pgm")
    imageio.save_image(difference_image(a, b), out_path)
    print(f"wrote {out_path}")
    return EXIT_OK


BENCH_HEADER = [
    "s_no",
    "x_mm",
    "y_mm",
    "angle_deg",
    "backend",
    "t",
    "s",
    "theta",
    "mi_after",
    "cc_after",
    "elapsed_seconds",
    "status",
]


def _load_perturbations(path):
    triples = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip().replace(",", " ")
            if not line:
                continue
            x, y, a = (float(v) for v in line.split())
            triples.append((x, y, a))
    if not triples:
        raise ParameterError(f"{path}: no perturbation triples found")
    return triples


def cmd_benchmark(args):
    cfg = _settings(args)
    image = imageio.load_image(args.image, spacing=cfg["spacing"])
    triples = bench.DEFAULT_PERTURBATIONS
    if args.perturbations:
        triples = _load_perturbations(args.perturbations)
    spec = _search_spec(cfg)
    rows, summary = bench.run_benchmark(
        image, triples, spec=spec, use_pyramid=spec.pyramid_levels > 1
    )
    os.makedirs(cfg["out"], exist_ok=True)
    out_csv = os.path.join(cfg["out"], "benchmark.csv")
    _write_csv(
        out_csv,
        BENCH_HEADER,
        [
            [
                r.index,
                r.x_mm,
                r.y_mm,
                r.angle_deg,
                r.backend,
                _fmt(r.t),
                _fmt(r.s),
                _fmt(r.theta),
                _fmt(r.mi_after),
                _fmt(r.cc_after),
                _fmt(r.elapsed_seconds),
                r.status,
            ]
            for r in rows
        ],
    )
    enc = bench.time_encoding_paths(image, base=cfg["base"])
    summary["encoding_fast_seconds"] = enc["fast_seconds"]
    summary["encoding_naive_seconds"] = enc["naive_seconds"]
    summary["encoding_speedup_fast_over_naive"] = enc["speedup"]
    summary_csv = os.path.join(cfg["out"], "benchmark_summary.csv")
    _write_csv(summary_csv, sorted(summary), [[_fmt(summary[k]) for k in sorted(summary)]])
    for key in sorted(summary):
        print(f"{key}={summary[key]:.4f}")
    print(f"wrote {out_csv} and {summary_csv}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="walshreg",
        description="Rigid gray-image registration with Walsh / fast "
        "Walsh-Hadamard structure codes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write structure-code image and dump")
    p.add_argument("image")
    _add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("register", help="register a moving image to a reference")
    p.add_argument("reference")
    p.add_argument("moving")
    _add_common(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("metrics", help="MI and CC between two aligned images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("diff", help="absolute difference image")
    p.add_argument("image_a")
    p.add_argument("image_b")
    _add_common(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("benchmark", help="run the perturbation benchmark protocol")
    p.add_argument("image")
    p.add_argument("--perturbations", help="file of 'x_mm y_mm angle' triples")
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except ImageIOError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MetricError as exc:
        print(f"metric error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except (ParameterError, EncodingError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except WalshRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())
