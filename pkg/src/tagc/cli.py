"""Command-line entry point: ``tagc <subcommand> ...``.

Subcommands::

    enhance <in> <out> [--gamma-c 5] [--amplitude 1] [--dump-analysis]
    metrics --ref <a> --test <b> [--psnr] [--ssim] [--fsim]
    niqe --model <m> <img>
    niqe-fit --pristine-dir <d> --out <m>
    eval --manifest <m> [--manifest <m2> ...] [--out-dir <d>] [--format csv|markdown]
    histogram <img> --bins N [--enhanced]

Failures print one JSON line ``{"error": <kind>, "message": <text>}`` to
stderr. Usage errors and missing files exit with 2, everything else with 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .engine import EnhancementConfig, enhance
from .errors import TagcError
from .harness import (
    PAIRED_METRICS,
    cross_dataset_average,
    export_histogram,
    load_manifest,
    render_report,
    run_eval,
    side_by_side,
)
from .image import load_image, save_image
from .metrics import fsim, niqe_score, psnr, ssim
from .metrics.niqe import fit_niqe_model, load_model, save_model

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

_METRICS = {"psnr": psnr, "ssim": ssim, "fsim": fsim}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse prints multi-line usage and exits; route it through our JSON error path.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.3f}"


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return p


def _cmd_enhance(args) -> int:
    cfg = EnhancementConfig(gamma_control=args.gamma_c, amplitude=args.amplitude)
    img = load_image(_existing(args.input))
    out, analysis = enhance(img, cfg)
    save_image(side_by_side(img, out) if args.side_by_side else out, args.output)
    if args.dump_analysis:
        record = {"L": analysis.luminance, "mu": analysis.avg_color, "gamma": analysis.gamma}
        record.update({k: v for k, v in analysis.as_dict().items() if k.startswith("mean_")})
        print(json.dumps(record))
    return EXIT_OK


def _cmd_metrics(args) -> int:
    ref = load_image(_existing(args.ref))
    test = load_image(_existing(args.test))
    chosen = [m for m in PAIRED_METRICS if getattr(args, m)] or list(PAIRED_METRICS)
    values = {m: _METRICS[m](ref, test) for m in chosen}
    if len(values) == 1:
        print(_fmt(next(iter(values.values()))))
    else:
        for name, value in values.items():
            print(f"{name} {_fmt(value)}")
    return EXIT_OK


def _cmd_niqe(args) -> int:
    model = load_model(_existing(args.model))
    img = load_image(_existing(args.image))
    print(_fmt(niqe_score(img, model, gate_sharpness=args.gate)))
    return EXIT_OK


def _cmd_niqe_fit(args) -> int:
    if not Path(args.pristine_dir).is_dir():
        raise FileNotFoundError(f"no such directory: {args.pristine_dir}")
    model = fit_niqe_model(
        args.pristine_dir, patch_size=args.patch_size, sharpness_fraction=args.sharpness_fraction
    )
    save_model(model, args.out)
    print(json.dumps({"model": str(args.out), "features": len(model.feature_mean)}))
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = EnhancementConfig(gamma_control=args.gamma_c, amplitude=args.amplitude)
    manifests = [load_manifest(_existing(m)) for m in args.manifest]
    reports = []
    for manifest in manifests:
        out_dir = None
        if args.out_dir is not None:
            out_dir = Path(args.out_dir) / manifest.name if len(manifests) > 1 else Path(args.out_dir)
        reports.append(
            run_eval(manifest, cfg, out_dir=out_dir, fixed_gamma=args.fixed_gamma, workers=args.workers)
        )
    blocks = [render_report(r, args.format) for r in reports]
    if len(reports) > 1:
        blocks.append(_summary(reports, args.format))
    text = "\n".join(blocks)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for r in reports:
        for row in r.failures:
            logging.getLogger("tagc").warning("%s/%s failed: %s", r.dataset, row.image, row.error)
    return EXIT_OK


def _summary(reports, fmt: str) -> str:
    """Per-dataset means plus the cross-dataset average of each shared metric."""
    metrics = [m for m in ("psnr", "ssim", "fsim", "niqe") if any(m in r.metrics for r in reports)]
    shared = [m for m in metrics if all(m in r.metrics for r in reports)]
    rows = [[r.dataset] + [_fmt(r.aggregate()[m]) if m in r.aggregate() else "" for m in metrics] for r in reports]
    rows.append(["average"] + [_fmt(cross_dataset_average(reports, m)) if m in shared else "" for m in metrics])
    if fmt == "csv":
        return "\n".join(",".join(r) for r in [["dataset"] + metrics] + rows) + "\n"
    arrows = {"psnr": "PSNR ↑", "ssim": "SSIM ↑", "fsim": "FSIM ↑", "niqe": "NIQE ↓"}
    lines = ["### Summary", "", "| Dataset | " + " | ".join(arrows[m] for m in metrics) + " |",
             "|---|" + "---:|" * len(metrics)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _cmd_histogram(args) -> int:
    if args.bins < 2:
        raise UsageError(f"--bins must be >= 2, got {args.bins}")
    img = load_image(_existing(args.image))
    if args.enhanced:
        img, _ = enhance(img)
    sys.stdout.write(export_histogram(img, args.bins))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tagc", description="Adaptive gamma low-light enhancement and quality metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_cfg(p):
        p.add_argument("--gamma-c", type=float, default=5.0, help="gamma control parameter (default 5)")
        p.add_argument("--amplitude", type=float, default=1.0, help="output amplitude (default 1)")

    p = sub.add_parser("enhance", help="enhance one image")
    p.add_argument("input")
    p.add_argument("output", help="PNG path")
    add_cfg(p)
    p.add_argument("--dump-analysis", action="store_true", help="print L, mu and gamma as JSON")
    p.add_argument("--side-by-side", action="store_true", help="write input and output next to each other")
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("metrics", help="full-reference metrics between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    for m in PAIRED_METRICS:
        p.add_argument(f"--{m}", action="store_true")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("niqe", help="no-reference NIQE score (lower is better)")
    p.add_argument("--model", required=True, help="model JSON from niqe-fit")
    p.add_argument("image")
    p.add_argument("--gate", action="store_true", help="score only the sharpest patches")
    p.set_defaults(func=_cmd_niqe)

    p = sub.add_parser("niqe-fit", help="fit a NIQE model from a folder of pristine photos")
    p.add_argument("--pristine-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--patch-size", type=int, default=96)
    p.add_argument("--sharpness-fraction", type=float, default=0.75)
    p.set_defaults(func=_cmd_niqe_fit)

    p = sub.add_parser("eval", help="batch evaluation over one or more manifests")
    p.add_argument("--manifest", required=True, action="append", help="repeat to average across datasets")
    p.add_argument("--out-dir", help="write enhanced images here")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--output", help="write the report to a file instead of stdout")
    p.add_argument("--fixed-gamma", type=float, help="use a constant gamma instead (2 scores the raw input)")
    p.add_argument("--workers", type=int, default=1)
    add_cfg(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("histogram", help="grayscale intensity histogram as CSV")
    p.add_argument("image")
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--enhanced", action="store_true", help="histogram of the enhanced image")
    p.set_defaults(func=_cmd_histogram)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": " ".join(str(message).split())}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", exc, EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail("UsageError", exc, EXIT_USAGE)
    except FileNotFoundError as exc:
        return _fail(type(exc).__name__, exc, EXIT_USAGE)
    except (TagcError, ValueError, OSError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_FAILURE)


if __name__ == "__main__":
    sys.exit(main())
