"""Batch evaluation over dataset manifests and table-shaped reports.

A manifest is a JSON file::

    {"name": "LOL-eval15", "mode": "paired",
     "entries": [{"low": "low/1.png", "gt": "high/1.png"}, ...]}

Unpaired manifests omit ``gt`` and name a NIQE model with
``niqe_model_path``. Relative paths resolve against the manifest's folder.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from .engine import EnhancementConfig, enhance, fixed_gamma_baseline
from .errors import ManifestError, MissingPathsError, RunError
from .image import ImagePlanar, load_image, save_image, to_grayscale
from .metrics import fsim, niqe_score, psnr, ssim
from .metrics.niqe import NiqeModel, load_model

__all__ = [
    "CSV_COLUMNS",
    "DatasetManifest",
    "EvalReport",
    "EvalRow",
    "ManifestEntry",
    "cross_dataset_average",
    "export_histogram",
    "load_manifest",
    "render_report",
    "run_eval",
    "run_paired_eval",
    "run_unpaired_eval",
    "side_by_side",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("image", "gamma", "psnr", "ssim", "fsim", "niqe")
PAIRED_METRICS = ("psnr", "ssim", "fsim")
UNPAIRED_METRICS = ("niqe",)
_ARROWS = {"psnr": "PSNR ↑", "ssim": "SSIM ↑", "fsim": "FSIM ↑", "niqe": "NIQE ↓"}


@dataclass(frozen=True)
class ManifestEntry:
    low: Path
    gt: Path | None = None

    @property
    def image_id(self) -> str:
        return self.low.stem


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    mode: str
    entries: tuple[ManifestEntry, ...]
    niqe_model_path: Path | None = None

    def __post_init__(self):
        if self.mode not in ("paired", "unpaired"):
            raise ManifestError(f"mode must be 'paired' or 'unpaired', got {self.mode!r}", field="mode")
        if not self.entries:
            raise ManifestError("entries must not be empty", field="entries")
        if self.mode == "paired":
            bad = [i for i, e in enumerate(self.entries) if e.gt is None]
            if bad:
                raise ManifestError(f"paired manifest: entries {bad} lack 'gt'", field="entries[].gt")
        else:
            bad = [i for i, e in enumerate(self.entries) if e.gt is not None]
            if bad:
                raise ManifestError(f"unpaired manifest: entries {bad} carry 'gt'", field="entries[].gt")
            if self.niqe_model_path is None:
                raise ManifestError("unpaired manifest needs 'niqe_model_path'", field="niqe_model_path")


def _require_str(d: dict, key: str, where: str) -> str:
    value = d.get(key)
    if not isinstance(value, str) or not value:
        raise ManifestError(f"{where}: '{key}' must be a non-empty string", field=key)
    return value


def load_manifest(path: str | os.PathLike, *, check_files: bool = True) -> DatasetManifest:
    """Read and validate a manifest.

    Raises:
        ManifestError: schema violation; ``.field`` names the offending field.
        MissingPathsError: referenced files do not exist (all are listed).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})", field=None) from exc
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: top level must be an object", field=None)

    base = path.parent
    name = _require_str(raw, "name", "manifest")
    mode = _require_str(raw, "mode", "manifest")
    entries_raw = raw.get("entries")
    if not isinstance(entries_raw, list):
        raise ManifestError("'entries' must be a list", field="entries")

    entries = []
    for i, e in enumerate(entries_raw):
        if not isinstance(e, dict):
            raise ManifestError(f"entries[{i}] must be an object", field=f"entries[{i}]")
        low = base / _require_str(e, "low", f"entries[{i}]")
        gt = e.get("gt")
        if gt is not None:
            gt = base / _require_str(e, "gt", f"entries[{i}]")
        entries.append(ManifestEntry(low=low, gt=gt))

    model_path = raw.get("niqe_model_path")
    if model_path is not None:
        model_path = base / _require_str(raw, "niqe_model_path", "manifest")

    manifest = DatasetManifest(name=name, mode=mode, entries=tuple(entries), niqe_model_path=model_path)

    if check_files:
        paths = [p for e in manifest.entries for p in (e.low, e.gt) if p is not None]
        if manifest.niqe_model_path is not None:
            paths.append(manifest.niqe_model_path)
        missing = [p for p in paths if not p.is_file()]
        if missing:
            raise MissingPathsError(missing)
    return manifest


@dataclass
class EvalRow:
    image: str
    gamma: float | None = None
    psnr: float | None = None
    ssim: float | None = None
    fsim: float | None = None
    niqe: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class EvalReport:
    dataset: str
    mode: str
    rows: list[EvalRow]
    config: dict
    method: str = "tagc"
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def metrics(self) -> tuple[str, ...]:
        return PAIRED_METRICS if self.mode == "paired" else UNPAIRED_METRICS

    @property
    def failures(self) -> list[EvalRow]:
        return [r for r in self.rows if not r.ok]

    def aggregate(self) -> dict[str, float]:
        """Arithmetic mean of every column over successful rows (PSNR in dB)."""
        good = [r for r in self.rows if r.ok]
        out = {}
        for col in ("gamma",) + self.metrics:
            vals = [getattr(r, col) for r in good if getattr(r, col) is not None]
            if vals:
                out[col] = math.fsum(vals) / len(vals)
        return out


Enhancer = Callable[[ImagePlanar], tuple[ImagePlanar, float]]


def _make_enhancer(cfg: EnhancementConfig, fixed_gamma: float | None) -> Enhancer:
    if fixed_gamma is not None:
        return lambda img: (fixed_gamma_baseline(img, fixed_gamma), float(fixed_gamma))

    def run(img):
        out, analysis = enhance(img, cfg)
        return out, analysis.gamma

    return run


def _map_ordered(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_eval(
    manifest: DatasetManifest,
    cfg: EnhancementConfig | None = None,
    *,
    out_dir: str | os.PathLike | None = None,
    fixed_gamma: float | None = None,
    niqe_model: NiqeModel | None = None,
    workers: int = 1,
) -> EvalReport:
    """Enhance every entry of ``manifest`` and score it.

    Paired entries get PSNR/SSIM/FSIM against their ground truth; unpaired
    entries get NIQE. Failures are recorded on their row and left out of the
    aggregate.

    Args:
        manifest: Validated dataset manifest.
        cfg: Enhancement parameters (defaults if omitted).
        out_dir: If given, enhanced images are written there as PNG.
        fixed_gamma: Replace TAGC by a constant-gamma correction;
            ``fixed_gamma=2`` scores the raw input.
        niqe_model: Overrides the model named in an unpaired manifest.
        workers: Thread count; rows keep manifest order regardless.

    Raises:
        RunError: every entry failed.
    """
    cfg = cfg or EnhancementConfig()
    enhancer = _make_enhancer(cfg, fixed_gamma)
    paired = manifest.mode == "paired"
    if not paired and niqe_model is None:
        niqe_model = load_model(manifest.niqe_model_path)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    def process(entry: ManifestEntry) -> EvalRow:
        row = EvalRow(image=entry.image_id)
        try:
            low = load_image(entry.low)
            enhanced, row.gamma = enhancer(low)
            if out_dir is not None:
                save_image(enhanced, out_dir / f"{entry.image_id}.png")
            if paired:
                gt = load_image(entry.gt)
                row.psnr = psnr(gt, enhanced)
                row.ssim = ssim(gt, enhanced)
                row.fsim = fsim(gt, enhanced)
            else:
                row.niqe = niqe_score(enhanced, niqe_model)
        except Exception as exc:  # noqa: BLE001 - recorded per row, run continues
            log.warning("%s: %s", entry.low, exc)
            row = EvalRow(image=entry.image_id, error=f"{type(exc).__name__}: {exc}")
        return row

    rows = _map_ordered(process, manifest.entries, workers)
    if not any(r.ok for r in rows):
        raise RunError(f"all {len(rows)} entries of {manifest.name!r} failed; first: {rows[0].error}")
    config = {"gamma_control": cfg.gamma_control, "amplitude": cfg.amplitude}
    method = "tagc"
    if fixed_gamma is not None:
        config = {"fixed_gamma": fixed_gamma}
        method = "fixed-gamma"
    return EvalReport(dataset=manifest.name, mode=manifest.mode, rows=rows, config=config, method=method)


def run_paired_eval(manifest: DatasetManifest, cfg: EnhancementConfig | None = None, **kwargs) -> EvalReport:
    if manifest.mode != "paired":
        raise ManifestError(f"{manifest.name!r} is {manifest.mode}, expected paired", field="mode")
    return run_eval(manifest, cfg, **kwargs)


def run_unpaired_eval(manifest: DatasetManifest, cfg: EnhancementConfig | None = None, **kwargs) -> EvalReport:
    if manifest.mode != "unpaired":
        raise ManifestError(f"{manifest.name!r} is {manifest.mode}, expected unpaired", field="mode")
    return run_eval(manifest, cfg, **kwargs)


def cross_dataset_average(reports, metric: str = "niqe") -> float:
    """Mean of the per-dataset aggregates, as in a table's "Average" column."""
    vals = [r.aggregate()[metric] for r in reports]
    if not vals:
        raise ValueError("no reports to average")
    return math.fsum(vals) / len(vals)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.3f}"


def render_report(report: EvalReport, fmt: str = "csv") -> str:
    """Render ``report`` as CSV or a markdown table.

    Values use 3 decimals. Output depends only on the rows, config and
    dataset name, so identical runs render byte-identically.
    """
    agg = report.aggregate()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.rows:
            writer.writerow([r.image] + [_fmt(getattr(r, c)) for c in CSV_COLUMNS[1:]])
        writer.writerow(["mean"] + [_fmt(agg.get(c)) for c in CSV_COLUMNS[1:]])
        return buf.getvalue()
    if fmt in ("markdown", "md"):
        cols = report.metrics
        cfg = ", ".join(f"{k}={v:g}" for k, v in report.config.items())
        lines = [
            f"### {report.dataset} ({report.mode}, {report.method}: {cfg})",
            "",
            "| Image | γ | " + " | ".join(_ARROWS[c] for c in cols) + " |",
            "|---|---:|" + "---:|" * len(cols),
        ]
        for r in report.rows:
            if r.ok:
                cells = [_fmt(r.gamma)] + [_fmt(getattr(r, c)) for c in cols]
            else:
                cells = ["n/a"] * (len(cols) + 1)
            lines.append(f"| {r.image} | " + " | ".join(cells) + " |")
        lines.append(
            "| **Mean** | " + " | ".join(f"**{_fmt(agg.get(c))}**" for c in ("gamma",) + cols) + " |"
        )
        if report.failures:
            lines.append("")
            lines.append(f"{len(report.failures)} image(s) failed and are excluded from the mean:")
            lines.extend(f"- {r.image}: {r.error}" for r in report.failures)
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r} (csv or markdown)")


def export_histogram(img: ImagePlanar, bins: int = 256) -> str:
    """CSV histogram of grayscale intensities over ``[0, 1]``.

    Columns: ``bin,lower,upper,count``. The top bin is closed on the right.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    counts, edges = np.histogram(to_grayscale(img).plane(), bins=bins, range=(0.0, 1.0))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("bin", "lower", "upper", "count"))
    for i, c in enumerate(counts):
        writer.writerow((i, f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}", int(c)))
    return buf.getvalue()


def side_by_side(*images: ImagePlanar) -> ImagePlanar:
    """Concatenate same-height images left to right (grayscale is promoted to RGB)."""
    if not images:
        raise ValueError("no images")
    heights = {im.height for im in images}
    if len(heights) != 1:
        raise ValueError(f"images differ in height: {sorted(heights)}")
    planes = [im.data if im.channels == 3 else np.repeat(im.data, 3, axis=0) for im in images]
    return ImagePlanar(np.concatenate(planes, axis=2))
