import csv
import io
import json
import math

import numpy as np
import pytest
from scipy import ndimage

from tagc.engine import EnhancementConfig, enhance
from tagc.errors import ManifestError, MissingPathsError, RunError
from tagc.harness import (
    CSV_COLUMNS,
    EvalReport,
    EvalRow,
    cross_dataset_average,
    export_histogram,
    load_manifest,
    render_report,
    run_eval,
    run_paired_eval,
    run_unpaired_eval,
    side_by_side,
)
from tagc.image import ImagePlanar, load_image, save_image
from tagc.metrics import fsim, psnr, ssim
from tagc.metrics.niqe import NiqeModel, save_model


def smooth_scene(seed, size=48):
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.random((3, size, size)), (0, 3, 3))
    base = (base - base.min()) / (base.max() - base.min())
    return ImagePlanar(base)


@pytest.fixture
def paired_dir(tmp_path):
    for i in range(3):
        gt = smooth_scene(i)
        save_image(gt, tmp_path / f"gt{i}.png")
        save_image(ImagePlanar(0.2 * gt.data**1.5), tmp_path / f"low{i}.png")
    return tmp_path


def write_manifest(directory, body, name="m.json"):
    path = directory / name
    path.write_text(json.dumps(body))
    return path


def paired_body(n=2):
    return {"name": "toy", "mode": "paired",
            "entries": [{"low": f"low{i}.png", "gt": f"gt{i}.png"} for i in range(n)]}


class TestLoadManifest:
    def test_paired(self, paired_dir):
        m = load_manifest(write_manifest(paired_dir, paired_body()))
        assert m.mode == "paired" and len(m.entries) == 2
        assert m.entries[0].low == paired_dir / "low0.png"
        assert m.entries[1].image_id == "low1"

    def test_unpaired_needs_model_path(self, paired_dir):
        body = {"name": "u", "mode": "unpaired", "entries": [{"low": "low0.png"}]}
        with pytest.raises(ManifestError) as info:
            load_manifest(write_manifest(paired_dir, body))
        assert info.value.field == "niqe_model_path"

    def test_empty_entries(self, paired_dir):
        body = {"name": "e", "mode": "paired", "entries": []}
        with pytest.raises(ManifestError) as info:
            load_manifest(write_manifest(paired_dir, body))
        assert info.value.field == "entries"

    @pytest.mark.parametrize(
        "body,field",
        [
            ({"mode": "paired", "entries": [{"low": "low0.png", "gt": "gt0.png"}]}, "name"),
            ({"name": "x", "mode": "both", "entries": [{"low": "low0.png", "gt": "gt0.png"}]}, "mode"),
            ({"name": "x", "mode": "paired", "entries": {"low": "a"}}, "entries"),
            ({"name": "x", "mode": "paired", "entries": [{"low": "low0.png"}]}, "entries[].gt"),
            ({"name": "x", "mode": "paired", "entries": [{"gt": "gt0.png"}]}, "low"),
            ({"name": "x", "mode": "unpaired", "niqe_model_path": "m.json",
              "entries": [{"low": "low0.png", "gt": "gt0.png"}]}, "entries[].gt"),
            ({"name": "x", "mode": "paired", "entries": ["low0.png"]}, "entries[0]"),
        ],
    )
    def test_schema_violations_name_the_field(self, paired_dir, body, field):
        with pytest.raises(ManifestError) as info:
            load_manifest(write_manifest(paired_dir, body))
        assert info.value.field == field

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ManifestError):
            load_manifest(path)

    def test_lists_every_missing_file(self, paired_dir):
        body = {"name": "x", "mode": "paired",
                "entries": [{"low": "nope1.png", "gt": "gt0.png"}, {"low": "low1.png", "gt": "nope2.png"}]}
        with pytest.raises(MissingPathsError) as info:
            load_manifest(write_manifest(paired_dir, body))
        assert [p.rsplit("/", 1)[-1] for p in info.value.paths] == ["nope1.png", "nope2.png"]
        assert isinstance(info.value, FileNotFoundError)


class TestPairedEval:
    def test_rows_and_aggregate(self, paired_dir):
        m = load_manifest(write_manifest(paired_dir, paired_body(2)))
        report = run_paired_eval(m, EnhancementConfig())
        assert [r.image for r in report.rows] == ["low0", "low1"]
        low = load_image(paired_dir / "low0.png")
        gt = load_image(paired_dir / "gt0.png")
        out, analysis = enhance(low)
        row = report.rows[0]
        assert row.gamma == analysis.gamma
        assert row.psnr == psnr(gt, out) and row.ssim == ssim(gt, out) and row.fsim == fsim(gt, out)
        assert row.niqe is None
        agg = report.aggregate()
        for col in ("gamma", "psnr", "ssim", "fsim"):
            assert abs(agg[col] - (getattr(report.rows[0], col) + getattr(report.rows[1], col)) / 2) < 1e-9

    def test_identity_baseline_on_matching_pair(self, paired_dir):
        body = {"name": "id", "mode": "paired", "entries": [{"low": "gt0.png", "gt": "gt0.png"}]}
        report = run_paired_eval(load_manifest(write_manifest(paired_dir, body)), fixed_gamma=2.0)
        row = report.rows[0]
        assert row.psnr == math.inf and row.ssim == pytest.approx(1.0, abs=1e-9)
        assert row.fsim == pytest.approx(1.0, abs=1e-6) and row.gamma == 2.0
        assert report.method == "fixed-gamma"

    def test_failures_are_recorded_and_excluded(self, paired_dir):
        save_image(ImagePlanar.uniform(0.5, 20, 20), paired_dir / "small.png")
        body = paired_body(2)
        body["entries"].insert(1, {"low": "low2.png", "gt": "small.png"})
        report = run_paired_eval(load_manifest(write_manifest(paired_dir, body)))
        assert [r.ok for r in report.rows] == [True, False, True]
        assert "ShapeError" in report.rows[1].error
        assert report.aggregate()["psnr"] == pytest.approx((report.rows[0].psnr + report.rows[2].psnr) / 2)
        assert len(report.failures) == 1

    def test_all_failed_is_a_run_error(self, paired_dir):
        save_image(ImagePlanar.uniform(0.5, 20, 20), paired_dir / "small.png")
        body = {"name": "bad", "mode": "paired", "entries": [{"low": "low0.png", "gt": "small.png"}]}
        with pytest.raises(RunError):
            run_paired_eval(load_manifest(write_manifest(paired_dir, body)))

    def test_writes_enhanced_images(self, paired_dir, tmp_path):
        m = load_manifest(write_manifest(paired_dir, paired_body(2)))
        run_paired_eval(m, out_dir=tmp_path / "out")
        assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["low0.png", "low1.png"]

    def test_parallel_run_renders_identically(self, paired_dir):
        m = load_manifest(write_manifest(paired_dir, paired_body(3)))
        serial = render_report(run_paired_eval(m, workers=1))
        parallel = render_report(run_paired_eval(m, workers=3))
        assert serial == parallel

    def test_improves_on_dark_input(self, paired_dir):
        m = load_manifest(write_manifest(paired_dir, paired_body(3)))
        tagc = run_paired_eval(m).aggregate()
        raw = run_paired_eval(m, fixed_gamma=2.0).aggregate()
        assert tagc["psnr"] > raw["psnr"] and tagc["ssim"] > raw["ssim"]

    def test_mode_is_checked(self, paired_dir):
        m = load_manifest(write_manifest(paired_dir, paired_body(1)))
        with pytest.raises(ManifestError):
            run_unpaired_eval(m)


class TestUnpairedEval:
    @pytest.fixture
    def unpaired(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(2):
            save_image(ImagePlanar(0.3 * rng.random((3, 100, 130))), tmp_path / f"u{i}.png")
        feats = rng.normal(size=(200, 36))
        save_model(NiqeModel(feats.mean(0), np.cov(feats, rowvar=False)), tmp_path / "model.json")
        body = {"name": "U", "mode": "unpaired", "niqe_model_path": "model.json",
                "entries": [{"low": "u0.png"}, {"low": "u1.png"}]}
        return load_manifest(write_manifest(tmp_path, body))

    def test_niqe_only(self, unpaired):
        report = run_unpaired_eval(unpaired)
        assert all(r.niqe is not None and r.psnr is None for r in report.rows)
        assert report.aggregate()["niqe"] == pytest.approx(np.mean([r.niqe for r in report.rows]), abs=1e-9)
        header, *rows = render_report(report).splitlines()
        assert rows[0].split(",")[2:5] == ["", "", ""]

    def test_mode_is_checked(self, unpaired):
        with pytest.raises(ManifestError):
            run_paired_eval(unpaired)


def make_report(values, mode="unpaired", name="D"):
    col = "niqe" if mode == "unpaired" else "psnr"
    rows = [EvalRow(image=f"i{k}", gamma=4.0, **{col: v}) for k, v in enumerate(values)]
    return EvalReport(dataset=name, mode=mode, rows=rows, config={"gamma_control": 5.0, "amplitude": 1.0})


class TestCrossDataset:
    def test_average_of_reference_aggregates(self):
        dicm = make_report([3.713], name="DICM")
        lime = make_report([3.877], name="LIME")
        assert cross_dataset_average([dicm, lime], "niqe") == pytest.approx(3.795, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            cross_dataset_average([], "niqe")


class TestRender:
    def test_one_row_csv(self):
        text = render_report(make_report([14.5514], mode="paired"))
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "i0,4.000,14.551,,,"
        assert lines[2] == "mean,4.000,14.551,,,"
        assert len(lines) == 3

    def test_infinity(self):
        assert "inf" in render_report(make_report([math.inf], mode="paired")).splitlines()[1]

    def test_deterministic(self):
        r = make_report([1.0, 2.0])
        assert render_report(r) == render_report(r)
        assert render_report(r, "markdown") == render_report(r, "markdown")

    def test_timestamp_does_not_leak(self):
        a, b = make_report([1.0]), make_report([1.0])
        b.created = "1999-01-01T00:00:00+00:00"
        assert render_report(a, "markdown") == render_report(b, "markdown")

    def test_markdown_layout(self):
        report = make_report([14.5514, 14.0], mode="paired", name="LOL")
        report.rows.append(EvalRow(image="broken", error="ShapeError: x"))
        md = render_report(report, "markdown")
        assert "| Image | γ | PSNR ↑ | SSIM ↑ | FSIM ↑ |" in md
        assert "| i0 | 4.000 | 14.551 |  |  |" in md
        assert "**14.276**" in md
        assert "- broken: ShapeError: x" in md
        assert "NIQE ↓" in render_report(make_report([3.0]), "markdown")

    def test_csv_is_parseable(self):
        rows = list(csv.DictReader(io.StringIO(render_report(make_report([1.25, 2.5])))))
        assert rows[-1]["image"] == "mean" and rows[-1]["niqe"] == "1.875"

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(make_report([1.0]), "html")


class TestHistogram:
    def test_black_image(self):
        rows = list(csv.DictReader(io.StringIO(export_histogram(ImagePlanar.uniform(0.0, 5, 7), 256))))
        assert len(rows) == 256
        assert int(rows[0]["count"]) == 35 and all(int(r["count"]) == 0 for r in rows[1:])

    def test_white_lands_in_top_bin(self):
        rows = list(csv.DictReader(io.StringIO(export_histogram(ImagePlanar.uniform(1.0, 2, 2), 4))))
        assert int(rows[-1]["count"]) == 4

    def test_counts_partition_the_pixels(self, random_image):
        rows = list(csv.DictReader(io.StringIO(export_histogram(random_image(13, 17), 10))))
        assert sum(int(r["count"]) for r in rows) == 13 * 17

    def test_enhancement_shifts_mass_right(self):
        low = ImagePlanar(0.2 * smooth_scene(7, 64).data ** 1.5)
        out, _ = enhance(low)

        def mean_bin(img):
            rows = list(csv.DictReader(io.StringIO(export_histogram(img, 64))))
            counts = np.array([int(r["count"]) for r in rows])
            return (np.arange(64) * counts).sum() / counts.sum()

        assert mean_bin(out) > mean_bin(low)

    def test_needs_two_bins(self):
        with pytest.raises(ValueError):
            export_histogram(ImagePlanar.uniform(0.5, 2, 2), 1)


def test_side_by_side():
    a = ImagePlanar.uniform(0.2, 4, 3, channels=1)
    b = ImagePlanar.uniform(0.8, 4, 5)
    out = side_by_side(a, b)
    assert out.shape == (3, 4, 8)
    with pytest.raises(ValueError):
        side_by_side(a, ImagePlanar.uniform(0.2, 5, 3))


def test_run_eval_records_config(paired_dir):
    m = load_manifest(write_manifest(paired_dir, paired_body(1)))
    report = run_eval(m, EnhancementConfig(gamma_control=6.0))
    assert report.config == {"gamma_control": 6.0, "amplitude": 1.0}
    assert "gamma_control=6" in render_report(report, "markdown")
