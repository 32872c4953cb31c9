import json

import numpy as np
import pytest

from otseg.cli import main
from otseg.image import load_labels, save_image, save_labels
from otseg.synth import generate_disks, generate_panels


@pytest.fixture(scope="module")
def scene_png(tmp_path_factory):
    base = tmp_path_factory.mktemp("scene")
    scene = generate_disks(seed=5, count=6, size=(96, 96), noise_sigma=0.08,
                           radius_range=(8, 11), margin=5)
    path = base / "disks.png"
    save_image(scene.image, path)
    truth = base / "truth.png"
    save_labels(scene.truth, truth, "png16")
    return path, truth, scene


class TestSegment:
    def test_basic_run(self, scene_png, tmp_path):
        img, _, _ = scene_png
        out = tmp_path / "seg.png"
        trace = tmp_path / "trace.csv"
        code = main([
            "segment", "--input", str(img), "--superpixels", "40",
            "--regions", "7", "--alpha", "22", "--out", str(out),
            "--trace", str(trace),
        ])
        assert code == 0
        lm = load_labels(out)
        assert lm.num_regions() == 7
        lines = trace.read_text().strip().splitlines()
        assert lines[0] == "r,winner,loser,E,kappa,LT"
        assert len(lines) >= 2

    def test_regions_equal_superpixels_is_power_slic(self, scene_png, tmp_path):
        from otseg.image import load_image
        from otseg.pipeline import prepare

        img, _, _ = scene_png
        out = tmp_path / "seg.csv"
        code = main([
            "segment", "--input", str(img), "--superpixels", "40",
            "--regions", "40", "--alpha", "22", "--out", str(out),
        ])
        assert code == 0
        lm = load_labels(out, "csv")
        res = prepare(load_image(img), m=40, alpha=22)
        np.testing.assert_array_equal(lm.labels, res.superpixels.labels)

    def test_missing_input_flag_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["segment", "--superpixels", "10", "--regions", "2", "--out", "x.png"])
        assert exc.value.code == 2

    def test_unreadable_input_io_error(self, tmp_path):
        code = main([
            "segment", "--input", str(tmp_path / "missing.png"),
            "--superpixels", "10", "--regions", "2",
            "--out", str(tmp_path / "o.png"),
        ])
        assert code == 3

    def test_palette_roundtrip_reproduces_output(self, scene_png, tmp_path):
        img, _, _ = scene_png
        out1 = tmp_path / "p1.png"
        pal = tmp_path / "pal.json"
        assert main([
            "segment", "--input", str(img), "--superpixels", "30",
            "--regions", "5", "--alpha", "22", "--out", str(out1),
            "--palette-out", str(pal),
        ]) == 0
        out2 = tmp_path / "p2.png"
        assert main([
            "segment", "--input", str(img), "--superpixels", "30",
            "--regions", "5", "--alpha", "22", "--out", str(out2),
            "--palette", str(pal),
        ]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert json.loads(pal.read_text())["centers"]

    def test_trace_json(self, scene_png, tmp_path):
        img, _, _ = scene_png
        trace = tmp_path / "trace.json"
        assert main([
            "segment", "--input", str(img), "--superpixels", "30",
            "--regions", "5", "--alpha", "22",
            "--out", str(tmp_path / "o.png"), "--trace", str(trace),
        ]) == 0
        payload = json.loads(trace.read_text())
        assert len(payload["records"]) == payload["initial_regions"] - 5

    def test_deterministic_output(self, scene_png, tmp_path):
        img, _, _ = scene_png
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            assert main([
                "segment", "--input", str(img), "--superpixels", "30",
                "--regions", "5", "--alpha", "22", "--out", str(out),
            ]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestAutoregions:
    def test_staged_scene_candidates(self, tmp_path):
        scene = generate_panels(seed=2, count=5, size=(100, 100))
        img = tmp_path / "panels.png"
        save_image(scene.image, img)
        out_dir = tmp_path / "auto"
        code = main([
            "autoregions", "--input", str(img), "--superpixels", "50",
            "--top", "3", "--out-dir", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "trace.csv").exists()
        assert (out_dir / "roc.csv").exists()
        candidates = json.loads((out_dir / "candidates.json").read_text())["candidates"]
        assert len(candidates) <= 3
        assert 5 in candidates
        for r in candidates:
            lm = load_labels(out_dir / f"labels_r{r}.png")
            assert lm.num_regions() == r

    def test_constant_image_no_candidates(self, tmp_path):
        from otseg.image import Image

        img_path = tmp_path / "flat.png"
        save_image(Image(np.full((48, 48, 1), 0.5), "gray"), img_path)
        out_dir = tmp_path / "flat_out"
        code = main([
            "autoregions", "--input", str(img_path), "--superpixels", "16",
            "--out-dir", str(out_dir),
        ])
        assert code == 0
        candidates = json.loads((out_dir / "candidates.json").read_text())["candidates"]
        assert candidates == []

    def test_top_one(self, tmp_path):
        scene = generate_panels(seed=4, count=5, size=(100, 100))
        img = tmp_path / "p.png"
        save_image(scene.image, img)
        out_dir = tmp_path / "top1"
        assert main([
            "autoregions", "--input", str(img), "--superpixels", "40",
            "--top", "1", "--out-dir", str(out_dir),
        ]) == 0
        maps = list(out_dir.glob("labels_r*.png"))
        assert len(maps) == 1


class TestMarkers:
    def write_markers(self, path, markers):
        path.write_text(json.dumps({"markers": markers}))

    def test_marker_run(self, scene_png, tmp_path):
        img, _, scene = scene_png
        ys, xs = np.nonzero(scene.truth.labels == 1)
        mfile = tmp_path / "m.json"
        self.write_markers(mfile, [
            {"x": int(xs[len(xs) // 2]), "y": int(ys[len(ys) // 2]), "class": "f"},
            {"x": 2, "y": 2, "class": "b"},
        ])
        out = tmp_path / "cls.png"
        code = main([
            "markers", "--input", str(img), "--superpixels", "40",
            "--alpha", "22", "--markers", str(mfile), "--out", str(out),
        ])
        assert code == 0
        lm = load_labels(out)
        mapping = json.loads(out.with_suffix(".classes.json").read_text())["classes"]
        assert mapping == {"b": 1, "f": 2}
        # the seeded disk comes out labeled 'f'
        disk = scene.truth.labels == 1
        fg_label = mapping["f"]
        assert (lm.labels[disk] == fg_label).mean() > 0.8

    def test_empty_marker_list(self, scene_png, tmp_path):
        img, _, _ = scene_png
        mfile = tmp_path / "empty.json"
        self.write_markers(mfile, [])
        code = main([
            "markers", "--input", str(img), "--superpixels", "30",
            "--markers", str(mfile), "--out", str(tmp_path / "o.png"),
        ])
        assert code == 2

    def test_out_of_bounds_marker(self, scene_png, tmp_path):
        img, _, _ = scene_png
        mfile = tmp_path / "oob.json"
        self.write_markers(mfile, [{"x": -1, "y": 0, "class": "f"}])
        code = main([
            "markers", "--input", str(img), "--superpixels", "30",
            "--markers", str(mfile), "--out", str(tmp_path / "o.png"),
        ])
        assert code == 5

    def test_conflicting_classes_in_superpixel(self, scene_png, tmp_path):
        img, _, _ = scene_png
        mfile = tmp_path / "conflict.json"
        self.write_markers(mfile, [
            {"x": 0, "y": 0, "class": "f"},
            {"x": 0, "y": 0, "class": "b"},
        ])
        code = main([
            "markers", "--input", str(img), "--superpixels", "30",
            "--markers", str(mfile), "--out", str(tmp_path / "o.png"),
        ])
        assert code == 6


class TestSynthAndEvaluate:
    def test_synth_writes_scene(self, tmp_path):
        out_dir = tmp_path / "sc"
        code = main([
            "synth", "disks", "--seed", "3", "--count", "5",
            "--width", "72", "--height", "72", "--out-dir", str(out_dir),
        ])
        assert code == 0
        meta = json.loads((out_dir / "meta.json").read_text())
        assert meta["objects"] == 5
        assert load_labels(out_dir / "truth.png").max_label == 5

    def test_evaluate_pixel_mode(self, tmp_path):
        scene = generate_disks(seed=8, count=4, size=(72, 72),
                               radius_range=(6, 9), margin=4)
        pred = tmp_path / "pred.png"
        truth = tmp_path / "truth.png"
        save_labels(scene.truth, pred, "png16")
        save_labels(scene.truth, truth, "png16")
        out = tmp_path / "dsc.json"
        code = main([
            "evaluate", "--pred", str(pred), "--truth", str(truth),
            "--mode", "pixel", "--out", str(out),
        ])
        assert code == 0
        assert json.loads(out.read_text())["dsc"] == 1.0

    def test_evaluate_point_mode(self, tmp_path):
        scene = generate_disks(seed=8, count=4, size=(72, 72),
                               radius_range=(6, 9), margin=4)
        pred = tmp_path / "pred.png"
        save_labels(scene.truth, pred, "png16")
        points = []
        for lbl in range(1, 5):
            ys, xs = np.nonzero(scene.truth.labels == lbl)
            points.append([int(xs[0]), int(ys[0])])
        tfile = tmp_path / "points.json"
        tfile.write_text(json.dumps({"points": points}))
        code = main([
            "evaluate", "--pred", str(pred), "--truth", str(tfile),
            "--mode", "point",
        ])
        assert code == 0
