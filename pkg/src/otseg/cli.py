"""Command-line entry points.

Exit codes: 0 success, 2 invalid flags, 3 I/O failure, 4 infeasible region
target, 5 marker out of bounds, 6 conflicting marker classes in one
superpixel.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .errors import (
    InfeasibleTargetError,
    MarkerConflictError,
    MarkerError,
    OtsegError,
    UnsupportedFormatError,
)
from .image import load_image, save_image, save_labels
from .merge import (
    MarkerSet,
    class_label_map,
    compute_roc,
    partition_at,
    run_marker,
    run_unsupervised,
)
from .metrics import dice, largest_region_foreground
from .pipeline import prepare
from .synth import generate_disks, generate_panels

logger = logging.getLogger("otseg")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4
EXIT_MARKER_BOUNDS = 5
EXIT_MARKER_CONFLICT = 6


def _label_format(path: Path) -> str:
    return {".png": "png16", ".csv": "csv", ".json": "rle-json"}.get(
        path.suffix.lower(), "png16"
    )


def _parse_channels(text):
    if text is None:
        return None
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad channel list {text!r}") from exc


def _prepare_from_flags(args):
    from .histograms import Palette

    img = load_image(args.input)
    palette = None
    if getattr(args, "palette", None):
        palette = Palette.from_json(Path(args.palette).read_text())
    res = prepare(
        img,
        m=args.superpixels,
        k=args.k,
        alpha=args.alpha,
        colorspace=args.colorspace,
        channels=args.channels,
        palette=palette,
    )
    if getattr(args, "palette_out", None):
        Path(args.palette_out).write_text(res.palette.to_json())
    return res


def cmd_segment(args) -> int:
    res = _prepare_from_flags(args)
    live = res.graph.num_live
    n = args.regions
    if n < 1:
        raise argparse.ArgumentTypeError("--regions must be >= 1")
    if n > live:
        logger.warning("target %d exceeds %d superpixels; clamping", n, live)
        n = live
    lm, trace = run_unsupervised(res.graph, n)
    out = Path(args.out)
    save_labels(lm, out, _label_format(out))
    if args.trace:
        trace_path = Path(args.trace)
        if trace_path.suffix.lower() == ".json":
            trace_path.write_text(trace.to_json())
        else:
            trace_path.write_text(trace.to_csv())
    print(f"wrote {out} with {lm.num_regions()} regions")
    return EXIT_OK


def cmd_autoregions(args) -> int:
    res = _prepare_from_flags(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    comps_floor = 1
    lm, trace = run_unsupervised(res.graph, comps_floor)
    (out_dir / "trace.csv").write_text(trace.to_csv())
    if len(trace.records) < 2:
        logger.warning("too few merges for ROC analysis")
        (out_dir / "candidates.json").write_text(json.dumps({"candidates": []}))
        return EXIT_OK
    roc = compute_roc(trace)
    lines = ["r,ROC"]
    lines += [f"{r},{v!r}" for r, v in roc.points]
    (out_dir / "roc.csv").write_text("\n".join(lines) + "\n")
    candidates = roc.top(args.top)
    (out_dir / "candidates.json").write_text(
        json.dumps({"candidates": [int(r) for r in candidates]})
    )
    if not candidates:
        logger.warning("ROC curve has no local maxima; no candidates emitted")
    for r in candidates:
        lm_r = partition_at(res.superpixels, trace, r)
        save_labels(lm_r, out_dir / f"labels_r{r}.png", "png16")
    print(f"wrote trace, ROC table, and {len(candidates)} candidate maps to {out_dir}")
    return EXIT_OK


def cmd_markers(args) -> int:
    try:
        payload = json.loads(Path(args.markers).read_text())
        raw = payload["markers"]
        points = [(int(p["x"]), int(p["y"]), str(p["class"])) for p in raw]
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"invalid marker file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not points:
        print("marker file lists no markers", file=sys.stderr)
        return EXIT_USAGE
    res = _prepare_from_flags(args)
    markers = MarkerSet(tuple(points))
    lm, region_classes = run_marker(res.graph, markers)
    class_map, mapping = class_label_map(lm, region_classes)
    out = Path(args.out)
    save_labels(class_map, out, _label_format(out))
    out.with_suffix(".classes.json").write_text(json.dumps({"classes": mapping}))
    print(f"wrote {out} with classes {mapping}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kind == "disks":
        scene = generate_disks(
            seed=args.seed,
            count=args.count,
            size=(args.height, args.width),
            noise_sigma=args.sigma,
            allow_occlusion=args.allow_occlusion,
        )
    else:
        scene = generate_panels(
            seed=args.seed,
            count=args.count,
            size=(args.height, args.width),
            noise_sigma=args.sigma,
        )
    save_image(scene.image, out_dir / "image.png")
    save_labels(scene.truth, out_dir / "truth.png", "png16")
    (out_dir / "meta.json").write_text(
        json.dumps(
            {
                "kind": args.kind,
                "seed": args.seed,
                "objects": scene.n_objects,
                "noise_sigma": scene.noise_sigma,
            }
        )
    )
    print(f"wrote scene to {out_dir}")
    return EXIT_OK


def cmd_bench(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.quick:
        rows, summary = bench_mod.scaling_bench(
            merge_sizes=(100, 200),
            merge_canvas=(192, 192),
            pixel_sizes=((128, 128), (128, 256)),
            pixel_m=100,
        )
    else:
        rows, summary = bench_mod.scaling_bench(repeats=args.repeats)
    report = bench_mod.summary_to_markdown(summary)
    if args.parallel:
        scene = generate_disks(seed=7, count=25, size=(256, 256), noise_sigma=0.1)
        seq, par, n_edges = bench_mod.parallel_distance_bench(
            scene.image, m=300, workers=args.workers
        )
        report += (
            f"\n- initial distances over {n_edges} edges: sequential "
            f"{seq * 1e3:.0f} ms, {args.workers} threads {par * 1e3:.0f} ms "
            f"({seq / par:.2f}x)\n"
        )
    (out_dir / "bench.csv").write_text(bench_mod.rows_to_csv(rows))
    (out_dir / "bench.md").write_text(report)
    print(report)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    """Dice evaluation protocol for user-supplied data.

    Predictions are label maps; the largest region is treated as background
    and all remaining regions as foreground.  Truth is either a binary mask
    image (pixel mode) or a JSON file {"points": [[x, y], ...]} (point
    mode).
    """
    from .image import load_labels

    pred = load_labels(args.pred)
    fg = largest_region_foreground(pred)
    if args.mode == "pixel":
        truth_lm = load_labels(args.truth)
        truth_mask = truth_lm.labels > 0
        value = dice(fg, truth_mask, mode="pixel")
    else:
        payload = json.loads(Path(args.truth).read_text())
        points = np.array(payload["points"], dtype=np.int64)
        value = dice(fg, points, mode="point")
    print(f"DSC ({args.mode}): {value:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps({"mode": args.mode, "dsc": value}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otseg",
        description="Superpixel segmentation with optimal-transport merging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_flags(p):
        p.add_argument("--input", required=True, help="PNG/PPM/PGM image")
        p.add_argument("--superpixels", type=int, required=True, metavar="M")
        p.add_argument("--k", type=int, default=15, help="palette size")
        p.add_argument("--alpha", type=float, default=10.0, help="compactness")
        p.add_argument("--channels", type=_parse_channels, default=None)
        p.add_argument(
            "--colorspace", choices=("auto", "rgb", "lab", "gray"), default="auto"
        )
        p.add_argument(
            "--palette", default=None, help="reuse a palette JSON instead of fitting"
        )
        p.add_argument(
            "--palette-out", default=None, help="write the palette used as JSON"
        )

    p = sub.add_parser("segment", help="unsupervised segmentation to n regions")
    add_pipeline_flags(p)
    p.add_argument("--regions", type=int, required=True, metavar="N")
    p.add_argument("--out", required=True, help=".png/.csv/.json label map")
    p.add_argument("--trace", default=None, help="write merge trace CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("autoregions", help="full merge with ROC candidates")
    add_pipeline_flags(p)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_autoregions)

    p = sub.add_parser("markers", help="marker-guided segmentation")
    add_pipeline_flags(p)
    p.add_argument("--markers", required=True, help="JSON marker file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_markers)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("kind", choices=("disks", "panels"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--allow-occlusion", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="runtime scaling benchmark")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument(
        "--parallel", action="store_true",
        help="also measure the threaded initial-distance phase",
    )
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser(
        "evaluate", help="Dice protocol for externally supplied annotations"
    )
    p.add_argument("--pred", required=True, help="predicted label map")
    p.add_argument("--truth", required=True, help="mask image or points JSON")
    p.add_argument("--mode", choices=("pixel", "point"), required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentTypeError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except MarkerConflictError as exc:
        print(f"marker conflict: {exc}", file=sys.stderr)
        return EXIT_MARKER_CONFLICT
    except MarkerError as exc:
        print(f"marker error: {exc}", file=sys.stderr)
        return EXIT_MARKER_BOUNDS
    except InfeasibleTargetError as exc:
        print(f"infeasible target: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnsupportedFormatError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except argparse.ArgumentTypeError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except OtsegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
