"""Runtime-scaling harness.

Times the pipeline phases (palette, superpixels, initial distances, merge
loop) on generated disk scenes and checks the merge loop against the
m^2 log m model by fitting c = t / (m^2 log m) per size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .histograms import compute_palette, region_histograms
from .merge import build_rag, run_unsupervised
from .pipeline import prepare
from .superpixel import SlicConfig, power_slic
from .synth import generate_disks, generate_lattice


@dataclass(frozen=True)
class PhaseTiming:
    label: str
    pixels: int
    superpixels: int
    phase: str
    seconds: float


def phase_bench(img, m, label="scene"):
    """Per-phase timings for one pipeline run."""
    rows = []
    n = img.pixel_count
    t0 = time.perf_counter()
    palette = compute_palette(img)
    t1 = time.perf_counter()
    lm = power_slic(img, SlicConfig(m=m))
    t2 = time.perf_counter()
    stats = region_histograms(img, lm, palette)
    graph = build_rag(lm, stats, palette)
    for i in graph.live_ids():
        for j in sorted(graph.adj[i]):
            if j > i:
                graph.edge_cost(i, j)
    t3 = time.perf_counter()
    run_unsupervised(graph, 1)
    t4 = time.perf_counter()
    live = graph.num_live
    rows.append(PhaseTiming(label, n, live, "palette", t1 - t0))
    rows.append(PhaseTiming(label, n, live, "superpixels", t2 - t1))
    rows.append(PhaseTiming(label, n, live, "initial_distances", t3 - t2))
    rows.append(PhaseTiming(label, n, live, "merge_loop", t4 - t3))
    return rows


def merge_loop_time(img, m, n_target=1) -> float:
    """Walltime of the merge loop alone (graph prepared beforehand)."""
    res = prepare(img, m=m)
    t0 = time.perf_counter()
    run_unsupervised(res.graph, n_target)
    return time.perf_counter() - t0


def parallel_distance_bench(img, m, workers=4):
    """Initial edge-distance phase, sequential vs thread pool.

    Edge costs are pure functions, so the parallel path returns identical
    values; the compiled solver releases the GIL, which is where the speedup
    comes from.  Returns (sequential_s, parallel_s, n_edges).
    """
    from concurrent.futures import ThreadPoolExecutor

    res = prepare(img, m=m)
    g = res.graph
    pairs = [
        (i, j) for i in g.live_ids() for j in sorted(g.adj[i]) if j > i
    ]
    t0 = time.perf_counter()
    seq = [g.edge_cost(i, j) for i, j in pairs]
    t_seq = time.perf_counter() - t0
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        par = list(pool.map(lambda p: g.edge_cost(*p), pairs))
    t_par = time.perf_counter() - t0
    assert seq == par
    return t_seq, t_par, len(pairs)


def scaling_bench(
    merge_sizes=(250, 500, 1000),
    merge_canvas=(384, 384),
    pixel_sizes=((256, 256), (256, 512)),
    pixel_m=200,
    seed: int = 7,
    repeats: int = 1,
):
    """Run the scaling suite; returns (rows, summary dict)."""
    rows = []

    # per-phase breakdown on the reference disk scene
    ref = generate_disks(seed, count=25, size=(256, 256), noise_sigma=0.1)
    rows.extend(phase_bench(ref.image, m=300, label="disks-256"))

    # superpixel phase vs N at fixed m (disk count scales with area so the
    # scene statistics stay comparable)
    sp_times = []
    for size in pixel_sizes:
        count = max(4, round(size[0] * size[1] / (256 * 256) * 25))
        scene = generate_disks(seed, count=count, size=size, noise_sigma=0.1)
        best = math.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            power_slic(scene.image, SlicConfig(m=pixel_m))
            best = min(best, time.perf_counter() - t0)
        sp_times.append(best)
        rows.append(
            PhaseTiming(
                f"pixels-{size[0]}x{size[1]}",
                size[0] * size[1],
                pixel_m,
                "superpixels",
                best,
            )
        )

    # merge loop vs m at fixed N, on the lattice scene whose topology puts
    # the loop in the m^2 log m regime the bound models (one region adjacent
    # to a constant fraction of the others)
    merge_rows = []
    n_pixels = merge_canvas[0] * merge_canvas[1]
    for m in merge_sizes:
        pitch = 2.0 * math.sqrt(n_pixels / m)
        scene = generate_lattice(seed=seed, size=merge_canvas, cell_pitch=pitch)
        # small fixed palette keeps every solve at full support, so the
        # per-solve cost T_OT(k) is the constant the bound treats it as
        res = prepare(scene.image, m=m, alpha=22, k=8)
        best = math.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            run_unsupervised(res.graph, 1)
            best = min(best, time.perf_counter() - t0)
        live = res.graph.num_live
        c = best / (live * live * math.log(live))
        merge_rows.append({"m": m, "live": live, "seconds": best, "c": c})
        rows.append(
            PhaseTiming(
                f"merge-m{m}", scene.image.pixel_count, live, "merge_loop", best
            )
        )

    cs = [row["c"] for row in merge_rows]
    summary = {
        "pixel_ratio": sp_times[-1] / sp_times[0] if len(sp_times) > 1 else 1.0,
        "merge": merge_rows,
        "c_spread": max(cs) / min(cs) if cs else 1.0,
    }
    return rows, summary


def rows_to_csv(rows) -> str:
    lines = ["label,pixels,superpixels,phase,seconds"]
    for r in rows:
        lines.append(f"{r.label},{r.pixels},{r.superpixels},{r.phase},{r.seconds!r}")
    return "\n".join(lines) + "\n"


def summary_to_markdown(summary) -> str:
    lines = [
        "# Scaling benchmark",
        "",
        f"- superpixel phase time ratio when N doubles: {summary['pixel_ratio']:.2f}",
        f"- merge-loop fit c = t/(m^2 log m): spread {summary['c_spread']:.2f}x",
        "",
        "| m (live) | merge loop (s) | c |",
        "|---|---|---|",
    ]
    for row in summary["merge"]:
        lines.append(f"| {row['live']} | {row['seconds']:.3f} | {row['c']:.3e} |")
    return "\n".join(lines) + "\n"
