import argparse
import csv
import json
import signal
import sys
from functools import partial
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import Config
from .decoder_math import (
    OpCounter,
    adjacency_loss,
    hungarian,
    hungarian_loss,
    link_forward,
    match_cost,
)
from .errors import SchemaError
from .executors import get_executor
from .formats import (
    is_windowed_json,
    read_binary_pgm,
    read_float_map,
    read_graph_json,
    read_windowed_graphs,
    write_binary_pgm,
    write_float_map,
    write_graph_json,
    write_windowed_graphs,
)
from .graph_construct import build_graph, window_graphs
from .logger import logger, set_batch_mode, set_verbose
from .metrics import evaluate
from .pipelines import ABLATION_WINDOWS, ablate, centerline_pipeline, segmentation_pipeline
from .schema import (
    DecoderFixture,
    MatchConfig,
    MorphConfig,
    NoiseSpec,
    Raster,
    RunConfig,
    SynthSpec,
    TubeGraph,
    WindowedGraphs,
)
from .segpipe import dilate_with_seg_limit, soft_skeleton, threshold
from .skeleton import skeletonize
from .synth import make_sample
from .utils import read_local_bytes, write_local_bytes

# Flags that RunConfig validates; each may also come from --config
RUN_FLAGS = ("window", "stride", "p_thresh", "thresh", "tol", "patch", "seed", "alpha", "workers")


def setup() -> None:
    signal.signal(signal.SIGINT, lambda num, frame: sys.exit(1))
    sys.stdout.reconfigure(encoding="utf-8", line_buffering=True)
    sys.stderr.reconfigure(encoding="utf-8", line_buffering=True)


def read_mask(path: str) -> Raster:
    return read_binary_pgm(read_local_bytes(path))


def read_prob(path: str) -> Raster:
    return read_float_map(read_local_bytes(path))


def read_text(path: str) -> str:
    return read_local_bytes(path).decode("utf-8")


def read_graphs(path: str, window: int | None = None) -> TubeGraph | WindowedGraphs:
    text = read_text(path)
    if is_windowed_json(text):
        return read_windowed_graphs(text, window)
    return read_graph_json(text)


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """Profile defaults < --config file < explicit flags."""
    values = {}
    if args.config:
        try:
            loaded = json.loads(read_text(args.config))
        except json.JSONDecodeError as e:
            raise SchemaError(f"config file is not valid JSON: {e}") from None
        if not isinstance(loaded, dict):
            raise SchemaError("config file must hold a JSON object")
        values.update(loaded)
    for name in RUN_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if "workers" not in values:
        values["workers"] = Config().workers
    profile = args.profile or values.pop("profile", "vessel")
    values.pop("profile", None)
    return RunConfig.for_profile(profile, **values)


def cmd_skeletonize(args: argparse.Namespace, run: RunConfig) -> int:
    mask = read_mask(args.input)
    logger.info(f"🟢 skeletonizing {mask.height}x{mask.width} mask")
    centerline = skeletonize(mask)
    write_local_bytes(args.output, write_binary_pgm(centerline))
    logger.info(f"✅ {centerline.count()} centerline pixels written to {args.output}")
    return 0


def cmd_graph(args: argparse.Namespace, run: RunConfig) -> int:
    centerline = read_mask(args.input)
    if args.skeletonize_first:
        centerline = skeletonize(centerline)
    if args.windowed:
        logger.info(f"🟢 building window graphs ({run.window}/{run.stride})")
        windowed = window_graphs(centerline, run.window, run.stride)
        write_local_bytes(args.output, write_windowed_graphs(windowed).encode("utf-8"))
        logger.info(f"✅ {len(windowed.windows)} windows written to {args.output}")
    else:
        logger.info("🟢 building graph")
        graph, _ = build_graph(centerline)
        write_local_bytes(args.output, write_graph_json(graph).encode("utf-8"))
        logger.info(f"✅ {len(graph.nodes)} nodes and {len(graph.edges)} edges written")
    return 0


def cmd_morph(args: argparse.Namespace, run: RunConfig) -> int:
    p_m = read_prob(args.prob)
    graphs = read_graphs(args.graph, run.window)
    cfg = MorphConfig(p_thresh=run.p_thresh)
    result = centerline_pipeline(
        p_m, graphs, cfg, window=run.window, stride=run.stride, workers=run.workers
    )
    write_local_bytes(args.output, write_binary_pgm(result))
    return 0


def cmd_softskel(args: argparse.Namespace, run: RunConfig) -> int:
    s_m = read_prob(args.input)
    logger.info(f"🟢 soft skeleton at threshold {run.thresh}")
    p_m = soft_skeleton(s_m, run.thresh)
    write_local_bytes(args.output, write_float_map(p_m))
    logger.info(f"✅ written to {args.output}")
    return 0


def cmd_postprocess(args: argparse.Namespace, run: RunConfig) -> int:
    mask = read_mask(args.mask)
    if args.seg.endswith(".pgm"):
        s_mask = read_mask(args.seg)
    else:
        s_mask = threshold(read_prob(args.seg), run.thresh)
    result = dilate_with_seg_limit(mask, s_mask)
    write_local_bytes(args.output, write_binary_pgm(result))
    logger.info(f"✅ kept {result.count()} of {s_mask.count()} segmentation pixels")
    return 0


def append_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    """Append rows to a CSV file, writing the header first when the file is new or empty."""
    target = Path(path)
    new_file = not target.exists() or target.stat().st_size == 0
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("a", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        if new_file:
            writer.writerow(header)
        writer.writerows(rows)


def cmd_eval(args: argparse.Namespace, run: RunConfig) -> int:
    pred = read_mask(args.pred)
    gt = read_mask(args.gt)
    prob = read_prob(args.prob) if args.prob else None
    report = evaluate(pred, gt, task=args.task, prob=prob, tol=run.tol, patch=run.patch)
    text = report.model_dump_json(indent=2)
    if args.out:
        write_local_bytes(args.out, (text + "\n").encode("utf-8"))
    else:
        print(text)
    if args.csv:
        header = ["pred", "gt", *report.csv_header()]
        append_csv(args.csv, header, [[args.pred, args.gt, *report.csv_row()]])
    return 0


def synth_one(spec: SynthSpec, outdir: str, window: int, stride: int) -> list[str]:
    """Write every artifact of one synthetic sample; returns the file paths."""
    sample = make_sample(spec, window, stride)
    stem = Path(outdir) / f"sample_{spec.seed:04d}"
    outputs = {
        f"{stem}_mask.pgm": write_binary_pgm(sample.mask),
        f"{stem}_centerline.pgm": write_binary_pgm(sample.centerline),
        f"{stem}_prob.gmf": write_float_map(sample.degraded),
        f"{stem}_graph.json": write_graph_json(sample.graph).encode("utf-8"),
        f"{stem}_windows.json": write_windowed_graphs(sample.windows).encode("utf-8"),
    }
    for path, data in outputs.items():
        write_local_bytes(path, data)
    return list(outputs)


def cmd_synth(args: argparse.Namespace, run: RunConfig) -> int:
    noise = NoiseSpec(
        drop_prob=args.drop_prob, blur_radius=args.blur_radius, clutter_prob=args.clutter_prob
    )
    specs = [
        SynthSpec(
            seed=run.seed + k,
            size=args.size,
            n_branches=args.n_branches,
            wobble=args.wobble,
            noise=noise,
        )
        for k in range(args.count)
    ]
    logger.info(f"🟢 generating {len(specs)} samples from seed {run.seed}")
    executor = get_executor(run.workers)
    written = executor.map(
        partial(synth_one, outdir=args.outdir, window=run.window, stride=run.stride), specs
    )
    logger.info(f"✅ {sum(len(paths) for paths in written)} files written to {args.outdir}")
    return 0


def cmd_decoder_check(args: argparse.Namespace, run: RunConfig) -> int:
    fixture = DecoderFixture.model_validate(json.loads(read_text(args.fixture)))
    cfg = MatchConfig(**{"alpha": run.alpha, **fixture.config})
    gt, pred = fixture.gt, fixture.pred

    cost = match_cost(gt, pred, cfg)
    sigma = hungarian(cost)
    result = {
        "cost": cost.tolist(),
        "assignment": list(sigma.sigma),
        "matching_cost": float(cost[np.arange(pred.k), list(sigma.sigma)].sum()),
        "hungarian_loss": hungarian_loss(gt, pred, sigma, cfg),
    }
    if fixture.adjacency is not None:
        result["adjacency_loss"] = adjacency_loss(fixture.adjacency.gt, fixture.adjacency.pred)
    if fixture.link is not None:
        counter = OpCounter()
        result["link"] = link_forward(fixture.link, counter).tolist()
        result["link_ops"] = counter.model_dump()

    text = json.dumps(result, indent=2)
    if args.out:
        write_local_bytes(args.out, (text + "\n").encode("utf-8"))
    else:
        print(text)
    return 0


def cmd_pipeline(args: argparse.Namespace, run: RunConfig) -> int:
    prob = read_prob(args.prob)
    graphs = read_graphs(args.graph, run.window)
    cfg = MorphConfig(p_thresh=run.p_thresh)
    if args.task == "centerline":
        result = centerline_pipeline(
            prob, graphs, cfg, window=run.window, stride=run.stride, workers=run.workers
        )
    else:
        result = segmentation_pipeline(
            prob,
            graphs,
            cfg,
            thresh=run.thresh,
            window=run.window,
            stride=run.stride,
            workers=run.workers,
        )
    write_local_bytes(args.output, write_binary_pgm(result))
    return 0


def cmd_ablate(args: argparse.Namespace, run: RunConfig) -> int:
    rows = ablate(
        read_prob(args.prob),
        read_mask(args.centerline),
        read_mask(args.gt),
        task=args.task,
        windows=args.windows,
        cfg=MorphConfig(p_thresh=run.p_thresh),
        thresh=run.thresh,
        tol=run.tol,
        patch=run.patch,
        workers=run.workers,
    )
    text = json.dumps([row.model_dump(mode="json") for row in rows], indent=2)
    if args.out:
        write_local_bytes(args.out, (text + "\n").encode("utf-8"))
    else:
        print(text)
    if args.csv:
        append_csv(
            args.csv,
            ["prob", *rows[0].csv_header()],
            [[args.prob, *row.csv_row()] for row in rows],
        )
    return 0


def _add_options(parser: argparse.ArgumentParser, *names: str) -> None:
    options = {
        "window": (int, "ROI window size in pixels (default 32, road 48)"),
        "stride": (int, "sliding-window stride in pixels (default 30, road 45)"),
        "p_thresh": (float, "maximum average path cost (default 0.5)"),
        "thresh": (float, "segmentation threshold (default 0.5)"),
        "tol": (float, "centerline tolerance in pixels (default 5)"),
        "patch": (int, "tile size for topological errors (default 64)"),
        "seed": (int, "first RNG seed (default 0)"),
    }
    for name in names:
        kind, text = options[name]
        flag = f"--{name.replace('_', '-')}"
        parser.add_argument(flag, dest=name, type=kind, default=None, help=text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubemorph",
        description="Topologically accurate centerline masks by morphing branch graphs",
    )
    parser.add_argument("--batch", action="store_true", help="Timestamped log lines for batch runs")
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging")
    parser.add_argument("--workers", type=int, default=None, help="Parallelism degree")
    parser.add_argument(
        "--profile", choices=["vessel", "road"], default=None, help="Parameter profile"
    )
    parser.add_argument("--config", type=str, default=None, help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("skeletonize", help="Zhang–Suen thinning of a PGM mask")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(handler=cmd_skeletonize)

    p = sub.add_parser("graph", help="Build the graph of a centerline mask")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--skeletonize-first", action="store_true", help="Thin the mask first")
    p.add_argument("--windowed", action="store_true", help="Emit per-window graphs")
    _add_options(p, "window", "stride")
    p.set_defaults(handler=cmd_graph)

    p = sub.add_parser("morph", help="Morph graphs into a centerline mask")
    p.add_argument("prob", help="GMF1 centerline probability map")
    p.add_argument("graph", help="graph or windowed-graph JSON")
    p.add_argument("output")
    _add_options(p, "p_thresh", "window", "stride")
    p.set_defaults(handler=cmd_morph)

    p = sub.add_parser("softskel", help="Centerline probability map from a segmentation map")
    p.add_argument("input")
    p.add_argument("output")
    _add_options(p, "thresh")
    p.set_defaults(handler=cmd_softskel)

    p = sub.add_parser("postprocess", help="Dilate a mask inside the segmentation")
    p.add_argument("mask", help="PGM centerline mask")
    p.add_argument("seg", help="PGM segmentation mask or GMF1 segmentation map")
    p.add_argument("output")
    _add_options(p, "thresh")
    p.set_defaults(handler=cmd_postprocess)

    p = sub.add_parser("eval", help="Score a prediction against ground truth")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--prob", default=None, help="GMF1 probability map for AUC")
    p.add_argument("--task", choices=["centerline", "segmentation"], default="segmentation")
    p.add_argument("--out", default=None, help="JSON report path (default: stdout)")
    p.add_argument("--csv", default=None, help="Append a CSV row to this file")
    _add_options(p, "tol", "patch")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("synth", help="Generate synthetic samples")
    p.add_argument("outdir")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--n-branches", type=int, default=4)
    p.add_argument("--wobble", type=float, default=0.3)
    p.add_argument("--drop-prob", type=float, default=0.0)
    p.add_argument("--blur-radius", type=int, default=0)
    p.add_argument("--clutter-prob", type=float, default=0.0)
    _add_options(p, "seed", "window", "stride")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("decoder-check", help="Matching and losses for a JSON fixture")
    p.add_argument("fixture")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_decoder_check)

    p = sub.add_parser("pipeline", help="Full centerline or segmentation inference")
    p.add_argument("prob", help="GMF1 probability map (P_m or S_m)")
    p.add_argument("graph", help="graph or windowed-graph JSON")
    p.add_argument("output")
    p.add_argument("--task", choices=["centerline", "segmentation"], default="centerline")
    _add_options(p, "p_thresh", "thresh", "window", "stride")
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("ablate", help="Sweep ROI sizes with and without post-processing")
    p.add_argument("prob", help="GMF1 probability map (S_m or P_m)")
    p.add_argument("centerline", help="PGM centerline mask the ROI graphs are built from")
    p.add_argument("gt", help="PGM ground-truth mask")
    p.add_argument("--task", choices=["centerline", "segmentation"], default="segmentation")
    p.add_argument(
        "--windows", type=int, nargs="+", default=list(ABLATION_WINDOWS), help="ROI sizes"
    )
    p.add_argument("--out", default=None, help="JSON rows path (default: stdout)")
    p.add_argument("--csv", default=None, help="Append one CSV row per configuration")
    _add_options(p, "p_thresh", "thresh", "tol", "patch")
    p.set_defaults(handler=cmd_ablate)

    return parser


def run(argv: list[str] | None = None) -> int:
    """
    Execute one command.

    Returns:
        int: 0 on success, 2 on input errors (including usage), 1 on internal errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    set_batch_mode(args.batch)
    set_verbose(args.verbose)

    try:
        run_config = resolve_run_config(args)
        return args.handler(args, run_config)
    except (ValidationError, ValueError, FileNotFoundError, IsADirectoryError) as e:
        # TubemorphError も ValueError の派生
        logger.error(f"❌ {e}")
        return 2
    except Exception as e:
        logger.error(f"❌ internal error: {type(e).__name__}: {e}")
        logger.debug("traceback", exc_info=True)
        return 1


def main(argv: list[str] | None = None) -> int:
    setup()
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
