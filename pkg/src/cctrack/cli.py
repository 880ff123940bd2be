"""Command-line front door: synth, track, eval, sweep, priorboxes, convcheck.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 property-suite failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import io, scenario, selfcheck
from .evaluation import evaluate_at, threshold_sweep
from .priorbox import default_layer_specs, prior_box_count
from .tracker import CentroidCorrelationTracker, FrameUpdate, TrackerConfig

USAGE_ERROR = 1
DATA_ERROR = 2
CHECK_FAILURE = 3

SWEEP_COLUMNS = ["threshold", "tp", "fp", "fn", "tn", "precision", "recall", "accuracy"]


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 1 and a one-line diagnostic."""

    def error(self, message):
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    """Canonical text form: repr for floats (shortest round-trip), str otherwise."""
    return repr(value) if isinstance(value, float) else str(value)


def parse_threshold_range(text: str) -> list[float]:
    """Expand start:end:step into an inclusive list (1e-9 endpoint tolerance)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"threshold range must be start:end:step, got {text!r}")
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"threshold range has non-numeric parts: {text!r}") from None
    if step <= 0:
        raise ValueError(f"threshold step must be positive, got {step}")
    if end < start - 1e-9:
        raise ValueError(f"threshold range end {end} precedes start {start}")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 9) for i in range(count)]


def _load_json_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise io.FormatError(f"{path}: malformed JSON: {exc.msg} (line {exc.lineno})")
    if not isinstance(data, dict):
        raise io.FormatError(f"{path}: config must be a JSON object")
    return data


def _tracker_config_from_dict(data: dict, source: str) -> TrackerConfig:
    known = {f.name for f in dataclasses.fields(TrackerConfig)}
    unknown = set(data) - known
    if unknown:
        raise io.FormatError(f"{source}: unknown tracker config keys: {sorted(unknown)}")
    return TrackerConfig(**data)


def _frame_update_json(update: FrameUpdate) -> str:
    def det_dict(det):
        return {
            "frame": det.frame_index,
            "bbox": list(det.bbox.as_tuple()),
            "score": det.confidence,
            "class": det.class_id,
        }

    return json.dumps(
        {
            "frame": update.frame_index,
            "matched": [[tid, det_dict(det)] for tid, det in update.matched],
            "registered": list(update.registered),
            "disappeared_incremented": list(update.disappeared_incremented),
            "deregistered": list(update.deregistered),
            "correlated": list(update.correlated),
        }
    )


def _cmd_synth(args) -> int:
    config_data = _load_json_config(args.config)
    render = bool(config_data.pop("render_frames", True))
    cfg = scenario.config_from_dict(config_data)
    if args.seed is not None:
        cfg = scenario.with_seed(cfg, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    scn = scenario.generate(cfg)
    io.write_detections(out_dir / "detections.jsonl", scn.detections)
    io.write_ground_truth(out_dir / "groundtruth.csv", scn.ground_truth)
    message = (
        f"synth: {cfg.crowd_category} crowd of {cfg.num_people} over {cfg.frame_count} frames "
        f"(seed {cfg.rng_seed}): {len(scn.ground_truth)} ground-truth boxes, "
        f"{len(scn.detections)} detections"
    )
    if render:
        frames = scenario.render_frames(scn)
        io.write_frames(out_dir / "frames", frames)
        message += f", {len(frames)} frames"
    print(message)
    return 0


def _cmd_track(args) -> int:
    detections = io.read_detections(args.detections)
    frames = io.read_frames(args.frames) if args.frames else []
    config = _tracker_config_from_dict(_load_json_config(args.config), args.config)

    by_frame: dict[int, list] = {}
    for det in detections:
        by_frame.setdefault(det.frame_index, []).append(det)
    last_frame = max(
        max(by_frame.keys(), default=-1),
        len(frames) - 1,
    )
    if last_frame < 0:
        raise io.FormatError(f"{args.detections}: no frames to track (empty input)")

    tracker = CentroidCorrelationTracker(config)
    trace_handle = open(args.trace, "w", encoding="utf-8") if args.trace else None
    rows = []
    try:
        for frame_index in range(last_frame + 1):
            pixels = frames[frame_index] if frame_index < len(frames) else None
            if frame_index % config.detection_interval == 0:
                update = tracker.update(frame_index, by_frame.get(frame_index, []), pixels)
            else:
                update = tracker.update(frame_index, (), pixels)
            if trace_handle:
                trace_handle.write(_frame_update_json(update) + "\n")
            if update.matched or update.registered or update.correlated:
                positions = {t.id: t.centroid for t in tracker.live_tracks()}
                moved = (
                    [tid for tid, _ in update.matched]
                    + list(update.registered)
                    + list(update.correlated)
                )
                for tid in moved:
                    point = positions[tid]
                    rows.append((tid, frame_index, point.x, point.y))
    finally:
        if trace_handle:
            trace_handle.close()

    rows.sort(key=lambda r: (r[1], r[0]))
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(",".join(io.TRAJECTORY_HEADER) + "\n")
        for tid, frame, cx, cy in rows:
            handle.write(f"{tid},{frame},{_fmt(cx)},{_fmt(cy)}\n")
    print(
        f"track: {last_frame + 1} frames, {tracker.next_id} identities registered, "
        f"{len(tracker.live_tracks())} live at end -> {args.out}"
    )
    return 0


def _cmd_eval(args) -> int:
    detections = io.read_detections(args.detections)
    ground_truth = io.read_ground_truth(args.groundtruth)
    report = evaluate_at(
        detections,
        ground_truth,
        args.threshold,
        iou_threshold=args.iou,
        frame_count=args.frame_count,
    )
    print(json.dumps(report.to_dict()))
    return 0


def _cmd_sweep(args) -> int:
    detections = io.read_detections(args.detections)
    ground_truth = io.read_ground_truth(args.groundtruth)
    thresholds = parse_threshold_range(args.thresholds)
    reports = threshold_sweep(
        detections,
        ground_truth,
        thresholds,
        iou_threshold=args.iou,
        frame_count=args.frame_count,
    )
    lines = [",".join(SWEEP_COLUMNS)]
    for report in reports:
        row = report.to_dict()
        lines.append(",".join(_fmt(row[column]) for column in SWEEP_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_priorboxes(args) -> int:
    specs = default_layer_specs()
    if args.layer is not None:
        matches = [s for s in specs if s.name == args.layer]
        if not matches:
            names = ", ".join(s.name for s in specs)
            raise io.FormatError(f"unknown layer {args.layer!r}; known layers: {names}")
        specs = tuple(matches)
    print(f"{'layer':<10} {'grid':>7} {'boxes/cell':>11} {'priors':>7}")
    for spec in specs:
        grid = f"{spec.grid_w}x{spec.grid_h}"
        print(f"{spec.name:<10} {grid:>7} {spec.boxes_per_cell:>11} {spec.num_priors:>7}")
    if args.layer is None:
        print(f"total {prior_box_count(specs)}")
    return 0


def _cmd_convcheck(args) -> int:
    results = selfcheck.run_all(seed=args.seed)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        if not result.passed:
            failed += 1
        print(f"{status} {result.name}: {result.detail}")
    print(f"convcheck: {len(results) - failed}/{len(results)} properties passed")
    return 0 if failed == 0 else CHECK_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cctrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic scenario into a directory")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config rng_seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("track", help="run the tracker over a detection file")
    p.add_argument("--detections", required=True, help="detection JSONL file")
    p.add_argument("--frames", default=None, help="directory of PGM frames (enables correlation)")
    p.add_argument("--config", required=True, help="tracker config JSON")
    p.add_argument("--out", required=True, help="trajectories CSV output path")
    p.add_argument("--trace", default=None, help="optional frame-update JSONL trace path")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("eval", help="metrics at one confidence threshold (JSON to stdout)")
    p.add_argument("--detections", required=True)
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--iou", type=float, default=0.5, help="IoU matching threshold")
    p.add_argument("--frame-count", type=int, default=None, help="frame universe for TN counting")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="metrics swept over confidence thresholds (CSV)")
    p.add_argument("--detections", required=True)
    p.add_argument("--groundtruth", required=True)
    p.add_argument("--thresholds", default="0.1:0.9:0.1", help="range start:end:step, inclusive")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--frame-count", type=int, default=None)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("priorboxes", help="detection-layer grids and prior-box totals")
    p.add_argument("--layer", default=None, help="restrict to one layer by name")
    p.set_defaults(func=_cmd_priorboxes)

    p = sub.add_parser("convcheck", help="run the convolution-kernel property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_convcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except io.FormatError as exc:
        print(f"cctrack: error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"cctrack: error: {exc.filename or exc}: no such file", file=sys.stderr)
        return DATA_ERROR
    except (ValueError, TypeError, OSError) as exc:
        print(f"cctrack: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
