"""Command-line entry point: ``emtrack track|bench|config``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import threading
from pathlib import Path

from .config import PipelineConfig, dump_config, load_config
from .errors import ConfigError, EMTrackError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("emtrack")


def _frames(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _points(text: str) -> tuple[int, int]:
    nx, _, ny = text.lower().partition("x")
    return int(nx), int(ny or nx)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emtrack", description="Electromagnetic tracking pipeline")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every pose update")
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run live tracking and stream OpenIGTLink TRANSFORMs")
    track.add_argument("--config", required=True, type=Path)
    track.add_argument("--port", type=int)
    track.add_argument("--device")
    track.add_argument("--max-updates", type=int, help=argparse.SUPPRESS)

    bench = sub.add_parser("bench", help="benchmarks").add_subparsers(dest="bench", required=True)
    lat = bench.add_parser("latency", help="latency and update rate per frame size")
    lat.add_argument("--config", required=True, type=Path)
    lat.add_argument("--frames", type=_frames, default=[250, 500, 1000, 2000, 5000])
    lat.add_argument("--duration", type=float, default=10.0, help="seconds per trajectory per frame size")
    lat.add_argument("--out", required=True, type=Path)

    grid = bench.add_parser("grid", help="7x7 accuracy grid")
    grid.add_argument("--config", required=True, type=Path)
    grid.add_argument("--z-mm", type=float, default=70.0)
    grid.add_argument("--points", type=_points, default=(7, 7))
    grid.add_argument("--reps", type=int, default=150)
    grid.add_argument("--spacing-mm", type=float, default=25.0)
    grid.add_argument("--out", required=True, type=Path)

    cfg = sub.add_parser("config", help="configuration helpers").add_subparsers(dest="config_cmd", required=True)
    cfg.add_parser("print-default", help="print the full default configuration")
    return parser


def _load(path: Path) -> PipelineConfig:
    from .pipeline import seed_override

    return seed_override(load_config(path))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2))


def _track(args) -> int:
    from .pipeline import run_tracking

    cfg = _load(args.config)
    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    stats = run_tracking(cfg, port=args.port, device=args.device, stop=stop, max_updates=args.max_updates)
    log.info("frames in %d, solved %d, skipped %d, dropped %d",
             stats.frames_in, stats.solved, stats.skipped, stats.dropped)
    return EXIT_OK


def _bench_latency(args) -> int:
    from .bench import bench_latency

    report = bench_latency(_load(args.config), args.frames, args.duration)
    _write_json(args.out, report.to_dict())
    print(report.table())
    return EXIT_OK


def _bench_grid(args) -> int:
    from .bench import bench_grid

    report = bench_grid(_load(args.config), args.points, args.spacing_mm / 1000.0, args.z_mm / 1000.0, args.reps)
    _write_json(args.out, report.to_dict())
    print(report.table())
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "config":
            print(dump_config(PipelineConfig()))
            return EXIT_OK
        if args.command == "track":
            return _track(args)
        if args.bench == "latency":
            return _bench_latency(args)
        return _bench_grid(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EMTrackError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
