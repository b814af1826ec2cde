"""Latency/update-rate and accuracy-grid benchmarks on the simulated source."""
from __future__ import annotations

import math
import statistics
import threading
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .acquisition import SimulatedSource, TrajectorySpec, frame_stream, motion_preset, synth_frame
from .config import PipelineConfig
from .errors import GridOutOfBounds, NoConvergence
from .filter import build_demod, extract
from .fieldmodel import coupling_matrix, sensor_normal
from .pipeline import Tracker, run_frames
from .pose import Pose5DOF
from .solver import SolverSession

DEFAULT_FRAME_SIZES = (250, 500, 1000, 2000, 5000)
BENCH_START = Pose5DOF(0.0, 0.0, 0.10, 0.3, 0.5)


@dataclass
class RunStats:
    """Per-frame timings of one paced run; times in milliseconds."""

    frame_size: int
    sample_rate: float
    duration_s: float
    end_to_end_ms: list[float] = field(default_factory=list)
    processing_ms: list[float] = field(default_factory=list)
    solver_ms: list[float] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    position_error_mm: list[float] = field(default_factory=list)
    frames: int = 0
    skipped: int = 0
    window_frames: int = 0

    @property
    def frame_period_ms(self) -> float:
        return self.frame_size * 1000.0 / self.sample_rate

    def update_hz(self) -> list[float]:
        """Sustainable rate per frame: limited by acquisition or by processing."""
        period = self.frame_period_ms
        return [1000.0 / max(period, p) for p in self.processing_ms]

    @property
    def median_update_hz(self) -> float:
        return statistics.median(self.update_hz()) if self.processing_ms else 0.0

    @property
    def throughput_hz(self) -> float:
        return self.window_frames / (self.duration_s / 2.0)


def _median(values):
    return float(statistics.median(values)) if values else float("nan")


def _stats(values) -> dict:
    if not values:
        return {"min": None, "median": None, "max": None}
    return {"min": min(values), "median": _median(values), "max": max(values)}


def run_paced(cfg: PipelineConfig, trajectory: TrajectorySpec, frame_size: int,
              duration_s: float = 10.0) -> RunStats:
    """Realtime-paced acquisition, solving every frame as fast as possible.

    Only the second half of the run is recorded, so the initial cold
    multi-start solve is excluded.
    """
    acq = replace(cfg.acquisition, frame_size=frame_size, pacing="realtime")
    run_cfg = replace(cfg, acquisition=acq)
    tracker = Tracker(run_cfg)
    source = SimulatedSource(cfg.array, cfg.sensor)
    stop = threading.Event()
    stats = RunStats(frame_size, acq.sample_rate, duration_s)
    t_start = time.perf_counter_ns()
    half = t_start + int(duration_s * 0.5e9)
    end = t_start + int(duration_s * 1e9)
    for frame, update in run_frames(tracker, frame_stream(source, trajectory, acq, stop)):
        stats.frames += 1
        if update is None:
            stats.skipped += 1
        elif update.received >= half:
            stats.window_frames += 1
            stats.end_to_end_ms.append(update.end_to_end_ns / 1e6)
            stats.processing_ms.append(update.processing_ns / 1e6)
            stats.solver_ms.append(update.result.solve_time / 1e6)
            stats.iterations.append(update.result.iterations)
            if frame.truth is not None:
                err = np.linalg.norm(update.result.pose.position - frame.truth.position)
                stats.position_error_mm.append(float(err) * 1000.0)
        if time.perf_counter_ns() >= end:
            stop.set()
            break
    return stats


def motion_box(cfg: PipelineConfig, start: Pose5DOF = BENCH_START):
    """Region the benchmark motion bounces around in, inside the solver bounds."""
    inner = cfg.bounds.shrunk(0.01)
    lo = np.maximum(start.position - [0.08, 0.08, 0.05], inner.lower[:3])
    hi = np.minimum(start.position + [0.08, 0.08, 0.05], inner.upper[:3])
    return tuple(lo), tuple(hi)


@dataclass
class BenchmarkReport:
    sample_rate: float
    duration_s: float
    rows: list[dict]

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        head = f"{'frame':>6} {'acq ms':>7} {'e2e ms':>8} {'static Hz':>10} {'dynamic Hz':>11} {'iters s/d':>10}"
        lines = [head]
        for r in self.rows:
            lines.append(
                f"{r['frame_size']:>6} {r['acquisition_latency_ms']:>7g} {r['end_to_end_latency_ms']:>8.3f} "
                f"{r['static_update_hz']:>10.1f} {r['dynamic_update_hz']:>11.1f} "
                f"{r['static_iterations']['median']:>4g}/{r['dynamic_iterations']['median']:<5g}"
            )
        return "\n".join(lines)


def bench_latency(cfg: PipelineConfig, frame_sizes: Sequence[int] = DEFAULT_FRAME_SIZES,
                  duration_s: float = 10.0) -> BenchmarkReport:
    """Run slow (3 cm/s) and fast (60 cm/s) motion for each frame size.

    Update rates are per-frame sustainable rates, 1 / max(frame period,
    processing time), summarized by their median over the second half of
    each run. Raw observed throughput is reported alongside.
    """
    if not frame_sizes:
        raise ValueError("frame_sizes must be non-empty")
    box = motion_box(cfg)
    fs = cfg.acquisition.sample_rate
    rows = []
    for n in frame_sizes:
        runs = {name: run_paced(cfg, motion_preset(name, BENCH_START, box), n, duration_s)
                for name in ("static", "dynamic")}
        s, d = runs["static"], runs["dynamic"]
        rows.append({
            "frame_size": int(n),
            "acquisition_latency_ms": n * 1000.0 / fs,
            "end_to_end_latency_ms": _median(s.end_to_end_ms),
            "processing_time_ms": _stats(s.processing_ms),
            "solver_time_ms": _stats(s.solver_ms),
            "static_update_hz": s.median_update_hz,
            "dynamic_update_hz": d.median_update_hz,
            "static_throughput_hz": s.throughput_hz,
            "dynamic_throughput_hz": d.throughput_hz,
            "static_iterations": _stats(s.iterations),
            "dynamic_iterations": _stats(d.iterations),
            "static_position_error_mm": _stats(s.position_error_mm),
            "dynamic_position_error_mm": _stats(d.position_error_mm),
            "frames": {"static": s.frames, "dynamic": d.frames},
            "skipped": {"static": s.skipped, "dynamic": d.skipped},
        })
    return BenchmarkReport(fs, duration_s, rows)


@dataclass
class GridReport:
    points: tuple[int, int]
    spacing_mm: float
    z_mm: float
    reps: int
    noise_sigma: float
    truth_mm: list[list[float]]
    mean_mm: list[list[float]]
    error_mm: list[float]
    solved: list[int]
    skipped: int
    max_error_mm: float
    min_error_mm: float
    rms_error_mm: float
    std_error_mm: float
    single_frame_rms_mm: float

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        return (
            f"grid {self.points[0]}x{self.points[1]} @ z={self.z_mm:g} mm, spacing {self.spacing_mm:g} mm, "
            f"{self.reps} reps/point, noise {self.noise_sigma:g} V\n"
            f"max {self.max_error_mm:.4f} mm  min {self.min_error_mm:.4f} mm  "
            f"RMS {self.rms_error_mm:.4f} mm  std {self.std_error_mm:.4f} mm  "
            f"single-frame RMS {self.single_frame_rms_mm:.4f} mm  skipped {self.skipped}"
        )


def grid_points(cfg: PipelineConfig, points=(7, 7), spacing: float = 0.025, z: float = 0.070) -> np.ndarray:
    """Grid positions centred on the array, shape (nx*ny, 3); row-major in y then x."""
    cx, cy = cfg.array.centers[:, :2].mean(axis=0)
    nx, ny = points
    xs = cx + (np.arange(nx) - (nx - 1) / 2.0) * spacing
    ys = cy + (np.arange(ny) - (ny - 1) / 2.0) * spacing
    pts = np.array([(x, y, z) for y in ys for x in xs])
    lo, hi = np.asarray(cfg.bounds.lower[:3]), np.asarray(cfg.bounds.upper[:3])
    if np.any(pts < lo) or np.any(pts > hi):
        raise GridOutOfBounds(f"grid spans {pts.min(axis=0)}..{pts.max(axis=0)}, bounds {lo}..{hi}")
    return pts


def bench_grid(cfg: PipelineConfig, points=(7, 7), spacing: float = 0.025, z: float = 0.070,
               reps: int = 150, noise_sigma: Optional[float] = None) -> GridReport:
    """Accuracy grid: ``reps`` noisy frames per point, sensor normal +z.

    Each point starts cold (no warm start carried over from the previous
    point); frames within a point warm-start from each other.
    """
    acq = cfg.acquisition
    if noise_sigma is not None:
        acq = replace(acq, noise_sigma=noise_sigma)
    pts = grid_points(cfg, points, spacing, z)
    demod = build_demod(cfg.array.frequencies, acq.frame_size, acq.sample_rate)
    session = SolverSession(cfg.array, cfg.sensor, cfg.solver, cfg.bounds)

    means, errors, solved, frame_sq = [], [], [], []
    skipped = 0
    for idx, p in enumerate(pts):
        truth = Pose5DOF(*p, 0.0, 0.0)
        session.reset()
        sols = []
        for rep in range(reps):
            frame = synth_frame(cfg.array, truth, cfg.sensor, acq, [acq.seed, idx, rep])
            try:
                result = session.solve(extract(demod, frame))
            except NoConvergence:
                skipped += 1
                continue
            sols.append(result.pose.position)
        sols = np.array(sols)
        solved.append(len(sols))
        if len(sols) == 0:
            means.append([math.nan] * 3)
            errors.append(math.nan)
            continue
        mean = sols.mean(axis=0)
        means.append(mean)
        errors.append(float(np.linalg.norm(mean - p)))
        frame_sq.extend(np.sum((sols - p) ** 2, axis=1))

    err_mm = np.asarray(errors) * 1000.0
    return GridReport(
        points=tuple(points),
        spacing_mm=spacing * 1000.0,
        z_mm=z * 1000.0,
        reps=reps,
        noise_sigma=acq.noise_sigma,
        truth_mm=(pts * 1000.0).tolist(),
        mean_mm=(np.asarray(means) * 1000.0).tolist(),
        error_mm=err_mm.tolist(),
        solved=solved,
        skipped=skipped,
        max_error_mm=float(np.nanmax(err_mm)),
        min_error_mm=float(np.nanmin(err_mm)),
        rms_error_mm=float(np.sqrt(np.nanmean(err_mm**2))),
        std_error_mm=float(np.nanstd(err_mm)),
        single_frame_rms_mm=float(np.sqrt(np.mean(frame_sq)) * 1000.0) if frame_sq else math.nan,
    )


def position_noise_rms(cfg: PipelineConfig, pose: Pose5DOF, noise_sigma: float,
                       frame_size: Optional[int] = None) -> float:
    """Linearized per-frame 3D position RMS error (m) for raw-sample noise ``noise_sigma``.

    Amplitude noise is sigma*sqrt(2/N) per coil; the pose covariance follows
    from the pseudo-inverse of J^T J of the forward model.
    """
    n = frame_size or cfg.acquisition.frame_size
    amp_sigma = noise_sigma * math.sqrt(2.0 / n)
    # parametrize orientation by tilts along two tangents of the normal, which
    # stays regular at the pole where theta is undefined
    normal = sensor_normal(pose)
    t1 = np.cross(normal, [1.0, 0.0, 0.0] if abs(normal[0]) < 0.9 else [0.0, 1.0, 0.0])
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    h = 1e-6
    cols = []
    for j in range(3):
        d = np.zeros(3)
        d[j] = h
        g = coupling_matrix(cfg.array, np.vstack([pose.position + d, pose.position - d]), cfg.sensor)
        cols.append((g[0] - g[1]) @ normal / (2 * h))
    g0 = coupling_matrix(cfg.array, pose.position, cfg.sensor)[0]
    cols += [g0 @ t1, g0 @ t2]
    J = np.array(cols).T
    cov = amp_sigma**2 * np.linalg.inv(J.T @ J)
    return float(math.sqrt(np.trace(cov[:3, :3])))
