"""The four-stage tracking loop: acquire, demodulate, solve, stream."""
from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .acquisition import LatestFrameSlot, SampleFrame, SimulatedSource, frame_stream
from .config import PipelineConfig
from .errors import NoConvergence, SourceStopped
from .filter import DemodulationMatrix, build_demod, extract
from .igtlink import IGTLinkServer, encode_transform, pose_to_matrix, timestamp_now, TransformMessage
from .solver import SolveResult, SolverSession

log = logging.getLogger(__name__)

SEED_ENV = "EMTRACK_SEED"


def seed_override(cfg: PipelineConfig) -> PipelineConfig:
    """Apply ``EMTRACK_SEED`` from the environment, if set."""
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return cfg
    return replace(cfg, acquisition=replace(cfg.acquisition, seed=int(raw)))


@dataclass
class TrackingUpdate:
    sequence: int
    result: SolveResult
    matrix: np.ndarray
    message: bytes
    frame_start: int
    received: int
    encoded: int

    @property
    def end_to_end_ns(self) -> int:
        """Frame start (first sample) to message encoded."""
        return self.encoded - self.frame_start

    @property
    def processing_ns(self) -> int:
        """Frame receipt to message encoded: demodulate, solve, encode."""
        return self.encoded - self.received


class Tracker:
    """Turns frames into encoded TRANSFORM messages, warm-starting each solve."""

    def __init__(self, cfg: PipelineConfig, device_name: Optional[str] = None):
        self.cfg = cfg
        self.device_name = device_name or cfg.server.device
        self.demod: DemodulationMatrix = build_demod(
            cfg.array.frequencies, cfg.acquisition.frame_size, cfg.acquisition.sample_rate
        )
        self.session = SolverSession(cfg.array, cfg.sensor, cfg.solver, cfg.bounds)

    def process(self, frame: SampleFrame, received: Optional[int] = None) -> TrackingUpdate:
        """Raises :class:`NoConvergence` when no pose could be resolved."""
        received = time.perf_counter_ns() if received is None else received
        measurement = extract(self.demod, frame)
        result = self.session.solve(measurement)
        matrix = pose_to_matrix(result.pose)
        message = encode_transform(TransformMessage(self.device_name, timestamp_now(), matrix))
        encoded = time.perf_counter_ns()
        return TrackingUpdate(frame.sequence, result, matrix, message, frame.start_time, received, encoded)


@dataclass
class TrackingStats:
    frames_in: int = 0
    solved: int = 0
    skipped: int = 0
    dropped: int = 0

    def balanced(self) -> bool:
        return self.frames_in == self.solved + self.skipped + self.dropped


def run_tracking(
    cfg: PipelineConfig,
    port: Optional[int] = None,
    device: Optional[str] = None,
    stop: Optional[threading.Event] = None,
    max_updates: Optional[int] = None,
    on_update: Optional[Callable[[TrackingUpdate], None]] = None,
    server: Optional[IGTLinkServer] = None,
) -> TrackingStats:
    """Live tracking until ``stop`` is set (or ``max_updates`` poses are solved).

    Acquisition runs in its own thread and hands over through a depth-1
    latest-frame slot, so a slow solve drops stale frames instead of
    falling behind. Frames whose solve does not converge are skipped and
    counted. Raises :class:`~emtrack.errors.BindFailure` if the server port
    cannot be bound.
    """
    stop = stop or threading.Event()
    own_server = server is None
    if own_server:
        server = IGTLinkServer(cfg.server.host, cfg.server.port if port is None else port,
                               device or cfg.server.device).start()
    tracker = Tracker(cfg, device_name=server.device_name)
    source = SimulatedSource(cfg.array, cfg.sensor)
    slot = LatestFrameSlot()
    stats = TrackingStats()

    def produce():
        try:
            for frame in frame_stream(source, cfg.trajectory, cfg.acquisition, stop):
                slot.put(frame)
        finally:
            slot.close()

    producer = threading.Thread(target=produce, name="acquisition", daemon=True)
    producer.start()
    try:
        while not stop.is_set():
            try:
                frame = slot.get(timeout=1.0)
            except SourceStopped:
                break
            except TimeoutError:
                continue
            try:
                update = tracker.process(frame)
            except NoConvergence:
                stats.skipped += 1
                log.warning("frame %d: no convergence, skipped", frame.sequence)
                continue
            server.broadcast(update.message)
            stats.solved += 1
            r = update.result
            p = r.pose
            log.info(
                "seq=%d pos=(%.5f, %.5f, %.5f) m theta=%.4f phi=%.4f residual=%.3e iters=%d e2e=%.3f ms",
                update.sequence, p.x, p.y, p.z, p.theta, p.phi, r.residual_norm, r.iterations,
                update.end_to_end_ns / 1e6,
            )
            if on_update is not None:
                on_update(update)
            if max_updates is not None and stats.solved >= max_updates:
                break
    except KeyboardInterrupt:
        log.info("interrupted, shutting down")
    finally:
        stop.set()
        producer.join(timeout=5.0)
        slot.discard()
        if own_server:
            server.stop()
    stats.frames_in = slot.put_count
    stats.dropped = slot.dropped
    return stats


def run_frames(tracker: Tracker, frames: Iterable[SampleFrame]):
    """Process every frame in order (benchmark mode: blocking, never drops).

    Yields ``(frame, update)``; ``update`` is None for skipped frames.
    """
    for frame in frames:
        received = time.perf_counter_ns()
        try:
            yield frame, tracker.process(frame, received)
        except NoConvergence:
            yield frame, None
