"""Frame acquisition from a pluggable signal source.

``SimulatedSource`` stands in for an ADC: it synthesizes the sensor voltage
as a sum of phase-coherent cosines, one per transmitter, with amplitudes from
the forward model plus optional white Gaussian noise. Any other source only
has to yield fixed-size :class:`SampleFrame` objects with increasing
sequence numbers and non-decreasing timestamps.
"""
from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Protocol

import numpy as np

from .errors import LengthMismatch, NyquistViolation, SourceStopped
from .fieldmodel import SensorSpec, TransmitterArray, forward_model
from .filter import cosine_table
from .pose import Pose5DOF, wrap_angle

PACING_MODES = ("realtime", "unpaced")
STATIC_SPEED = 0.03
DYNAMIC_SPEED = 0.6

# sleep until this close to a deadline, then spin
_SPIN_NS = 1_000_000


@dataclass(frozen=True)
class AcquisitionConfig:
    sample_rate: float = 100000.0
    frame_size: int = 1000
    noise_sigma: float = 0.0
    pacing: str = "realtime"
    seed: int = 0

    def __post_init__(self):
        if int(self.frame_size) != self.frame_size or self.frame_size < 50:
            raise ValueError(f"frame_size must be an integer >= 50, got {self.frame_size!r}")
        object.__setattr__(self, "frame_size", int(self.frame_size))
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.pacing not in PACING_MODES:
            raise ValueError(f"pacing must be one of {PACING_MODES}, got {self.pacing!r}")

    @property
    def frame_period(self) -> float:
        """Seconds per frame, N / fs."""
        return self.frame_size / self.sample_rate

    @property
    def acquisition_latency_ms(self) -> float:
        return self.frame_size * 1000.0 / self.sample_rate

    def check_nyquist(self, array: TransmitterArray) -> None:
        fmax = float(np.max(array.frequencies))
        if not self.sample_rate > 2.0 * fmax:
            raise NyquistViolation(f"sample_rate {self.sample_rate} Hz <= 2 x {fmax} Hz")


@dataclass(frozen=True)
class SampleFrame:
    """One block of raw sensor samples.

    ``start_time`` is the monotonic time (ns) of the first sample. ``truth``
    carries the simulated pose, when known, for benchmarking.
    """

    samples: np.ndarray = field(repr=False)
    start_time: int
    sequence: int
    sample_rate: float
    frame_size: int
    truth: Optional[Pose5DOF] = None

    def __post_init__(self):
        if len(self.samples) != self.frame_size:
            raise LengthMismatch(f"{len(self.samples)} samples, expected {self.frame_size}")


@dataclass(frozen=True)
class TrajectorySpec:
    """Sensor motion during acquisition.

    ``linear_path`` moves at constant ``velocity``; when ``box`` is given
    (lower and upper xyz corners) the path reflects off its faces, so long
    runs stay inside the tracking volume.
    """

    kind: str = "static"
    start_pose: Pose5DOF = Pose5DOF(0.0, 0.0, 0.1, 0.0, 0.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    angular_velocity: float = 0.0
    box: Optional[tuple[tuple[float, float, float], tuple[float, float, float]]] = None

    def __post_init__(self):
        if self.kind not in ("static", "linear_path"):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        if self.kind == "static" and (any(self.velocity) or self.angular_velocity):
            raise ValueError("a static trajectory must have zero velocity")
        if self.box is not None:
            lo, hi = (tuple(float(v) for v in corner) for corner in self.box)
            if not all(a < b for a, b in zip(lo, hi)):
                raise ValueError("trajectory box lower corner must be below upper corner")
            if not all(a <= p <= b for a, p, b in zip(lo, self.start_pose.position, hi)):
                raise ValueError("trajectory start lies outside its box")
            object.__setattr__(self, "box", (lo, hi))

    @property
    def speed(self) -> float:
        return math.sqrt(sum(v * v for v in self.velocity))

    def pose_at(self, t: float) -> Pose5DOF:
        """Pose ``t`` seconds after the trajectory starts."""
        p0 = self.start_pose
        if self.kind == "static":
            return p0
        pos = p0.position + np.asarray(self.velocity) * t
        if self.box is not None:
            lo, hi = np.asarray(self.box[0]), np.asarray(self.box[1])
            span = hi - lo
            u = np.mod(pos - lo, 2.0 * span)
            pos = lo + np.where(u <= span, u, 2.0 * span - u)
        theta = wrap_angle(p0.theta + self.angular_velocity * t)
        return Pose5DOF(float(pos[0]), float(pos[1]), float(pos[2]), theta, p0.phi)


def motion_preset(name: str, start_pose: Pose5DOF, box=None, direction=(1.0, 0.7, 0.3)) -> TrajectorySpec:
    """``"static"`` (slow, 3 cm/s) or ``"dynamic"`` (60 cm/s) benchmark motion."""
    speeds = {"static": STATIC_SPEED, "dynamic": DYNAMIC_SPEED}
    if name not in speeds:
        raise ValueError(f"unknown motion preset {name!r}")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return TrajectorySpec("linear_path", start_pose, tuple(d * speeds[name]), 0.0, box)


def synth_samples(array: TransmitterArray, amplitudes, config: AcquisitionConfig, rng=None) -> np.ndarray:
    """sum_k V_k cos(2 pi f_k n / fs) + noise, phase zero at n = 0."""
    table = cosine_table(array.frequencies, config.frame_size, config.sample_rate)
    samples = np.asarray(amplitudes, dtype=float) @ table
    if config.noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng(config.seed)
        samples = samples + rng.normal(0.0, config.noise_sigma, config.frame_size)
    return samples


def synth_frame(
    array: TransmitterArray,
    pose: Pose5DOF,
    sensor: SensorSpec,
    config: AcquisitionConfig,
    rng_seed: int = 0,
    *,
    sequence: int = 0,
    start_time: int = 0,
) -> SampleFrame:
    amplitudes = forward_model(array, pose, sensor)
    samples = synth_samples(array, amplitudes, config, np.random.default_rng(rng_seed))
    samples.flags.writeable = False
    return SampleFrame(samples, start_time, sequence, config.sample_rate, config.frame_size, truth=pose)


class FrameSource(Protocol):
    """Anything that delivers fixed-size frames with monotonic sequence/time."""

    def frames(
        self, trajectory: TrajectorySpec, config: AcquisitionConfig, stop: threading.Event
    ) -> Iterator[SampleFrame]: ...


def _wait_until(deadline_ns: int, stop: threading.Event) -> None:
    while True:
        remaining = deadline_ns - time.perf_counter_ns()
        if remaining <= 0 or stop.is_set():
            return
        if remaining > _SPIN_NS:
            stop.wait((remaining - _SPIN_NS) / 1e9)


class SimulatedSource:
    """Reference signal source driven by the forward model."""

    def __init__(self, array: TransmitterArray, sensor: SensorSpec | None = None):
        self.array = array
        self.sensor = sensor or SensorSpec()

    def frames(self, trajectory, config, stop):
        config.check_nyquist(self.array)
        period = config.frame_period
        period_ns = config.frame_size * 1e9 / config.sample_rate
        last_sample_ns = (config.frame_size - 1) * 1e9 / config.sample_rate
        t0 = time.perf_counter_ns()
        seq = 0
        while not stop.is_set():
            pose = trajectory.pose_at((seq + 0.5) * period)
            rng = np.random.default_rng([config.seed, seq])
            samples = synth_samples(self.array, forward_model(self.array, pose, self.sensor), config, rng)
            samples.flags.writeable = False
            if config.pacing == "realtime":
                start = t0 + int(round(seq * period_ns))
                # the frame exists once its last sample has been taken
                _wait_until(start + int(round(last_sample_ns)), stop)
                if stop.is_set():
                    return
            else:
                start = time.perf_counter_ns()
            yield SampleFrame(samples, start, seq, config.sample_rate, config.frame_size, truth=pose)
            seq += 1


def frame_stream(
    source: FrameSource,
    trajectory: TrajectorySpec,
    config: AcquisitionConfig,
    stop: threading.Event | None = None,
) -> Iterator[SampleFrame]:
    """Yield frames from ``source`` until ``stop`` is set, checking the source contract."""
    stop = stop or threading.Event()
    last_seq, last_time = None, None
    for frame in source.frames(trajectory, config, stop):
        if frame.frame_size != config.frame_size:
            raise LengthMismatch(f"source delivered {frame.frame_size} samples, expected {config.frame_size}")
        if last_seq is not None and (frame.sequence <= last_seq or frame.start_time < last_time):
            raise RuntimeError("frame source violated sequence/timestamp monotonicity")
        last_seq, last_time = frame.sequence, frame.start_time
        yield frame
        if stop.is_set():
            return


class LatestFrameSlot:
    """Depth-1 handoff that keeps only the newest frame (live tracking)."""

    def __init__(self):
        self._cond = threading.Condition()
        self._frame: SampleFrame | None = None
        self._closed = False
        self.put_count = 0
        self.dropped = 0

    def put(self, frame: SampleFrame) -> None:
        with self._cond:
            if self._frame is not None:
                self.dropped += 1
            self._frame = frame
            self.put_count += 1
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def get(self, timeout: float | None = None) -> SampleFrame:
        """Take the newest frame; raises :class:`SourceStopped` once closed and drained."""
        with self._cond:
            while self._frame is None:
                if self._closed:
                    raise SourceStopped("acquisition stopped")
                if not self._cond.wait(timeout):
                    raise TimeoutError("no frame within timeout")
            frame, self._frame = self._frame, None
            return frame

    def discard(self) -> int:
        """Drop any pending frame, counting it; returns how many were dropped."""
        with self._cond:
            if self._frame is None:
                return 0
            self._frame = None
            self.dropped += 1
            return 1


def with_frame_size(config: AcquisitionConfig, frame_size: int) -> AcquisitionConfig:
    return replace(config, frame_size=frame_size)
