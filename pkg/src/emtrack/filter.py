"""Single-bin Fourier demodulation of acquisition frames.

Each transmitter frequency gets a cosine and a sine reference row; one
matrix-vector product per frame yields every coil's amplitude.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DuplicateFrequency, LengthMismatch, NyquistViolation


class LeakageWarning(UserWarning):
    """A demodulation frequency does not fall on an exact DFT bin."""


def reference_cycles(frequencies, frame_size: int, sample_rate: float) -> np.ndarray:
    """Fractional cycle count f*n/fs reduced into [0, 1), shape (K, N).

    The reduction happens before the multiply by 2*pi so large sample
    indices do not cost phase accuracy; f*n is exact for integer-valued
    frequencies below 2**53.
    """
    f = np.asarray(frequencies, dtype=float)[:, None]
    n = np.arange(frame_size, dtype=float)[None, :]
    return np.mod(f * n, sample_rate) / sample_rate


@lru_cache(maxsize=32)
def _cosine_table(frequencies: tuple, frame_size: int, sample_rate: float) -> np.ndarray:
    table = np.cos(2.0 * np.pi * reference_cycles(frequencies, frame_size, sample_rate))
    table.flags.writeable = False
    return table


def cosine_table(frequencies, frame_size: int, sample_rate: float) -> np.ndarray:
    """Cached read-only cos(2 pi f_k n / fs) table, shape (K, N)."""
    return _cosine_table(tuple(float(f) for f in frequencies), int(frame_size), float(sample_rate))


@dataclass(frozen=True)
class DemodulationMatrix:
    rows: np.ndarray = field(repr=False)
    frequencies: tuple[float, ...]
    frame_size: int
    sample_rate: float
    bin_aligned: tuple[bool, ...]

    @property
    def K(self) -> int:
        return len(self.frequencies)

    @property
    def bins(self) -> np.ndarray:
        """Fractional DFT bin index of each frequency."""
        return np.asarray(self.frequencies) * self.frame_size / self.sample_rate


@dataclass(frozen=True)
class SpectralMeasurement:
    amplitudes: np.ndarray
    frame_sequence: int = 0
    frame_time: int = 0
    quadrature: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise ValueError("measurement amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self):
        return len(self.amplitudes)

    def scaled(self, factor: float) -> "SpectralMeasurement":
        return SpectralMeasurement(self.amplitudes * factor, self.frame_sequence, self.frame_time)


def build_demod(frequencies: Sequence[float], frame_size: int, sample_rate: float) -> DemodulationMatrix:
    """Precompute the 2K x N cosine/sine projection matrix.

    Frequencies that are not bin-aligned are accepted but flagged with a
    :class:`LeakageWarning`; their amplitudes will leak.
    """
    freqs = tuple(float(f) for f in frequencies)
    if frame_size < 50:
        raise ValueError(f"frame_size must be >= 50, got {frame_size}")
    if len(set(freqs)) != len(freqs):
        raise DuplicateFrequency(f"duplicate demodulation frequency in {freqs}")
    nyquist = sample_rate / 2.0
    bad = [f for f in freqs if not 0 < f < nyquist]
    if bad:
        raise NyquistViolation(f"frequencies {bad} not in (0, {nyquist}) Hz at fs={sample_rate}")

    cycles = 2.0 * np.pi * reference_cycles(freqs, frame_size, sample_rate)
    rows = np.vstack([np.cos(cycles), np.sin(cycles)])
    rows.flags.writeable = False

    bins = np.asarray(freqs) * frame_size / sample_rate
    aligned = tuple(bool(b == np.round(b)) for b in bins)
    if not all(aligned):
        off = [f for f, ok in zip(freqs, aligned) if not ok]
        warnings.warn(f"frequencies {off} are not bin-aligned at N={frame_size}", LeakageWarning, stacklevel=2)
    return DemodulationMatrix(rows, freqs, int(frame_size), float(sample_rate), aligned)


def extract(matrix: DemodulationMatrix, frame) -> SpectralMeasurement:
    """Signed per-coil amplitudes (2/N) * sum_n x[n] cos(2 pi f_k n / fs).

    ``frame`` is a :class:`~emtrack.acquisition.SampleFrame` or a bare
    sample vector. The sine projection is kept as ``quadrature``; it is ~0
    for phase-coherent bin-aligned tones.
    """
    samples = getattr(frame, "samples", frame)
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (matrix.frame_size,):
        raise LengthMismatch(f"frame has {samples.shape} samples, matrix expects {matrix.frame_size}")
    proj = matrix.rows @ samples * (2.0 / matrix.frame_size)
    k = matrix.K
    return SpectralMeasurement(
        amplitudes=proj[:k],
        frame_sequence=getattr(frame, "sequence", 0),
        frame_time=getattr(frame, "start_time", 0),
        quadrature=proj[k:],
    )
