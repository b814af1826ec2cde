"""Magnetic field of the transmitter coils and the induced sensor EMF.

The fast path is the point-dipole approximation, vectorized over poses and
coils. ``biot_savart_field`` integrates a single circular loop numerically
and exists to validate the dipole model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DuplicateFrequency, SingularPoint
from .pose import Pose5DOF

MU0 = 4e-7 * math.pi
SINGULAR_RADIUS = 1e-6

_MU0_OVER_4PI = MU0 / (4.0 * math.pi)


def _vec3(values, name) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite 3-vector, got {values!r}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class CoilSpec:
    """One transmitter coil, modelled as a magnetic dipole.

    ``moment_magnitude`` is the aggregated N*I*A in A*m^2. ``loop_radius`` only
    matters to the Biot-Savart oracle.
    """

    id: int
    center: tuple[float, float, float]
    axis: tuple[float, float, float]
    moment_magnitude: float
    frequency: float
    loop_radius: float = 0.01
    calibration_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        axis = _vec3(self.axis, "axis")
        norm = math.sqrt(sum(a * a for a in axis))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coil {self.id}: axis must be a unit vector (|axis| = {norm!r})")
        object.__setattr__(self, "axis", axis)
        for name in ("moment_magnitude", "frequency", "loop_radius"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"coil {self.id}: {name} must be > 0, got {value!r}")
        if not math.isfinite(self.calibration_scale):
            raise ValueError(f"coil {self.id}: calibration_scale must be finite")

    @property
    def moment(self) -> np.ndarray:
        return self.moment_magnitude * np.asarray(self.axis)


@dataclass(frozen=True)
class TransmitterArray:
    coils: tuple[CoilSpec, ...]

    def __post_init__(self):
        coils = tuple(self.coils)
        object.__setattr__(self, "coils", coils)
        if len(coils) < 5:
            raise ValueError(f"need at least 5 coils for a 5-DOF solve, got {len(coils)}")
        for k, coil in enumerate(coils):
            if coil.id != k:
                raise ValueError(f"coil ids must be 0..K-1 in order; position {k} has id {coil.id}")
        freqs = [c.frequency for c in coils]
        if len(set(freqs)) != len(freqs):
            raise DuplicateFrequency(f"transmitter frequencies must be distinct: {freqs}")

    @property
    def K(self) -> int:
        return len(self.coils)

    def __len__(self):
        return len(self.coils)

    @cached_property
    def centers(self) -> np.ndarray:
        return np.array([c.center for c in self.coils])

    @cached_property
    def moments(self) -> np.ndarray:
        return np.array([c.moment for c in self.coils])

    @cached_property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency for c in self.coils])

    @cached_property
    def gains(self) -> np.ndarray:
        """omega_k * g_k, the per-coil EMF factor apart from sensor area."""
        return np.array([2.0 * math.pi * c.frequency * c.calibration_scale for c in self.coils])


@dataclass(frozen=True)
class SensorSpec:
    turns_area: float = 2.5e-5

    def __post_init__(self):
        if not (math.isfinite(self.turns_area) and self.turns_area > 0):
            raise ValueError(f"turns_area must be > 0, got {self.turns_area!r}")


@dataclass
class FieldVector:
    b: np.ndarray
    at: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.at = np.asarray(self.at, dtype=float)
        if not np.all(np.isfinite(self.b)):
            raise ValueError("field components must be finite")


DEFAULT_SPACING = 0.07
DEFAULT_MOMENT = 0.5


def default_frequencies(count: int = 8) -> list[float]:
    return [20000.0 + 2000.0 * k for k in range(count)]


def default_array() -> TransmitterArray:
    """Eight +z coils on the z=0 plane at the outer cells of a 3x3 grid."""
    s = DEFAULT_SPACING
    sites = [(x, y) for y in (-s, 0.0, s) for x in (-s, 0.0, s) if (x, y) != (0.0, 0.0)]
    freqs = default_frequencies(len(sites))
    coils = tuple(
        CoilSpec(
            id=k,
            center=(x, y, 0.0),
            axis=(0.0, 0.0, 1.0),
            moment_magnitude=DEFAULT_MOMENT,
            frequency=freqs[k],
            loop_radius=0.01,
        )
        for k, (x, y) in enumerate(sites)
    )
    return TransmitterArray(coils)


def _dipole_fields(points: np.ndarray, centers: np.ndarray, moments: np.ndarray) -> np.ndarray:
    """Dipole flux density for every (point, coil) pair.

    points (P, 3), centers/moments (K, 3) -> B of shape (P, K, 3), tesla.
    """
    r = points[:, None, :] - centers[None, :, :]
    r2 = np.einsum("pki,pki->pk", r, r)
    if np.any(r2 <= SINGULAR_RADIUS**2):
        raise SingularPoint("field point within 1e-6 m of a coil center")
    inv_r = 1.0 / np.sqrt(r2)
    inv_r3 = inv_r * inv_r * inv_r
    m_dot_r = np.einsum("pki,ki->pk", r, moments)
    return _MU0_OVER_4PI * (
        3.0 * (m_dot_r * inv_r3 * inv_r * inv_r)[..., None] * r - inv_r3[..., None] * moments[None]
    )


def dipole_field(coil: CoilSpec, p) -> FieldVector:
    """Flux density of ``coil`` at point ``p`` under the dipole approximation."""
    p = np.asarray(p, dtype=float)
    b = _dipole_fields(p[None, :], np.asarray([coil.center]), coil.moment[None, :])[0, 0]
    return FieldVector(b=b, at=p)


def _loop_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors u, v with u x v = axis."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    return u, v


def biot_savart_field(coil: CoilSpec, p, segments: int = 8192) -> FieldVector:
    """Numerically integrate the field of a circular current loop.

    The loop has radius ``coil.loop_radius`` and carries the current that
    gives it the coil's dipole moment. Each segment contributes
    mu0 I (dl x r) / (4 pi |r|^3), with dl the tangent at the segment's
    midpoint angle. This is the midpoint rule on a periodic integrand, so
    it converges geometrically in ``segments``.
    """
    if segments < 64:
        raise ValueError(f"segments must be >= 64, got {segments}")
    p = np.asarray(p, dtype=float)
    a = coil.loop_radius
    axis = np.asarray(coil.axis)
    center = np.asarray(coil.center)

    rel = p - center
    height = rel @ axis
    rho = np.linalg.norm(rel - height * axis)
    if math.hypot(rho - a, height) <= SINGULAR_RADIUS:
        raise SingularPoint("field point within 1e-6 m of the loop wire")

    current = coil.moment_magnitude / (math.pi * a * a)
    u, v = _loop_basis(axis)
    step = 2.0 * math.pi / segments
    t = (np.arange(segments) + 0.5) * step
    cos_t, sin_t = np.cos(t)[:, None], np.sin(t)[:, None]
    wire = center + a * (cos_t * u + sin_t * v)
    dl = a * step * (-sin_t * u + cos_t * v)
    r = p - wire
    rn = np.sqrt(np.einsum("ij,ij->i", r, r))
    b = MU0 * current / (4.0 * math.pi) * np.sum(np.cross(dl, r) / (rn**3)[:, None], axis=0)
    return FieldVector(b=b, at=p)


def normals(theta, phi) -> np.ndarray:
    """Sensor normals for arrays of (theta, phi); output has a trailing axis of 3."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    sin_phi = np.sin(phi)
    return np.stack([np.cos(theta) * sin_phi, np.sin(theta) * sin_phi, np.cos(phi)], axis=-1)


def sensor_normal(pose: Pose5DOF) -> np.ndarray:
    """Unit normal of the sensor coil: theta is azimuth about +z, phi inclination."""
    return normals(pose.theta, pose.phi)


def forward_model_batch(array: TransmitterArray, params: np.ndarray, sensor: SensorSpec) -> np.ndarray:
    """Predicted signed amplitudes for many poses.

    ``params`` has rows ``[x, y, z, theta, phi]``; returns shape (P, K), volts.
    Works component-wise on (P, K) arrays, which is the solver's hot path.
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    c = array.centers
    m = array.moments
    rx = params[:, 0:1] - c[:, 0]
    ry = params[:, 1:2] - c[:, 1]
    rz = params[:, 2:3] - c[:, 2]
    r2 = rx * rx + ry * ry + rz * rz
    if np.any(r2 <= SINGULAR_RADIUS**2):
        raise SingularPoint("field point within 1e-6 m of a coil center")
    theta = params[:, 3:4]
    phi = params[:, 4:5]
    sin_phi = np.sin(phi)
    nx = np.cos(theta) * sin_phi
    ny = np.sin(theta) * sin_phi
    nz = np.cos(phi)
    inv_r2 = 1.0 / r2
    inv_r3 = inv_r2 / np.sqrt(r2)
    m_dot_r = rx * m[:, 0] + ry * m[:, 1] + rz * m[:, 2]
    n_dot_r = rx * nx + ry * ny + rz * nz
    m_dot_n = nx * m[:, 0] + ny * m[:, 1] + nz * m[:, 2]
    flux = _MU0_OVER_4PI * inv_r3 * (3.0 * m_dot_r * n_dot_r * inv_r2 - m_dot_n)
    return flux * (sensor.turns_area * array.gains)


def coupling_matrix(array: TransmitterArray, positions, sensor: SensorSpec) -> np.ndarray:
    """Per-coil amplitude per unit normal component, shape (P, K, 3).

    The amplitudes are linear in the sensor normal: ``V = G @ n``.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    fields = _dipole_fields(positions, array.centers, array.moments)
    return fields * (sensor.turns_area * array.gains)[None, :, None]


def forward_model(array: TransmitterArray, pose: Pose5DOF, sensor: SensorSpec) -> np.ndarray:
    """Induced EMF amplitude V_k = omega_k * N_s A_s * g_k * (B_k . n) per coil."""
    return forward_model_batch(array, pose.as_array()[None, :], sensor)[0]
