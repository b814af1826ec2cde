"""5-DOF sensor pose and hemisphere canonicalization."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HALF_PI = 0.5 * math.pi


def wrap_angle(theta):
    """Wrap angle(s) into [-pi, pi); values already in range pass through unchanged."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta >= -math.pi) & (theta < math.pi)
    wrapped = np.where(inside, theta, np.mod(theta + math.pi, 2.0 * math.pi) - math.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Pose5DOF:
    """Sensor position (m) plus yaw ``theta`` (azimuth about +z) and pitch
    ``phi`` (inclination from +z), both in radians."""

    x: float
    y: float
    z: float
    theta: float = 0.0
    phi: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.theta, self.phi])

    @classmethod
    def from_array(cls, values) -> "Pose5DOF":
        x, y, z, theta, phi = (float(v) for v in values)
        return cls(x, y, z, theta, phi)

    def flipped(self) -> "Pose5DOF":
        """Same position with the sensor normal reversed."""
        return Pose5DOF(self.x, self.y, self.z, self.theta + math.pi, math.pi - self.phi)

    def is_canonical(self) -> bool:
        return 0.0 <= self.phi <= HALF_PI and -math.pi <= self.theta < math.pi


def canonicalize_array(params: np.ndarray) -> np.ndarray:
    """Vectorized :func:`canonicalize` over rows ``[x, y, z, theta, phi]``."""
    out = np.array(params, dtype=float, copy=True)
    theta = out[..., 3]
    phi = np.mod(out[..., 4], 2.0 * math.pi)
    # (theta, 2pi - phi) and (theta + pi, phi) describe the same normal
    far = phi > math.pi
    phi = np.where(far, 2.0 * math.pi - phi, phi)
    theta = np.where(far, theta + math.pi, theta)
    lower = phi > HALF_PI
    phi = np.where(lower, math.pi - phi, phi)
    theta = np.where(lower, theta + math.pi, theta)
    out[..., 3] = wrap_angle(theta)
    out[..., 4] = phi
    return out


def canonicalize(pose: Pose5DOF) -> Pose5DOF:
    """Map a pose onto the upper hemisphere, phi in [0, pi/2], theta in [-pi, pi).

    A symmetric sensor coil cannot distinguish its normal from the reversed
    one, so poses with phi > pi/2 are replaced by their antipodal
    orientation. Position is untouched and the mapping is idempotent.
    """
    return Pose5DOF.from_array(canonicalize_array(pose.as_array()))
