"""Bounded Levenberg-Marquardt pose solver with warm start and multi-start fallback.

Residuals are the normalized differences between forward-model amplitudes
and measured amplitudes. The LM core runs on a batch of starting points at
once, which keeps the multi-start fallback cheap.
"""
from __future__ import annotations

import math
import time
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateMeasurement, LengthMismatch, NoConvergence, NumericalBreakdown
from .fieldmodel import SensorSpec, TransmitterArray, coupling_matrix, default_array, forward_model_batch
from .pose import HALF_PI, Pose5DOF, canonicalize

__all__ = [
    "Bounds",
    "Pose5DOF",
    "SolveResult",
    "SolverSession",
    "SolverSettings",
    "canonicalize",
    "default_bounds",
    "jacobian",
    "levenberg_marquardt",
    "levenberg_marquardt_batch",
    "residuals",
    "solve_pose",
]

DEGENERATE_AMPLITUDE = 1e-15
MAX_DAMPING = 1e12
# multiple of the quadrature noise energy accepted as a global minimum
NOISE_ACCEPT_FACTOR = 4.0
# relative RMS misfit below which a warm result is never second-guessed
WARM_ACCEPT_FLOOR = 1e-6


@dataclass(frozen=True)
class Bounds:
    """Box constraints on ``[x, y, z, theta, phi]``.

    A theta range spanning a full turn is treated as periodic: iterates wrap
    instead of sticking to the seam at +/-pi.
    """

    lower: tuple[float, ...] = (-0.25, -0.25, 0.02, -math.pi, 0.0)
    upper: tuple[float, ...] = (0.25, 0.25, 0.30, math.pi, HALF_PI)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != 5 or len(hi) != 5:
            raise ValueError("bounds need 5 components")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"lower bounds must be below upper bounds: {lo} vs {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def theta_periodic(self) -> bool:
        return self.upper[3] - self.lower[3] >= 2.0 * math.pi - 1e-12

    def project(self, params: np.ndarray) -> np.ndarray:
        params = np.array(params, dtype=float)
        if self.theta_periodic:
            if self.lower[4] == 0.0:
                # stepping through the pole: (theta, -phi) is (theta + pi, phi)
                through = params[..., 4] < 0.0
                params[..., 4] = np.where(through, -params[..., 4], params[..., 4])
                params[..., 3] = np.where(through, params[..., 3] + math.pi, params[..., 3])
            theta = np.mod(params[..., 3] + math.pi, 2.0 * math.pi) - math.pi
        out = np.clip(params, self.lower, self.upper)
        if self.theta_periodic:
            out[..., 3] = theta
        return out

    def contains(self, pose: Pose5DOF, tol: float = 1e-12) -> bool:
        p = pose.as_array()
        return bool(np.all(p >= np.asarray(self.lower) - tol) and np.all(p <= np.asarray(self.upper) + tol))

    def shrunk(self, margin: float) -> "Bounds":
        """Position box pulled in by ``margin`` meters on each face."""
        lo = list(self.lower)
        hi = list(self.upper)
        for i in range(3):
            lo[i] += margin
            hi[i] -= margin
        return Bounds(tuple(lo), tuple(hi))


def default_bounds() -> Bounds:
    return Bounds()


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 100
    residual_tolerance: float = 1e-20
    step_tolerance: float = 1e-10
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.1
    fd_step_position: float = 1e-6
    fd_step_angle: float = 1e-6
    multistart_grid: int = 27
    # stationarity: max |cos| between residual and any Jacobian column
    gradient_tolerance: float = 1e-8
    # warm-start acceptance limit for raw amplitude arrays, which carry no noise estimate
    fallback_residual: float = 0.05
    # cold solves also seed LM from the best local minima of a position scan
    scan_spacing: float = 0.01
    scan_seeds: int = 6

    def __post_init__(self):
        for name in ("residual_tolerance", "step_tolerance", "initial_damping",
                     "fd_step_position", "fd_step_angle", "fallback_residual",
                     "gradient_tolerance", "scan_spacing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.multistart_grid < 1:
            raise ValueError("multistart_grid must be >= 1")
        if self.scan_seeds < 0:
            raise ValueError("scan_seeds must be >= 0")
        if not (self.damping_up > 1.0 and 0.0 < self.damping_down < 1.0):
            raise ValueError("damping factors must satisfy up > 1 > down > 0")

    @property
    def fd_steps(self) -> np.ndarray:
        p, a = self.fd_step_position, self.fd_step_angle
        return np.array([p, p, p, a, a])


@dataclass
class SolveResult:
    pose: Pose5DOF
    residual_norm: float
    iterations: int
    converged: bool
    warm_started: bool = False
    solve_time: int = 0
    sign: float = 1.0


def _measured(measurement) -> np.ndarray:
    amps = getattr(measurement, "amplitudes", measurement)
    return np.asarray(amps, dtype=float).reshape(-1)


def _scale(measured: np.ndarray) -> float:
    if np.all(np.abs(measured) < DEGENERATE_AMPLITUDE):
        raise DegenerateMeasurement("all measured amplitudes are below 1e-15 V")
    return float(np.max(np.abs(measured)))


def _residual_fn(measured, array, sensor, sign=1.0):
    if len(measured) != array.K:
        raise LengthMismatch(f"measurement has {len(measured)} amplitudes for {array.K} coils")
    scale = _scale(measured)
    target = sign * measured

    def fn(params):
        return (forward_model_batch(array, params, sensor) - target) / scale

    return fn


def _signed_residual_fn(measured, array, sensor, signs):
    """Row-aware residuals where start ``i`` fits ``signs[i] * measured``."""
    if len(measured) != array.K:
        raise LengthMismatch(f"measurement has {len(measured)} amplitudes for {array.K} coils")
    scale = _scale(measured)
    targets = np.asarray(signs, dtype=float)[:, None] * measured[None, :]

    def fn(params, rows):
        return (forward_model_batch(array, params, sensor) - targets[rows]) / scale

    return fn


def _rowless(fn):
    return lambda params, rows: fn(params)


def residuals(pose: Pose5DOF, measurement, array: TransmitterArray, sensor: SensorSpec) -> np.ndarray:
    """f_i = (model_i - measured_i) / max_k |measured_k|."""
    fn = _residual_fn(_measured(measurement), array, sensor)
    return fn(pose.as_array()[None, :])[0]


def _fd_jacobian(fn, params: np.ndarray, steps: np.ndarray, rows=None) -> np.ndarray:
    """Central differences for a batch: params (S, 5) -> J (S, K, 5).

    ``fn(params, rows)`` is row-aware; ``rows`` names the start each
    parameter row belongs to.
    """
    s, d = params.shape
    if rows is None:
        rows = np.arange(s)
    offsets = np.zeros((2 * d, d))
    offsets[:d] = np.diag(steps)
    offsets[d:] = -np.diag(steps)
    probes = (params[:, None, :] + offsets[None]).reshape(-1, d)
    values = fn(probes, np.repeat(rows, 2 * d)).reshape(s, 2 * d, -1)
    return np.transpose((values[:, :d] - values[:, d:]) / (2.0 * steps[None, :, None]), (0, 2, 1))


def jacobian(pose: Pose5DOF, measurement, array: TransmitterArray, sensor: SensorSpec,
             settings: SolverSettings | None = None) -> np.ndarray:
    """K x 5 central-difference Jacobian of :func:`residuals`."""
    settings = settings or SolverSettings()
    fn = _residual_fn(_measured(measurement), array, sensor)
    return _fd_jacobian(_rowless(fn), pose.as_array()[None, :], settings.fd_steps)[0]


@dataclass
class _BatchOutcome:
    params: np.ndarray
    cost: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    broken: np.ndarray = field(default=None)


def _lm_core(x0: np.ndarray, fn, settings: SolverSettings, bounds: Bounds,
             stop_below: float | None = None, steps: np.ndarray | None = None,
             project: Callable[[np.ndarray], np.ndarray] | None = None) -> _BatchOutcome:
    """Damped Gauss-Newton on every row of ``x0`` simultaneously.

    ``fn(params, rows)`` evaluates residuals for parameter rows belonging to
    starts ``rows``. Each start keeps its own damping. A trial step is
    projected into the bounds before its cost is evaluated, so accepted
    iterates are always feasible. With ``stop_below`` the whole batch
    halts once any converged start has cost at or below it; unfinished
    starts are left unconverged. ``steps`` and ``project`` override the
    finite-difference steps and the feasibility map, for reduced problems.
    """
    project = project or bounds.project
    x = project(np.array(x0, dtype=float))
    s = len(x)
    f = fn(x, np.arange(s))
    cost = np.einsum("ij,ij->i", f, f)
    lam = np.full(s, settings.initial_damping)
    iterations = np.zeros(s, dtype=int)
    converged = cost < settings.residual_tolerance
    done = converged.copy()
    broken = np.zeros(s, dtype=bool)
    jac = np.zeros((s, f.shape[1], x.shape[1]))
    stale = np.ones(s, dtype=bool)
    steps = settings.fd_steps if steps is None else steps
    eye = np.eye(x.shape[1])

    for _ in range(settings.max_iterations):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        need = active[stale[active]]
        if need.size:
            jac[need] = _fd_jacobian(fn, x[need], steps, need)
            stale[need] = False
        J = jac[active]
        fa = f[active]
        jtj = np.einsum("ski,skj->sij", J, J)
        grad = np.einsum("ski,sk->si", J, fa)
        diag = np.einsum("sii->si", jtj)
        col_norm = np.sqrt(diag) * np.sqrt(cost[active])[:, None]
        cosine = np.abs(grad) / np.where(col_norm > 0, col_norm, np.inf)
        stationary = np.max(cosine, axis=1) < settings.gradient_tolerance
        if np.any(stationary):
            hit = active[stationary]
            converged[hit] = True
            done[hit] = True
            keep = ~stationary
            active, J, fa = active[keep], J[keep], fa[keep]
            jtj, grad, diag = jtj[keep], grad[keep], diag[keep]
            if active.size == 0:
                continue
        # a parameter with no influence (theta at phi = 0) still gets damped
        diag = np.maximum(diag, 1e-12 * np.maximum(diag.max(axis=1, keepdims=True), 1e-300))
        lhs = jtj + lam[active, None, None] * diag[:, :, None] * eye
        delta = np.empty_like(grad)
        solvable = np.ones(active.size, dtype=bool)
        try:
            delta[:] = -np.linalg.solve(lhs, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            for i in range(active.size):
                try:
                    delta[i] = -np.linalg.solve(lhs[i], grad[i])
                except np.linalg.LinAlgError:
                    solvable[i] = False
        solvable &= np.all(np.isfinite(delta), axis=1)

        iterations[active] += 1
        trial = project(x[active] + np.where(solvable[:, None], delta, 0.0))
        ft = fn(trial, active)
        ct = np.einsum("ij,ij->i", ft, ft)
        accept = solvable & (ct < cost[active])

        idx = active[accept]
        moved = np.linalg.norm(trial[accept] - x[idx], axis=1)
        x[idx] = trial[accept]
        f[idx] = ft[accept]
        cost[idx] = ct[accept]
        lam[idx] *= settings.damping_down
        stale[idx] = True
        hit = (cost[idx] < settings.residual_tolerance) | (moved < settings.step_tolerance)
        converged[idx[hit]] = True
        done[idx[hit]] = True

        rej = active[~accept]
        lam[rej] *= settings.damping_up
        small = solvable[~accept] & (np.linalg.norm(delta[~accept], axis=1) < settings.step_tolerance)
        converged[rej[small]] = True
        done[rej[small]] = True
        blown = rej[~small & (lam[rej] > MAX_DAMPING)]
        done[blown] = True
        broken[blown] = ~solvable[~accept][~small & (lam[rej] > MAX_DAMPING)]
        if stop_below is not None and np.any(converged & (cost <= stop_below)):
            break

    return _BatchOutcome(x, cost, iterations, converged, broken)


def _as_result(outcome: _BatchOutcome, i: int, warm: bool = False, elapsed: int = 0, sign: float = 1.0):
    return SolveResult(
        pose=Pose5DOF.from_array(outcome.params[i]),
        residual_norm=float(math.sqrt(outcome.cost[i])),
        iterations=int(outcome.iterations[i]),
        converged=bool(outcome.converged[i]),
        warm_started=warm,
        solve_time=elapsed,
        sign=sign,
    )


def levenberg_marquardt_batch(inits, residual_fn: Callable[[np.ndarray], np.ndarray],
                              settings: SolverSettings | None = None,
                              bounds: Bounds | None = None) -> list[SolveResult]:
    """Run LM independently from each row of ``inits`` (shape (S, 5)).

    ``residual_fn`` must be vectorized: it maps an (M, 5) parameter array to
    an (M, K) residual array.
    """
    settings = settings or SolverSettings()
    bounds = bounds or default_bounds()
    t0 = time.perf_counter_ns()
    outcome = _lm_core(np.atleast_2d(np.asarray(inits, dtype=float)), _rowless(residual_fn), settings, bounds)
    elapsed = time.perf_counter_ns() - t0
    return [_as_result(outcome, i, elapsed=elapsed) for i in range(len(outcome.params))]


def levenberg_marquardt(init: Pose5DOF, residual_fn: Callable[[np.ndarray], np.ndarray],
                        settings: SolverSettings | None = None,
                        bounds: Bounds | None = None) -> SolveResult:
    """Single-start bounded LM. The returned pose is not canonicalized.

    Solves (J^T J + lam diag(J^T J)) delta = -J^T f each iteration, shrinking
    lam by ``damping_down`` on an accepted step and growing it by
    ``damping_up`` on a rejected one. Raises :class:`NumericalBreakdown` if
    the normal equations stay singular past lam = 1e12.
    """
    settings = settings or SolverSettings()
    bounds = bounds or default_bounds()
    t0 = time.perf_counter_ns()
    outcome = _lm_core(init.as_array()[None, :], _rowless(residual_fn), settings, bounds)
    if outcome.broken[0]:
        raise NumericalBreakdown("damped normal equations singular beyond lambda = 1e12")
    return _as_result(outcome, 0, elapsed=time.perf_counter_ns() - t0)


def multistart_inits(settings: SolverSettings, bounds: Bounds) -> np.ndarray:
    """Regular lattice of starts: cell-centred positions x three azimuths at phi = pi/4.

    ``multistart_grid`` counts total starts; positions get a third of them,
    laid out as an n x n grid in x, y and as many z layers as fit.
    """
    n_pos = max(1, settings.multistart_grid // 3)
    nxy = max(1, int(math.isqrt(n_pos)))
    nz = max(1, n_pos // (nxy * nxy))
    lo, hi = np.asarray(bounds.lower), np.asarray(bounds.upper)

    def levels(i, n):
        return lo[i] + (np.arange(n) + 0.5) * (hi[i] - lo[i]) / n

    phi = float(np.clip(math.pi / 4, lo[4], hi[4]))
    starts = []
    for z in levels(2, nz):
        for y in levels(1, nxy):
            for x in levels(0, nxy):
                for theta in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
                    theta = math.remainder(theta, 2 * math.pi)
                    if not bounds.theta_periodic:
                        theta = float(np.clip(theta, lo[3], hi[3]))
                    starts.append((x, y, z, theta, phi))
    return np.array(starts)


def _normal_fit(g: np.ndarray, measured: np.ndarray) -> np.ndarray:
    """Least-squares normal (unconstrained length) for couplings g (P, K, 3)."""
    gtg = np.einsum("pki,pkj->pij", g, g)
    gtg += 1e-14 * np.trace(gtg, axis1=1, axis2=2)[:, None, None] * np.eye(3)
    gtm = np.einsum("pki,k->pi", g, measured)
    return np.linalg.solve(gtg, gtm[..., None])[..., 0]


def _position_residual_fn(measured, array, sensor):
    """Residuals over position only, the normal eliminated by least squares.

    The model is linear in the normal, so for fixed position the best normal
    is a 3x3 solve. Dropping the unit-length constraint removes the curved
    orientation valleys that slow full LM near a coil.
    """
    scale = _scale(measured)

    def fn(pos, rows):
        g = coupling_matrix(array, pos, sensor)
        n = _normal_fit(g, measured)
        return (np.einsum("pki,pi->pk", g, n) - measured) / scale

    return fn


def _orientation_from_normals(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) on the upper hemisphere plus the sign that absorbs a flip."""
    sign = np.where(n[:, 2] < 0.0, -1.0, 1.0)
    n = n * sign[:, None]
    n = n / np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-300)
    return np.column_stack([np.arctan2(n[:, 1], n[:, 0]), np.arccos(np.clip(n[:, 2], -1.0, 1.0))]), sign


@lru_cache(maxsize=8)
def _scan_grid(coils: tuple, sensor: SensorSpec, lower: tuple, upper: tuple, spacing: float):
    lo, hi = np.asarray(lower[:3]), np.asarray(upper[:3])
    shape = tuple(max(2, int(round((b - a) / spacing))) for a, b in zip(lo, hi))
    axes = [a + (np.arange(n) + 0.5) * (b - a) / n for a, b, n in zip(lo, hi, shape)]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    g = coupling_matrix(TransmitterArray(coils), points, sensor)
    pinv = np.linalg.pinv(g)
    for arr in (points, g, pinv):
        arr.flags.writeable = False
    return shape, points, g, pinv


def _scan_seeds(measured, array, sensor, settings: SolverSettings, bounds: Bounds) -> np.ndarray:
    """Positions of the best local minima of the normal-eliminated cost on a grid."""
    shape, points, g, pinv = _scan_grid(array.coils, sensor, bounds.lower, bounds.upper, settings.scan_spacing)
    n = pinv @ measured
    r = np.einsum("pki,pi->pk", g, n) - measured
    cost = np.einsum("pk,pk->p", r, r).reshape(shape)
    padded = np.pad(cost, 1, constant_values=np.inf)
    neighbours = np.full(shape, np.inf)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if dx or dy or dz:
                    view = padded[1 + dx:1 + dx + shape[0], 1 + dy:1 + dy + shape[1], 1 + dz:1 + dz + shape[2]]
                    np.minimum(neighbours, view, out=neighbours)
    minima = np.flatnonzero(cost.ravel() <= neighbours.ravel())
    best = minima[np.argsort(cost.ravel()[minima])[: settings.scan_seeds]]
    return points[best]


def _seeded_starts(measured, array, sensor, settings: SolverSettings, bounds: Bounds, accept: float):
    """Scan seeds refined over position, then given their least-squares orientation."""
    seeds = _scan_seeds(measured, array, sensor, settings, bounds)
    lo, hi = np.asarray(bounds.lower[:3]), np.asarray(bounds.upper[:3])
    refined = _lm_core(seeds, _position_residual_fn(measured, array, sensor), settings, bounds,
                       stop_below=accept, steps=settings.fd_steps[:3],
                       project=lambda p: np.clip(p, lo, hi))
    pos = refined.params
    angles, signs = _orientation_from_normals(_normal_fit(coupling_matrix(array, pos, sensor), measured))
    return np.column_stack([pos, angles]), signs, int(refined.iterations.sum())


def _acceptable_cost(measurement, measured: np.ndarray, settings: SolverSettings) -> float:
    """Cost at which a converged multi-start candidate ends the search.

    The sine projections of phase-coherent tones hold only noise, so their
    energy estimates the noise floor of the cosine amplitudes. A local
    minimum within a few times that floor is taken as the global one. Without
    quadrature data only the residual tolerance counts.
    """
    quadrature = getattr(measurement, "quadrature", None)
    if quadrature is None:
        return settings.residual_tolerance
    floor = float(np.sum(np.square(quadrature))) / _scale(measured) ** 2
    return min(max(settings.residual_tolerance, NOISE_ACCEPT_FACTOR * floor), settings.fallback_residual**2)


def _warm_acceptable_cost(measurement, accept: float, settings: SolverSettings) -> float:
    """Cost below which a warm-started result is kept without a cold search.

    A warm start from a distant pose can settle in a false minimum whose
    misfit is still small in absolute terms, so the noise floor decides when
    it is known. Raw amplitude arrays carry no noise estimate and only have
    to meet ``fallback_residual``.
    """
    if getattr(measurement, "quadrature", None) is None:
        return settings.fallback_residual**2
    return max(accept, WARM_ACCEPT_FLOOR**2)


def _on_position_face(params: np.ndarray, bounds: Bounds) -> bool:
    pos = params[:3]
    return bool(np.any(np.isclose(pos, bounds.lower[:3], rtol=0, atol=1e-9))
                or np.any(np.isclose(pos, bounds.upper[:3], rtol=0, atol=1e-9)))


def solve_pose(measurement, warm_start: Optional[Pose5DOF] = None,
               array: TransmitterArray | None = None, sensor: SensorSpec | None = None,
               settings: SolverSettings | None = None, bounds: Bounds | None = None) -> SolveResult:
    """Recover the canonical sensor pose from one measurement.

    The sensor's winding sign is unobservable, so the fit allows the
    measurement to match the model up to a global sign. With a warm start,
    the sign is taken from the model at the warm pose and LM runs once; it
    falls back to the full multi-start lattice (both signs) if that run
    fails, pins a position bound, or leaves a misfit above the noise floor
    estimated from the measurement's quadrature components (or above
    ``settings.fallback_residual`` for raw amplitude arrays).
    """
    t0 = time.perf_counter_ns()
    array = array or default_array()
    sensor = sensor or SensorSpec()
    settings = settings or SolverSettings()
    bounds = bounds or default_bounds()
    measured = _measured(measurement)
    _scale(measured)

    accept = _acceptable_cost(measurement, measured, settings)
    if warm_start is not None:
        init = bounds.project(canonicalize(warm_start).as_array())
        model = forward_model_batch(array, init[None, :], sensor)[0]
        sign = -1.0 if float(model @ measured) < 0 else 1.0
        out = _lm_core(init[None, :], _signed_residual_fn(measured, array, sensor, [sign]), settings, bounds)
        if (out.converged[0] and out.cost[0] <= _warm_acceptable_cost(measurement, accept, settings)
                and not _on_position_face(out.params[0], bounds)):
            return _finish(out, 0, True, t0, sign)
        warm_iterations = int(out.iterations[0])
    else:
        warm_iterations = 0

    lattice = multistart_inits(settings, bounds)
    starts = np.vstack([lattice, lattice])
    signs = np.repeat([1.0, -1.0], len(lattice))
    seed_iterations = 0
    if settings.scan_seeds:
        seeded, seed_signs, seed_iterations = _seeded_starts(measured, array, sensor, settings, bounds, accept)
        starts = np.vstack([seeded, starts])
        signs = np.concatenate([seed_signs, signs])
    out = _lm_core(starts, _signed_residual_fn(measured, array, sensor, signs), settings, bounds,
                   stop_below=accept)
    ok = np.flatnonzero(out.converged)
    if ok.size == 0:
        raise NoConvergence(f"none of {len(starts)} starts converged")
    i = int(ok[np.argmin(out.cost[ok])])
    result = _finish(out, i, warm_start is not None, t0, float(signs[i]))
    # cold solves report the work of the whole lattice
    result.iterations = warm_iterations + seed_iterations + int(out.iterations.sum())
    return result


def _finish(out: _BatchOutcome, i: int, warm: bool, t0: int, sign: float) -> SolveResult:
    result = _as_result(out, i, warm, 0, sign)
    result.pose = canonicalize(result.pose)
    result.solve_time = time.perf_counter_ns() - t0
    return result


class SolverSession:
    """Holds the warm-start slot for one sensor; use from a single thread."""

    def __init__(self, array: TransmitterArray | None = None, sensor: SensorSpec | None = None,
                 settings: SolverSettings | None = None, bounds: Bounds | None = None):
        self.array = array or default_array()
        self.sensor = sensor or SensorSpec()
        self.settings = settings or SolverSettings()
        self.bounds = bounds or default_bounds()
        self.last_pose: Optional[Pose5DOF] = None

    def reset(self) -> None:
        self.last_pose = None

    def solve(self, measurement) -> SolveResult:
        result = solve_pose(measurement, self.last_pose, self.array, self.sensor, self.settings, self.bounds)
        self.last_pose = result.pose
        return result
