"""Numeric trajectories of the classical system induced by a vector field.

A field ``X`` with images ``f_i`` becomes the ODE ``dx_i/dt = F_i(x)`` once its
coefficients are evaluated at a numeric ``q0`` (``q0 = 1`` is the usual
classical reading; smaller ``q0`` moves toward the ``q -> 0`` limit).
"""

from __future__ import annotations

import contextlib
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .dynamics import CompiledField, MPCompiledField, VectorField, classicalize, classicalize_field, jacobian
from .errors import (
    NonFiniteState,
    NumericalError,
    PoleAtZero,
    PoleEncountered,
    QSpaceError,
    SingularJacobian,
)
from .qalgebra import QPoly, eval_classical

log = logging.getLogger(__name__)

METHODS = ("tangent", "euler", "rk4")
DIVERGENCE_BOUND = 1e12


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    h: float = 0.01
    T: float = 1.0
    q0: float = 1.0
    t0: float = 0.0
    precision: int | None = None  # decimal digits; None means float64

    def __post_init__(self):
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("step h must be positive")
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise ValueError("horizon T must be non-negative")
        if not 0 < self.q0 <= 1:
            raise ValueError("q0 must lie in (0, 1]")
        if self.precision is not None and self.precision < 16:
            raise ValueError("precision must be at least 16 digits")


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray  # shape (len(times), n)
    q0: float
    method: str
    step: float

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def velocity(self) -> np.ndarray:
        """Finite-difference velocity at every sample."""
        return finite_difference(self.points, self.times)

    def to_csv(self) -> str:
        header = "t," + ",".join(f"x{i + 1}" for i in range(self.dim))
        rows = [header]
        for t, p in zip(self.times, self.points):
            rows.append(",".join(repr(float(v)) for v in (t, *p)))
        return "\n".join(rows) + "\n"


def time_grid(T: float, h: float, t0: float = 0.0, precision: int | None = None) -> np.ndarray:
    """Uniform grid on ``[t0, t0 + T]`` whose spacing is ``h`` or slightly less.

    With ``precision`` the grid is an object array of mpmath numbers.
    """
    if T == 0:
        n = 0
    else:
        n = max(1, math.ceil(T / h - 1e-9))
    if precision is None:
        return np.array([float(t0)]) if n == 0 else t0 + T * np.arange(n + 1) / n
    with mpmath.workdps(precision):
        t0m, Tm = mpmath.mpf(t0), mpmath.mpf(T)
        return np.array([t0m + Tm * k / n if n else t0m for k in range(n + 1)], dtype=object)


def _euler_step(F, x, h):
    return x + h * F(x)


def _rk4_step(F, x, h):
    k1 = F(x)
    k2 = F(x + 0.5 * h * k1)
    k3 = F(x + 0.5 * h * k2)
    k4 = F(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


STEPPERS = {"euler": _euler_step, "rk4": _rk4_step}


def run_steps(F: CompiledField, x0, times: np.ndarray, method: str) -> np.ndarray:
    """Fixed-step integration of ``dx/dt = F(x)`` over ``times``.

    ``x0`` may be a single state ``(n,)`` or a batch ``(m, n)``. Raises
    ``PoleEncountered`` when a stage lands on a pole and ``NonFiniteState`` when
    any coordinate leaves ``[-1e12, 1e12]``.
    """
    step = STEPPERS[method]
    if F.object_dtype:
        ctx = mpmath.workdps(F.dps)
        x = np.array([mpmath.mpf(v) for v in x0], dtype=object)
        out = np.empty((len(times),) + x.shape, dtype=object)

        def finite(y):
            return all(mpmath.isfinite(v) for v in y)
    else:
        ctx = contextlib.nullcontext()
        x = np.array(x0, dtype=float)
        out = np.empty((len(times),) + x.shape)

        def finite(y):
            return bool(np.all(np.isfinite(y)))

    out[0] = x
    t_now = times[0]

    def guarded(y):
        if F.has_pole(y):
            raise PoleEncountered("field has a pole on the trajectory", float(t_now))
        return F(y)

    with ctx:
        for k in range(1, len(times)):
            t_now = times[k - 1]
            x = step(guarded, x, times[k] - times[k - 1])
            if not finite(x) or np.abs(x).max() > DIVERGENCE_BOUND:
                raise NonFiniteState("state diverged", float(times[k]))
            out[k] = x
    return out


def _check_point(X: VectorField, P: Sequence[float]) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.shape != (X.dim,):
        raise ValueError(f"initial point must have {X.dim} coordinates")
    return P


def compile_field(X: VectorField, q0: float, precision: int | None = None):
    if precision is None:
        return CompiledField(classicalize_field(X, q0))
    exact = [classicalize(img, Fraction(q0), exact=True) for img in X.images]
    return MPCompiledField(exact, precision)


def tangent_trajectory(X: VectorField, P: Sequence[float], q0: float = 1.0, T: float = 1.0, h: float = 0.01) -> Trajectory:
    """The affine curve ``t -> P + t F(P)``: passes through ``P`` with velocity ``F(P)``."""
    P = _check_point(X, P)
    F = compile_field(X, q0)
    if F.has_pole(P):
        raise PoleAtZero("field has a pole at the initial point")
    v = F(P)
    times = time_grid(T, h)
    points = P[None, :] + times[:, None] * v[None, :]
    points[0] = P
    return Trajectory(times, points, q0, "tangent", h)


def integrate(X: VectorField, P: Sequence[float], cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    P = _check_point(X, P)
    F = compile_field(X, cfg.q0, cfg.precision)
    times = time_grid(cfg.T, cfg.h, cfg.t0, cfg.precision)
    points = run_steps(F, P, times, cfg.method)
    return Trajectory(times, points, cfg.q0, cfg.method, cfg.h)


def residual_defect(traj: Trajectory, X: VectorField) -> float:
    """Largest interior mismatch between the central-difference velocity and ``F``."""
    if len(traj.times) < 3:
        raise ValueError("need at least three samples")
    F = compile_field(X, traj.q0)
    t, p = traj.times, traj.points
    deriv = (p[2:] - p[:-2]) / (t[2:] - t[:-2])[:, None]
    return float(np.abs(deriv - F(p[1:-1])).max())


def finite_difference(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Derivative samples from divided differences.

    Central differences in the interior and second-order one-sided formulas at
    the ends; constants differentiate to exactly zero.
    """
    v = np.asarray(values, dtype=float)
    t = np.asarray(times, dtype=float)
    if len(v) < 3:
        raise ValueError("need at least three samples")
    d = np.diff(v, axis=0) / np.diff(t)[(slice(None),) + (None,) * (v.ndim - 1)]
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2])[(slice(None),) + (None,) * (v.ndim - 1)]
    out[0] = d[0] - (d[1] - d[0]) * (t[1] - t[0]) / (t[2] - t[0])
    out[-1] = d[-1] + (d[-1] - d[-2]) * (t[-1] - t[-2]) / (t[-1] - t[-3])
    return out


def rate_of_change(traj: Trajectory, f: QPoly) -> np.ndarray:
    """Samples of ``d/dt f(alpha(t))`` along the trajectory."""
    values = np.array([eval_classical(f, p, traj.q0) for p in traj.points], dtype=float)
    return finite_difference(values, traj.times)


@dataclass
class EquilibriumSearch:
    points: list[tuple[float, ...]]
    failures: list[tuple[tuple[float, ...], str]] = field(default_factory=list)


def _newton(F_list, F: CompiledField, x, tol: float, max_iter: int):
    for _ in range(max_iter):
        if F.has_pole(x):
            raise PoleAtZero("Newton iterate hit a pole")
        r = F(x)
        if np.abs(r).max() < tol:
            return x
        J = jacobian(F_list, x)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e14:
            raise SingularJacobian(f"singular Jacobian at {tuple(x)}")
        x = x - np.linalg.solve(J, r)
        if not np.all(np.isfinite(x)) or np.abs(x).max() > 1e8:
            raise NonFiniteState("Newton iteration diverged", 0.0)
    if np.abs(F(x)).max() < tol:
        return x
    raise NumericalError("Newton iteration did not converge")


def search_equilibria(
    X: VectorField,
    q0: float = 1.0,
    box: Sequence[tuple[float, float]] | None = None,
    seeds_per_axis: int = 5,
    tol: float = 1e-10,
    dedup: float = 1e-8,
    max_iter: int = 60,
) -> EquilibriumSearch:
    """Newton's method from a uniform seed grid over ``box`` (one interval per axis)."""
    n = X.dim
    if box is None:
        box = [(-2.0, 2.0)] * n
    if len(box) != n:
        raise ValueError(f"box needs {n} intervals")
    for lo, hi in box:
        if not hi > lo:
            raise ValueError("box must be non-degenerate")
    if seeds_per_axis < 1:
        raise ValueError("seeds_per_axis must be positive")
    F_list = classicalize_field(X, q0)
    F = CompiledField(F_list)
    axes = [np.linspace(lo, hi, seeds_per_axis) if seeds_per_axis > 1 else np.array([(lo + hi) / 2]) for lo, hi in box]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    slack = [1e-9 * (hi - lo) for lo, hi in box]

    found: list[np.ndarray] = []
    failures = []
    for seed in grid:
        try:
            x = _newton(F_list, F, seed.copy(), tol, max_iter)
        except QSpaceError as exc:
            failures.append((tuple(float(v) for v in seed), f"{type(exc).__name__}: {exc}"))
            continue
        if not all(lo - s <= v <= hi + s for v, (lo, hi), s in zip(x, box, slack)):
            continue
        if any(np.abs(x - y).max() < dedup for y in found):
            continue
        found.append(x + 0.0)
    if failures:
        log.debug("%d of %d seeds failed", len(failures), len(grid))
    points = sorted(tuple(float(v) for v in x) for x in found)
    return EquilibriumSearch(points, failures)


def equilibria(X: VectorField, q0: float = 1.0, search_box=None, seeds_per_axis: int = 5) -> list[tuple[float, ...]]:
    return search_equilibria(X, q0, search_box, seeds_per_axis).points


@dataclass
class SweepRow:
    q0: float
    endpoint: tuple[float, ...] | None
    dist_limit: float
    dist_smallest: float
    dist_classical: float
    status: str = "ok"


@dataclass
class SweepTable:
    rows: list[SweepRow]
    limit_status: str
    limit_endpoint: tuple[float, ...] | None
    dim: int

    def to_csv(self) -> str:
        coords = [f"x{i + 1}" for i in range(self.dim)]
        lines = [",".join(["q0", *coords, "dist_limit", "dist_smallest", "dist_classical", "status"])]

        def fmt(v):
            return repr(float(v))

        for r in self.rows:
            end = r.endpoint if r.endpoint is not None else (math.nan,) * self.dim
            lines.append(",".join([fmt(r.q0), *map(fmt, end), fmt(r.dist_limit), fmt(r.dist_smallest), fmt(r.dist_classical), r.status]))
        end = self.limit_endpoint if self.limit_endpoint is not None else (math.nan,) * self.dim
        lines.append(",".join(["0.0", *map(fmt, end), "0.0" if self.limit_endpoint is not None else "nan", "nan", "nan", self.limit_status]))
        return "\n".join(lines) + "\n"


def _sup_distance(a: np.ndarray | None, b: np.ndarray | None) -> float:
    if a is None or b is None:
        return math.nan
    return float(np.abs(a - b).max())


def quantum_limit_sweep(
    X: VectorField,
    P: Sequence[float],
    q_list: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
) -> SweepTable:
    """Integrate at each ``q0`` of ``q_list`` and compare against the ``q -> 0`` system.

    The limit system has its coefficients evaluated at ``q = 0``; if some
    coefficient has a pole there, the limit is reported as unavailable and the
    remaining rows are still computed.
    """
    q_list = [float(q) for q in q_list]
    if not q_list:
        raise ValueError("q_list must not be empty")
    if any(not 0 < q <= 1 for q in q_list):
        raise ValueError("every q0 must lie in (0, 1]")
    if any(b >= a for a, b in zip(q_list, q_list[1:])):
        raise ValueError("q_list must be strictly descending")
    P = _check_point(X, P)
    times = time_grid(cfg.T, cfg.h, cfg.t0)

    def run(q0: float):
        F = compile_field(X, q0)
        return run_steps(F, P, times, cfg.method)

    try:
        limit = run(0.0)
        limit_status = "ok"
    except (PoleAtZero, NumericalError) as exc:
        limit = None
        limit_status = f"{type(exc).__name__}: {exc}"

    trajectories: dict[float, np.ndarray | None] = {}
    statuses: dict[float, str] = {}
    for q0 in dict.fromkeys([*q_list, 1.0]):
        try:
            trajectories[q0] = run(q0)
            statuses[q0] = "ok"
        except NumericalError as exc:
            trajectories[q0] = None
            statuses[q0] = f"{type(exc).__name__}: {exc}"

    smallest = trajectories[q_list[-1]]
    classical = trajectories[1.0]
    rows = []
    for q0 in q_list:
        traj = trajectories[q0]
        rows.append(
            SweepRow(
                q0,
                None if traj is None else tuple(float(v) for v in traj[-1]),
                _sup_distance(traj, limit),
                _sup_distance(traj, smallest),
                _sup_distance(traj, classical),
                statuses[q0],
            )
        )
    return SweepTable(rows, limit_status, None if limit is None else tuple(float(v) for v in limit[-1]), X.dim)
