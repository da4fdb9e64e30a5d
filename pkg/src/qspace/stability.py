"""Empirical epsilon-delta stability probing and linearized classification."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import CompiledField, VectorField, classicalize_field, jacobian
from .eigen import eigenvalues
from .errors import NotAnEquilibrium, NumericalError, PoleEncountered, ReferenceDiverged
from .qalgebra import generators
from .qparse import print_canonical
from .simulate import STEPPERS, compile_field, run_steps, time_grid

ASYMPTOTICALLY_STABLE = "asymptotically-stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"

EQUILIBRIUM_TOL = 1e-8
REAL_PART_TOL = 1e-9
# deviations must stay below eps * (1 - STRICT_MARGIN): absorbs last-ulp rounding of "< eps"
STRICT_MARGIN = 1e-9

SWAP_FIELD_NOTE = (
    "swap-field stability claim contradicted: the field x -> y, y -> x is documented as having "
    "stable solutions (the rest point (0,0) and c*(exp(-t), -exp(-t))), but the computed "
    "linearization at (0,0) has eigenvalues +1 and -1 (a saddle) and perturbations along (1,1) "
    "grow like exp(t)"
)


@dataclass(frozen=True)
class StabilityQuery:
    epsilons: tuple[float, ...] = (0.1, 0.01)
    t0: float = 0.0
    T: float = 5.0
    samples: int = 16
    delta_min: float = 1e-4
    q0: float = 1.0
    h: float = 0.01
    method: str = "rk4"
    seed: int = 0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps or any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ValueError("epsilons must be positive")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be sorted in descending order")
        if self.samples < 8:
            raise ValueError("need at least 8 samples")
        if not 0 < self.delta_min < min(eps):
            raise ValueError("delta_min must be positive and below every epsilon")
        if not self.T > self.t0:
            raise ValueError("horizon T must exceed t0")
        if not 0 < self.q0 <= 1:
            raise ValueError("q0 must lie in (0, 1]")
        if self.method not in STEPPERS:
            raise ValueError(f"unknown integration method {self.method!r}")


@dataclass(frozen=True)
class Witness:
    perturbation: tuple[float, ...]
    time: float
    deviation: float


@dataclass(frozen=True)
class ProbeRecord:
    epsilon: float
    delta: float
    passed: bool
    max_deviation: float


@dataclass(frozen=True)
class EpsilonOutcome:
    epsilon: float
    delta_estimate: float | None = None
    witness: Witness | None = None

    @property
    def stable(self) -> bool:
        return self.witness is None

    def to_dict(self) -> dict:
        if self.witness is None:
            return {"epsilon": self.epsilon, "delta_estimate": self.delta_estimate}
        w = self.witness
        return {
            "epsilon": self.epsilon,
            "unstable_witness": {
                "perturbation": list(w.perturbation),
                "time": w.time,
                "deviation": w.deviation,
            },
        }


@dataclass(frozen=True)
class Linearization:
    eigenvalues: tuple[complex, ...]
    cls: str


@dataclass
class StabilityReport:
    system_hash: str
    reference_point: tuple[float, ...]
    query: StabilityQuery
    outcomes: list[EpsilonOutcome]
    linearization: Linearization | None
    discrepancy_notes: list[str] = field(default_factory=list)
    trace: list[ProbeRecord] = field(default_factory=list)

    @property
    def mode(self) -> str:
        return f"empirical ({self.query.samples} samples, horizon T={self.query.T!r})"

    @property
    def cls(self) -> str | None:
        return None if self.linearization is None else self.linearization.cls

    def to_dict(self) -> dict:
        lin = self.linearization
        return {
            "system_hash": self.system_hash,
            "q0": self.query.q0,
            "reference_point": list(self.reference_point),
            "epsilons": list(self.query.epsilons),
            "mode": self.mode,
            "seed": self.query.seed,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "eigenvalues": None if lin is None else [[z.real, z.imag] for z in lin.eigenvalues],
            "class": None if lin is None else lin.cls,
            "discrepancy_notes": list(self.discrepancy_notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def system_hash(X: VectorField, q0: float | None = None) -> str:
    text = "\n".join(print_canonical(img) for img in X.images)
    text += f"\nq={'symbolic' if q0 is None else repr(float(q0))}"
    return hashlib.sha256(text.encode()).hexdigest()


def classify_eigenvalues(vals: Sequence[complex], tol: float = REAL_PART_TOL) -> str:
    if any(z.real > tol for z in vals):
        return UNSTABLE
    if all(z.real < -tol for z in vals):
        return ASYMPTOTICALLY_STABLE
    return MARGINAL


def classify_equilibrium(X: VectorField, p: Sequence[float], q0: float = 1.0) -> Linearization:
    F_list = classicalize_field(X, q0)
    p = np.asarray(p, dtype=float)
    residual = np.abs(CompiledField(F_list)(p)).max()
    if not residual < EQUILIBRIUM_TOL:
        raise NotAnEquilibrium(f"|F(p)| = {residual:g} at {tuple(p)}")
    vals = eigenvalues(jacobian(F_list, p))
    return Linearization(tuple(vals), classify_eigenvalues(vals))


def perturbation_directions(n: int, m: int, seed: int) -> np.ndarray:
    """Unit directions in the infinity norm: all sign corners (n <= 4), then random ones."""
    dirs = []
    if n <= 4:
        dirs = [list(s) for s in itertools.product((1.0, -1.0), repeat=n)]
    rng = np.random.default_rng(seed)
    extra = max(0, m - len(dirs))
    if extra:
        r = rng.uniform(-1.0, 1.0, size=(extra, n))
        r /= np.abs(r).max(axis=1, keepdims=True)
        dirs.extend(r.tolist())
    return np.array(dirs, dtype=float).reshape(-1, n)


def _check_delta(F: CompiledField, reference: np.ndarray, times: np.ndarray, P0: np.ndarray,
                 directions: np.ndarray, delta: float, eps: float, method: str):
    """Integrate every perturbed start and stop at the first per-coordinate violation.

    Returns ``(passed, max_deviation, witness)``.
    """
    step = STEPPERS[method]
    x = P0[None, :] + delta * directions
    bound = eps * (1.0 - STRICT_MARGIN)
    worst = 0.0
    for k in range(1, len(times)):
        if F.has_pole(x):
            raise PoleEncountered("field has a pole on a perturbed solution", float(times[k - 1]))
        with np.errstate(over="ignore", invalid="ignore"):
            x = step(F, x, times[k] - times[k - 1])
            dev = np.abs(x - reference[k]).max(axis=1)
        bad = ~(dev < bound)
        if bad.any():
            i = int(np.argmax(bad))
            witness = Witness(tuple(float(v) for v in delta * directions[i]), float(times[k]), float(dev[i]))
            return False, float(dev[i]), witness
        worst = max(worst, float(dev.max()))
    return True, worst, None


class _Prober:
    def __init__(self, X: VectorField, P0, query: StabilityQuery):
        self.query = query
        self.P0 = np.asarray(P0, dtype=float)
        if self.P0.shape != (X.dim,):
            raise ValueError(f"reference point must have {X.dim} coordinates")
        self.F = compile_field(X, query.q0)
        self.times = time_grid(query.T - query.t0, query.h, query.t0)
        try:
            self.reference = run_steps(self.F, self.P0, self.times, query.method)
        except NumericalError as exc:
            raise ReferenceDiverged(f"reference solution failed: {exc}") from exc
        self.directions = perturbation_directions(X.dim, query.samples, query.seed)
        self.trace: list[ProbeRecord] = []

    def check(self, delta: float, eps: float):
        passed, dev, witness = _check_delta(
            self.F, self.reference, self.times, self.P0, self.directions, delta, eps, self.query.method
        )
        self.trace.append(ProbeRecord(eps, delta, passed, dev))
        return passed, witness

    def outcome(self, eps: float) -> EpsilonOutcome:
        passed, _ = self.check(eps, eps)
        if passed:
            return EpsilonOutcome(eps, delta_estimate=eps)
        dmin = self.query.delta_min
        passed, witness = self.check(dmin, eps)
        if not passed:
            return EpsilonOutcome(eps, witness=witness)
        lo, hi = dmin, eps
        while hi - lo > dmin:
            mid = 0.5 * (lo + hi)
            if self.check(mid, eps)[0]:
                lo = mid
            else:
                hi = mid
        return EpsilonOutcome(eps, delta_estimate=lo)


def check_delta(X: VectorField, P0, delta: float, eps: float, query: StabilityQuery) -> ProbeRecord:
    """Single pass/fail probe of ``delta`` against ``eps`` (same perturbation set as the full probe)."""
    prober = _Prober(X, P0, query)
    prober.check(delta, eps)
    return prober.trace[-1]


def _is_swap_field(X: VectorField) -> bool:
    if X.dim != 2:
        return False
    x, y = generators(2)
    return X.images == (y, x)


def probe_stability(X: VectorField, P0: Sequence[float], query: StabilityQuery = StabilityQuery()) -> StabilityReport:
    """Bisect, for each epsilon, on the largest delta whose perturbed solutions stay within epsilon.

    The verdict is empirical: only ``query.samples`` perturbations over the
    finite horizon are tried. A witness, by contrast, is a concrete violation.
    """
    prober = _Prober(X, P0, query)
    outcomes = [prober.outcome(eps) for eps in query.epsilons]
    try:
        lin = classify_equilibrium(X, prober.P0, query.q0)
    except NotAnEquilibrium:
        lin = None

    notes = []
    unstable = any(not o.stable for o in outcomes) or (lin is not None and lin.cls == UNSTABLE)
    if _is_swap_field(X) and unstable:
        notes.append(SWAP_FIELD_NOTE)
    return StabilityReport(
        system_hash(X, query.q0),
        tuple(float(v) for v in prober.P0),
        query,
        outcomes,
        lin,
        notes,
        prober.trace,
    )
