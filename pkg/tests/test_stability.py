import json

import numpy as np
import pytest

from qspace.dynamics import VectorField
from qspace.eigen import durand_kerner, eigenvalues, faddeev_leverrier
from qspace.errors import NotAnEquilibrium, ReferenceDiverged
from qspace.qalgebra import QPoly, generators
from qspace.qparse import parse_expr
from qspace.simulate import IntegratorConfig, integrate
from qspace.stability import (
    ASYMPTOTICALLY_STABLE,
    MARGINAL,
    SWAP_FIELD_NOTE,
    UNSTABLE,
    StabilityQuery,
    check_delta,
    classify_equilibrium,
    perturbation_directions,
    probe_stability,
)

x, y = generators(2)
SWAP = VectorField((y, x))
CONTRACTION = VectorField((-x, -y))


def field(*texts):
    return VectorField(tuple(parse_expr(t, len(texts)) for t in texts))


def test_contraction_delta_close_to_eps():
    report = probe_stability(CONTRACTION, (0, 0), StabilityQuery(epsilons=(0.1,), T=5))
    (out,) = report.outcomes
    assert out.delta_estimate >= 0.09
    assert out.delta_estimate <= 0.1
    assert report.cls == ASYMPTOTICALLY_STABLE
    assert report.discrepancy_notes == []


def test_swap_field_unstable_with_note():
    report = probe_stability(SWAP, (0, 0), StabilityQuery(epsilons=(0.1,), T=5, delta_min=1e-3))
    (out,) = report.outcomes
    assert out.witness is not None
    assert max(abs(v) for v in out.witness.perturbation) <= 0.1
    assert report.cls == UNSTABLE
    assert SWAP_FIELD_NOTE in report.discrepancy_notes


def test_zero_field_delta_is_eps_minus_resolution():
    zero = VectorField((QPoly.zero(2), QPoly.zero(2)))
    query = StabilityQuery(epsilons=(0.1, 0.01), T=1, delta_min=1e-4)
    for P0 in [(0, 0), (0.5, -0.25)]:
        report = probe_stability(zero, P0, query)
        for out in report.outcomes:
            assert out.epsilon - query.delta_min <= out.delta_estimate < out.epsilon


def test_estimates_never_exceed_eps():
    for X in (CONTRACTION, field("y", "-x"), field("-x + y", "-2*y")):
        report = probe_stability(X, (0, 0), StabilityQuery(epsilons=(0.2, 0.05), T=3, delta_min=1e-4))
        for out in report.outcomes:
            assert out.delta_estimate is not None and out.delta_estimate <= out.epsilon


def test_monotone_in_eps():
    query = StabilityQuery(epsilons=(0.1, 0.05, 0.01), T=3, delta_min=1e-4)
    X = field("y", "-x")
    report = probe_stability(X, (0, 0), query)
    passed = [r for r in report.trace if r.passed]
    assert passed
    for rec in passed:
        for larger in (e for e in query.epsilons if e > rec.epsilon):
            assert check_delta(X, (0, 0), rec.delta, larger, query).passed


def test_linear_field_delta_scales_with_eps():
    query = StabilityQuery(epsilons=(0.1, 0.01), T=3, delta_min=1e-5)
    report = probe_stability(field("y", "-x"), (0, 0), query)
    d1, d2 = (o.delta_estimate for o in report.outcomes)
    assert d1 / d2 == pytest.approx(10, rel=0.2)
    # rotation preserves the 2-norm, so the infinity-norm ball shrinks by up to sqrt(2)
    assert d1 == pytest.approx(0.1 / np.sqrt(2), rel=0.05)


def test_witness_reproduces():
    query = StabilityQuery(epsilons=(0.1, 0.01), T=5, delta_min=1e-3)
    report = probe_stability(SWAP, (0, 0), query)
    for out in report.outcomes:
        w = out.witness
        traj = integrate(SWAP, w.perturbation, IntegratorConfig(h=query.h, T=w.time))
        assert np.abs(traj.endpoint).max() >= out.epsilon * (1 - 1e-9)
        assert traj.endpoint.tolist() == pytest.approx(list(traj.endpoint))
        assert np.abs(traj.endpoint).max() == pytest.approx(w.deviation, rel=1e-12)


def test_report_is_deterministic_json():
    query = StabilityQuery(epsilons=(0.1, 0.01), T=2, samples=12, seed=7)
    a = probe_stability(field("-x + y^2", "-y"), (0, 0), query).to_json()
    b = probe_stability(field("-x + y^2", "-y"), (0, 0), query).to_json()
    assert a == b
    payload = json.loads(a)
    for key in ("system_hash", "q0", "epsilons", "outcomes", "eigenvalues", "class", "discrepancy_notes"):
        assert key in payload
    assert payload["mode"].startswith("empirical (12 samples")


def test_non_equilibrium_reference_has_no_linearization():
    report = probe_stability(CONTRACTION, (1, 1), StabilityQuery(epsilons=(0.1,), T=2))
    assert report.linearization is None
    assert report.to_dict()["class"] is None


def test_reference_divergence():
    with pytest.raises(ReferenceDiverged):
        probe_stability(field("x^2"), (1,), StabilityQuery(epsilons=(0.1,), T=3))


def test_query_validation():
    bad = [
        {"epsilons": (0.01, 0.1)},
        {"epsilons": (-0.1,)},
        {"samples": 4},
        {"delta_min": 0.5},
        {"T": 0},
    ]
    for kwargs in bad:
        with pytest.raises(ValueError):
            StabilityQuery(**kwargs)


def test_perturbation_directions():
    d = perturbation_directions(2, 10, seed=1)
    assert d.shape == (10, 2)
    np.testing.assert_array_equal(np.abs(d).max(axis=1), 1.0)
    np.testing.assert_array_equal(d[:4], [[1, 1], [1, -1], [-1, 1], [-1, -1]])
    np.testing.assert_array_equal(d, perturbation_directions(2, 10, seed=1))
    assert perturbation_directions(6, 8, 0).shape == (8, 6)


def test_classify_examples():
    lin = classify_equilibrium(SWAP, (0, 0))
    assert lin.eigenvalues == (-1, 1)
    assert lin.cls == UNSTABLE
    lin = classify_equilibrium(CONTRACTION, (0, 0))
    assert lin.eigenvalues == (-1, -1) and lin.cls == ASYMPTOTICALLY_STABLE
    lin = classify_equilibrium(field("y", "-x"), (0, 0))
    assert lin.eigenvalues == (-1j, 1j) and lin.cls == MARGINAL
    with pytest.raises(NotAnEquilibrium):
        classify_equilibrium(SWAP, (1, 0))


def _oracle_eigs(A):
    return np.roots(np.poly(A))


def _match(ours, ref, tol):
    ref = list(ref)
    for z in ours:
        k = int(np.argmin([abs(z - r) for r in ref]))
        assert abs(z - ref[k]) < tol, (ours, ref)
        ref.pop(k)


@pytest.mark.parametrize("n", [2, 3])
def test_eigenvalues_match_charpoly_oracle(n):
    rng = np.random.default_rng(n)
    for _ in range(200):
        A = rng.integers(-5, 6, size=(n, n)) / rng.integers(1, 4)
        _match(eigenvalues(A), _oracle_eigs(A), 1e-7)


def test_eigenvalues_repeated_roots():
    _match(eigenvalues(-np.eye(3)), [-1, -1, -1], 1e-9)
    J = np.array([[2.0, 1, 0], [0, 2, 1], [0, 0, 2]])
    _match(eigenvalues(J), [2, 2, 2], 1e-9)
    _match(eigenvalues(np.diag([1.0, 2.0, 3.0, -4.0])), [1, 2, 3, -4], 1e-9)


def test_faddeev_leverrier_matches_numpy_poly():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 4, 5):
        A = rng.normal(size=(n, n))
        np.testing.assert_allclose(faddeev_leverrier(A), np.poly(A), atol=1e-10)


def test_durand_kerner_known_roots():
    roots = durand_kerner(np.poly([1.0, -2.0, 3.0]))
    _match(roots, [1, -2, 3], 1e-10)
    roots = durand_kerner([1, 0, 1])
    _match(roots, [1j, -1j], 1e-12)
