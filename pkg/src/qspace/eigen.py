"""Small dense eigenvalue problems without a LAPACK eigen-solver.

Dimensions 1 and 2 use closed forms. Larger matrices go through the
Faddeev-LeVerrier characteristic polynomial and Durand-Kerner root finding.
Durand-Kerner stalls around multiple roots, so every cluster of ``m`` nearby
approximations is replaced by the root of the ``(m-1)``-th derivative found by
Newton's method from the cluster mean; that root is simple, hence well
conditioned.
"""

from __future__ import annotations

import cmath

import numpy as np


def faddeev_leverrier(A) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs


def _horner(coeffs, z):
    acc = 0j
    for c in coeffs:
        acc = acc * z + c
    return acc


def durand_kerner(coeffs, tol: float = 1e-15, max_iter: int = 2000) -> list[complex]:
    """All roots of the monic polynomial ``coeffs`` (highest degree first)."""
    coeffs = [complex(c) for c in coeffs]
    n = len(coeffs) - 1
    if n < 1:
        return []
    # Cauchy bound on root moduli
    radius = 1 + max(abs(c) for c in coeffs[1:])
    z = [radius * (0.4 + 0.9j) ** k for k in range(n)]
    for _ in range(max_iter):
        shift = 0.0
        for i in range(n):
            denom = 1 + 0j
            for j in range(n):
                if j != i:
                    denom *= z[i] - z[j]
            if denom == 0:
                denom = 1e-300
            dz = _horner(coeffs, z[i]) / denom
            z[i] -= dz
            shift = max(shift, abs(dz))
        if shift <= tol * radius:
            break
    return _merge_clusters(coeffs, z, 1e-4 * radius)


def _derivative(coeffs: list[complex]) -> list[complex]:
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def _newton_polish(coeffs, z: complex, max_iter: int = 60) -> complex:
    dcoeffs = _derivative(coeffs)
    for _ in range(max_iter):
        d = _horner(dcoeffs, z)
        if d == 0:
            break
        step = _horner(coeffs, z) / d
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _merge_clusters(coeffs, roots: list[complex], tol: float) -> list[complex]:
    n = len(roots)
    group = list(range(n))

    def find(i):
        while group[i] != i:
            group[i] = group[group[i]]
            i = group[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) < tol:
                group[find(i)] = find(j)
    members: dict[int, list[int]] = {}
    for i in range(n):
        members.setdefault(find(i), []).append(i)
    out = list(roots)
    for idx in members.values():
        m = len(idx)
        if m > 1:
            dm = coeffs
            for _ in range(m - 1):
                dm = _derivative(dm)
            center = _newton_polish(dm, sum(roots[i] for i in idx) / m)
            for i in idx:
                out[i] = center
    return out


def _clean(z: complex, scale: float) -> complex:
    re, im = z.real, z.imag
    if abs(im) <= 1e-12 * scale:
        im = 0.0
    return complex(re + 0.0, im + 0.0)


def eigenvalues(A) -> list[complex]:
    """Eigenvalues sorted by (real part, imaginary part)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        vals = [complex(A[0, 0])]
    elif n == 2:
        half_tr = 0.5 * (A[0, 0] + A[1, 1])
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = half_tr * half_tr - det
        root = cmath.sqrt(disc) if disc < 0 else complex(disc**0.5)
        vals = [half_tr + root, half_tr - root]
    else:
        vals = durand_kerner(faddeev_leverrier(A))
    scale = 1.0 + float(np.abs(A).max()) if A.size else 1.0
    return sorted((_clean(v, scale) for v in vals), key=lambda z: (z.real, z.imag))
