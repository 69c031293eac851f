"""Dense exact diagonalization for thermal benchmarks.

The eigensolver is a cyclic Jacobi rotation method implemented here so
the benchmark path stays self-contained and verifiable: tests check the
residual ||H v - lambda v|| <= 1e-10 for every pair directly. Thermal
averages use the unshifted spectrum; shift constants only move the
spectrum by the known offset and are excluded by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DENSE_SITE_LIMIT, ModelSpec, dense_hamiltonian

__all__ = ["Spectrum", "symmetric_eigensystem", "spectrum", "thermal_energy"]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the chain Hamiltonian, ascending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(vals) < 0):
            raise ValueError("eigenvalues must be ascending")


def symmetric_eigensystem(matrix: np.ndarray, *, tol: float = 1e-14,
                          max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Cyclic Jacobi: sweep all off-diagonal pairs, rotating each one to
    zero, until the off-diagonal Frobenius norm falls below tol times
    the matrix norm. Returns (eigenvalues ascending, column eigenvectors).
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise ValueError("matrix must be symmetric")
    dim = a.shape[0]
    vecs = np.eye(dim)
    anorm = np.linalg.norm(a)
    if dim == 1 or anorm == 0.0:
        return np.sort(np.diag(a)), vecs
    skip = 1e-18 * anorm
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * anorm:
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # A <- G^T A G with G the (p,q) Givens rotation
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = vecs[:, p].copy()
                vcol_q = vecs[:, q].copy()
                vecs[:, p] = c * vcol_p - s * vcol_q
                vecs[:, q] = s * vcol_p + c * vcol_q
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def spectrum(spec: ModelSpec) -> Spectrum:
    """All eigenvalues of the unshifted chain Hamiltonian, ascending."""
    if spec.n_sites > DENSE_SITE_LIMIT:
        raise ValueError(f"dense diagonalization limited to {DENSE_SITE_LIMIT} sites")
    vals, _ = symmetric_eigensystem(dense_hamiltonian(spec))
    return Spectrum(vals)


def thermal_energy(spec: ModelSpec) -> float:
    """Boltzmann-averaged energy sum_k E_k e^{-beta E_k} / sum_k e^{-beta E_k}.

    Exponents are shifted by the ground-state energy so the weights never
    overflow at large beta.
    """
    vals = spectrum(spec).eigenvalues
    weights = np.exp(-spec.beta * (vals - vals[0]))
    return float(np.sum(vals * weights) / np.sum(weights))
