"""Dirichlet Laplacian, its eigendecomposition and the Schrödinger kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Domain, GraphError, GraphFunction


class SpectralError(RuntimeError):
    """Eigensolver failure."""


@dataclass(frozen=True, eq=False)
class DirichletLaplacian:
    """Matrix of ``-Δ`` acting on functions that vanish on the boundary.

    ``matrix[x, x]`` is the closure degree of ``x`` and ``matrix[x, y] = -1``
    for adjacent interior vertices.
    """

    domain: Domain
    matrix: np.ndarray

    def apply(self, f: GraphFunction) -> np.ndarray:
        return self.matrix @ f.interior


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""

    domain: Domain
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def eigenfunction(self, j: int) -> GraphFunction:
        return GraphFunction.from_interior(self.domain, self.eigenvectors[:, j])

    def coefficients(self, f: GraphFunction) -> np.ndarray:
        """All projection coefficients ``c_j = Σ_x f(x) φ_j(x)`` at once."""
        _check_domain(self.domain, f)
        return self.eigenvectors.T @ f.interior

    def synthesize(self, coeffs) -> np.ndarray:
        """Interior values of ``Σ_j c_j φ_j``."""
        return self.eigenvectors @ coeffs


def _check_domain(domain: Domain, f: GraphFunction):
    if f.domain is not domain and f.domain != domain:
        raise GraphError("function is defined on a different domain")


def assemble(domain: Domain) -> DirichletLaplacian:
    n = domain.n_interior
    mat = np.zeros((n, n))
    for k, x in enumerate(domain.interior):
        mat[k, k] = domain.degree(x)
    for i, j in domain.edge_index:
        if i < n and j < n:
            mat[i, j] = mat[j, i] = -1.0
    mat.setflags(write=False)
    return DirichletLaplacian(domain, mat)


def eigendecompose(lap: DirichletLaplacian) -> Spectrum:
    """Full symmetric eigendecomposition with a deterministic sign per vector.

    Each eigenvector is flipped so that its first entry with magnitude above
    roundoff is positive.
    """
    mat = lap.matrix
    try:
        w, v = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(
            f"symmetric eigensolver did not converge on a {mat.shape[0]}x{mat.shape[0]} "
            f"Laplacian: {exc}"
        ) from exc
    v = np.array(v)
    cutoff = 1e-12
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col) > cutoff))
        if col[k] < 0:
            v[:, j] = -col
    w.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(lap.domain, w, v)


def spectrum_of(domain: Domain) -> Spectrum:
    return eigendecompose(assemble(domain))


def project(spec: Spectrum, f: GraphFunction, j: int) -> complex:
    """Coefficient of ``f`` along the ``j``-th eigenfunction."""
    if not 0 <= j < spec.size:
        raise IndexError(f"eigen-index {j} out of range 0..{spec.size - 1}")
    _check_domain(spec.domain, f)
    return complex(f.interior @ spec.eigenvectors[:, j])


def schrodinger_kernel(spec: Spectrum, t: float) -> np.ndarray:
    """Dense propagator ``Σ_j exp(-iλ_j t) φ_j φ_jᵀ``; exactly the identity at t=0."""
    n = spec.size
    if t == 0:
        return np.eye(n, dtype=complex)
    phase = np.exp(-1j * spec.eigenvalues * t)
    return (spec.eigenvectors * phase) @ spec.eigenvectors.T
