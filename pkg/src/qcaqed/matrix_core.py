"""Dense complex linear algebra for the small internal-space operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything here
is a pure function; nothing is cached or mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NotHermitian, NotUnitary

HERMITIAN_TOL = 1e-13
UNITARY_TOL = 1e-12
CLUSTER_TOL = 1e-10

# Pauli matrices, used all over the package.
I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues and unit-norm eigenvectors (as columns)."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def phases(self) -> np.ndarray:
        """Eigenphases in (-pi, pi]; only meaningful for unitary input."""
        return principal_phase(np.angle(self.values))


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermiticity_error(h: np.ndarray) -> float:
    return float(np.linalg.norm(h - dagger(h)))


def unitarity_error(u: np.ndarray) -> float:
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])))


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = as_matrix(h)
    return h.shape[0] == h.shape[1] and hermiticity_error(h) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and unitarity_error(u) <= tol


def principal_phase(phi):
    """Map angles onto the principal branch (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    out = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    # np.mod sends +pi to -pi; the branch includes +pi and excludes -pi
    return np.where(np.isclose(out, -np.pi, rtol=0, atol=1e-15), np.pi, out)


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``kron(a, b)[i*p+k, j*q+l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a


def _orthonormalize_clusters(values, vectors, tol=CLUSTER_TOL):
    # eigenvalues are assumed sorted so that near-equal ones are adjacent
    vectors = vectors.copy()
    n = len(values)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(values[stop] - values[start]) <= tol:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(vectors[:, start:stop])
            vectors[:, start:stop] = q
        start = stop
    return vectors


def eig_hermitian(h, tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises
    ------
    NotHermitian
        If ``||h - h^dagger||_F`` exceeds `tol`.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1] or hermiticity_error(h) > tol:
        raise NotHermitian(f"matrix is not Hermitian within {tol:g}")
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(w.astype(complex), v)


def eig_unitary(u, tol: float = UNITARY_TOL) -> EigenDecomposition:
    """Eigendecomposition of a unitary matrix.

    The complex Schur form of a normal matrix is diagonal, so the Schur vectors
    are an orthonormal eigenbasis even inside degenerate clusters.  Eigenvalues
    are renormalised onto the unit circle and ordered by phase in (-pi, pi].
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1] or unitarity_error(u) > tol:
        raise NotUnitary(f"matrix is not unitary within {tol:g}")
    t, z = scipy.linalg.schur(u, output="complex")
    lam = np.diag(t)
    lam = lam / np.abs(lam)
    phases = principal_phase(np.angle(lam))
    order = np.argsort(phases, kind="stable")
    lam, z, phases = lam[order], z[:, order], phases[order]
    z = _orthonormalize_clusters(phases, z)
    return EigenDecomposition(lam, z)


def exp_i_generator(g, scale: float) -> np.ndarray:
    """``exp(i * scale * g)`` for Hermitian `g`, via its spectral decomposition."""
    dec = eig_hermitian(g)
    w = dec.values.real
    v = dec.vectors
    return (v * np.exp(1j * scale * w)) @ dagger(v)
