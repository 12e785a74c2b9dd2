"""Momentum-block dynamics of the 3D walks and of the bosonic QCA.

By translation invariance the walk operator splits into ``dim x dim`` blocks
``U_k``, one per lattice momentum.  This module builds those blocks, their
spectra, the spin-1 polarization basis, and the 3x3 matrices of the free
bosonic QCA together with their closed-form eigenphases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GOutOfRange, ThetaNonzeroForBoson, ValidationError, ZeroMomentum
from .internal_space import SPIN1, InternalSpace, Species
from .matrix_core import SIGMA_Z, dagger, eig_unitary, exp_i_generator, kron

POLARIZATION_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class WalkConfig:
    space: InternalSpace
    theta: float = 0.0
    dx: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise ValidationError("dx and dt must be positive")
        if self.space.is_boson and self.theta != 0:
            raise ThetaNonzeroForBoson("boson walks are massless; theta must be 0")

    @property
    def c(self) -> float:
        return self.dx / self.dt

    @property
    def mass(self) -> float:
        """m c^2 in units where the time step sets the energy scale."""
        return self.theta / self.dt


@dataclass(frozen=True)
class MomentumPoint:
    kx: float
    ky: float
    kz: float

    @classmethod
    def from_array(cls, k) -> "MomentumPoint":
        kx, ky, kz = (float(v) for v in np.asarray(k, dtype=float).ravel())
        return cls(kx, ky, kz)

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def in_brillouin_zone(self, dx: float = 1.0) -> bool:
        lim = np.pi / dx
        return all(-lim < v <= lim + 1e-15 for v in self.as_array())


@dataclass(frozen=True)
class DispersionResult:
    phases: np.ndarray
    vectors: np.ndarray


def _check_k(k: MomentumPoint, dx: float):
    if not k.in_brillouin_zone(dx):
        raise ValidationError(f"{k} lies outside the Brillouin zone (-pi/dx, pi/dx]")


def walk_unitary_at_k(cfg: WalkConfig, k: MomentumPoint) -> np.ndarray:
    """``U_k = exp(-i theta Q) prod_j exp(i k_j dx DeltaP_j)``, j = X, Y, Z."""
    _check_k(k, cfg.dx)
    space = cfg.space
    u = np.eye(space.dim, dtype=complex)
    if not space.is_boson:
        u = exp_i_generator(space.Q, -cfg.theta)
    for kj, delta in zip(k.as_array(), space.DeltaP):
        u = u @ exp_i_generator(delta, kj * cfg.dx)
    return u


def dispersion(cfg: WalkConfig, k: MomentumPoint) -> DispersionResult:
    dec = eig_unitary(walk_unitary_at_k(cfg, k))
    return DispersionResult(phases=dec.phases, vectors=dec.vectors)


def dirac_phase(theta: float, k: MomentumPoint, dx: float = 1.0) -> float:
    """Continuum reference ``sqrt(theta^2 + |k dx|^2)`` for the fermion phase."""
    return float(np.hypot(theta, k.norm * dx))


def _rotation_from_x(target: np.ndarray) -> np.ndarray:
    """Proper rotation taking the x unit vector onto unit vector `target`."""
    x = np.array([1.0, 0.0, 0.0])
    axis = np.cross(x, target)
    s = np.linalg.norm(axis)
    c = float(x @ target)
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        return np.diag([-1.0, -1.0, 1.0])  # pi about z
    axis /= s
    kx = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + s * kx + (1 - c) * (kx @ kx)


def polarization_basis(k: MomentumPoint):
    """Eigenvectors ``(v0, v_plus, v_minus)`` of ``k . J``.

    ``(k.J) v0 = 0`` and ``(k.J) v_pm = +-|k| v_pm``; the transverse pair obeys
    ``k x v_pm = -+ i |k| v_pm``.  For ``k`` along x this gives
    ``v_plus = (0, 1, i)/sqrt(2)``.

    Off the y axis the closed form below is used.  Its normalisation divides by
    ``sqrt(kx^2 + kz^2)``, so near the y axis the x-axis basis is rotated onto
    ``k`` instead.
    """
    kv = k.as_array()
    kn = float(np.linalg.norm(kv))
    if kn == 0:
        raise ZeroMomentum("polarization basis undefined at k = 0")
    kx, ky, kz = kv
    v0 = (kv / kn).astype(complex)
    rho2 = kx * kx + kz * kz
    if rho2 < POLARIZATION_SINGULAR_TOL * kn * kn:
        rot = _rotation_from_x(kv / kn)
        base_plus = np.array([0, 1, 1j]) / np.sqrt(2)
        base_minus = np.array([0, -1, 1j]) / np.sqrt(2)
        return v0, rot @ base_plus, rot @ base_minus

    norm = np.sqrt(2 * kn * kn * rho2)

    def transverse(sign):
        # sign = +1 picks the +|k| eigenvector
        return np.array(
            [-1j * kn * kz - sign * kx * ky, sign * rho2, 1j * kn * kx - sign * ky * kz]
        ) / norm

    return v0, transverse(+1), transverse(-1)


def k_dot_j(k: MomentumPoint) -> np.ndarray:
    return sum(kj * j for kj, j in zip(k.as_array(), SPIN1))


def maxwell_hamiltonian(k: MomentumPoint, c: float = 1.0) -> np.ndarray:
    """Effective photon Hamiltonian ``c sigma_Z (x) (k . J)``."""
    return c * kron(SIGMA_Z, k_dot_j(k))


def maxwell_residual(
    k: MomentumPoint, amplitude_plus: complex, amplitude_minus: complex, c: float = 1.0
) -> float:
    """Relative mismatch between the spectral and curl forms of ``i d/dt Psi``.

    ``Psi_+ = E + iB`` is the transverse plane wave
    ``amplitude_plus * v_plus + amplitude_minus * v_minus`` and ``Psi_- =
    conj(Psi_+)``.  The time derivative is evaluated from the energy
    eigenmodes assembled out of the polarization basis (energies
    ``+-c|k|, 0`` in the upper block and their negatives in the lower one), and
    compared against ``(i c k x Psi_+, -i c k x Psi_-)``.
    """
    v0, vp, vm = polarization_basis(k)
    kv = k.as_array()
    kn = k.norm
    psi_plus = amplitude_plus * vp + amplitude_minus * vm
    psi = np.concatenate([psi_plus, np.conj(psi_plus)])
    norm = np.linalg.norm(psi)
    if norm == 0:
        return 0.0

    zero3 = np.zeros(3, dtype=complex)
    modes, energies = [], []
    for block_sign, block in ((1, 0), (-1, 1)):
        for vec, e in ((v0, 0.0), (vp, kn), (vm, -kn)):
            full = np.concatenate([vec, zero3] if block == 0 else [zero3, vec])
            modes.append(full)
            energies.append(block_sign * c * e)
    basis = np.array(modes).T
    coeffs = dagger(basis) @ psi
    i_dt_psi = basis @ (np.array(energies) * coeffs)

    curl = np.concatenate(
        [1j * c * np.cross(kv, psi[:3]), -1j * c * np.cross(kv, psi[3:])]
    )
    return float(np.linalg.norm(i_dt_psi - curl) / norm)


def qca_ab_factors(axis: str, k: MomentumPoint, dx: float = 1.0):
    """The pair ``(exp(i A_j^T), exp(i B_j^T))`` of the bosonic QCA along `axis`."""
    axis = axis.upper()
    if axis == "X":
        a = k.kx * dx
        cs, sn = np.cos(a), np.sin(a)
        exp_a = np.array([[1, 0, 0], [0, -1j * cs, 1j * sn], [0, 1j * sn, 1j * cs]])
        exp_b = np.diag([1, -1j, 1j])
    elif axis == "Y":
        a = k.ky * dx
        cs, sn = np.cos(a), np.sin(a)
        exp_a = np.array([[1j * cs, 0, -1j * sn], [0, 1, 0], [-1j * sn, 0, -1j * cs]])
        exp_b = np.diag([1j, 1, -1j])
    elif axis == "Z":
        a = k.kz * dx
        cs, sn = np.cos(a), np.sin(a)
        exp_a = np.array([[-1j * cs, 1j * sn, 0], [1j * sn, 1j * cs, 0], [0, 0, 1]])
        exp_b = np.diag([-1j, 1j, 1])
    else:
        raise ValidationError(f"axis must be X, Y or Z, not {axis!r}")
    return exp_a.astype(complex), exp_b.astype(complex)


def _c_matrix_3(k: MomentumPoint, dx: float) -> np.ndarray:
    out = np.eye(3, dtype=complex)
    for axis in "XYZ":
        exp_a, exp_b = qca_ab_factors(axis, k, dx)
        out = out @ exp_b @ exp_a
    return out


def qca_c_closed_form(k: MomentumPoint, dx: float = 1.0) -> np.ndarray:
    """Closed form of ``exp(i C^T)`` for the undoubled bosonic QCA."""
    cx, cy, cz = np.cos(k.as_array() * dx)
    sx, sy, sz = np.sin(k.as_array() * dx)
    return np.array(
        [
            [cy * cz, -cy * sz, sy],
            [cx * sz + sx * sy * cz, cx * cz - sx * sy * sz, -sx * cy],
            [sx * sz - cx * sy * cz, sx * cz + cx * sy * sz, cx * cy],
        ],
        dtype=complex,
    )


def qca_c_matrix(k: MomentumPoint, dx: float = 1.0, doubled: bool = False) -> np.ndarray:
    """Six-factor product ``exp(iC^T)`` of the free bosonic QCA.

    With ``doubled=True`` the generators ``J_j`` become ``sigma_Z (x) J_j``.
    The lower block carries ``-J_j``, which swaps the roles of ``P^+`` and
    ``P^-`` and is therefore the same product at momentum ``-k``.
    """
    upper = _c_matrix_3(k, dx)
    if not doubled:
        return upper
    lower = _c_matrix_3(MomentumPoint(-k.kx, -k.ky, -k.kz), dx)
    out = np.zeros((6, 6), dtype=complex)
    out[:3, :3] = upper
    out[3:, 3:] = lower
    return out


def qca_g(k: MomentumPoint, dx: float = 1.0) -> float:
    cx, cy, cz = np.cos(k.as_array() * dx)
    sx, sy, sz = np.sin(k.as_array() * dx)
    return float(cx * cy + cy * cz + cz * cx - sx * sy * sz - 1)


def qca_c_eigenphases(k: MomentumPoint, dx: float = 1.0):
    """Closed-form eigenphases ``(phi0, phi_plus, phi_minus)``.

    ``lambda_0 = 1`` and ``lambda_pm = exp(-i phi_pm)`` with
    ``cos(phi_plus) = G/2`` and ``phi_minus = -phi_plus``.
    """
    g = qca_g(k, dx)
    if abs(g) > 2 + 1e-12:
        raise GOutOfRange(f"|G| = {abs(g)} exceeds 2")
    phi = float(np.arccos(np.clip(g / 2, -1.0, 1.0)))
    return 0.0, phi, -phi

