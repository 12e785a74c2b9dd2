"""Internal (coin) spaces of the fermion and boson walks.

The fermion space is four dimensional and built from Dirac-representation
gamma matrices.  The boson space is the spin-1 representation (dimension 3),
optionally doubled to dimension 6 with ``sigma_Z (x) J`` so that a parity
operator exists.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ViolationAboveTolerance
from .matrix_core import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, kron

AXES = ("X", "Y", "Z")
EQUAL_NORM_TOL = 1e-12


class Species(str, enum.Enum):
    FERMION = "fermion"
    BOSON = "boson"
    BOSON_DOUBLED = "boson-doubled"


# Spin-1 generators in the Cartesian basis: (J_i)_{jk} = -i eps_{ijk}.
J_X = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex)
J_Y = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=complex)
J_Z = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex)
SPIN1 = (J_X, J_Y, J_Z)


def dirac_gammas() -> tuple:
    """(gamma_0, gamma_1, gamma_2, gamma_3) in the Dirac representation."""
    g0 = kron(SIGMA_Z, I2)
    gs = tuple(kron(1j * SIGMA_Y, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    return (g0,) + gs


@dataclass(frozen=True)
class InternalSpace:
    """Projector data of a walk's coin space.

    ``P_plus[j]``, ``P_minus[j]`` (and ``P_zero[j]`` for bosons) select the
    shift direction along axis ``j`` in X, Y, Z order.
    """

    species: Species
    dim: int
    Q: np.ndarray
    P_plus: tuple
    P_minus: tuple
    DeltaP: tuple
    P_zero: Optional[tuple] = None
    parity: Optional[np.ndarray] = None
    gammas: Optional[tuple] = None

    @property
    def is_boson(self) -> bool:
        return self.species is not Species.FERMION

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


def build_fermion_space() -> InternalSpace:
    gammas = dirac_gammas()
    g0 = gammas[0]
    eye = np.eye(4, dtype=complex)
    delta = tuple(g0 @ g for g in gammas[1:])
    return InternalSpace(
        species=Species.FERMION,
        dim=4,
        Q=g0,
        P_plus=tuple((eye + d) / 2 for d in delta),
        P_minus=tuple((eye - d) / 2 for d in delta),
        DeltaP=delta,
        parity=g0,
        gammas=gammas,
    )


def build_boson_space(doubled: bool = False) -> InternalSpace:
    eye3 = np.eye(3, dtype=complex)
    if not doubled:
        return InternalSpace(
            species=Species.BOSON,
            dim=3,
            Q=np.zeros((3, 3), dtype=complex),
            P_plus=tuple((j @ j + j) / 2 for j in SPIN1),
            P_minus=tuple((j @ j - j) / 2 for j in SPIN1),
            P_zero=tuple(eye3 - j @ j for j in SPIN1),
            DeltaP=SPIN1,
        )
    delta = tuple(kron(SIGMA_Z, j) for j in SPIN1)
    sq = tuple(kron(I2, j @ j) for j in SPIN1)
    parity = kron(SIGMA_X, eye3)
    gammas = (parity,) + tuple(kron(-1j * SIGMA_Y, j) for j in SPIN1)
    return InternalSpace(
        species=Species.BOSON_DOUBLED,
        dim=6,
        Q=np.zeros((6, 6), dtype=complex),
        P_plus=tuple((s + d) / 2 for s, d in zip(sq, delta)),
        P_minus=tuple((s - d) / 2 for s, d in zip(sq, delta)),
        P_zero=tuple(kron(I2, eye3 - j @ j) for j in SPIN1),
        DeltaP=delta,
        parity=parity,
        gammas=gammas,
    )


def build_space(species) -> InternalSpace:
    species = Species(species)
    if species is Species.FERMION:
        return build_fermion_space()
    return build_boson_space(doubled=species is Species.BOSON_DOUBLED)


@dataclass(frozen=True)
class EqualNormReport:
    c: float
    c_prime: Optional[float]
    max_violation: float

    def to_dict(self) -> dict:
        return {"c": self.c, "c_prime": self.c_prime, "max_violation": self.max_violation}


def _sandwich_constant(outer, inner):
    """Best c with outer @ inner @ outer ~ c * outer, and the residual norm."""
    lhs = outer @ inner @ outer
    c = float(np.real(np.trace(lhs)) / np.real(np.trace(outer)))
    return c, float(np.linalg.norm(lhs - c * outer))


def verify_equal_norm(space: InternalSpace, tol: float = EQUAL_NORM_TOL) -> EqualNormReport:
    """Measure the equal-norm constants of `space`.

    For every ordered axis pair ``i != j`` and signs ``k, k'`` in ``{+, -}`` the
    sandwich ``P_i^k P_j^k' P_i^k`` must be a common multiple ``c`` of
    ``P_i^k``.  Boson spaces additionally need ``P_i^k P_j^0 P_i^k = c' P_i^k``,
    ``P_i^0 P_j^k P_i^0 = c' P_i^0`` and ``P_i^0 P_j^0 = 0``.

    Raises
    ------
    ViolationAboveTolerance
        If any identity is off by more than `tol` (Frobenius norm).
    """
    signed = {"+": space.P_plus, "-": space.P_minus}
    pairs = [(i, j) for i, j in itertools.permutations(range(3), 2)]

    cs, residuals = [], []
    for (i, j), k, kp in itertools.product(pairs, "+-", "+-"):
        c, r = _sandwich_constant(signed[k][i], signed[kp][j])
        cs.append(c)
        residuals.append(r)

    c_ref = float(np.mean(cs))
    violation = max(residuals + [abs(c - c_ref) for c in cs])

    c_prime = None
    if space.P_zero is not None:
        cps, resid0 = [], []
        for (i, j), k in itertools.product(pairs, "+-"):
            for outer, inner in ((signed[k][i], space.P_zero[j]), (space.P_zero[i], signed[k][j])):
                cp, r = _sandwich_constant(outer, inner)
                cps.append(cp)
                resid0.append(r)
            resid0.append(float(np.linalg.norm(space.P_zero[i] @ space.P_zero[j])))
        c_prime = float(np.mean(cps))
        violation = max([violation] + resid0 + [abs(cp - c_prime) for cp in cps])

    report = EqualNormReport(c=c_ref, c_prime=c_prime, max_violation=violation)
    if violation > tol:
        raise ViolationAboveTolerance(
            f"equal-norm condition violated by {violation:.3e} (> {tol:g})"
        )
    return report
