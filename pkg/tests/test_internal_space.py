import dataclasses
import itertools

import numpy as np
import pytest

from qcaqed.exceptions import ViolationAboveTolerance
from qcaqed.internal_space import (
    J_X,
    SPIN1,
    build_boson_space,
    build_fermion_space,
    build_space,
    dirac_gammas,
    verify_equal_norm,
)
from qcaqed.matrix_core import SIGMA_X, SIGMA_Z, anticommutator, kron

ETA = np.diag([1, -1, -1, -1])


@pytest.mark.parametrize("species", ["fermion", "boson", "boson-doubled"])
def test_projectors_are_complete(species):
    space = build_space(species)
    eye = space.identity
    for j in range(3):
        total = space.P_plus[j] + space.P_minus[j]
        if space.P_zero is not None:
            total = total + space.P_zero[j]
        assert np.allclose(total, eye, atol=1e-13)
        assert np.allclose(space.DeltaP[j], space.P_plus[j] - space.P_minus[j], atol=0)
        projs = [space.P_plus[j], space.P_minus[j]] + ([space.P_zero[j]] if space.P_zero else [])
        for p in projs:
            assert np.allclose(p @ p, p, atol=1e-13)
            assert np.allclose(p, p.conj().T, atol=1e-13)


def test_clifford_algebra():
    g = dirac_gammas()
    for mu, nu in itertools.product(range(4), repeat=2):
        assert np.allclose(anticommutator(g[mu], g[nu]), 2 * ETA[mu, nu] * np.eye(4), atol=1e-14)


def test_fermion_space_properties():
    s = build_fermion_space()
    assert np.allclose(s.Q @ s.Q, np.eye(4))
    assert abs(np.trace(s.Q)) < 1e-15
    assert np.trace(s.P_plus[0]).real == pytest.approx(2)
    assert np.trace(s.P_minus[0]).real == pytest.approx(2)
    ops = [s.Q] + list(s.DeltaP)
    for a, b in itertools.combinations(ops, 2):
        assert np.linalg.norm(anticommutator(a, b)) <= 1e-13
    px, py = s.P_plus[0], s.P_plus[1]
    assert np.allclose(px @ py @ px, 0.5 * px, atol=1e-14)


def test_delta_p_is_sigma_x_tensor_sigma():
    s = build_fermion_space()
    from qcaqed.matrix_core import SIGMA_Y

    for d, sig in zip(s.DeltaP, (SIGMA_X, SIGMA_Y, SIGMA_Z)):
        assert np.allclose(d, kron(SIGMA_X, sig))


def test_spin1_matrices():
    expected = np.zeros((3, 3), dtype=complex)
    expected[1, 2], expected[2, 1] = -1j, 1j
    assert np.array_equal(J_X, expected)
    total = sum(j @ j for j in SPIN1)
    assert np.allclose(total, 2 * np.eye(3))


def test_boson_zero_projectors(rng):
    s = build_boson_space()
    for i, j in itertools.permutations(range(3), 2):
        assert np.linalg.norm(s.P_zero[i] @ s.P_zero[j]) <= 1e-13
    assert np.allclose(sum(s.P_zero), np.eye(3), atol=1e-13)
    # (khat . J) v = i khat x v
    for _ in range(20):
        k = rng.normal(size=3)
        k /= np.linalg.norm(k)
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        kj = sum(kc * j for kc, j in zip(k, SPIN1))
        assert np.allclose(kj @ v, 1j * np.cross(k, v), atol=1e-13)


def test_doubled_boson_parity():
    s = build_boson_space(doubled=True)
    par = s.parity
    assert np.allclose(par @ par, np.eye(6))
    for j in range(3):
        assert np.allclose(s.DeltaP[j], kron(SIGMA_Z, SPIN1[j]))
        assert np.allclose(par @ s.DeltaP[j] @ par, -s.DeltaP[j], atol=1e-13)
        assert np.allclose(par @ s.P_plus[j] @ par, s.P_minus[j], atol=1e-13)


def test_equal_norm_constants():
    fer = verify_equal_norm(build_space("fermion"))
    assert fer.c == pytest.approx(0.5, abs=1e-13)
    assert fer.c_prime is None
    assert fer.max_violation <= 1e-13
    for species in ("boson", "boson-doubled"):
        rep = verify_equal_norm(build_space(species))
        assert rep.c == pytest.approx(0.25, abs=1e-13)
        assert rep.c_prime == pytest.approx(0.5, abs=1e-13)


def test_boson_c_from_eigenvector_overlaps():
    # |<k_i|k'_j>|^2 between J_X and J_Y eigenvectors
    wx, vx = np.linalg.eigh(SPIN1[0])
    wy, vy = np.linalg.eigh(SPIN1[1])
    overlaps = np.abs(vx.conj().T @ vy) ** 2
    plus_x, plus_y, zero_y = np.argmax(wx), np.argmax(wy), np.argmin(np.abs(wy))
    assert overlaps[plus_x, plus_y] == pytest.approx(0.25)
    assert overlaps[plus_x, zero_y] == pytest.approx(0.5)


def test_equal_norm_violation_raises():
    s = build_fermion_space()
    # swap in a projector that breaks the isotropy between axes
    bad_plus = (s.P_plus[0], s.P_plus[0], s.P_plus[2])
    broken = dataclasses.replace(s, P_plus=bad_plus)
    with pytest.raises(ViolationAboveTolerance):
        verify_equal_norm(broken)
