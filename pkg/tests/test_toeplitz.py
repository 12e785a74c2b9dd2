import numpy as np
import pytest
from scipy.linalg import toeplitz

from qcaqed.exceptions import ValidationError
from qcaqed.reference import brute_force_negative_coupling
from qcaqed.toeplitz import (
    CouplingProfile,
    ToeplitzSpec,
    d_complex_matrix,
    dbar_matrix,
    f_tilde,
    finite_n_correction,
    format_float,
    golden_matrix_m4,
    matrix_to_csv,
    minimizing_profile,
    negative_coupling,
    shifted_d_matrix,
    symbol_f,
)


def test_symbol_values():
    assert symbol_f(0) == 0.5
    assert symbol_f(1) == pytest.approx(1 / np.pi)
    assert symbol_f(3) == pytest.approx(-1 / (3 * np.pi))
    assert symbol_f(5) == pytest.approx(1 / (5 * np.pi))
    assert symbol_f(-3) == symbol_f(3)
    assert np.all(symbol_f(np.arange(2, 20, 2)) == 0)


def test_spec_validation():
    for bad in (dict(M=3), dict(M=-2), dict(M=4, N=8), dict(M=2, N=7)):
        with pytest.raises(ValidationError):
            ToeplitzSpec(**bad)
    assert list(ToeplitzSpec(4).offsets) == [-2, -1, 0, 1, 2]


def test_m4_golden():
    assert np.allclose(dbar_matrix(ToeplitzSpec(4)), golden_matrix_m4(), rtol=0, atol=1e-16)


@pytest.mark.parametrize("M", [0, 2, 8, 30])
def test_dbar_is_symmetric_toeplitz(M):
    d = dbar_matrix(ToeplitzSpec(M))
    assert np.array_equal(d, d.T)
    assert np.array_equal(d, toeplitz(d[:, 0]))
    assert d.shape == (M + 1, M + 1)


def test_m0_is_half():
    assert dbar_matrix(ToeplitzSpec(0)).tolist() == [[0.5]]


def test_spectrum_in_unit_interval():
    lam = np.linalg.eigvalsh(dbar_matrix(ToeplitzSpec(40)))
    assert lam.min() > -1e-14 and lam.max() < 1 + 1e-14


def test_finite_n_converges():
    corr = [finite_n_correction(8, n) for n in (64, 128, 256, 512)]
    assert all(b < a for a, b in zip(corr, corr[1:]))
    # second order in 1/N
    assert corr[-1] / corr[-2] == pytest.approx(0.25, rel=0.02)


@pytest.mark.parametrize("M,N", [(4, 10), (6, 16), (2, 8)])
def test_d_complex_closed_form(M, N):
    spec = ToeplitzSpec(M, N)
    j = np.arange(M + 1)
    delta = j[:, None] - j[None, :]
    direct = sum(np.exp(-2j * np.pi * delta * l / N) for l in range(1, N // 2 + 1)) / N
    assert np.allclose(d_complex_matrix(spec), direct, atol=1e-14)
    shifted = sum(np.exp(-2j * np.pi * delta * l / N) for l in range(0, N // 2)) / N
    assert np.allclose(shifted_d_matrix(spec), shifted, atol=1e-14)


def test_complex_and_real_share_spectrum():
    spec = ToeplitzSpec(6, 40)
    a = np.linalg.eigvalsh(dbar_matrix(spec))
    b = np.linalg.eigvalsh(d_complex_matrix(spec))
    c = np.linalg.eigvalsh(shifted_d_matrix(spec))
    assert np.allclose(a, b, atol=1e-13) and np.allclose(a, c, atol=1e-13)


def test_negative_coupling_matches_brute_force(rng):
    for n, M in ((12, 4), (20, 6), (16, 2)):
        vp = rng.normal(size=M + 1) + 1j * rng.normal(size=M + 1)
        vm = rng.normal(size=M + 1) + 1j * rng.normal(size=M + 1)
        got = negative_coupling(CouplingProfile(vp, vm), ToeplitzSpec(M, n))
        want = brute_force_negative_coupling(vp, vm, n)
        assert got == pytest.approx(want, rel=1e-12)


def test_brute_force_is_independent_of_site(rng):
    vp, vm = rng.normal(size=5), rng.normal(size=5)
    a = brute_force_negative_coupling(vp, vm, 12, x=0)
    b = brute_force_negative_coupling(vp, vm, 12, x=5)
    assert a == pytest.approx(b)


def test_minimizing_profile():
    spec = ToeplitzSpec(6, 64)
    prof = minimizing_profile(spec)
    lam_min = np.linalg.eigvalsh(dbar_matrix(spec))[0]
    assert negative_coupling(prof, spec) == pytest.approx(2 * lam_min, abs=1e-13)
    assert np.linalg.norm(prof.v_plus) == pytest.approx(1)


def test_profile_validation():
    with pytest.raises(ValidationError):
        CouplingProfile(np.ones(3), np.ones(5))
    with pytest.raises(ValidationError):
        CouplingProfile(np.ones(3), np.array([1, np.inf, 0]))
    with pytest.raises(ValidationError):
        negative_coupling(CouplingProfile(np.ones(3), np.ones(3)), ToeplitzSpec(4, 20))
    with pytest.raises(ValidationError):
        negative_coupling(CouplingProfile(np.ones(5), np.ones(5)), ToeplitzSpec(4))


def test_f_tilde_is_half_wave_window():
    # the partial sums approach the indicator of |k| < pi/2
    k = np.array([0.0, 0.5, 1.2, 2.0, 3.0])
    vals = f_tilde(k, 20001)
    assert np.allclose(vals, [1, 1, 1, 0, 0], atol=1e-3)
    assert f_tilde(np.pi / 2, 1001) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValidationError):
        f_tilde(0.0, 0)


def test_f_tilde_chunking_invariant(rng):
    k = rng.uniform(-np.pi, np.pi, 50)
    assert np.allclose(f_tilde(k, 101, chunk=7), f_tilde(k, 101))


def test_csv_round_trip():
    d = dbar_matrix(ToeplitzSpec(4))
    text = matrix_to_csv(d)
    back = np.array([[float(v) for v in line.split(",")] for line in text.strip().split("\n")])
    assert np.array_equal(back, d)
    assert format_float(0.1) == "0.1"
