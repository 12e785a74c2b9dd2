import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from qcaqed.exceptions import (
    DivisionByZero,
    NegativeSqrt,
    NotHermitian,
    PrecisionTooLow,
    ValidationError,
)
from qcaqed.highprec import (
    BigMatrix,
    BigReal,
    PrecisionPolicy,
    build_dbar_bigreal,
    eigenvalues,
    max_eigpair,
    min_eig_series,
    min_eigpair,
    required_digits,
)
from qcaqed.reference import machin_pi_digits
from qcaqed.toeplitz import ToeplitzSpec, dbar_matrix


def test_pi_against_machin():
    for digits in (30, 100, 300):
        text = BigReal.pi(digits + 5).to_decimal_string()
        assert text.replace("e+0", "")[: digits + 2] == machin_pi_digits(digits)


def test_sqrt_and_sin():
    two = BigReal.of(2, 60)
    r = two.sqrt()
    assert abs((r * r - 2).value) <= mpf(10) ** -58
    half_pi = BigReal.pi(60) / 2
    assert abs((half_pi.sin() - 1).value) <= mpf(10) ** -58
    with pytest.raises(NegativeSqrt):
        BigReal.of(-1, 40).sqrt()
    with pytest.raises(DivisionByZero):
        BigReal.of(1, 40) / 0


def test_precision_rules():
    with pytest.raises(PrecisionTooLow):
        BigReal.of(1, 10)
    a, b = BigReal.of("0.1", 40), BigReal.of("0.2", 80)
    assert (a + b).precision == 40
    assert float(a + b) == pytest.approx(0.3)
    assert 1 - BigReal.of("0.25", 40) == BigReal.of("0.75", 40)
    assert BigReal.of(3, 40) > 2 and BigReal.of(3, 40) <= 3


def test_decimal_string_keeps_digits():
    s = BigReal.of("1", 35).to_decimal_string()
    assert s.startswith("1.0000") and len(s.split("e")[0].replace(".", "")) == 35


def test_ulp():
    assert BigReal.of(1, 30).ulp() < mpf(10) ** -29
    assert BigReal.of(0, 30).ulp() > 0


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-1e6, 1e6, allow_nan=False), y=st.floats(-1e6, 1e6, allow_nan=False))
def test_ops_match_mpmath(x, y):
    a, b = BigReal.of(x, 50), BigReal.of(y, 50)
    with mpmath.workdps(50):
        assert (a * b).value == mpf(x) * mpf(y)
        assert (a - b).value == mpf(x) - mpf(y)


def test_required_digits():
    assert required_digits(0) == 30
    assert required_digits(20) == 46
    assert required_digits(60) == 78


def test_build_dbar_matches_double():
    big = build_dbar_bigreal(10, 40)
    assert np.allclose(big.to_numpy(), dbar_matrix(ToeplitzSpec(10)), rtol=0, atol=1e-16)
    with pytest.raises(PrecisionTooLow):
        build_dbar_bigreal(60, 50)
    with pytest.raises(ValidationError):
        build_dbar_bigreal(3, 40)


def test_m0():
    res = min_eigpair(build_dbar_bigreal(0, 30))
    assert res.lambda_min == BigReal.of("0.5", 30)
    assert float(res.eigenvector[0]) == 1


def test_m4_against_mpmath():
    a = build_dbar_bigreal(4, 50)
    ours = eigenvalues(a)
    with mpmath.workdps(50):
        ref, _ = mpmath.eigsy(mpmath.matrix([list(r) for r in a.rows]))
        ref = sorted(ref)
        # bisection stops at an interval width of 10^-(digits - 10) ||A||
        for x, y in zip(ours, ref):
            assert abs(x.value - y) <= mpf(10) ** -39


def test_m20_against_double():
    res = min_eigpair(build_dbar_bigreal(20, required_digits(20)))
    lam_double = np.linalg.eigvalsh(dbar_matrix(ToeplitzSpec(20)))[0]
    # double eigh only resolves lambda_min to ~ eps * ||A||
    assert abs(float(res.lambda_min) - lam_double) <= 1e-14
    assert float(res.residual) <= 1e-25


def test_eigenvector_unit_and_sign(rng):
    a = rng.normal(size=(6, 6))
    a = a + a.T
    res = min_eigpair(a, 40)
    v = res.eigenvector_float()
    assert np.linalg.norm(v) == pytest.approx(1)
    assert v[np.argmax(np.abs(v))] > 0
    w, vecs = np.linalg.eigh(a)
    assert float(res.lambda_min) == pytest.approx(w[0], abs=1e-12)
    assert abs(abs(v @ vecs[:, 0]) - 1) <= 1e-12


def test_lambda_max_close_to_one():
    # 1 - lambda_max is tiny; subtract in mpf, not after rounding to double
    res = max_eigpair(build_dbar_bigreal(20, 60))
    gap = 1 - res.eigenvalue
    lo = min_eigpair(build_dbar_bigreal(20, 60)).lambda_min
    assert gap.value > 0
    # the symbol is symmetric about 1/2, so the spectrum pairs lambda <-> 1 - lambda
    assert abs(gap.value - lo.value) <= mpf(10) ** -50


def test_rejects_asymmetric():
    with pytest.raises(NotHermitian):
        min_eigpair(np.array([[1.0, 2.0], [0.0, 1.0]]), 40)
    with pytest.raises(PrecisionTooLow):
        min_eigpair(np.eye(2), 10)


def test_bigmatrix_norm():
    m = BigMatrix.from_array(np.eye(3) * 2, 40)
    with mpmath.workdps(40):
        assert m.frobenius_norm() == mpmath.sqrt(12)
    assert m[1, 1] == 2


def test_series_decreasing():
    pts = min_eig_series([4, 8, 12, 16])
    vals = [p.lambda_min.value for p in pts]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert pts[0].csv_row()[0] == "4"
    with pytest.raises(ValidationError):
        min_eig_series([8, 4])


def test_series_parallel_matches_serial():
    a = min_eig_series([6, 10], workers=1)
    b = min_eig_series([6, 10], workers=2)
    assert [p.lambda_min.value for p in a] == [p.lambda_min.value for p in b]


@pytest.mark.parametrize(
    "text,M,digits",
    [("default", 20, 46), ("floor:100", 20, 100), ("floor:10", 20, 46), ("fixed:40", 60, 40),
     ("linear:1.0:20", 10, 30)],
)
def test_policy(text, M, digits):
    pol = PrecisionPolicy.parse(text)
    assert pol.digits_for(M) == digits
    assert PrecisionPolicy.parse(pol.to_string()) == pol


def test_policy_env(monkeypatch):
    monkeypatch.setenv("QCAQED_PRECISION_POLICY", "fixed:64")
    assert PrecisionPolicy.parse().digits == 64
    with pytest.raises(ValidationError):
        PrecisionPolicy.parse("sometimes")
