"""Multiprecision real arithmetic and a symmetric eigensolver.

The minimum eigenvalue of ``Dbar`` falls off roughly like ``10^(-0.76 M)``,
so double precision is useless beyond ``M ~ 20``.  :class:`BigReal` wraps an
``mpmath`` float together with its working precision in decimal digits.  The
eigensolver reduces the matrix to tridiagonal form with Householder
reflections, locates eigenvalues by Sturm-sequence bisection and recovers
eigenvectors by inverse iteration.
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .exceptions import (
    DivisionByZero,
    NegativeSqrt,
    NoConvergence,
    NotHermitian,
    PrecisionTooLow,
    ValidationError,
)

MIN_PRECISION = 30
INVERSE_ITERATION_PASSES = 3
MAX_EXTRA_PASSES = 7
POLICY_ENV = "QCAQED_PRECISION_POLICY"


def required_digits(M: int) -> int:
    """Working digits needed to resolve ``lambda_min`` of the ``(M+1)``-matrix."""
    return math.ceil(0.8 * M) + 30


# ---------------------------------------------------------------- BigReal


@dataclass(frozen=True, eq=False)
class BigReal:
    """An ``mpf`` rounded to `precision` decimal digits.

    Binary operations run at the smaller of the two precisions, and the result
    carries that precision.
    """

    value: mpf
    precision: int

    def __post_init__(self):
        if self.precision < MIN_PRECISION:
            raise PrecisionTooLow(f"precision must be >= {MIN_PRECISION} digits")
        with mpmath.workdps(self.precision):
            object.__setattr__(self, "value", +mpf(self.value))

    @classmethod
    def of(cls, x, precision: int) -> "BigReal":
        """From an int, a float, a decimal string or an mpf."""
        with mpmath.workdps(precision):
            return cls(mpf(x), precision)

    @classmethod
    def pi(cls, precision: int) -> "BigReal":
        with mpmath.workdps(precision):
            return cls(+mpmath.mp.pi, precision)

    def _binary(self, other, op):
        if not isinstance(other, BigReal):
            other = BigReal.of(other, self.precision)
        p = min(self.precision, other.precision)
        with mpmath.workdps(p):
            return BigReal(op(self.value, other.value), p)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __truediv__(self, other):
        if not isinstance(other, BigReal):
            other = BigReal.of(other, self.precision)
        if other.value == 0:
            raise DivisionByZero("division by a zero BigReal")
        return self._binary(other, lambda a, b: a / b)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return BigReal.of(other, self.precision) - self

    def __rtruediv__(self, other):
        return BigReal.of(other, self.precision) / self

    def __neg__(self):
        return BigReal(-self.value, self.precision)

    def __abs__(self):
        return BigReal(abs(self.value), self.precision)

    def sqrt(self) -> "BigReal":
        if self.value < 0:
            raise NegativeSqrt("square root of a negative BigReal")
        with mpmath.workdps(self.precision):
            return BigReal(mpmath.sqrt(self.value), self.precision)

    def sin(self) -> "BigReal":
        with mpmath.workdps(self.precision):
            return BigReal(mpmath.sin(self.value), self.precision)

    def ulp(self) -> mpf:
        """Spacing of the working precision at this value."""
        with mpmath.workdps(self.precision):
            bits = mpmath.mp.prec
            if self.value == 0:
                return mpmath.ldexp(mpf(1), -bits)
            return mpmath.ldexp(mpf(1), int(mpmath.floor(mpmath.log(abs(self.value), 2))) + 1 - bits)

    def _cmp_value(self, other):
        return other.value if isinstance(other, BigReal) else mpf(other)

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        return self.value == self._cmp_value(other)

    def __hash__(self):
        return hash((self.value, self.precision))

    def __float__(self):
        return float(self.value)

    def to_decimal_string(self) -> str:
        """All `precision` significant digits in scientific notation."""
        return mpmath.nstr(self.value, self.precision, min_fixed=1, max_fixed=0, strip_zeros=False)

    def __str__(self):
        return self.to_decimal_string()

    def __repr__(self):
        return f"BigReal({self.to_decimal_string()}, precision={self.precision})"


# ----------------------------------------------------------------- matrices


@dataclass(frozen=True, eq=False)
class BigMatrix:
    """Dense real matrix of ``mpf`` entries at a common precision."""

    rows: tuple
    precision: int

    @classmethod
    def from_array(cls, a, precision: int) -> "BigMatrix":
        """Exact conversion of a float array (or nested lists of mpf/str)."""
        with mpmath.workdps(precision):
            rows = tuple(tuple(mpf(v) for v in row) for row in a)
        return cls(rows, precision)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> BigReal:
        i, j = ij
        return BigReal(self.rows[i][j], self.precision)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.rows])

    def frobenius_norm(self) -> mpf:
        with mpmath.workdps(self.precision):
            return mpmath.sqrt(mpmath.fsum(v * v for row in self.rows for v in row))


def build_dbar_bigreal(M: int, precision: int) -> BigMatrix:
    """Limit matrix ``Dbar`` with entries ``f(j - j')`` at `precision` digits."""
    if M < 0 or M % 2:
        raise ValidationError("M must be even and >= 0")
    if precision < max(MIN_PRECISION, required_digits(M)):
        raise PrecisionTooLow(
            f"M={M} needs at least {required_digits(M)} digits, got {precision}"
        )
    with mpmath.workdps(precision):
        pi = +mpmath.mp.pi
        f = {0: mpf(1) / 2}
        for n in range(1, M + 1):
            if n % 2:
                sign = 1 if (n // 2) % 2 == 0 else -1
                f[n] = sign / (n * pi)
            else:
                f[n] = mpf(0)
        rows = tuple(tuple(f[abs(i - j)] for j in range(M + 1)) for i in range(M + 1))
    return BigMatrix(rows, precision)


# ------------------------------------------------------------- eigensolver


@dataclass(frozen=True)
class Tridiagonal:
    """``A = Q T Q^T`` with ``Q = H_0 H_1 ...`` (Householder vectors kept)."""

    diag: list
    off: list
    reflectors: list  # (k, v, beta): H = I - beta v v^T acting on rows k+1..


def tridiagonalize(a: BigMatrix) -> Tridiagonal:
    n = a.n
    with mpmath.workdps(a.precision):
        m = [list(row) for row in a.rows]
        reflectors = []
        for k in range(n - 2):
            x = [m[i][k] for i in range(k + 1, n)]
            norm_x = mpmath.sqrt(mpmath.fsum(v * v for v in x))
            if norm_x == 0:
                continue
            alpha = -norm_x if x[0] >= 0 else norm_x
            v = list(x)
            v[0] -= alpha
            vtv = mpmath.fsum(t * t for t in v)
            if vtv == 0:
                continue
            beta = 2 / vtv
            idx = range(k + 1, n)
            # p = beta A22 v, w = p - (beta/2)(v.p) v, A22 -= v w^T + w v^T
            p = [beta * mpmath.fsum(m[i][j] * v[j - k - 1] for j in idx) for i in idx]
            kk = beta / 2 * mpmath.fsum(pi * vi for pi, vi in zip(p, v))
            w = [pi - kk * vi for pi, vi in zip(p, v)]
            for ii, i in enumerate(idx):
                vi, wi = v[ii], w[ii]
                row = m[i]
                for jj, j in enumerate(idx):
                    row[j] -= vi * w[jj] + wi * v[jj]
            m[k + 1][k] = m[k][k + 1] = alpha
            for i in range(k + 2, n):
                m[i][k] = m[k][i] = mpf(0)
            reflectors.append((k, v, beta))
        diag = [m[i][i] for i in range(n)]
        off = [m[i + 1][i] for i in range(n - 1)]
    return Tridiagonal(diag, off, reflectors)


def sturm_count(t: Tridiagonal, x: mpf, tiny: mpf) -> int:
    """Number of eigenvalues of ``T`` strictly below `x`."""
    count = 0
    d = t.diag[0] - x
    if d == 0:
        d = -tiny
    if d < 0:
        count += 1
    for i in range(1, len(t.diag)):
        d = t.diag[i] - x - t.off[i - 1] ** 2 / d
        if d == 0:
            d = -tiny
        if d < 0:
            count += 1
    return count


def _gershgorin(t: Tridiagonal):
    n = len(t.diag)
    lo, hi = None, None
    for i in range(n):
        r = (abs(t.off[i - 1]) if i > 0 else 0) + (abs(t.off[i]) if i < n - 1 else 0)
        a, b = t.diag[i] - r, t.diag[i] + r
        lo = a if lo is None or a < lo else lo
        hi = b if hi is None or b > hi else hi
    return lo, hi


def bisect_eigenvalue(t: Tridiagonal, k: int, precision: int, scale: mpf) -> mpf:
    """The `k`-th smallest eigenvalue (0-based) of `t` by Sturm bisection."""
    n = len(t.diag)
    if not 0 <= k < n:
        raise ValidationError(f"eigenvalue index {k} out of range")
    with mpmath.workdps(precision):
        lo, hi = _gershgorin(t)
        pad = (hi - lo) * mpf(10) ** -5 + mpf(10) ** (-precision)
        lo, hi = lo - pad, hi + pad
        width_tol = mpf(10) ** -(precision - 10) * max(scale, mpf(1))
        tiny = mpf(10) ** (-2 * precision)
        cap = int(4 * precision * math.log2(10)) + 200
        for _ in range(cap):
            if hi - lo <= width_tol:
                return (lo + hi) / 2
            mid = (lo + hi) / 2
            if sturm_count(t, mid, tiny) > k:
                hi = mid
            else:
                lo = mid
    raise NoConvergence("bisection did not reach the target interval width")


def _solve_shifted(t: Tridiagonal, shift: mpf, rhs, tiny: mpf):
    """Solve ``(T - shift) y = rhs`` by Gaussian elimination with partial pivoting."""
    n = len(t.diag)
    if n == 1:
        d = t.diag[0] - shift
        return [rhs[0] / (d if d != 0 else tiny)]
    # rows stored as band [l, d, u, u2] after pivoting
    sub = [t.off[i] for i in range(n - 1)]
    dia = [t.diag[i] - shift for i in range(n)]
    sup = [t.off[i] for i in range(n - 1)] + [mpf(0)]
    sup2 = [mpf(0)] * n
    b = list(rhs)
    for i in range(n - 1):
        if abs(sub[i]) > abs(dia[i]):
            # swap rows i and i+1
            dia[i], sub[i] = sub[i], dia[i]
            sup[i], dia[i + 1] = dia[i + 1], sup[i]
            sup2[i], sup[i + 1] = sup[i + 1], sup2[i]
            b[i], b[i + 1] = b[i + 1], b[i]
        if dia[i] == 0:
            dia[i] = tiny
        factor = sub[i] / dia[i]
        dia[i + 1] -= factor * sup[i]
        sup[i + 1] -= factor * sup2[i]
        b[i + 1] -= factor * b[i]
    if dia[n - 1] == 0:
        dia[n - 1] = tiny
    y = [mpf(0)] * n
    for i in range(n - 1, -1, -1):
        acc = b[i]
        if i + 1 < n:
            acc -= sup[i] * y[i + 1]
        if i + 2 < n:
            acc -= sup2[i] * y[i + 2]
        y[i] = acc / dia[i]
    return y


def _normalize(v):
    nrm = mpmath.sqrt(mpmath.fsum(x * x for x in v))
    return [x / nrm for x in v]


def _back_transform(t: Tridiagonal, y):
    v = list(y)
    for k, h, beta in reversed(t.reflectors):
        s = beta * mpmath.fsum(h[i] * v[k + 1 + i] for i in range(len(h)))
        for i in range(len(h)):
            v[k + 1 + i] -= s * h[i]
    return v


def _matvec(a: BigMatrix, v):
    return [mpmath.fsum(aij * vj for aij, vj in zip(row, v)) for row in a.rows]


@dataclass(frozen=True)
class EigPair:
    """One eigenpair; `eigenvector` is a tuple of BigReal of unit norm."""

    eigenvalue: BigReal
    eigenvector: tuple
    residual: BigReal
    precision: int

    def eigenvector_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.eigenvector])


@dataclass(frozen=True)
class MinEigResult(EigPair):
    @property
    def lambda_min(self) -> BigReal:
        return self.eigenvalue


def _check_symmetric(a: BigMatrix, precision: int):
    tol = mpf(10) ** -(precision - 5)
    n = a.n
    for i in range(n):
        if len(a.rows[i]) != n:
            raise ValidationError("matrix must be square")
        for j in range(i + 1, n):
            if abs(a.rows[i][j] - a.rows[j][i]) > tol:
                raise NotHermitian(f"matrix not symmetric within 1e-{precision - 5}")


def eigpair(a, k: int, precision: Optional[int] = None, tri: Optional[Tridiagonal] = None,
            result_cls=EigPair) -> EigPair:
    """The `k`-th smallest eigenpair of a real symmetric matrix.

    Raises
    ------
    NoConvergence
        If the residual ``||A v - lambda v||`` cannot be pushed below
        ``10^-(precision - 15) ||A||`` (usually too few digits).
    """
    if not isinstance(a, BigMatrix):
        a = BigMatrix.from_array(np.asarray(a, dtype=float), precision or a_precision_default())
    precision = precision or a.precision
    if precision < MIN_PRECISION:
        raise PrecisionTooLow(f"precision must be >= {MIN_PRECISION} digits")
    if precision != a.precision:
        a = BigMatrix(a.rows, precision)
    _check_symmetric(a, precision)
    with mpmath.workdps(precision):
        norm_a = a.frobenius_norm()
        if tri is None:
            tri = tridiagonalize(a)
        lam = bisect_eigenvalue(tri, k, precision, norm_a)
        tiny = mpf(10) ** (-2 * precision) * max(norm_a, mpf(1))
        n = a.n
        # deterministic start vector with no special symmetry
        y = _normalize([1 + mpf(j) * mpmath.sqrt(2) % 1 for j in range(n)])
        bound = mpf(10) ** -(precision - 15) * max(norm_a, mpf(1e-300))
        residual = None
        for it in range(INVERSE_ITERATION_PASSES + MAX_EXTRA_PASSES):
            y = _normalize(_solve_shifted(tri, lam, y, tiny))
            if it + 1 < INVERSE_ITERATION_PASSES:
                continue
            v = _normalize(_back_transform(tri, y))
            av = _matvec(a, v)
            # residual of the bisection value against the recovered vector
            residual = mpmath.sqrt(mpmath.fsum((x - lam * w) ** 2 for x, w in zip(av, v)))
            if residual <= bound:
                break
        else:
            raise NoConvergence(
                f"residual {mpmath.nstr(residual, 5)} above bound {mpmath.nstr(bound, 5)}"
            )
        # fix the sign so the largest-magnitude component is positive
        big = max(range(n), key=lambda i: abs(v[i]))
        if v[big] < 0:
            v = [-x for x in v]
    return result_cls(
        eigenvalue=BigReal(lam, precision),
        eigenvector=tuple(BigReal(x, precision) for x in v),
        residual=BigReal(residual, precision),
        precision=precision,
    )


def a_precision_default() -> int:
    return 50


def min_eigpair(a, precision: Optional[int] = None) -> MinEigResult:
    """Smallest eigenvalue and unit eigenvector of a real symmetric matrix."""
    return eigpair(a, 0, precision, result_cls=MinEigResult)


def max_eigpair(a, precision: Optional[int] = None) -> EigPair:
    n = a.n if isinstance(a, BigMatrix) else len(a)
    return eigpair(a, n - 1, precision)


def eigenvalues(a, precision: Optional[int] = None) -> list:
    """All eigenvalues, ascending, as BigReal (bisection only, no vectors)."""
    if not isinstance(a, BigMatrix):
        a = BigMatrix.from_array(np.asarray(a, dtype=float), precision or a_precision_default())
    precision = precision or a.precision
    _check_symmetric(a, precision)
    with mpmath.workdps(precision):
        tri = tridiagonalize(BigMatrix(a.rows, precision))
        norm_a = a.frobenius_norm()
        return [BigReal(bisect_eigenvalue(tri, k, precision, norm_a), precision) for k in range(a.n)]


# ---------------------------------------------------------------- series


@dataclass(frozen=True)
class PrecisionPolicy:
    """Digits to use for a given ``M``.

    ``mode`` is ``"default"`` (``required_digits``), ``"floor"`` (at least
    `digits`), ``"fixed"`` (exactly `digits`) or ``"linear"``
    (``ceil(slope M) + digits``).
    """

    mode: str = "default"
    digits: int = 30
    slope: float = 0.8

    def digits_for(self, M: int) -> int:
        if self.mode == "default":
            return required_digits(M)
        if self.mode == "floor":
            return max(self.digits, required_digits(M))
        if self.mode == "fixed":
            return self.digits
        if self.mode == "linear":
            return math.ceil(self.slope * M) + self.digits
        raise ValidationError(f"unknown precision policy mode {self.mode!r}")

    def to_string(self) -> str:
        if self.mode == "default":
            return "default"
        if self.mode == "linear":
            return f"linear:{self.slope}:{self.digits}"
        return f"{self.mode}:{self.digits}"

    @classmethod
    def parse(cls, text: Optional[str] = None) -> "PrecisionPolicy":
        """Parse ``default``, ``floor:D``, ``fixed:D`` or ``linear:SLOPE:D``.

        With no argument the ``QCAQED_PRECISION_POLICY`` environment variable is
        consulted, falling back to ``default``.
        """
        if text is None:
            text = os.environ.get(POLICY_ENV, "default")
        text = text.strip().lower()
        if text == "default":
            return cls()
        m = re.fullmatch(r"(floor|fixed):(\d+)", text)
        if m:
            return cls(mode=m.group(1), digits=int(m.group(2)))
        m = re.fullmatch(r"linear:([0-9.]+):(\d+)", text)
        if m:
            return cls(mode="linear", slope=float(m.group(1)), digits=int(m.group(2)))
        raise ValidationError(f"cannot parse precision policy {text!r}")


@dataclass(frozen=True)
class SeriesPoint:
    M: int
    lambda_min: BigReal
    digits_used: int
    residual: BigReal

    def csv_row(self) -> list:
        return [
            str(self.M),
            self.lambda_min.to_decimal_string(),
            str(self.digits_used),
            self.residual.to_decimal_string(),
        ]


SERIES_HEADER = ["M", "lambda_min", "digits_used", "residual"]


def _series_job(args) -> SeriesPoint:
    M, digits = args
    res = min_eigpair(build_dbar_bigreal(M, digits))
    return SeriesPoint(M, res.lambda_min, digits, res.residual)


def min_eig_series(M_values: Sequence[int], policy: Optional[PrecisionPolicy] = None,
                   workers: int = 1) -> list:
    """``lambda_min(Dbar_M)`` for each ``M``; jobs are independent.

    With ``workers > 1`` the per-``M`` jobs run in separate processes.
    """
    M_values = list(M_values)
    if any(b <= a for a, b in zip(M_values, M_values[1:])):
        raise ValidationError("M values must be strictly ascending")
    policy = policy or PrecisionPolicy.parse()
    jobs = [(M, policy.digits_for(M)) for M in M_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_series_job, jobs))
    return [_series_job(j) for j in jobs]
