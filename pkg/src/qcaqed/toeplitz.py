"""Toeplitz matrices governing the residual negative-energy coupling.

A range-``M/2`` interaction couples to negative-energy bosons with weight
``v^dagger D v`` where ``D`` is an ``(M+1) x (M+1)`` Toeplitz matrix.  Up to
phases absorbable into ``v`` this is the real symmetric ``Dbar`` with symbol

    f(0) = 1/2,  f(even) = 0,  f(odd n) = (-1)^((n-1)/2) / (n pi)

in the ``N -> inf`` limit.  Offsets are indexed ``j = 0..M`` with
``y = j - M/2``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ValidationError


def symbol_f(n) -> np.ndarray:
    """The Toeplitz symbol ``f(n)``; accepts scalars or integer arrays."""
    n = np.abs(np.asarray(n, dtype=np.int64))
    odd = n % 2 == 1
    sign = np.where((n // 2) % 2 == 0, 1.0, -1.0)
    safe = np.where(odd, n, 1)
    out = np.where(odd, sign / (safe * np.pi), 0.0)
    out = np.where(n == 0, 0.5, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ToeplitzSpec:
    """Range parameter `M` and lattice size `N` (``None`` means ``N -> inf``)."""

    M: int
    N: Optional[int] = None

    def __post_init__(self):
        if self.M < 0 or self.M % 2:
            raise ValidationError("M must be even and >= 0")
        if self.N is not None and self.N <= 2 * self.M:
            raise ValidationError("finite N must exceed 2M")
        if self.N is not None and self.N % 2:
            raise ValidationError("finite N must be even (the momentum grid splits into halves)")

    @property
    def size(self) -> int:
        return self.M + 1

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.size) - self.M // 2


def _differences(size: int) -> np.ndarray:
    j = np.arange(size)
    return j[:, None] - j[None, :]


def _finite_real_kernel(delta: np.ndarray, n: int) -> np.ndarray:
    nz = delta != 0
    safe = np.where(nz, delta, 1)
    val = np.sin(np.pi * safe / 2) / (n * np.sin(np.pi * safe / n))
    return np.where(nz, val, 0.5)


def dbar_matrix(spec: ToeplitzSpec) -> np.ndarray:
    """Real symmetric Toeplitz matrix ``Dbar`` (finite-N exact or the limit)."""
    delta = _differences(spec.size)
    if spec.N is None:
        return symbol_f(delta)
    return _finite_real_kernel(delta, spec.N)


def d_complex_matrix(spec: ToeplitzSpec) -> np.ndarray:
    """``d_jj' = (1/N) sum_{l=1}^{N/2} exp(-2 i pi (j-j') l / N)`` in closed form.

    Summing the geometric series gives the phase
    ``exp(-i pi (j-j') (N+2) / 2N)`` times the real kernel of :func:`dbar_matrix`.
    """
    if spec.N is None:
        raise ValidationError("the complex matrix D needs a finite N")
    n = spec.N
    delta = _differences(spec.size)
    phase = np.exp(-1j * np.pi * delta * (n + 2) / (2 * n))
    return phase * _finite_real_kernel(delta, n)


def shifted_d_matrix(spec: ToeplitzSpec) -> np.ndarray:
    """``(1/N) sum_{l=0}^{N/2-1} exp(-2 i pi (j-j') l / N)``: the ``k <= 0`` branch sum."""
    delta = _differences(spec.size)
    return np.exp(2j * np.pi * delta / spec.N) * d_complex_matrix(spec)


def f_tilde(k, terms: int, chunk: int = 4096) -> np.ndarray:
    """Partial Fourier sum ``1/2 + sum_{odd n <= terms} 2 f(n) cos(n k)``."""
    if terms < 1:
        raise ValidationError("terms must be >= 1")
    k = np.asarray(k, dtype=float)
    flat = k.ravel()
    n = np.arange(1, terms + 1, 2)
    coef = 2 * symbol_f(n)
    out = np.empty_like(flat)
    for start in range(0, len(flat), chunk):
        ks = flat[start : start + chunk]
        out[start : start + chunk] = 0.5 + np.cos(np.outer(ks, n)) @ coef
    out = out.reshape(k.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CouplingProfile:
    """Coefficients ``alpha_(y,+)`` and ``alpha_(y,-)`` over offsets ``y = -M/2..M/2``."""

    v_plus: np.ndarray
    v_minus: np.ndarray

    def __post_init__(self):
        vp = np.asarray(self.v_plus, dtype=complex).ravel()
        vm = np.asarray(self.v_minus, dtype=complex).ravel()
        if vp.shape != vm.shape:
            raise ValidationError("v_plus and v_minus must have the same length")
        if not (np.all(np.isfinite(vp)) and np.all(np.isfinite(vm))):
            raise ValidationError("profile entries must be finite")
        object.__setattr__(self, "v_plus", vp)
        object.__setattr__(self, "v_minus", vm)

    @property
    def M(self) -> int:
        return len(self.v_plus) - 1


def negative_coupling(profile: CouplingProfile, spec: ToeplitzSpec) -> float:
    """``sum_k |alpha~_(k,neg)|^2`` as a quadratic form in the profile.

    With ``k = 2 pi l / N`` the ``k > 0`` branch (``l = 1..N/2``) carries
    ``alpha_-`` and gives ``v_-^dagger D^* v_-``; the ``k <= 0`` branch carries
    ``alpha_+`` and gives ``v_+^dagger D' v_+`` with ``D'`` the same sum over
    ``l = 0..N/2-1``.  All three matrices share one spectrum.
    """
    if spec.N is None:
        raise ValidationError("negative_coupling needs a finite N")
    if profile.M != spec.M:
        raise ValidationError("profile length does not match M + 1")
    d = d_complex_matrix(spec)
    vm, vp = profile.v_minus, profile.v_plus
    value = np.vdot(vm, np.conj(d) @ vm) + np.vdot(vp, shifted_d_matrix(spec) @ vp)
    return float(value.real)


def minimizing_profile(spec: ToeplitzSpec) -> CouplingProfile:
    """Unit vectors minimising each branch of :func:`negative_coupling`."""
    _, vm = np.linalg.eigh(np.conj(d_complex_matrix(spec)))
    _, vp = np.linalg.eigh(shifted_d_matrix(spec))
    return CouplingProfile(v_plus=vp[:, 0], v_minus=vm[:, 0])


def finite_n_correction(M: int, n: int) -> float:
    """``||Dbar_N - Dbar_inf||_F``."""
    return float(np.linalg.norm(dbar_matrix(ToeplitzSpec(M, n)) - dbar_matrix(ToeplitzSpec(M))))


def format_float(x: float) -> str:
    """Shortest round-trip decimal for a double."""
    return repr(float(x))


def matrix_to_csv(matrix, fmt=format_float) -> str:
    """Row-major CSV without a header; entries via `fmt`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in matrix:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def golden_matrix_m4() -> np.ndarray:
    """The M = 4 limit matrix written out as rational multiples of ``1/pi``."""
    h = math.pi / 2
    t = -1.0 / 3.0
    rows = [
        [h, 1, 0, t, 0],
        [1, h, 1, 0, t],
        [0, 1, h, 1, 0],
        [t, 0, 1, h, 1],
        [0, t, 0, 1, h],
    ]
    return np.array(rows) / math.pi
