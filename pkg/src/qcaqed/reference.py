"""Independent constructions used to cross-check the main code paths.

Nothing here shares code with the objects it checks: the 1D walk is written
as a 2-component walker instead of a gate network, and the negative-energy
coupling is summed over momenta instead of evaluated as a quadratic form.
"""

from __future__ import annotations

import numpy as np


def walk_1d_matrix(n_sites: int, theta: float) -> np.ndarray:
    """One step of the 1D coined walk on ``2N`` amplitudes, site-major ``(+, -)``.

    The shift moves ``(x, +)`` to ``(x+1, -)`` and ``(x+1, -)`` to ``(x, +)``;
    the coin then mixes ``+`` and ``-`` at each site with
    ``[[-sin, cos], [cos, sin]]``.
    """
    dim = 2 * n_sites
    shift = np.zeros((dim, dim))
    for x in range(n_sites):
        p, m_next = 2 * x, 2 * ((x + 1) % n_sites) + 1
        shift[m_next, p] = 1
        shift[p, m_next] = 1
    c, s = np.cos(theta), np.sin(theta)
    coin = np.kron(np.eye(n_sites), np.array([[-s, c], [c, s]]))
    return coin @ shift


def brute_force_negative_coupling(v_plus, v_minus, n_sites: int, x: int = 0) -> float:
    """``sum_k |alpha~_(k,neg)|^2`` summed directly over ``k = 2 pi j / N``."""
    v_plus = np.asarray(v_plus, dtype=complex)
    v_minus = np.asarray(v_minus, dtype=complex)
    half = (len(v_plus) - 1) // 2
    total = 0.0
    for j in range(-n_sites // 2 + 1, n_sites // 2 + 1):
        k = 2 * np.pi * j / n_sites
        coeffs = v_minus if k > 0 else v_plus
        amp = 0j
        for idx, a in enumerate(coeffs):
            y = idx - half
            amp += np.exp(-1j * (x + y) * k) * a
        total += abs(amp) ** 2 / n_sites
    return float(total)


def machin_pi_digits(digits: int) -> str:
    """``pi`` to `digits` decimals from Machin's formula in integer arithmetic."""
    guard = 10
    scale = 10 ** (digits + guard)

    def arctan_inv(n):
        total, term, k, sign = 0, scale // n, 1, 1
        n2 = n * n
        while term:
            total += sign * (term // k)
            term //= n2
            k += 2
            sign = -sign
        return total

    pi_scaled = 4 * (4 * arctan_inv(5) - arctan_inv(239))
    text = str(pi_scaled // 10**guard)
    return text[0] + "." + text[1 : digits + 1]
