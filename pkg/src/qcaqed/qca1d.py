"""State-vector simulation of the 1D fermionic and bosonic QCAs.

Each site ``x = 0..N-1`` (periodic) carries two modes ``(x, +)`` and
``(x, -)``.  Modes are numbered site-major, ``+`` before ``-``::

    mode(x, +) = 2x,   mode(x, -) = 2x + 1

Fermion basis states are bit strings over the ``2N`` modes (mode 0 is the
leftmost character of a label, so ``"1000"`` is one particle in ``(0, +)``).
Fermionic signs use Jordan-Wigner ordering along the mode numbering.  Boson
basis states are occupation tuples truncated by *total* particle number, so
number-conserving gates are exact on the truncated space.

One step is ``U = C Sigma``: ``Sigma`` couples ``(x, +)`` with ``(x+1, -)`` and
``C`` couples ``(x, +)`` with ``(x, -)``.  Operators are returned as
``scipy.sparse`` CSR matrices on the basis produced by :func:`make_basis`.
Joint fermion-boson operators act on ``kron(fermion, boson)``, i.e. joint
index ``i_f * dim_b + i_b``.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionTooLarge, ValidationError

MAX_FERMION_DIM = 2**16
MAX_BOSON_DIM = 10**6
MAX_DENSE_DIM = 8192
NORM_TOL = 1e-12


class Species1D(str, enum.Enum):
    FERMION = "fermion"
    BOSON = "boson"


class GateConvention(str, enum.Enum):
    # explicit two-qubit tables for C and S (|11> -> -|11>)
    TABLE = "table"
    # exp{-i phi (b+^dag b- + h.c.)} with Jordan-Wigner strings
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Lattice1DConfig:
    n_sites: int
    species: Species1D = Species1D.FERMION
    theta: float = 0.0
    boson_truncation: int = 0
    convention: GateConvention = GateConvention.TABLE

    def __post_init__(self):
        object.__setattr__(self, "species", Species1D(self.species))
        object.__setattr__(self, "convention", GateConvention(self.convention))
        if self.n_sites < 2 or self.n_sites % 2:
            raise ValidationError("n_sites must be even and >= 2")
        if self.boson_truncation < 0:
            raise ValidationError("boson_truncation must be >= 0")
        if self.species is Species1D.BOSON and self.theta != 0:
            raise ValidationError("the bosonic QCA is massless; theta must be 0")

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    @property
    def is_fermion(self) -> bool:
        return self.species is Species1D.FERMION


def mode_index(x: int, sign: str, n_sites: int) -> int:
    return 2 * (x % n_sites) + (0 if sign == "+" else 1)


# ---------------------------------------------------------------- bases


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation-number basis; ``occ[i]`` is the occupation tuple of state i."""

    n_modes: int
    base: int
    occ: np.ndarray
    codes: np.ndarray
    fermionic: bool

    @property
    def dim(self) -> int:
        return len(self.codes)

    @functools.cached_property
    def weights(self) -> np.ndarray:
        return self.base ** np.arange(self.n_modes - 1, -1, -1, dtype=np.int64)

    def index_of(self, occupation) -> int:
        code = int(np.dot(np.asarray(occupation, dtype=np.int64), self.weights))
        i = int(np.searchsorted(self.codes, code))
        if i >= self.dim or self.codes[i] != code:
            raise ValidationError(f"occupation {tuple(occupation)} not in basis")
        return i

    def lookup(self, codes: np.ndarray):
        """Row indices for `codes` and a mask of which ones are in the basis."""
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, self.dim - 1)
        return idx, self.codes[idx] == codes

    def label(self, i: int) -> str:
        row = self.occ[i]
        if self.fermionic:
            return "".join(str(int(v)) for v in row)
        return ",".join(str(int(v)) for v in row)

    def parse_label(self, label: str) -> int:
        label = label.strip()
        if self.fermionic:
            occupation = [int(ch) for ch in label]
        else:
            occupation = [int(v) for v in label.split(",")]
        if len(occupation) != self.n_modes:
            raise ValidationError(f"label {label!r} does not have {self.n_modes} modes")
        return self.index_of(occupation)


def _build_basis(occ_rows: np.ndarray, n_modes: int, base: int, fermionic: bool) -> FockBasis:
    occ = np.asarray(occ_rows, dtype=np.int64).reshape(-1, n_modes)
    weights = base ** np.arange(n_modes - 1, -1, -1, dtype=np.int64)
    codes = occ @ weights
    order = np.argsort(codes)
    return FockBasis(n_modes, base, occ[order], codes[order], fermionic)


@functools.lru_cache(maxsize=64)
def fermion_basis(n_modes: int, number: Optional[int] = None) -> FockBasis:
    if number is None:
        dim = 2**n_modes
        if dim > MAX_FERMION_DIM:
            raise DimensionTooLarge(f"fermion space 2^{n_modes} exceeds 2^16")
        codes = np.arange(dim, dtype=np.int64)
        shifts = np.arange(n_modes - 1, -1, -1)
        occ = (codes[:, None] >> shifts) & 1
        return _build_basis(occ, n_modes, 2, True)
    rows = []
    for modes in itertools.combinations(range(n_modes), number):
        row = np.zeros(n_modes, dtype=np.int64)
        row[list(modes)] = 1
        rows.append(row)
        if len(rows) > MAX_FERMION_DIM:
            raise DimensionTooLarge("fermion sector exceeds 2^16 states")
    return _build_basis(np.array(rows), n_modes, 2, True)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@functools.lru_cache(maxsize=64)
def boson_basis(n_modes: int, max_total: int, number: Optional[int] = None) -> FockBasis:
    totals = range(max_total + 1) if number is None else [number]
    rows = []
    for total in totals:
        for comp in _compositions(total, n_modes):
            rows.append(comp)
            if len(rows) > MAX_BOSON_DIM:
                raise DimensionTooLarge("truncated boson space exceeds 1e6 states")
    if (max_total + 1) ** n_modes >= 2**62:
        raise DimensionTooLarge("occupation codes overflow 64-bit integers")
    return _build_basis(np.array(rows), n_modes, max_total + 1, False)


def make_basis(cfg: Lattice1DConfig, sector: Optional[int] = None) -> FockBasis:
    """Basis of `cfg`'s state space, optionally only the `sector`-particle states."""
    if cfg.is_fermion:
        return fermion_basis(cfg.n_modes, sector)
    if sector is not None and sector > cfg.boson_truncation:
        raise ValidationError("sector exceeds the boson truncation")
    return boson_basis(cfg.n_modes, cfg.boson_truncation, sector)


# ------------------------------------------------------ operator assembly


def _assemble(basis: FockBasis, terms, rows_from=None) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for new_codes, coef, src in terms:
        idx, found = basis.lookup(new_codes)
        keep = found & (coef != 0)
        rows.append(idx[keep])
        cols.append(src[keep])
        vals.append(coef[keep])
    if not rows:
        return sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
        dtype=complex,
    )


def two_mode_operator(basis: FockBasis, p: int, q: int, local_map, jw_sign: bool = False):
    """Operator acting on modes ``p`` and ``q`` only.

    ``local_map(n_p, n_q)`` returns ``[(n_p', n_q', coef, hops), ...]``.  When
    `jw_sign` is set, outputs flagged ``hops`` pick up the Jordan-Wigner sign
    ``(-1)^(occupied modes strictly between p and q)``.
    """
    occ = basis.occ
    w = basis.weights
    src_all = np.arange(basis.dim)
    lo, hi = min(p, q), max(p, q)
    sign = None
    if jw_sign:
        sign = 1 - 2 * (occ[:, lo + 1 : hi].sum(axis=1) % 2)
    terms = []
    pairs = occ[:, [p, q]]
    for np_, nq in {tuple(r) for r in pairs.tolist()}:
        mask = (pairs[:, 0] == np_) & (pairs[:, 1] == nq)
        src = src_all[mask]
        for np2, nq2, coef, hops in local_map(np_, nq):
            new = basis.codes[mask] + (np2 - np_) * w[p] + (nq2 - nq) * w[q]
            c = np.full(len(src), coef, dtype=complex)
            if hops and sign is not None:
                c = c * sign[mask]
            terms.append((new, c, src))
    return _assemble(basis, terms)


def annihilator(basis: FockBasis, m: int) -> sp.csr_matrix:
    """``a_m`` (bosons) or Jordan-Wigner ``b_m`` (fermions) on `basis`."""
    occ = basis.occ
    n = occ[:, m]
    mask = n > 0
    src = np.arange(basis.dim)[mask]
    if basis.fermionic:
        coef = (1 - 2 * (occ[mask, :m].sum(axis=1) % 2)).astype(complex)
    else:
        coef = np.sqrt(n[mask]).astype(complex)
    new = basis.codes[mask] - basis.weights[m]
    return _assemble(basis, [(new, coef, src)])


def number_operator(basis: FockBasis, m: int) -> sp.csr_matrix:
    return sp.diags(basis.occ[:, m].astype(complex), format="csr")


def hop_operator(basis: FockBasis, m: int, n: int) -> sp.csr_matrix:
    """``c_m^dagger c_n`` with the statistics of `basis`."""
    if m == n:
        return number_operator(basis, m)
    a_m = annihilator(basis, m)
    a_n = annihilator(basis, n)
    return (a_m.conj().T @ a_n).tocsr()


# ----------------------------------------------------------------- gates


def coin_gate(theta: float) -> np.ndarray:
    """Two-qubit coin on ``|(x,+)(x,-)>`` in the order 00, 01, 10, 11."""
    c, s = np.cos(theta), np.sin(theta)
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = 1
    g[2, 1], g[1, 1] = c, s  # C|01> = cos|10> + sin|01>
    g[1, 2], g[2, 2] = c, -s  # C|10> = cos|01> - sin|10>
    g[3, 3] = -1
    return g


def shift_gate() -> np.ndarray:
    """Two-qubit shift on ``|(x,+)(x+1,-)>``: swap with a sign on ``|11>``."""
    return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)


def _table_map(gate: np.ndarray):
    def local_map(a, b):
        col = 2 * a + b
        return [(r >> 1, r & 1, gate[r, col], False) for r in range(4) if gate[r, col] != 0]

    return local_map


def _hop_exp_map(phi: float):
    # exp(-i phi (c_p^dag c_q + h.c.)) for fermions
    cs, sn = np.cos(phi), np.sin(phi)

    def local_map(a, b):
        if a == b:
            return [(a, b, 1.0, False)]
        return [(a, b, cs, False), (b, a, -1j * sn, True)]

    return local_map


def _boson_swap_map(a, b):
    # exp(-i pi/2 (a^dag b + b^dag a)) sends a^dag -> -i b^dag, b^dag -> -i a^dag
    return [(b, a, (-1j) ** (a + b), False)]


def _product(ops, dim):
    out = sp.identity(dim, dtype=complex, format="csr")
    for op in ops:
        out = (op @ out).tocsr()
    return out


def _pair_layer(cfg: Lattice1DConfig, basis: FockBasis, pairs, kind: str):
    ops = []
    for p, q in pairs:
        if not cfg.is_fermion:
            ops.append(two_mode_operator(basis, p, q, _boson_swap_map))
        elif cfg.convention is GateConvention.TABLE:
            gate = coin_gate(cfg.theta) if kind == "coin" else shift_gate()
            ops.append(two_mode_operator(basis, p, q, _table_map(gate)))
        else:
            phi = np.pi / 2 + (cfg.theta if kind == "coin" else 0.0)
            ops.append(two_mode_operator(basis, p, q, _hop_exp_map(phi), jw_sign=True))
    # gates act on disjoint mode pairs and commute
    return _product(ops, basis.dim)


def coin_layer(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """``C``: every site couples ``(x,+)`` with ``(x,-)``."""
    basis = make_basis(cfg, sector)
    pairs = [(2 * x, 2 * x + 1) for x in range(cfg.n_sites)]
    return _pair_layer(cfg, basis, pairs, "coin")


def shift_layer(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """``Sigma``: every site couples ``(x,+)`` with ``(x+1,-)``."""
    basis = make_basis(cfg, sector)
    n = cfg.n_sites
    pairs = [(2 * x, mode_index(x + 1, "-", n)) for x in range(n)]
    return _pair_layer(cfg, basis, pairs, "shift")


def build_evolution(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """One QCA step ``U = C Sigma`` as a sparse matrix on ``make_basis(cfg, sector)``."""
    return (coin_layer(cfg, sector) @ shift_layer(cfg, sector)).tocsr()


def single_particle_block(cfg: Lattice1DConfig) -> np.ndarray:
    """``U`` restricted to one excitation, rows/columns in mode order."""
    basis = make_basis(cfg, 1)
    u = build_evolution(cfg, 1).toarray()
    order = []
    for m in range(cfg.n_modes):
        occupation = np.zeros(cfg.n_modes, dtype=int)
        occupation[m] = 1
        order.append(basis.index_of(occupation))
    return u[np.ix_(order, order)]


# --------------------------------------------------------- time reversal


def plus_parity(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """``V = exp(i pi sum_x n_(x,+))``: -1 on odd ``+``-mode occupancy."""
    basis = make_basis(cfg, sector)
    n_plus = basis.occ[:, 0::2].sum(axis=1)
    return sp.diags((1 - 2 * (n_plus % 2)).astype(complex), format="csr")


def reversal_conjugator(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """The unitary ``V`` with ``V^dag C V = C^dag`` and ``V^dag Sigma V = Sigma^dag``.

    For exponential gates (bosons, or fermions with Jordan-Wigner hops) this
    is :func:`plus_parity`, which flips the sign of every generator.  The table
    gates are real symmetric involutions, so ``C`` and ``Sigma`` are already
    self-adjoint and ``V`` is the identity.
    """
    if cfg.is_fermion and cfg.convention is GateConvention.TABLE:
        return sp.identity(make_basis(cfg, sector).dim, dtype=complex, format="csr")
    return plus_parity(cfg, sector)


def tau_operator(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """``tau = C V^dag``, satisfying ``tau U tau^dag = U^dag``."""
    v = reversal_conjugator(cfg, sector)
    return (coin_layer(cfg, sector) @ v.conj().T).tocsr()


def sparse_norm(a) -> float:
    """Frobenius norm of a dense or sparse matrix."""
    if sp.issparse(a):
        data = a.tocsr().data
        return float(np.sqrt(np.sum(np.abs(data) ** 2)))
    return float(np.linalg.norm(a))


def time_reversal_defect(cfg: Lattice1DConfig, sector: Optional[int] = None) -> float:
    """``||tau U tau^dag - U^dag||_F``."""
    u = build_evolution(cfg, sector)
    tau = tau_operator(cfg, sector)
    return sparse_norm(tau @ u @ tau.conj().T - u.conj().T)


# ------------------------------------------------------------ translation


def translation_operator(cfg: Lattice1DConfig, sector: Optional[int] = None) -> sp.csr_matrix:
    """Move every site's content from ``x`` to ``x + 1`` (a mode permutation).

    For fermions this is the plain qubit permutation, which commutes with the
    table gates; it carries no Jordan-Wigner sign.
    """
    basis = make_basis(cfg, sector)
    new_occ = np.roll(basis.occ, 2, axis=1)
    new_codes = new_occ @ basis.weights
    src = np.arange(basis.dim)
    return _assemble(basis, [(new_codes, np.ones(basis.dim, dtype=complex), src)])


def translation_commutator(u, cfg_f: Optional[Lattice1DConfig], cfg_b: Optional[Lattice1DConfig] = None,
                           sector_f: Optional[int] = None) -> float:
    """``||U T - T U||_F`` with ``T`` translating both lattices by one site."""
    ts = []
    if cfg_f is not None:
        ts.append(translation_operator(cfg_f, sector_f))
    if cfg_b is not None:
        ts.append(translation_operator(cfg_b))
    t = ts[0] if len(ts) == 1 else sp.kron(ts[0], ts[1], format="csr")
    if sp.issparse(u):
        return sparse_norm(u @ t - t @ u)
    u = np.asarray(u)
    return float(np.linalg.norm(t.T.dot(u.T).T - t @ u))


# ----------------------------------------------------------- interaction


@dataclass(frozen=True)
class InteractionCoeffs:
    """Couplings ``alpha[y, l, m, n]`` of ``a_(x+y, l) b_(x, m)^dag b_(x, n)``.

    Offsets run ``y = -M/2 .. M/2`` along axis 0; sign indices are 0 for ``+``
    and 1 for ``-``.  `site_scale` optionally multiplies the couplings at each
    fermion site ``x`` (anything non-constant breaks translation invariance).
    """

    alpha: np.ndarray
    site_scale: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        if a.shape == (2, 2, 2):
            a = a[None]
        if a.ndim != 4 or a.shape[1:] != (2, 2, 2) or a.shape[0] % 2 != 1:
            raise ValidationError("alpha must have shape (M+1, 2, 2, 2) with M even")
        if not np.all(np.isfinite(a)):
            raise ValidationError("alpha must be finite")
        object.__setattr__(self, "alpha", a)
        if self.site_scale is not None:
            object.__setattr__(self, "site_scale", np.asarray(self.site_scale, dtype=complex))

    @property
    def range(self) -> int:
        return self.alpha.shape[0] - 1

    @classmethod
    def uniform(cls, value: complex, range_: int = 0) -> "InteractionCoeffs":
        return cls(np.full((range_ + 1, 2, 2, 2), value, dtype=complex))


def joint_dim(cfg_f: Lattice1DConfig, cfg_b: Lattice1DConfig, sector_f=None) -> int:
    return make_basis(cfg_f, sector_f).dim * make_basis(cfg_b).dim


def interaction_hamiltonian(cfg_f: Lattice1DConfig, cfg_b: Lattice1DConfig,
                            coeffs: InteractionCoeffs, sector_f: Optional[int] = None):
    """``H_I = sum_x sum_y sum_lmn (alpha a_(x+y,l) b_(x,m)^dag b_(x,n) + h.c.)``.

    Built on the truncated joint space; creation terms that would exceed the
    boson truncation are dropped, which keeps ``H_I`` exactly Hermitian.
    """
    if not cfg_f.is_fermion or cfg_b.is_fermion:
        raise ValidationError("expected a fermion config and a boson config")
    if cfg_f.n_sites != cfg_b.n_sites:
        raise ValidationError("fermion and boson lattices must have the same size")
    n = cfg_f.n_sites
    fb = make_basis(cfg_f, sector_f)
    bb = make_basis(cfg_b)
    if fb.dim * bb.dim > MAX_BOSON_DIM:
        raise DimensionTooLarge(f"joint dimension {fb.dim * bb.dim} exceeds 1e6")
    half = coeffs.range // 2
    scale = coeffs.site_scale if coeffs.site_scale is not None else np.ones(n)
    if len(scale) != n:
        raise ValidationError("site_scale must have one entry per site")
    signs = "+-"
    boson_ops = {m: annihilator(bb, m) for m in range(cfg_b.n_modes)}
    total = sp.csr_matrix((fb.dim * bb.dim, fb.dim * bb.dim), dtype=complex)
    for x in range(n):
        for (m, sm), (nn, sn) in itertools.product(enumerate(signs), repeat=2):
            f_op = hop_operator(fb, mode_index(x, sm, n), mode_index(x, sn, n))
            b_sum = sp.csr_matrix((bb.dim, bb.dim), dtype=complex)
            for yi in range(coeffs.range + 1):
                y = yi - half
                for li, sl in enumerate(signs):
                    a = coeffs.alpha[yi, li, m, nn] * scale[x]
                    if a != 0:
                        b_sum = b_sum + a * boson_ops[mode_index(x + y, sl, n)]
            if b_sum.nnz:
                total = total + sp.kron(f_op, b_sum, format="csr")
    return (total + total.conj().T).tocsr()


def _expm_hermitian(h, sign: float = -1.0) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * sign * w)) @ v.conj().T


def interaction_unitary(cfg_f: Lattice1DConfig, cfg_b: Lattice1DConfig,
                        coeffs: InteractionCoeffs, sector_f: Optional[int] = None) -> np.ndarray:
    """Dense ``exp(-i H_I)`` on the truncated joint space (exactly unitary there)."""
    h = interaction_hamiltonian(cfg_f, cfg_b, coeffs, sector_f)
    if h.shape[0] > MAX_DENSE_DIM:
        raise DimensionTooLarge(
            f"dense interaction unitary needs dim <= {MAX_DENSE_DIM}; use apply_interaction"
        )
    hd = h.toarray()
    hd = 0.5 * (hd + hd.conj().T)
    # H_I conserves fermion number, so exponentiate one sector at a time
    fb = make_basis(cfg_f, sector_f)
    dim_b = make_basis(cfg_b).dim
    n_f = np.repeat(fb.occ.sum(axis=1), dim_b)
    out = np.zeros_like(hd)
    for n in np.unique(n_f):
        idx = np.flatnonzero(n_f == n)
        out[np.ix_(idx, idx)] = _expm_hermitian(hd[np.ix_(idx, idx)])
    return out


def apply_interaction(psi: np.ndarray, cfg_f, cfg_b, coeffs, sector_f=None) -> np.ndarray:
    """``exp(-i H_I) psi`` without forming the dense unitary."""
    from scipy.sparse.linalg import expm_multiply

    h = interaction_hamiltonian(cfg_f, cfg_b, coeffs, sector_f)
    return expm_multiply(-1j * h, psi)


def free_joint_evolution(cfg_f, cfg_b, sector_f=None) -> sp.csr_matrix:
    """``U_B U_F`` on the joint space."""
    return sp.kron(build_evolution(cfg_f, sector_f), build_evolution(cfg_b), format="csr")


def full_step(cfg_f, cfg_b, coeffs, sector_f=None) -> np.ndarray:
    """``U = U_I U_B U_F`` as a dense matrix."""
    u_i = interaction_unitary(cfg_f, cfg_b, coeffs, sector_f)
    free = free_joint_evolution(cfg_f, cfg_b, sector_f)
    return free.T.dot(u_i.T).T


def fermion_number(cfg_f, cfg_b, sector_f=None) -> sp.csr_matrix:
    fb = make_basis(cfg_f, sector_f)
    nf = sp.diags(fb.occ.sum(axis=1).astype(complex))
    return sp.kron(nf, sp.identity(make_basis(cfg_b).dim), format="csr")


# ----------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class LatticeState1D:
    """Normalised amplitudes on a single basis or on ``fermion (x) boson``."""

    amplitudes: np.ndarray
    basis: FockBasis
    boson_basis: Optional[FockBasis] = None
    check_norm: bool = field(default=True, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != self.dim:
            raise ValidationError(f"expected {self.dim} amplitudes, got {len(amps)}")
        if self.check_norm and abs(np.linalg.norm(amps) - 1) > NORM_TOL:
            raise ValidationError("state is not normalised")

    @property
    def dim(self) -> int:
        return self.basis.dim * (self.boson_basis.dim if self.boson_basis else 1)

    @classmethod
    def basis_state(cls, basis: FockBasis, label: str, boson_basis=None, boson_label=None):
        i = basis.parse_label(label)
        if boson_basis is not None:
            i = i * boson_basis.dim + boson_basis.parse_label(boson_label)
        dim = basis.dim * (boson_basis.dim if boson_basis else 1)
        amps = np.zeros(dim, dtype=complex)
        amps[i] = 1
        return cls(amps, basis, boson_basis)

    def evolve(self, u, renormalize: bool = False) -> "LatticeState1D":
        new = u @ self.amplitudes
        if renormalize:
            new = new / np.linalg.norm(new)
        return LatticeState1D(np.asarray(new).ravel(), self.basis, self.boson_basis)

    def label(self, i: int) -> str:
        if self.boson_basis is None:
            return self.basis.label(i)
        f, b = divmod(i, self.boson_basis.dim)
        return f"{self.basis.label(f)}|{self.boson_basis.label(b)}"

    def records(self, tol: float = 0.0):
        """``(label, real, imag)`` for every amplitude with modulus above `tol`."""
        out = []
        for i, a in enumerate(self.amplitudes):
            if abs(a) > tol:
                out.append((self.label(i), float(a.real), float(a.imag)))
        return out

    @classmethod
    def from_records(cls, records, basis: FockBasis, boson_basis=None):
        dim = basis.dim * (boson_basis.dim if boson_basis else 1)
        amps = np.zeros(dim, dtype=complex)
        for label, re, im in records:
            if boson_basis is None:
                i = basis.parse_label(label)
            else:
                f_label, b_label = label.split("|")
                i = basis.parse_label(f_label) * boson_basis.dim + boson_basis.parse_label(b_label)
            amps[i] += complex(float(re), float(im))
        return cls(amps, basis, boson_basis)


# ------------------------------------------------- negative-energy modes


def momentum_grid(n_sites: int) -> np.ndarray:
    """``k = 2 pi j / N`` for ``-N/2 < j <= N/2`` (units of 1/dx)."""
    j = np.arange(-n_sites // 2 + 1, n_sites // 2 + 1)
    return 2 * np.pi * j / n_sites


@dataclass(frozen=True)
class ModePopulations:
    k: np.ndarray
    positive: np.ndarray
    negative: np.ndarray

    @property
    def total(self) -> float:
        return float(self.positive.sum() + self.negative.sum())


def boson_density_matrix(state: LatticeState1D, cfg_b: Lattice1DConfig) -> np.ndarray:
    """One-body matrix ``rho[m, m'] = <a_m^dag a_m'>`` over the boson modes."""
    bb = state.boson_basis if state.boson_basis is not None else state.basis
    if bb.fermionic:
        raise ValidationError("state has no boson component")
    psi = state.amplitudes.reshape(-1, bb.dim)
    lowered = []
    for m in range(cfg_b.n_modes):
        a = annihilator(bb, m)
        lowered.append(a.dot(psi.T).T.ravel())
    low = np.array(lowered)
    return np.conj(low) @ low.T


def negative_mode_population(state: LatticeState1D, cfg_b: Lattice1DConfig) -> ModePopulations:
    """Occupation of the positive- and negative-energy boson modes per momentum.

    ``a_(k,+-) = N^-1/2 sum_x exp(i x k) a_(x,+-)``.  Positive energy is
    ``(k, +)`` for ``k > 0`` and ``(k, -)`` for ``k <= 0``; the other branch is
    negative energy.
    """
    n = cfg_b.n_sites
    rho = boson_density_matrix(state, cfg_b)
    ks = momentum_grid(n)
    xs = np.arange(n)
    phase = np.exp(1j * np.outer(ks, xs)) / np.sqrt(n)  # [k, x]
    pops = {}
    for s_idx, s in enumerate("+-"):
        modes = 2 * xs + s_idx
        block = rho[np.ix_(modes, modes)]
        # <a_k^dag a_k> = sum_{x,x'} conj(phase[k,x]) phase[k,x'] rho[x,x']
        pops[s] = np.real(np.einsum("kx,xy,ky->k", np.conj(phase), block, phase))
    positive = np.where(ks > 0, pops["+"], pops["-"])
    negative = np.where(ks > 0, pops["-"], pops["+"])
    return ModePopulations(ks, positive, negative)
