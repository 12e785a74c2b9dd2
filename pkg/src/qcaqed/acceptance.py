"""The acceptance checks as runnable functions.

Each check returns a :class:`CriterionResult` with the measured quantities,
the pass/fail verdict and the wall time.  The command line (``qcaqed
acceptance``) and the test suite both call :func:`run_criterion`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import qca1d, toeplitz
from .fitting import fit_exp_decay, fit_gaussian
from .highprec import (
    BigMatrix,
    PrecisionPolicy,
    build_dbar_bigreal,
    eigenvalues,
    min_eig_series,
    min_eigpair,
)
from .internal_space import build_space, verify_equal_norm
from .matrix_core import anticommutator, principal_phase, unitarity_error
from .momentum import (
    MomentumPoint,
    WalkConfig,
    _c_matrix_3,
    dispersion,
    qca_c_closed_form,
    qca_c_eigenphases,
    qca_c_matrix,
    walk_unitary_at_k,
)
from .reference import brute_force_negative_coupling, walk_1d_matrix

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict
    budget_s: float
    wall_time: float = 0.0
    notes: list = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{verdict}] criterion {self.number:2d} {self.title}: {parts} ({self.wall_time:.2f}s)"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "measured": {k: _jsonable(v) for k, v in self.measured.items()},
            "budget_s": self.budget_s,
            "wall_time": self.wall_time,
            "notes": self.notes,
        }


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _rng():
    return np.random.default_rng(SEED)


def _random_k(rng, n, lim=np.pi):
    return [MomentumPoint.from_array(rng.uniform(-lim, lim, 3)) for _ in range(n)]


# ----------------------------------------------------------------- checks


def check_equal_norm():
    fer = verify_equal_norm(build_space("fermion"), tol=1e-13)
    bos = verify_equal_norm(build_space("boson"), tol=1e-13)
    dbl = verify_equal_norm(build_space("boson-doubled"), tol=1e-13)
    err = max(
        abs(fer.c - 0.5),
        abs(bos.c - 0.25),
        abs(bos.c_prime - 0.5),
        abs(dbl.c - 0.25),
        abs(dbl.c_prime - 0.5),
        fer.max_violation,
        bos.max_violation,
        dbl.max_violation,
    )
    return err <= 1e-13, {"c_fermion": fer.c, "c_boson": bos.c, "c_prime_boson": bos.c_prime,
                          "max_error": err}


def check_anticommutation():
    fer = build_space("fermion")
    errs = [np.linalg.norm(anticommutator(fer.Q, d)) for d in fer.DeltaP]
    errs += [
        np.linalg.norm(anticommutator(fer.DeltaP[i], fer.DeltaP[j]))
        for i in range(3) for j in range(3) if i != j
    ]
    zero_err = 0.0
    for species in ("boson", "boson-doubled"):
        sp_ = build_space(species)
        zero_err = max(
            [zero_err]
            + [np.linalg.norm(sp_.P_zero[i] @ sp_.P_zero[j]) for i in range(3) for j in range(3) if i != j]
        )
    worst = max(max(errs), zero_err)
    return worst <= 1e-13, {"fermion_anticommutator": float(max(errs)), "boson_P0_products": zero_err}


def check_unitarity_symmetry():
    rng = _rng()
    worst_u, worst_sym = 0.0, 0.0
    for species, theta in (("fermion", 0.3), ("boson", 0.0), ("boson-doubled", 0.0)):
        cfg = WalkConfig(build_space(species), theta=theta)
        for k in _random_k(rng, 100):
            u = walk_unitary_at_k(cfg, k)
            worst_u = max(worst_u, unitarity_error(u))
            phases = dispersion(cfg, k).phases
            a = np.sort(principal_phase(phases))
            b = np.sort(principal_phase(-phases))
            diff = np.abs(principal_phase(a - b))
            worst_sym = max(worst_sym, float(diff.max()))
    ok = worst_u <= 1e-12 and worst_sym <= 1e-12
    return ok, {"unitarity_error": worst_u, "negation_asymmetry": worst_sym}


def _dirac_errors(theta, kappa, directions):
    space = build_space("fermion")
    cfg = WalkConfig(space, theta=theta)
    energy = np.hypot(theta, kappa)
    worst, worst_centroid = 0.0, 0.0
    for d in directions:
        k = MomentumPoint.from_array(kappa * d)
        phases = np.sort(dispersion(cfg, k).phases)
        worst = max(worst, float(np.max(np.abs(np.abs(phases) - energy)) / energy))
        centroid = 0.5 * (phases[2] + phases[3])
        worst_centroid = max(worst_centroid, abs(centroid - energy) / energy)
    return worst, worst_centroid


def check_dirac_limit():
    rng = _rng()
    dirs = rng.normal(size=(20, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    e1, c1 = _dirac_errors(0.01, 0.05, dirs)
    e2, c2 = _dirac_errors(0.005, 0.025, dirs)
    ratio = e1 / e2
    axis_err, _ = _dirac_errors(0.01, 0.05, np.eye(3))
    ok = e1 <= 1e-3 and 3.5 <= ratio <= 4.5
    return ok, {
        "rel_error": e1,
        "halving_ratio": ratio,
        "centroid_rel_error": c1,
        "centroid_ratio": c1 / c2,
        "axis_aligned_rel_error": axis_err,
    }


def check_boson_closed_forms():
    rng = _rng()
    worst_mat, worst_phase = 0.0, 0.0
    for k in _random_k(rng, 100):
        worst_mat = max(worst_mat, float(np.max(np.abs(_c_matrix_3(k, 1.0) - qca_c_closed_form(k)))))
        _, phi, _ = qca_c_eigenphases(k)
        lam = np.linalg.eigvals(qca_c_matrix(k))
        expected = np.array([1, np.exp(-1j * phi), np.exp(1j * phi)])
        # match each closed-form eigenvalue to its nearest numerical one
        worst_phase = max(worst_phase, max(np.min(np.abs(lam - e)) for e in expected))
    dirs = rng.normal(size=(50, 3))
    dirs = np.vstack([dirs, [[1, 1, 1], [-1, -1, -1], [1, 0, 0]]])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    lw = max(abs(qca_c_eigenphases(MomentumPoint.from_array(0.01 * d))[1] - 0.01) / 0.01 for d in dirs)
    ok = worst_mat <= 1e-12 and worst_phase <= 1e-12 and lw <= 1e-3
    return ok, {"product_vs_closed": worst_mat, "eigen_vs_arccos": float(worst_phase),
                "long_wavelength_rel": float(lw)}


def check_single_particle():
    cfg = qca1d.Lattice1DConfig(8, "fermion", theta=0.3)
    block = qca1d.single_particle_block(cfg)
    err = float(np.max(np.abs(block - walk_1d_matrix(8, 0.3))))
    return err <= 1e-12, {"max_entry_error": err}


def check_time_reversal():
    fer = qca1d.time_reversal_defect(qca1d.Lattice1DConfig(6, "fermion", theta=0.3))
    bos = qca1d.time_reversal_defect(qca1d.Lattice1DConfig(4, "boson", boson_truncation=2))
    return max(fer, bos) <= 1e-12, {"fermion_N6": fer, "boson_N4_B2": bos}


def check_momentum_conservation():
    cf = qca1d.Lattice1DConfig(4, "fermion", theta=0.3)
    cb = qca1d.Lattice1DConfig(4, "boson", boson_truncation=1)
    coeffs = qca1d.InteractionCoeffs.uniform(0.05)
    u = qca1d.full_step(cf, cb, coeffs)
    comm = qca1d.translation_commutator(u, cf, cb)
    return comm <= 1e-10, {"commutator": comm, "dim": int(u.shape[0])}


def check_golden_matrix():
    text = toeplitz.matrix_to_csv(toeplitz.dbar_matrix(toeplitz.ToeplitzSpec(4)))
    parsed = np.array([[float(v) for v in line.split(",")] for line in text.strip().splitlines()])
    err = float(np.max(np.abs(parsed - toeplitz.golden_matrix_m4())))
    return err <= 1e-15, {"max_entry_error": err}


def check_quadratic_form():
    rng = _rng()
    spec = toeplitz.ToeplitzSpec(6, 64)
    worst = 0.0
    for _ in range(20):
        vp = rng.normal(size=7) + 1j * rng.normal(size=7)
        vm = rng.normal(size=7) + 1j * rng.normal(size=7)
        q = toeplitz.negative_coupling(toeplitz.CouplingProfile(vp, vm), spec)
        worst = max(worst, abs(q - brute_force_negative_coupling(vp, vm, 64, x=int(rng.integers(64)))))
    return worst <= 1e-10, {"max_abs_diff": worst}


def check_square_wave():
    a, b = toeplitz.f_tilde(np.array([0.5, 2.5]), 10**5)
    ok = abs(a - 1) <= 1e-3 and abs(b) <= 1e-3
    return ok, {"ftilde_0.5_minus_1": float(abs(a - 1)), "ftilde_2.5": float(abs(b))}


def check_decay_rate():
    series = min_eig_series(range(20, 61, 4), PrecisionPolicy("floor", 80))
    fit = fit_exp_decay([(p.M, p.lambda_min) for p in series])
    alpha = fit.parameters["alpha"]
    resid_ok = all(p.residual.value <= 10 ** -(p.digits_used - 15) for p in series)
    ok = 1.70 <= alpha <= 1.81 and resid_ok and min(p.digits_used for p in series) >= 80
    return ok, {"alpha": alpha, "r_squared": fit.r_squared, "residuals_ok": resid_ok}


def check_gaussian_eigvec():
    res = min_eigpair(build_dbar_bigreal(60, 80))
    fit = fit_gaussian(res.eigenvector_float())
    center = fit.parameters["center"]
    ok = fit.r_squared >= 0.999 and abs(center - 30) <= 0.5
    return ok, {"r_squared": fit.r_squared, "center": center, "width": fit.parameters["width"]}


def check_finite_n():
    n1, n2 = 256, 1024
    d1 = toeplitz.finite_n_correction(6, n1)
    d2 = toeplitz.finite_n_correction(6, n2)
    ratio = d1 / d2
    return abs(ratio - 16) <= 1.0, {"ratio": ratio, "diff_N256": d1, "diff_N1024": d2}


def check_eigensolver():
    rng = _rng()
    worst_random = 0.0
    for _ in range(5):
        q, _ = np.linalg.qr(rng.normal(size=(20, 20)))
        w = np.exp(rng.uniform(np.log(1e-6), 0, 20))
        a = (q * w) @ q.T
        a = 0.5 * (a + a.T)
        mine = np.array([float(v) for v in eigenvalues(BigMatrix.from_array(a, 40))])
        ref = np.linalg.eigvalsh(a)
        worst_random = max(worst_random, float(np.max(np.abs(mine - ref) / np.abs(ref))))
    # D-bar: both solvers see the same double-precision matrix
    worst_dbar, worst_dbar_normwise, worst_jacobi = 0.0, 0.0, 0.0
    for m in range(0, 13, 2):
        d = toeplitz.dbar_matrix(toeplitz.ToeplitzSpec(m))
        big = BigMatrix.from_array(d, 50)
        mine_big = eigenvalues(big)
        mine = np.array([float(v) for v in mine_big])
        ref = np.linalg.eigvalsh(d)
        worst_dbar = max(worst_dbar, float(np.max(np.abs(mine - ref) / np.abs(ref))))
        worst_dbar_normwise = max(
            worst_dbar_normwise, float(np.max(np.abs(mine - ref)) / np.linalg.norm(d, 2))
        )
        # second multiprecision route: mpmath's own Jacobi solver
        with mpmath.workdps(50):
            jac = sorted(mpmath.eigsy(mpmath.matrix([list(r) for r in big.rows]), eigvals_only=True))
            worst_jacobi = max(
                worst_jacobi,
                max(float(abs(a - b.value) / abs(a)) for a, b in zip(jac, mine_big)),
            )
    ok = worst_random <= 1e-10 and worst_dbar <= 1e-10
    return ok, {
        "random_rel": worst_random,
        "dbar_rel": worst_dbar,
        "dbar_normwise": worst_dbar_normwise,
        "dbar_vs_mp_jacobi_rel": worst_jacobi,
    }


CRITERIA = {
    1: ("equal-norm constants", check_equal_norm, 1.0),
    2: ("anticommutation suite", check_anticommutation, 1.0),
    3: ("U_k unitarity and negation symmetry", check_unitarity_symmetry, 5.0),
    4: ("Dirac limit", check_dirac_limit, 5.0),
    5: ("bosonic QCA closed forms", check_boson_closed_forms, 5.0),
    6: ("1D single-particle equivalence", check_single_particle, 10.0),
    7: ("time reversal", check_time_reversal, 30.0),
    8: ("momentum conservation", check_momentum_conservation, 60.0),
    9: ("golden matrix M=4", check_golden_matrix, 1.0),
    10: ("quadratic-form identity", check_quadratic_form, 5.0),
    11: ("square wave", check_square_wave, 5.0),
    12: ("decay-rate reproduction", check_decay_rate, 600.0),
    13: ("Gaussian eigenvector", check_gaussian_eigvec, 300.0),
    14: ("finite-N correction", check_finite_n, 5.0),
    15: ("eigensolver cross-validation", check_eigensolver, 30.0),
}


def run_criterion(number: int) -> CriterionResult:
    if number not in CRITERIA:
        raise KeyError(f"no acceptance criterion {number}")
    title, func, budget = CRITERIA[number]
    start = time.perf_counter()
    ok, measured = func()
    elapsed = time.perf_counter() - start
    result = CriterionResult(number, title, bool(ok), measured, budget, elapsed)
    if elapsed > budget:
        result.passed = False
        result.notes.append(f"over the {budget:g}s runtime budget")
    return result


def run_all(numbers=None) -> list:
    return [run_criterion(n) for n in (numbers or sorted(CRITERIA))]
