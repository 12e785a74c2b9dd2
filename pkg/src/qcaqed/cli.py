"""Command-line experiment runner.

Every subcommand writes CSV (header row, RFC 4180) or JSON (stable key order)
to ``--out`` or stdout.  Exit status is 0 on success, 2 on invalid input, 1 on
an internal error and 3 when an acceptance criterion fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from typing import Optional

import numpy as np

from . import __version__, acceptance, highprec, qca1d, toeplitz
from .exceptions import ValidationError
from .fitting import fit_exp_decay, fit_gaussian
from .internal_space import build_space, verify_equal_norm
from .momentum import (
    MomentumPoint,
    WalkConfig,
    dispersion,
    qca_c_closed_form,
    qca_c_eigenphases,
    qca_c_matrix,
    qca_g,
)
from .matrix_core import principal_phase

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_CRITERION_FAILED = 0, 1, 2, 3


def _num(x) -> str:
    return repr(float(x))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def kgrid(n: int) -> np.ndarray:
    """``n`` momenta ``2 pi j / n - pi`` for ``j = 1..n``, all in ``(-pi, pi]``."""
    if n < 1:
        raise ValidationError("--kgrid must be >= 1")
    return 2 * np.pi * np.arange(1, n + 1) / n - np.pi


def _kpoints(n: int):
    ks = kgrid(n)
    for kx in ks:
        for ky in ks:
            for kz in ks:
                yield MomentumPoint(float(kx), float(ky), float(kz))


def parse_int_list(text: str) -> list:
    """``"20,24,28"`` or ``"20:60:4"`` (inclusive stop)."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        start, stop, step = parts
        if step <= 0:
            raise ValidationError("range step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


# ------------------------------------------------------------ subcommands


def cmd_equalnorm(args):
    rep = verify_equal_norm(build_space(args.species))
    return _json({"species": args.species, **rep.to_dict()})


def cmd_dispersion(args):
    cfg = WalkConfig(build_space(args.species), theta=args.theta)
    rows = []
    for k in _kpoints(args.kgrid):
        phases = np.sort(dispersion(cfg, k).phases)
        rows.append([_num(k.kx), _num(k.ky), _num(k.kz)] + [_num(p) for p in phases])
    dim = cfg.space.dim
    return _csv(["kx", "ky", "kz"] + [f"phase_{i}" for i in range(dim)], rows)


def cmd_qca3d_eig(args):
    rows = []
    dim = 6 if args.doubled else 3
    for k in _kpoints(args.kgrid):
        u = qca_c_matrix(k, doubled=args.doubled)
        phases = np.sort(principal_phase(-np.angle(np.linalg.eigvals(u))))
        closed_err = float(np.max(np.abs(qca_c_matrix(k) - qca_c_closed_form(k))))
        _, phi, _ = qca_c_eigenphases(k)
        rows.append(
            [_num(k.kx), _num(k.ky), _num(k.kz), _num(qca_g(k)), _num(phi)]
            + [_num(p) for p in phases]
            + [_num(closed_err)]
        )
    header = ["kx", "ky", "kz", "G", "phi_closed"] + [f"phi_{i}" for i in range(dim)] + ["closed_form_error"]
    return _csv(header, rows)


def _lattice_cfg(args, species=None):
    return qca1d.Lattice1DConfig(
        args.N,
        species or args.species,
        theta=getattr(args, "theta", 0.0) if (species or args.species) == "fermion" else 0.0,
        boson_truncation=getattr(args, "bmax", 0) or 0,
        convention=getattr(args, "convention", "table"),
    )


def _read_state_csv(path, basis, boson_basis=None):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if rows and rows[0][0] == "label":
        rows = rows[1:]
    return qca1d.LatticeState1D.from_records(rows, basis, boson_basis)


def cmd_qca1d_evolve(args):
    cfg = _lattice_cfg(args)
    basis = qca1d.make_basis(cfg, args.sector)
    if args.state_in:
        state = _read_state_csv(args.state_in, basis)
    else:
        label = args.label
        if label is None:
            # one excitation in (0, +)
            occ = [1] + [0] * (cfg.n_modes - 1)
            label = "".join(map(str, occ)) if cfg.is_fermion else ",".join(map(str, occ))
        state = qca1d.LatticeState1D.basis_state(basis, label)
    u = qca1d.build_evolution(cfg, args.sector)
    rows = []
    for step in range(args.steps + 1):
        if step:
            state = state.evolve(u)
        if step == args.steps or args.every:
            rows += [[str(step), lab, _num(re), _num(im)] for lab, re, im in state.records(args.tol)]
    return _csv(["step", "label", "re", "im"], rows)


def cmd_qca1d_tau(args):
    cfg = _lattice_cfg(args)
    defect = qca1d.time_reversal_defect(cfg, args.sector)
    return _json(
        {
            "N": args.N,
            "species": args.species,
            "theta": cfg.theta,
            "convention": cfg.convention.value,
            "defect": defect,
            "passed": defect <= 1e-12,
        }
    )


def cmd_qca1d_interact(args):
    cf = qca1d.Lattice1DConfig(args.N, "fermion", theta=args.theta, convention="table")
    cb = qca1d.Lattice1DConfig(args.N, "boson", boson_truncation=args.bmax)
    alpha = np.full((args.range + 1, 2, 2, 2), args.alpha, dtype=complex)
    coeffs = qca1d.InteractionCoeffs(alpha)
    fb = qca1d.make_basis(cf, args.fermion_number)
    bb = qca1d.make_basis(cb)
    f_label = args.fermion_label
    if f_label is None:
        occ = [0] * cf.n_modes
        for m in range(args.fermion_number or 0):
            occ[m] = 1
        f_label = "".join(map(str, occ))
    b_label = args.boson_label or ",".join(["0"] * cb.n_modes)
    state = qca1d.LatticeState1D.basis_state(fb, f_label, bb, b_label)
    free = qca1d.free_joint_evolution(cf, cb, args.fermion_number)
    dim = free.shape[0]
    dense_u = None
    if dim <= qca1d.MAX_DENSE_DIM:
        dense_u = qca1d.interaction_unitary(cf, cb, coeffs, args.fermion_number)
    rows = []
    for step in range(args.steps + 1):
        if step:
            psi = free @ state.amplitudes
            if dense_u is not None:
                psi = dense_u @ psi
            else:
                psi = qca1d.apply_interaction(psi, cf, cb, coeffs, args.fermion_number)
            state = qca1d.LatticeState1D(psi, fb, bb)
        pops = qca1d.negative_mode_population(state, cb)
        for k, pos, neg in zip(pops.k, pops.positive, pops.negative):
            rows.append([str(step), _num(k), _num(pos), _num(neg)])
    return _csv(["step", "k", "positive", "negative"], rows)


def cmd_toeplitz_matrix(args):
    m = toeplitz.dbar_matrix(toeplitz.ToeplitzSpec(args.M, args.N))
    return toeplitz.matrix_to_csv(m)


def cmd_toeplitz_mineig(args):
    res = highprec.min_eigpair(highprec.build_dbar_bigreal(args.M, args.digits))
    return _json(
        {
            "M": args.M,
            "digits": args.digits,
            "lambda_min": res.lambda_min.to_decimal_string(),
            "residual": res.residual.to_decimal_string(),
        }
    )


def cmd_toeplitz_series(args):
    policy = highprec.PrecisionPolicy.parse(args.policy)
    workers = args.workers or os.cpu_count() or 1
    series = highprec.min_eig_series(parse_int_list(args.Mlist), policy, workers=workers)
    return _csv(highprec.SERIES_HEADER, [p.csv_row() for p in series])


def cmd_toeplitz_alpha_fit(args):
    with open(args.series, newline="") as fh:
        rows = list(csv.DictReader(fh))
    points = [(int(r["M"]), r["lambda_min"]) for r in rows]
    fit = fit_exp_decay(points, min_M=args.min_M)
    return _json(fit.to_dict())


def cmd_toeplitz_eigvec(args):
    res = highprec.min_eigpair(highprec.build_dbar_bigreal(args.M, args.digits))
    if args.fit:
        fit = fit_gaussian(res.eigenvector_float())
        out = fit.to_dict()
        out["extra"] = {"M": args.M, "midpoint": args.M // 2}
        return _json(out)
    rows = [[str(j), v.to_decimal_string()] for j, v in enumerate(res.eigenvector)]
    return _csv(["j", "v"], rows)


def cmd_ftilde(args):
    ks = kgrid(args.kgrid)
    vals = toeplitz.f_tilde(ks, args.terms)
    return _csv(["k", "f_tilde"], [[_num(k), _num(v)] for k, v in zip(ks, vals)])


def cmd_acceptance(args):
    numbers = args.criterion or sorted(acceptance.CRITERIA)
    results = []
    for n in numbers:
        r = acceptance.run_criterion(n)
        print(r.line(), file=sys.stderr)
        results.append(r)
    args._failed = not all(r.passed for r in results)
    return _json([r.to_dict() for r in results])


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcaqed", description="QCA / Toeplitz experiment runner")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--record", help="also write an experiment record JSON here")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("equalnorm", parents=[common], help="equal-norm constants")
    s.add_argument("--species", choices=["fermion", "boson", "boson-doubled"], required=True)
    s.set_defaults(func=cmd_equalnorm)

    s = sub.add_parser("dispersion", parents=[common], help="eigenphases of U_k on a k grid")
    s.add_argument("--species", choices=["fermion", "boson", "boson-doubled"], required=True)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--kgrid", type=int, default=8, help="points per axis")
    s.set_defaults(func=cmd_dispersion)

    s = sub.add_parser("qca3d-eig", parents=[common], help="bosonic QCA eigenphases")
    s.add_argument("--kgrid", type=int, default=8)
    s.add_argument("--doubled", action="store_true")
    s.set_defaults(func=cmd_qca3d_eig)

    q = sub.add_parser("qca1d", help="1D lattice simulations").add_subparsers(dest="action", required=True)
    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--N", type=int, required=True, help="number of sites (even)")
    lattice.add_argument("--species", choices=["fermion", "boson"], default="fermion")
    lattice.add_argument("--theta", type=float, default=0.0)
    lattice.add_argument("--bmax", type=int, default=1, help="boson truncation (total number)")
    lattice.add_argument("--convention", choices=["table", "exponential"], default="table")
    lattice.add_argument("--sector", type=int, default=None, help="restrict to this particle number")

    s = q.add_parser("evolve", parents=[common, lattice])
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--state-in", help="CSV of label,re,im records")
    s.add_argument("--label", help="start from this basis label")
    s.add_argument("--every", action="store_true", help="emit every step, not only the last")
    s.add_argument("--tol", type=float, default=0.0, help="drop amplitudes at or below this modulus")
    s.set_defaults(func=cmd_qca1d_evolve)

    s = q.add_parser("tau-check", parents=[common, lattice])
    s.set_defaults(func=cmd_qca1d_tau)

    s = q.add_parser("interact", parents=[common])
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True, help="uniform coupling value")
    s.add_argument("--bmax", type=int, default=2)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--range", type=int, default=0, help="interaction range M (even)")
    s.add_argument("--fermion-number", type=int, default=None)
    s.add_argument("--fermion-label", help="initial fermion basis label")
    s.add_argument("--boson-label", help="initial boson label (comma-separated occupations)")
    s.set_defaults(func=cmd_qca1d_interact)

    t = sub.add_parser("toeplitz", help="Toeplitz matrices and eigenvalues").add_subparsers(
        dest="action", required=True
    )
    s = t.add_parser("matrix", parents=[common])
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--N", type=int, default=None, help="finite lattice size (default: limit)")
    s.set_defaults(func=cmd_toeplitz_matrix)

    s = t.add_parser("mineig", parents=[common])
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--digits", type=int, required=True)
    s.set_defaults(func=cmd_toeplitz_mineig)

    s = t.add_parser("series", parents=[common])
    s.add_argument("--Mlist", required=True, help="e.g. 20:60:4 or 4,8,12")
    s.add_argument("--policy", default=None, help=f"default | floor:D | fixed:D | linear:S:D (env {highprec.POLICY_ENV})")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_toeplitz_series)

    s = t.add_parser("alpha-fit", parents=[common])
    s.add_argument("--series", required=True, help="CSV written by 'toeplitz series'")
    s.add_argument("--min-M", type=int, default=20)
    s.set_defaults(func=cmd_toeplitz_alpha_fit)

    s = t.add_parser("eigvec", parents=[common])
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--digits", type=int, required=True)
    s.add_argument("--fit", action="store_true", help="emit the Gaussian fit as JSON")
    s.set_defaults(func=cmd_toeplitz_eigvec)

    s = sub.add_parser("ftilde", parents=[common], help="partial sums of the symbol transform")
    s.add_argument("--terms", type=int, required=True)
    s.add_argument("--kgrid", type=int, default=64)
    s.set_defaults(func=cmd_ftilde)

    s = sub.add_parser("acceptance", parents=[common], help="run acceptance criteria")
    s.add_argument("--criterion", type=int, action="append", choices=sorted(acceptance.CRITERIA))
    s.set_defaults(func=cmd_acceptance)
    return p


def _write(text: str, path: Optional[str]):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        text = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _write(text, args.out)
    failed = getattr(args, "_failed", False)
    if args.record:
        params = {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "out", "record", "_failed")
        }
        record = {
            "command": " ".join([args.command] + ([args.action] if getattr(args, "action", None) else [])),
            "parameters": params,
            "outputs": [args.out] if args.out else [],
            "wall_time": time.perf_counter() - start,
            "pass": not failed,
        }
        _write(_json(record), args.record)
    return EXIT_CRITERION_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
