"""Command-line front end.

Subcommands: eigen, green, mc-green, sample-field, krawtchouk, kappa,
pointproc, hamiltonian, partition, potts, limit, verify.

Results are JSON documents {"manifest": ..., "result": ...}; matrices
and field samples go to CSV (header row, complex values as re/im column
pairs).  The manifest records version, a hash of the effective config,
the seed, thread count and wall time; everything under "result" is
byte-identical across runs with the same (config, seed, threads).

Exit codes: 0 success, 1 verify-suite failure, 2 bad configuration,
3 numerical contract violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, fields, green, hamiltonian, krawtchouk, limits
from . import pointprocess, verify, walks
from .krawtchouk import KappaError
from .lattice import RangeError, ShapeError
from .fields import ReversibilityError
from .walks import ContractError, KernelError

CONFIG_EXIT = 2
NUMERIC_EXIT = 3


class ConfigError(Exception):
    """Bad CLI/config input; message carries a JSON-pointer-ish path."""


def _load_json_arg(value: str, pointer: str) -> dict:
    """Accept a path to a JSON file or an inline JSON object."""
    text = value
    if not value.lstrip().startswith("{"):
        try:
            with open(value, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{pointer}: cannot read {value!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{pointer}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{pointer}: expected a JSON object")
    return doc


def _law_from_arg(value: str) -> walks.IncrementLaw:
    doc = _load_json_arg(value, "$.law")
    try:
        return walks.law_from_json(doc)
    except (RangeError, ContractError, KeyError, TypeError) as exc:
        raise ConfigError(f"$.law: {exc}") from exc


def _pointproc_spec_from_arg(value: str) -> pointprocess.PointProcessSpec:
    doc = _load_json_arg(value, "$.spec")
    try:
        atoms = [pointprocess.XiAtom(a["pmf"], float(a["weight"]))
                 for a in doc["atoms"]]
        return pointprocess.PointProcessSpec(
            float(doc["alpha"]), atoms, float(doc.get("phi", 1.0)))
    except KeyError as missing:
        raise ConfigError(f"$.spec: missing field {missing}") from None
    except (RangeError, TypeError, ValueError) as exc:
        raise ConfigError(f"$.spec: {exc}") from exc


def _int_list(text: str, pointer: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"{pointer}: expected comma-separated integers") from exc


def _config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _spectrum_hash(spec: walks.Spectrum) -> str:
    return hashlib.sha256(np.round(spec.rho, 12).tobytes()).hexdigest()[:16]


def _emit(args, result: dict, t0: float) -> None:
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "out") and v is not None}
    doc = {
        "manifest": {
            "version": __version__,
            "config_hash": _config_hash({k: str(v) for k, v in config.items()}),
            "seed": getattr(args, "seed", None),
            "threads": getattr(args, "threads", None),
            "wall_time_ms": round(1000.0 * (time.monotonic() - t0), 3),
        },
        "result": result,
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    out = getattr(args, "out", None)
    if out and out.endswith(".json"):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_complex_csv(path: str, rows: np.ndarray, prefix: str) -> None:
    rows = np.atleast_2d(rows)
    header = []
    for j in range(rows.shape[1]):
        header += [f"{prefix}{j}_re", f"{prefix}{j}_im"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            flat = []
            for v in row:
                flat += [repr(float(np.real(v))), repr(float(np.imag(v)))]
            writer.writerow(flat)


def _complex_pairs(values) -> list[list[float]]:
    return [[float(np.real(v)), float(np.imag(v))] for v in np.asarray(values)]



def _with_tol(args, result: dict, statistic: float | None) -> dict:
    """Attach a pass/fail judgment when --tol overrides module defaults."""
    tol = getattr(args, "tol", None)
    if tol is not None and statistic is not None:
        result["tol"] = float(tol)
        result["within_tol"] = bool(statistic <= tol)
    return result

def cmd_eigen(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    _emit(args, _with_tol(args, {
        "q": law.q, "d": law.d,
        "rho": _complex_pairs(spec.rho),
        "is_real": spec.is_real,
        "is_unit_bounded": spec.is_unit_bounded,
        "max_imag": float(np.max(np.abs(spec.rho.imag))),
        "spectrum_hash": _spectrum_hash(spec),
    }, float(np.max(np.abs(spec.rho.imag)))), t0)
    return 0


def cmd_green(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    g = green.green_exact(spec, args.alpha, materialize=args.row is None)
    if args.row is not None:
        x = _int_list(args.row, "$.row")
        if len(x) != law.d:
            raise ConfigError(f"$.row: expected {law.d} coordinates")
        row = g.row(x)
        _emit(args, _with_tol(args, {
            "alpha": args.alpha, "x": x,
            "row": [float(v) for v in row],
            "row_sum": float(row.sum()),
        }, abs(float(row.sum()) - 1.0)), t0)
    else:
        if not args.out:
            raise ConfigError("$.out: full-matrix output needs --out FILE.csv")
        _write_complex_csv(args.out, g.matrix.astype(complex), "y")
        _emit(argparse.Namespace(**{**vars(args), "out": None}), {
            "alpha": args.alpha, "matrix_csv": args.out,
            "rows": int(g.matrix.shape[0]),
            "max_row_sum_error": float(np.max(np.abs(g.matrix.sum(1) - 1.0))),
        }, t0)
    return 0


def cmd_mc_green(args, t0):
    law = _law_from_arg(args.law)
    x0 = _int_list(args.x0, "$.x0")
    emp = green.green_mc(law, args.alpha, x0, args.n, args.seed,
                         workers=args.threads)
    exact = green.green_exact(law.spectrum(), args.alpha).row(x0)
    tv = green.tv_distance(emp, exact)
    _emit(args, _with_tol(args, {
        "alpha": args.alpha, "x0": x0, "n_walks": args.n,
        "empirical": [float(v) for v in emp],
        "tv_to_exact": tv,
    }, tv), t0)
    return 0


def cmd_sample_field(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    sample = fields.sample_field(spec, args.alpha, args.seed,
                                 n_samples=args.n, workers=args.threads)
    if not args.out:
        raise ConfigError("$.out: sample-field needs --out FILE.csv")
    _write_complex_csv(args.out, sample.values, "g")
    inversion = float(np.max(np.abs(
        fields.invert_field(sample.values, spec, args.alpha) - sample.driver)))
    _emit(argparse.Namespace(**{**vars(args), "out": None}), _with_tol(args, {
        "alpha": args.alpha, "n_samples": args.n,
        "csv": args.out,
        "inversion_residual": inversion,
        "spectrum_hash": _spectrum_hash(spec),
    }, inversion), t0)
    return 0


def cmd_krawtchouk(args, t0):
    if args.check:
        if args.check == "orthogonality":
            residual = krawtchouk.orthogonality_residual(args.q, args.d,
                                                         args.max_degree)
        else:
            residual = krawtchouk.max_duality_residual(args.q, args.d,
                                                       args.max_degree)
        _emit(args, _with_tol(args, {"check": args.check,
                                     "max_residual": residual}, residual), t0)
        return 0
    if args.l is None or args.m is None:
        raise ConfigError("$.l/$.m: value mode needs both --l and --m")
    l = _int_list(args.l, "$.l")
    m = _int_list(args.m, "$.m")
    if len(m) != args.q or sum(m) != args.d:
        raise ConfigError(f"$.m: need {args.q} counts summing to {args.d}")
    if len(l) != args.q - 1:
        raise ConfigError(f"$.l: need {args.q - 1} degree entries")
    value = krawtchouk.krawtchouk(m, l, args.q)
    _emit(args, {
        "l": l, "m": m,
        "value": [value.real, value.imag],
        "h_inv": krawtchouk.scale_constant_inv(l, args.d),
    }, t0)
    return 0


def cmd_kappa(args, t0):
    law = _law_from_arg(args.law)
    l = _int_list(args.l, "$.l")
    out = {"l": l}
    if args.route in ("transform", "both"):
        out["transform"] = _complex_pairs(
            [krawtchouk.kappa_route_transform(law, l)])[0]
    if args.route in ("counts", "both"):
        out["counts"] = _complex_pairs(
            [krawtchouk.kappa_route_counts(law, l)])[0]
    if args.route == "both":
        out["route_gap"] = float(abs(complex(*out["transform"])
                                     - complex(*out["counts"])))
        _with_tol(args, out, out["route_gap"])
    _emit(args, out, t0)
    return 0


def cmd_pointproc(args, t0):
    spec = _pointproc_spec_from_arg(args.spec)
    l = _int_list(args.l, "$.l")
    closed = pointprocess.y_moment(spec, l)
    result = {
        "l": l, "alpha": spec.alpha, "phi": spec.phi,
        "kappa": _complex_pairs([pointprocess.kappa(spec, l)])[0],
        "closed_form": [closed.real, closed.imag],
        "half_process_residual": pointprocess.half_process_residual(spec, l),
    }
    if args.mc:
        est, se = pointprocess.y_moment_mc(spec, l, args.mc, args.seed,
                                           workers=args.threads)
        result["mc_estimate"] = [est.real, est.imag]
        result["mc_stderr"] = se
        _with_tol(args, result, abs(est - closed))
    _emit(args, result, t0)
    return 0


def cmd_hamiltonian(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    rng = np.random.default_rng(args.seed)
    n = walks.size(law.q, law.d)
    worst = {"lhs": 0.0, "rhs": 0.0, "residual": -1.0}
    diag_gap = 0.0
    for _ in range(args.n_vectors):
        g = rng.standard_normal(n)
        lhs, rhs, res = hamiltonian.hamiltonian_identity_check(spec, args.alpha, g)
        if res > worst["residual"]:
            worst = {"lhs": lhs, "rhs": rhs, "residual": res}
        drv = rng.standard_normal(n)
        diag_gap = max(diag_gap, abs(
            hamiltonian.hamiltonian_value(drv, spec, args.alpha)
            - 0.5 * float(drv @ drv)))
    _emit(args, _with_tol(args, {
        "alpha": args.alpha, "n_vectors": args.n_vectors,
        "worst_identity": worst,
        "max_diagonalization_gap": diag_gap,
    }, max(worst["residual"], diag_gap)), t0)
    return 0


def cmd_partition(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    pr = hamiltonian.partition_function(spec, args.alpha, args.beta)
    checks = {}
    if law.is_exchangeable() and walks.size(law.q, law.d) <= 4096:
        checks["grouping_identity_residual"] = \
            hamiltonian.grouping_identity_residual(law, args.alpha)
    _emit(args, _with_tol(args, {
        "alpha": args.alpha, "beta": args.beta,
        "log_jacobian": pr.log_jacobian,
        "jacobian": pr.jacobian,
        "log_z": pr.log_z,
        "z": pr.z,
        "representable": pr.representable,
        "checks": checks,
    }, checks.get("grouping_identity_residual")), t0)
    return 0


def cmd_potts(args, t0):
    law = _law_from_arg(args.law)
    spec = law.spectrum()
    pspec = hamiltonian.PottsSpec(spec, args.alpha, args.beta)
    result = {
        "alpha": args.alpha, "beta": args.beta,
        "expected_partition": hamiltonian.expected_partition(pspec),
    }
    if law.q == 2:
        result["log_expected_partition_delta"] = \
            hamiltonian.log_expected_partition_delta(spec, args.alpha, args.beta)
    if args.n:
        sample = fields.sample_field(spec, args.alpha, args.seed,
                                     n_samples=args.n, workers=args.threads)
        h = hamiltonian.potts_hamiltonian(pspec, sample)
        z_samples = np.sum(np.exp(args.beta * h.real), axis=1)
        result["mc_partition"] = float(z_samples.mean())
        result["mc_stderr"] = float(z_samples.std(ddof=1)
                                    / math.sqrt(len(z_samples)))
        result["mc_var_h"] = float(h.real.var())
        _with_tol(args, result, abs(result["mc_partition"]
                                    - result["expected_partition"]))
    _emit(args, result, t0)
    return 0


def cmd_limit(args, t0):
    rng = np.random.default_rng(args.seed)
    q = args.q
    if args.check == "hermite":
        result = {"max_residual": limits.hermite_orthogonality_residual(q, 8)}
    elif args.check == "limit-kraw":
        worst = 0.0
        for _ in range(10):
            m = limits.full_type_vector(rng.standard_normal(q - 1), q)
            for l in krawtchouk.degree_indices(q, 5, 4):
                worst = max(worst, abs(
                    limits.limit_krawtchouk_series(m, l, q)
                    - limits.limit_krawtchouk_hermite(m, l, q)))
        result = {"max_route_gap": worst}
    elif args.check == "transform":
        omega = np.zeros(q)
        omega[1:] = rng.standard_normal(q - 1)
        rows = []
        for l in krawtchouk.degree_indices(q, 3, 2):
            mc, rhs, se = limits.transform_identity(omega, l, q,
                                                    args.mc or 200_000,
                                                    args.seed)
            rows.append({"l": list(l), "mc": [mc.real, mc.imag],
                         "closed": [rhs.real, rhs.imag],
                         "stderr": se,
                         "pass": bool(abs(mc - rhs) <= 4.0 * se + 1e-12)})
        result = {"omega": omega.tolist(), "rows": rows}
    elif args.check == "green-limit":
        spec = pointprocess.lazy_spec(2, args.alpha, [0.2, 0.4])
        kap = lambda l: pointprocess.kappa(spec, l)
        lam = lambda l: pointprocess.y_moment(spec, l)
        rows = []
        for d in (40, 80, 160):
            delta = int(round(0.3 * math.sqrt(d)))
            m = (d // 2 + delta, d // 2 - delta)
            meff = np.array([(m[0] - d / 2) / math.sqrt(d)])
            fin = limits.scaled_green_finite_d(kap, args.alpha, 2, d, m, m,
                                               max_degree=6)
            lim = limits.limit_green_density(meff, meff, lam, 2, 6)
            rows.append({"d": d, "finite": fin, "limit": lim,
                         "ratio": fin / lim})
        result = {"rows": rows}
    else:  # field-transform
        spec = pointprocess.lazy_spec(q, args.alpha, [0.2, 0.4])
        omega = np.zeros(q)
        psi = np.zeros(q)
        omega[1] = 0.3
        psi[1] = 0.5
        a, bound = limits.transform_field_cov_closed(omega, psi, spec)
        b, tail = limits.transform_field_cov_series(omega, psi, spec, 12)
        result = {"closed": [a.real, a.imag], "series": [b.real, b.imag],
                  "route_gap": abs(a - b), "series_tail": tail,
                  "closed_truncation": bound}
    stat = result.get("max_residual", result.get("max_route_gap",
                                                  result.get("route_gap")))
    _emit(args, _with_tol(args, {"check": args.check, **result}, stat), t0)
    return 0


def cmd_verify(args, t0):
    report = verify.run_suite(args.q, args.d, seed=args.seed,
                              tol_scale=args.tol or 1.0)
    _emit(args, report, t0)
    return 0 if report["all_pass"] else 1


def _add_common(sp, *, seed=False, threads=False, out=False, tol=False):
    if seed:
        sp.add_argument("--seed", type=int, required=True,
                        help="RNG seed (stochastic subcommands require one)")
    if threads:
        sp.add_argument("--threads", type=int,
                        default=int(os.environ.get("QFIELD_THREADS", "1")),
                        help="Monte-Carlo worker count")
    if out:
        sp.add_argument("--out", help="output file (.csv or .json)")
    if tol:
        sp.add_argument("--tol", type=float,
                        help="tolerance scale override (default 1.0)")
    sp.add_argument("--config", help="JSON file of defaults for this subcommand")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfield",
        description="Spectral walks on Z_q^d, Green functions, Krawtchouk "
                    "count chains, Gaussian fields and partition functions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eigen", help="eigenvalues of an increment law")
    sp.add_argument("--law", required=True, help="law JSON (file or inline)")
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("green", help="exact Green matrix (CSV) or row (JSON)")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--row", help="comma-separated start point; row mode")
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_green)

    sp = sub.add_parser("mc-green", help="killed-walk endpoint Monte Carlo")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--x0", required=True)
    sp.add_argument("--n", type=int, required=True)
    _add_common(sp, seed=True, threads=True, out=True, tol=True)
    sp.set_defaults(func=cmd_mc_green)

    sp = sub.add_parser("sample-field", help="draw Gaussian fields to CSV")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("-n", "--n", type=int, required=True)
    _add_common(sp, seed=True, threads=True, out=True, tol=True)
    sp.set_defaults(func=cmd_sample_field)

    sp = sub.add_parser("krawtchouk", help="polynomial values and checks")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--l")
    sp.add_argument("--m")
    sp.add_argument("--check", choices=["orthogonality", "duality"])
    sp.add_argument("--max-degree", type=int, default=None)
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_krawtchouk)

    sp = sub.add_parser("kappa", help="grouped eigenvalues of a law")
    sp.add_argument("--law", required=True)
    sp.add_argument("--l", required=True)
    sp.add_argument("--route", choices=["counts", "transform", "both"],
                    default="both")
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_kappa)

    sp = sub.add_parser("pointproc", help="point-process moments")
    sp.add_argument("--spec", required=True,
                    help="point-process JSON: alpha, phi, atoms")
    sp.add_argument("--l", required=True)
    sp.add_argument("--mc", type=int, help="Monte-Carlo sample count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int,
                    default=int(os.environ.get("QFIELD_THREADS", "1")))
    sp.add_argument("--out")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_pointproc)

    sp = sub.add_parser("hamiltonian", help="quadratic-form identity checks")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--n-vectors", type=int, default=20)
    _add_common(sp, seed=True, out=True, tol=True)
    sp.set_defaults(func=cmd_hamiltonian)

    sp = sub.add_parser("partition", help="Jacobian and log partition function")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("potts", help="random-bond spin quantities")
    sp.add_argument("--law", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--n", type=int, help="field samples for MC estimates")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int,
                    default=int(os.environ.get("QFIELD_THREADS", "1")))
    sp.add_argument("--out")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_potts)

    sp = sub.add_parser("limit", help="large-dimension residual tables")
    sp.add_argument("--check", required=True,
                    choices=["hermite", "limit-kraw", "transform",
                             "green-limit", "field-transform"])
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--mc", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_limit)

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp, out=True, tol=True)
    sp.set_defaults(func=cmd_verify)

    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill options from --config; explicitly passed flags always win."""
    path = getattr(args, "config", None)
    if not path:
        return args
    doc = _load_json_arg(path, "$.config")
    explicit = _explicit_flags()
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"$.config.{key}: unknown option")
        if attr not in explicit:
            setattr(args, attr, value)
    return args


def _explicit_flags() -> set[str]:
    flags = set()
    for token in sys.argv[1:]:
        if token.startswith("-") and not token[1:2].isdigit():
            flags.add(token.lstrip("-").split("=")[0].replace("-", "_"))
    return flags


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.monotonic()
    try:
        args = _merge_config(args)
        return args.func(args, t0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except (RangeError, ShapeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except (KernelError, KappaError, ContractError, ReversibilityError) as exc:
        print(f"numerical contract failure: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
