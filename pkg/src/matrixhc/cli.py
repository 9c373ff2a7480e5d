"""Command-line front end.

Sweeps write CSV, structured reports write JSON. Every randomized command
takes ``--seed`` and echoes it; the same arguments always produce the same
bytes. Errors are printed as one JSON line on stderr and mapped to exit
codes: 2 usage, 3 guard, 4 numerical violation, 5 I/O or file format.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds, cube, hyperineq, ldc, matcore, qrac
from .errors import FormatError, GuardError, PreconditionError, ViolationError
from .rng import make_rng

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VIOLATION, EXIT_IO = 0, 2, 3, 4, 5
THREADS_ENV = "MATRIXHC_THREADS"
BCL_P_GRID = "1:2:0.1"
HC_P_GRID = "1,1.2,1.5,1.8,2"
SWEEP_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parse_int_list(text: str) -> list[int]:
    """``"1,2,4"`` or ranges ``"1-8"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty integer list")
    return out


def parse_grid(text: str) -> list[float]:
    """Comma list ``"1,1.5,2"`` or ``"start:stop:step"`` (inclusive, rounded to 12 digits)."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def emit_json(obj, out) -> None:
    out.write(json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n")


def _fmt(v: float) -> str:
    return repr(float(v))


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(t) for t in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- sweeps ---------------------------------------------------------------

def bcl_trial(seed: int, trial: int, dims: list[int], grid: list[float]) -> list[tuple]:
    rng = make_rng(seed, trial)
    d = int(dims[rng.integers(len(dims))])
    A = matcore.random_ginibre(rng, d)
    B = matcore.random_ginibre(rng, d)
    s = matcore.batch_singular_values(np.stack([(A + B) / 2, (A - B) / 2, A, B]))
    rows = []
    for p in grid:
        lhs, rhs = hyperineq.bcl_sides_from_singular_values(s, p)
        rows.append((trial, d, p, lhs, rhs))
    return rows


def hc_function(seed: int, trial: int, ns: list[int], ds: list[int], ensembles: list[str]):
    """The random function of one ``verify-hc`` trial: ``(ensemble, n, d, f)``."""
    rng = make_rng(seed, trial)
    ensemble = ensembles[trial % len(ensembles)]
    n = int(ns[rng.integers(len(ns))])
    d = 1 if ensemble == "pm1-scalar" else int(ds[rng.integers(len(ds))])
    return ensemble, n, d, hyperineq.random_cube_function(rng, n, d, ensemble)


def hc_trial(seed: int, trial: int, ns: list[int], ds: list[int], ensembles: list[str], grid: list[float]) -> list[tuple]:
    ensemble, n, d, f = hc_function(seed, trial, ns, ds, ensembles)
    profile = hyperineq.HypercontractiveProfile(f)
    return [(trial, ensemble, n, d, p, *profile.sides(p)) for p in grid]


def cmd_verify_bcl(args, out) -> int:
    dims = parse_int_list(args.dims)
    grid = parse_grid(args.p_grid)
    for p in grid:
        hyperineq._check_p_range(p)
    results = _map(lambda t: bcl_trial(args.seed, t, dims, grid), range(args.trials), args.threads)
    out.write(f"# verify-bcl seed={args.seed} trials={args.trials} tol={args.tol!r}\n")
    out.write("trial,d,p,lhs,rhs,margin\n")
    violations = 0
    for rows in results:
        for trial, d, p, lhs, rhs in rows:
            if lhs > rhs + args.tol:
                violations += 1
            out.write(f"{trial},{d},{_fmt(p)},{_fmt(lhs)},{_fmt(rhs)},{_fmt(rhs - lhs)}\n")
    if violations:
        _error("violation", f"{violations} rows with lhs > rhs + {args.tol}")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify_hc(args, out) -> int:
    ns, ds = parse_int_list(args.n), parse_int_list(args.d)
    grid = parse_grid(args.p_grid)
    for p in grid:
        hyperineq._check_p_range(p)
    ensembles = [e.strip() for e in args.ensemble.split(",")]
    for e in ensembles:
        if e not in hyperineq.ENSEMBLES:
            raise UsageError(f"unknown ensemble {e!r}")
    if max(ns) > cube.MAX_BITS:
        raise GuardError(f"n={max(ns)} exceeds {cube.MAX_BITS}")
    results = _map(lambda t: hc_trial(args.seed, t, ns, ds, ensembles, grid), range(args.trials), args.threads)
    out.write(f"# verify-hc seed={args.seed} trials={args.trials} tol={args.tol!r}\n")
    out.write("trial,ensemble,n,d,p,lhs,rhs,margin\n")
    violations = 0
    for rows in results:
        for trial, ens, n, d, p, lhs, rhs in rows:
            if lhs > rhs + args.tol * (1 + rhs):
                violations += 1
            out.write(f"{trial},{ens},{n},{d},{_fmt(p)},{_fmt(lhs)},{_fmt(rhs)},{_fmt(rhs - lhs)}\n")
    if violations:
        _error("violation", f"{violations} rows with lhs > rhs")
        return EXIT_VIOLATION
    return EXIT_OK


# --- qrac -----------------------------------------------------------------

def _xor_source(args) -> qrac.XorQrac:
    if args.qrac:
        code = qrac.load_qrac(args.qrac)
        return code.xor_code() if isinstance(code, qrac.Qrac) else code
    if args.encoding:
        enc = cube.load(args.encoding)
        m = enc.dim.bit_length() - 1
        if args.k is None:
            raise UsageError("--k is required with --encoding")
        return qrac.XorQrac(enc.n, args.k, m, enc)
    if None in (args.n, args.k, args.m):
        raise UsageError("give --qrac, --encoding, or --n/--k/--m for a random encoding")
    rng = make_rng(args.seed)
    return qrac.XorQrac(args.n, args.k, args.m, qrac.random_encoding(rng, args.n, args.m))


def _qrac_source(args) -> qrac.Qrac:
    if args.qrac:
        code = qrac.load_qrac(args.qrac)
        if not isinstance(code, qrac.Qrac):
            raise FormatError(f"{args.qrac}: no measurements.json")
        return code
    if None in (args.n, args.k, args.m):
        raise UsageError("give --qrac or --n/--k/--m for a random QRAC")
    return qrac.random_qrac(make_rng(args.seed), args.n, args.k, args.m)


def cmd_qrac(args, out) -> int:
    action = args.action
    if action == "bias":
        x = _xor_source(args)
        norms = qrac.coefficient_trace_norms(x.encoding)
        per_set = []
        worst = 0.0
        for S in qrac.k_subsets(x.n, x.k):
            hb, _ = qrac.helstrom_xor_measurement(x, S)
            worst = max(worst, abs(hb - norms[S]))
            per_set.append({"S": S, "trace_norm": norms[S], "helstrom_bias": hb})
        bound = qrac.thm44_bound(x.k, x.n, x.m)
        bias = qrac.xor_bias(x)
        report = {"n": x.n, "k": x.k, "m": x.m, "seed": args.seed, "xor_bias": bias, "bias_bound": bound,
                  "bound_vacuous": bounds.is_vacuous(bound), "bound_ok": bias <= bound + SWEEP_TOL,
                  "max_helstrom_gap": worst, "subsets": per_set}
        emit_json(report, out)
        return EXIT_OK if report["bound_ok"] else EXIT_VIOLATION
    if action == "lemma43":
        x = _xor_source(args)
        rows = []
        for delta in parse_grid(args.delta_grid):
            lhs, rhs = qrac.lemma43_sides(x, delta)
            rows.append({"delta": delta, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + SWEEP_TOL})
        emit_json({"n": x.n, "m": x.m, "seed": args.seed, "rows": rows}, out)
        return EXIT_OK if all(r["holds"] for r in rows) else EXIT_VIOLATION
    if action == "reduce":
        q = _qrac_source(args)
        rep = qrac.reduce_qrac_to_xor(q).to_json()
        rep.update({"n": q.n, "k": q.k, "m": q.m, "seed": args.seed})
        emit_json(rep, out)
        ok = rep["identity_gap"] <= 1e-12 and rep["max_domination_excess"] <= SWEEP_TOL
        return EXIT_OK if ok else EXIT_VIOLATION
    if action == "search":
        if None in (args.n, args.k, args.m):
            raise UsageError("search needs --n, --k, --m")
        p_star, labels = qrac.best_classical_qrac(args.n, args.k, args.m)
        x = qrac.XorQrac(args.n, args.k, args.m, qrac.classical_encoding(labels, args.m))
        emit_json({"n": args.n, "k": args.k, "m": args.m, "p_star": p_star, "encoding": labels,
                   "xor_bias": qrac.xor_bias(x), "bias_bound": qrac.thm44_bound(args.k, args.n, args.m)}, out)
        return EXIT_OK
    if action == "bound":
        if None in (args.n, args.k, args.m):
            raise UsageError("bound needs --n, --k, --m")
        b = qrac.thm44_bound(args.k, args.n, args.m)
        report = {"n": args.n, "k": args.k, "m": args.m, "bias_bound": b, "bias_bound_vacuous": bounds.is_vacuous(b)}
        if (args.eta is None) != (args.c_eta is None):
            raise UsageError("the success bound needs both --eta and --c-eta")
        if args.eta is not None:
            s = qrac.thm2_style_bound(args.k, args.n, args.m, args.eta, args.c_eta)
            report.update({"eta": args.eta, "c_eta": args.c_eta, "success_bound": s,
                           "success_bound_vacuous": bounds.is_vacuous(s)})
        emit_json(report, out)
        return EXIT_OK
    raise UsageError(f"unknown qrac action {action!r}")


# --- ldc ------------------------------------------------------------------

def cmd_ldc(args, out) -> int:
    code = ldc.load_code(args.code)
    dec = ldc.load_decoder(args.decoder)
    dec2, c, smooth_report = ldc.smooth_from_ldc(code, dec, args.delta, args.epsilon)
    if args.action == "smooth":
        emit_json(smooth_report, out)
        return EXIT_OK if smooth_report["smooth_ok"] else EXIT_VIOLATION
    family, results = ldc.build_matching_family(code, dec2, args.epsilon, c)
    if args.action == "match":
        emit_json({"c": c, "indices": [r.to_json() for r in results]}, out)
        return EXIT_OK
    if args.action == "parity":
        emit_json({"c": c, "family": family.to_json(), "recorded_vs_recomputed": family.verify(code)}, out)
        return EXIT_OK
    if args.action == "certify":
        report = ldc.ldc_certificate(code, family, args.delta, args.epsilon)
        report["smoothing"] = {"c": c, "c_bound": smooth_report["c_bound"], "smooth_ok": smooth_report["smooth_ok"]}
        report["matching_sizes"] = [len(r.matching) for r in results]
        emit_json(report, out)
        ok = report["chain"]["hypercontractive_ok"] and all(ix["pinch_ok"] for ix in report["indices"])
        return EXIT_OK if ok else EXIT_VIOLATION
    raise UsageError(f"unknown ldc action {args.action!r}")


# --- bounds ---------------------------------------------------------------

def cmd_bounds(args, out) -> int:
    a = args.action
    if a == "block":
        exact, lower = bounds.block_disjoint_probability(args.k, args.n, args.ell)
        emit_json({"k": args.k, "n": args.n, "ell": args.ell, "exact": exact, "lower": lower}, out)
    elif a == "rac":
        emit_json({"sigma": args.sigma, "k": args.k, "ell": args.ell,
                   "success": bounds.rac_from_protocol_success(args.sigma, args.k, args.ell)}, out)
    elif a == "eps":
        emit_json({"gamma": args.gamma, "eps": args.eps, "entropy": bounds.binary_entropy(args.eps),
                   "exponent": bounds.eps_error_conversion(args.gamma, args.eps)}, out)
    elif a == "sdpt":
        if args.c_eta is None:
            raise UsageError("sdpt needs --c-eta")
        v = bounds.oneway_sdpt_bound(args.c, args.k, args.n, args.eta, args.ell, args.c_eta, args.overhead)
        emit_json({"c": args.c, "k": args.k, "n": args.n, "eta": args.eta, "ell": args.ell, "c_eta": args.c_eta,
                   "overhead": args.overhead, "bound": v, "vacuous": bounds.is_vacuous(v)}, out)
    elif a == "grid":
        out.write("k,n,ell,exact,lower,margin\n")
        for k in range(1, args.kmax + 1):
            for n in range(1, args.nmax + 1):
                for ell in range(1, k + 1):
                    exact, lower = bounds.block_disjoint_probability(k, n, ell)
                    out.write(f"{k},{n},{ell},{_fmt(exact)},{_fmt(lower)},{_fmt(exact - lower)}\n")
    else:
        raise UsageError(f"unknown bounds action {a!r}")
    return EXIT_OK


# --- config and parser ----------------------------------------------------

def config() -> dict:
    return {
        "threads_env": THREADS_ENV,
        "threads_default": default_threads(),
        "tolerances": {
            "default": matcore.DEFAULT_TOL,
            "eigen_clamp_relative": matcore.CLAMP_REL,
            "eigen_residual_relative": matcore.RESIDUAL_REL,
            "sweep": SWEEP_TOL,
            "decoder_weight_sum": ldc.WEIGHT_TOL,
        },
        "guards": {
            "cube_max_bits": cube.MAX_BITS,
            "qrac_max_enumeration_bits": qrac.MAX_ENUM_BITS,
            "qrac_max_evaluations": qrac.MAX_EVALUATIONS,
            "qrac_max_search_bits": qrac.MAX_SEARCH_BITS,
            "ldc_max_expand_bits": ldc.MAX_EXPAND_BITS,
            "ldc_max_exact_bits": ldc.MAX_EXACT_BITS,
            "ldc_max_certificate_length": ldc.MAX_CERT_LENGTH,
        },
        "defaults": {
            "verify-bcl": {"trials": 10000, "dims": "1-8", "p_grid": BCL_P_GRID, "seed": 0},
            "verify-hc": {"trials": 1000, "n": "1-6", "d": "1-8", "ensemble": ",".join(hyperineq.ENSEMBLES),
                          "p_grid": HC_P_GRID, "seed": 0},
            "qrac": {"seed": 0, "delta_grid": "0:1:0.1"},
            "ldc": {"log_base": 2, "fill_value": ldc.FILL_VALUE},
        },
        "rng": "numpy Philox keyed by (seed, trial)",
    }


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matrixhc", description=__doc__.splitlines()[0])
    parser.add_argument("--show-config", action="store_true", help="print numerical defaults and guards as JSON")
    parser.add_argument("--threads", type=int, default=default_threads(), help=f"worker threads (default from ${THREADS_ENV})")
    parser.add_argument("--output", "-o", help="write primary output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("verify-bcl", help="two-point inequality sweep (CSV)")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--dims", default="1-8")
    p.add_argument("--p-grid", default=BCL_P_GRID)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=SWEEP_TOL)
    p.set_defaults(func=cmd_verify_bcl)

    p = sub.add_parser("verify-hc", help="hypercontractive inequality sweep (CSV)")
    p.add_argument("--n", default="1-6")
    p.add_argument("--d", default="1-8")
    p.add_argument("--ensemble", default=",".join(hyperineq.ENSEMBLES))
    p.add_argument("--p-grid", default=HC_P_GRID)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=SWEEP_TOL)
    p.set_defaults(func=cmd_verify_hc)

    p = sub.add_parser("qrac", help="random access code reports (JSON)")
    p.add_argument("action", choices=["bias", "lemma43", "reduce", "search", "bound"])
    p.add_argument("--qrac", help="directory written by save_qrac")
    p.add_argument("--encoding", help="cube-function file (.bin or .json)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta-grid", default="0:1:0.1")
    p.add_argument("--eta", type=float)
    p.add_argument("--c-eta", type=float, default=None, help="constant of the success bound; no default")
    p.set_defaults(func=cmd_qrac)

    p = sub.add_parser("ldc", help="locally decodable code pipeline (JSON)")
    p.add_argument("action", choices=["smooth", "match", "parity", "certify"])
    p.add_argument("--code", required=True)
    p.add_argument("--decoder", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_ldc)

    p = sub.add_parser("bounds", help="closed-form direct-product bounds")
    p.add_argument("action", choices=["block", "rac", "eps", "sdpt", "grid"])
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=1.5)
    p.add_argument("--c-eta", type=float, default=None, help="constant of the success bound; no default")
    p.add_argument("--overhead", type=float, default=0.0)
    p.add_argument("--kmax", type=int, default=30)
    p.add_argument("--nmax", type=int, default=30)
    p.set_defaults(func=cmd_bounds)
    return parser


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def run(argv=None, out=None) -> int:
    """Parse `argv`, run the subcommand writing to `out`, and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    close = None
    try:
        if out is None:
            if args.output:
                out = close = open(args.output, "w", newline="\n")
            else:
                out = sys.stdout
        if args.show_config:
            emit_json(config(), out)
            return EXIT_OK
        if args.command is None:
            _error("usage", "no command given")
            return EXIT_USAGE
        return args.func(args, out)
    except UsageError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    except GuardError as exc:
        _error("guard", str(exc))
        return EXIT_GUARD
    except ViolationError as exc:
        _error("violation", str(exc))
        return EXIT_VIOLATION
    except (FormatError, OSError) as exc:
        _error("io", str(exc))
        return EXIT_IO
    except (PreconditionError, ValueError) as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    finally:
        if close is not None:
            close.close()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
