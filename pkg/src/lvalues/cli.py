"""Command-line front end.  Reports go out as JSON lines, tables as CSV."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor

import mpmath
from mpmath import mp

from . import store
from .characters import parity_matches
from .eigenforms import EigenDistinctnessError
from .exactseries import dim_cusp_forms
from .kohnenplus import PlusSpaceError, ShimuraMatchError
from .specialfn import ErrBoundedReal

SCHEMA_VERSION = store.SCHEMA_VERSION
CONVENTION = "(-1)^(k/2) D > 0, equivalently chi_D(-1) = i^k"

log = logging.getLogger("lvalues")


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def num(x, digits: int = 30) -> str:
    return mpmath.nstr(x, digits, strip_zeros=False) if not isinstance(x, (int, str)) else str(x)


def ebr(x: ErrBoundedReal) -> dict:
    return {"value": num(x.value), "err": num(x.err, 4)}


def _record(kind: str, **fields) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **fields}


# ---------------------------------------------------------------------------
# commands; each returns a list of flat-ish records


def cmd_dims(a):
    return [_record("dims", k=k, dim=dim_cusp_forms(k)) for k in range(a.kmin, a.kmax + 1, 2)]


def cmd_eigen(a):
    from .lcentral import forms_for

    out = []
    for f in forms_for(a.k, a.nmax, a.prec_bits):
        for n in range(1, a.nmax + 1):
            out.append(_record("eigen", k=a.k, eigen_index=f.eigen_index, n=n,
                               **{"lambda": num(f(n)), "err": num(f.err(n), 4)}))
    return out


def cmd_lvalue(a):
    from .lcentral import central_values_for

    out = []
    for cv in central_values_for(a.k, a.d, a.cutoff_mult, a.prec_bits):
        if a.eigen_index is not None and cv.eigen_index != a.eigen_index:
            continue
        out.append(_record("lvalue", k=cv.k, eigen_index=cv.eigen_index, D=cv.D, cutoff=cv.cutoff,
                           cutoff_mult=cv.cutoff_mult, convention=CONVENTION, **ebr(cv.value)))
    return out


def cmd_omega(a):
    from .lcentral import forms_for, omega_star

    kw = {}
    need = 0
    if a.method == "series":
        X = a.x if a.x is not None else 10.0
        kw["X"] = X
        need = int(40 * X) + 1
    out = []
    for f in forms_for(a.k, need, a.prec_bits):
        w = omega_star(f, a.method, **kw)
        out.append(_record("omega", k=a.k, eigen_index=f.eigen_index, method=w.method_tag, **ebr(w.omega_star)))
    return out


def cmd_trace_check(a):
    from .petersson import trace_check

    r = trace_check(a.k, a.m, a.n, cmax=a.cmax, prec_bits=a.prec_bits)
    rec = _record("trace_check", k=r.k, m=r.m, n=r.n, q=r.q, lhs=ebr(r.lhs), rhs_delta=r.rhs_delta,
                  rhs_bessel_tail=ebr(r.rhs_bessel_tail), cmax=r.cmax, tail_bound=num(r.tail_bound, 4),
                  discrepancy=num(r.discrepancy, 4), in_regime=r.in_regime)
    if r.in_regime:
        rec.update(regime_excess=num(r.regime_excess, 4), regime_bound=num(r.regime_bound, 4), regime_ok=r.regime_ok)
    return [rec]


def _moment_row(args):
    k, r, weighted, D, cutoff_mult, prec = args
    from .lcentral import moment_sum

    ref = k * math.log(k) ** 4.5
    if not parity_matches(D, k):
        return _record("moment", k=k, dim=dim_cusp_forms(k), r=r, weighted=weighted, D=D, value="", err="",
                       reference=num(ref, 12), status="parity mismatch: central values vanish")
    m = moment_sum(k, r, weighted, D, cutoff_mult, prec)
    return _record("moment", k=k, dim=dim_cusp_forms(k), r=r, weighted=weighted, D=D, value=num(m.value),
                   err=num(m.err, 4), reference=num(ref, 12), status="ok")


def _sweep(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_moments(a):
    jobs = [(k, a.r, not a.unweighted, a.d, a.cutoff_mult, a.prec_bits) for k in range(a.kmin, a.kmax + 1, a.kstep)]
    return _sweep(_moment_row, jobs, a.threads)


def _extreme_row(args):
    k, D, c, cutoff_mult, prec = args
    from .resonance import count_extreme

    rep = count_extreme(k, D, c, cutoff_mult, prec)
    return _record("count_extreme", k=k, D=D, constant=c, threshold=num(rep.threshold, 12), dim=rep.dim,
                   count=rep.count, max_value=num(rep.max_value, 12) if rep.max_value is not None else "",
                   members=";".join(f"{i}:{num(v.value, 12)}" for i, v in rep.members))


def cmd_count_extreme(a):
    if a.k is not None:
        ks = [a.k]
    else:
        ks = [k for k in range(a.kmin, a.kmax + 1, 2) if parity_matches(a.d, k)]
    return _sweep(_extreme_row, [(k, a.d, a.constant, a.cutoff_mult, a.prec_bits) for k in ks], a.threads)


def cmd_resonator_identity(a):
    from .resonance import sigma_identity_check
    from .eigenforms import small_primes

    rng = random.Random(a.seed)
    out = []
    for i in range(a.trials):
        N = rng.randint(2, a.n)
        D = rng.choice(a.d_choices)
        ps = [p for p in small_primes(N) if D % p]
        chosen = rng.sample(ps, min(len(ps), rng.randint(0, 6)))
        vals = {p: round(rng.uniform(-1, 1), 12) for p in sorted(chosen)}
        ok, resid, lhs, rhs = sigma_identity_check(N, vals, D, a.prec_bits)
        out.append(_record("sigma_identity", trial=i, N=N, D=D, primes=" ".join(map(str, vals)),
                           lhs=num(lhs, 20), rhs=num(rhs, 20), residual=num(resid, 4), passed=bool(ok)))
    if not all(r["passed"] for r in out):
        raise CheckFailed("sigma identity failed", out)
    return out


def cmd_diagonal_check(a):
    from .resonance import diagonal_classification_check

    r = diagonal_classification_check(a.n, budget=a.budget)
    rec = _record("diagonal_check", N=r.N, passed=r.passed, quadruples=r.quadruples, diagonal=r.diagonal,
                  counterexamples=json.dumps(r.counterexamples))
    if not r.passed:
        raise CheckFailed("diagonal classification has counterexamples", [rec])
    return [rec]


def cmd_ratio_trend(a):
    from .resonance import ratio_exponent_trend, trend_is_nonincreasing

    rows = ratio_exponent_trend([int(float(x)) for x in a.n_list.split(",")], a.d)
    trend = trend_is_nonincreasing(rows)
    return [_record("ratio_trend", N=r.N, window_lo=num(r.window[0], 8), window_hi=num(r.window[1], 8),
                    primes=" ".join(map(str, r.primes)), prime_sum=num(r.prime_sum, 12), target=num(r.target, 12),
                    deviation=num(r.deviation, 8) if r.deviation is not None else "", empty_window=r.empty,
                    log_ratio=num(r.log_ratio, 12), nonincreasing=trend) for r in rows]


def cmd_waldspurger(a):
    from .kohnenplus import waldspurger_norm_check, waldspurger_ratio_check

    out = []
    r = waldspurger_ratio_check(a.k, a.d1, a.d2, a.eigen_index, prec_bits=a.prec_bits)
    out.append(_record("waldspurger_ratio", k=r.k, D1=r.D1, D2=r.D2, eigen_index=r.eigen_index,
                       lhs=num(r.lhs, 20), rhs=num(r.rhs, 20), residual=num(r.residual, 4), vacuous=r.vacuous,
                       scale_tag=r.scale_tag, convention=CONVENTION))
    if a.norm:
        n = waldspurger_norm_check(a.k, a.d1, a.depth, a.eigen_index, prec_bits=a.prec_bits)
        out.append(_record("waldspurger_norm", k=n.k, D=n.D, eigen_index=n.eigen_index, norm_sq=repr(n.norm_sq),
                           norm_err=repr(n.norm_err), c_normalized_sq=repr(n.c_normalized_sq),
                           literal_rhs=repr(n.literal_rhs), literal_rel_err=repr(n.literal_rel_err),
                           corrected_rhs=repr(n.corrected_rhs), corrected_rel_err=repr(n.corrected_rel_err),
                           exceeds_threshold=n.exceeds_threshold, convention=CONVENTION))
    return out


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--prec-bits", type=int, default=128)
    g.add_argument("--cache-dir", default=None)
    g.add_argument("--threads", type=int, default=1)
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cutoff-mult", type=float, default=2.0)
    g.add_argument("--cmax", type=int, default=100)
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="lvalues", description="Central values of level-one modular L-functions and their checks.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, table, **kw):
        s = sub.add_parser(name, parents=[common], **kw)
        s.set_defaults(func=fn, table=table)
        return s

    s = add("dims", cmd_dims, True, help="dim S_k(1) for even k")
    s.add_argument("--kmin", type=int, default=2)
    s.add_argument("--kmax", type=int, required=True)

    s = add("eigen", cmd_eigen, True, help="normalized Hecke eigenvalues")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--nmax", type=int, default=10)

    s = add("lvalue", cmd_lvalue, False, help="L(1/2, f x chi_D) for f in H_k")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--eigen-index", type=int, default=None)

    s = add("omega", cmd_omega, False, help="harmonic weights omega(f)*")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", choices=["norm", "series", "trace-inverted"], default="norm")
    s.add_argument("--x", type=float, default=None, help="smoothing parameter X of the series method")

    s = add("trace-check", cmd_trace_check, False, help="both sides of the Petersson trace formula")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)

    s = add("moments", cmd_moments, True, help="moment sums over H_k")
    s.add_argument("--kmin", type=int, default=12)
    s.add_argument("--kmax", type=int, default=60)
    s.add_argument("--kstep", type=int, default=2)
    s.add_argument("--r", type=int, default=3, choices=[1, 2, 3])
    s.add_argument("--unweighted", action="store_true")
    s.add_argument("--d", type=int, default=1)

    s = add("count-extreme", cmd_count_extreme, True, help="forms with large central value")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--kmin", type=int, default=12)
    s.add_argument("--kmax", type=int, default=100)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--constant", type=float, default=1.41)

    s = add("resonator-identity", cmd_resonator_identity, True, help="randomized divisor-sum identity checks")
    s.add_argument("--n", type=int, default=200, help="largest N drawn")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--d-choices", type=lambda t: [int(x) for x in t.split(",")], default=[1, 5, -3])

    s = add("diagonal-check", cmd_diagonal_check, False, help="diagonal classification sweep")
    s.add_argument("--n", type=int, default=30)
    s.add_argument("--budget", type=int, default=100)

    s = add("ratio-trend", cmd_ratio_trend, True, help="prime-sum exponent against its asymptotic")
    s.add_argument("--n-list", default="1e9,1e10,1e11,1e12")
    s.add_argument("--d", type=int, default=1)

    s = add("waldspurger", cmd_waldspurger, False, help="Waldspurger ratio (and optionally norm) check")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--d1", type=int, required=True)
    s.add_argument("--d2", type=int, required=True)
    s.add_argument("--eigen-index", type=int, default=0)
    s.add_argument("--norm", action="store_true", help="also run the absolute check with a numerical norm")
    s.add_argument("--depth", type=int, default=1)
    return p


def emit(records, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        for r in records:
            out.write(json.dumps(r, sort_keys=True) + "\n")
        return
    if not records:
        return
    cols = list(records[0])
    w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in records:
        w.writerow(r)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(json.dumps({"schema_version": SCHEMA_VERSION, "error": "usage", "message": str(e)}) + "\n")
        return 1
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if a.cache_dir:
        store.set_cache_dir(a.cache_dir)
    fmt = a.fmt or ("csv" if a.table else "json")
    mp.prec = max(mp.prec, 53)
    try:
        records = a.func(a)
    except CheckFailed as e:
        emit(e.records, fmt)
        sys.stdout.write(json.dumps({"schema_version": SCHEMA_VERSION, "error": "check_failed", "message": str(e)}) + "\n")
        return 2
    except (PlusSpaceError, ShimuraMatchError, EigenDistinctnessError, AssertionError, ArithmeticError) as e:
        sys.stdout.write(json.dumps({"schema_version": SCHEMA_VERSION, "error": type(e).__name__,
                                     "message": str(e)}) + "\n")
        return 2
    except (ValueError, IndexError) as e:
        sys.stderr.write(json.dumps({"schema_version": SCHEMA_VERSION, "error": "usage", "message": str(e)}) + "\n")
        return 1
    emit(records, fmt)
    return 0


if __name__ == "__main__":
    sys.exit(main())
