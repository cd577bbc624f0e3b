"""Command line interface: ``e2gaps table | certify | oracle | tuple``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import oracle
from .basis import SymmetricPolynomialSpec, as_terms
from .forms import SieveConfig, build_Ltilde, build_Mtilde, build_forms, evaluate_ratio
from .optimizer import (
    DEFAULT_DENOMINATOR_BOUND,
    FAIL,
    INCONCLUSIVE,
    MAX_PRECISION_BITS,
    PASS,
    certify,
    optimize_and_certify,
)
from .scalars import DEFAULT_PRECISION, approximate, format_rational, parse_rational
from .tuples import (
    BUNDLED_DIAMETERS,
    BudgetExhausted,
    DEFAULT_BUDGET,
    greedy_search,
    is_admissible,
    load_bundled,
    load_tuple,
)

log = logging.getLogger("e2gaps")

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 2, 3, 4

# (k, theta, nu) of the eight table rows, ordered by (nu, theta)
TABLE_ROWS = [
    (23, Fraction(1, 2), 3), (10, Fraction(1), 3),
    (49, Fraction(1, 2), 4), (16, Fraction(1), 4),
    (102, Fraction(1, 2), 5), (25, Fraction(1), 5),
    (225, Fraction(1, 2), 6), (37, Fraction(1), 6),
]

_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunRecord:
    command: str
    config: dict
    inputs: dict
    outputs: list = field(default_factory=list)
    wall_time: float | None = None
    precision_bits: int = DEFAULT_PRECISION
    seed: int = 1
    exit_code: int = EXIT_OK

    def dumps(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def _exit_for(verdicts) -> int:
    verdicts = list(verdicts)
    if FAIL in verdicts:
        return EXIT_FAIL
    if INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# coefficient files


def read_coeff_file(path: str) -> dict:
    """Load a coefficient record from a path, or a bundled fixture by name (e.g. ``k10``)."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    else:
        name = p.name if p.name.endswith(".json") else p.name + ".json"
        try:
            text = resources.files("e2gaps.data.coeffs").joinpath(name).read_text()
        except FileNotFoundError:
            raise InputError(f"coefficient file not found: {path}") from None
    try:
        rec = json.loads(text)
        rec["theta"] = parse_rational(rec["theta"])
        rec["terms"] = as_terms(rec["terms"])
        rec["coeffs"] = [parse_rational(x) for x in rec["coeffs"]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed coefficient file {path}: {exc}") from None
    if len(rec["terms"]) != len(rec["coeffs"]):
        raise InputError("terms and coeffs differ in length")
    return rec


def bundled_fixture(k: int) -> dict:
    return read_coeff_file(f"k{k}")


# ---------------------------------------------------------------------------
# table


def digits_prefix_ok(R, digits: str) -> bool:
    """Both decimal endpoints of R start with the reference digits."""
    lo, hi = R.decimal(len(digits) + 5)
    return lo.startswith(digits) and hi.startswith(digits)


def bound_line(k: int, theta: Fraction, nu: int, H: int) -> str:
    regime = "unconditional" if theta == Fraction(1, 2) else "under EH"
    return f"ν={nu} {regime}: G̃{str(nu).translate(_SUB)} ≤ H({k}) = {H}"


def table_row(k: int, theta: Fraction, nu: int, precision_bits: int, max_precision_bits: int) -> dict:
    fx = bundled_fixture(k)
    config = SieveConfig(k, theta, nu, len(fx["terms"]))
    forms = build_forms(k, theta, fx["terms"])
    cert = certify(config, fx["terms"], fx["coeffs"], forms, precision_bits, max_precision_bits)
    # widen the R enclosure until the reference digits are decided
    prec = cert.precision_bits
    R = cert.R
    while not digits_prefix_ok(R, fx["R_digits"]) and prec < max_precision_bits:
        prec = min(2 * prec, max_precision_bits)
        R = evaluate_ratio(fx["coeffs"], forms, prec).R
    prefix_ok = digits_prefix_ok(R, fx["R_digits"])
    tup = load_bundled(k)
    adm = is_admissible(tup)
    tuple_ok = bool(adm) and len(tup) == k and tup.diameter == fx["H"]
    verdict = cert.verdict
    if verdict == PASS and not (prefix_ok and tuple_ok):
        verdict = FAIL
    lo, hi = R.decimal(20)
    return {
        "k": k, "theta": format_rational(theta), "nu": nu,
        "certificate": cert.to_record(),
        "R_digits": fx["R_digits"], "R_lower": lo, "R_upper": hi, "R_precision_bits": prec,
        "R_prefix_match": prefix_ok,
        "tuple": {"diameter": tup.diameter, "size": len(tup), "admissible": bool(adm), "expected_H": fx["H"]},
        "verdict": verdict,
        "bound": bound_line(k, theta, nu, fx["H"]),
    }


def _row_args(args):
    return [(k, th, nu, args.precision_bits, args.max_precision_bits) for k, th, nu in TABLE_ROWS]


def _table_row_star(a):
    return table_row(*a)


def cmd_table(args) -> RunRecord:
    rec = RunRecord("table", {"rows": [[k, format_rational(t), nu] for k, t, nu in TABLE_ROWS]},
                    {"fixtures": "bundled"}, precision_bits=args.precision_bits, seed=args.seed)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_table_row_star, _row_args(args)))
    else:
        rows = [table_row(*a) for a in _row_args(args)]
    rec.outputs = rows
    rec.exit_code = _exit_for(r["verdict"] for r in rows)
    if not args.quiet:
        print(f"{'nu':>2} {'theta':>5} {'k':>4} {'R_k lower bound':>22} {'reference':>16} {'H':>5}  verdict")
        for r in rows:
            print(f"{r['nu']:>2} {r['theta']:>5} {r['k']:>4} {r['R_lower']:>22} {r['R_digits']:>16} "
                  f"{r['tuple']['diameter']:>5}  {r['verdict']}")
        print()
        for r in rows:
            mark = "" if r["verdict"] == PASS else f"  [{r['verdict']}]"
            print(r["bound"] + mark)
    return rec


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args) -> RunRecord:
    if args.theta is None and args.coeffs is None:
        raise InputError("--theta is required with --optimize")
    if args.coeffs is not None:
        fx = read_coeff_file(args.coeffs)
        theta = parse_rational(args.theta) if args.theta is not None else fx["theta"]
        k = args.k if args.k is not None else fx["k"]
        if k != fx["k"] or theta != fx["theta"]:
            raise InputError(f"coefficient file is for k={fx['k']}, theta={format_rational(fx['theta'])}")
        nu = args.nu if args.nu is not None else fx.get("nu")
        if nu is None:
            raise InputError("--nu is required")
        config = SieveConfig(k, theta, nu, len(fx["terms"]))
        cert = certify(config, fx["terms"], fx["coeffs"], precision_bits=args.precision_bits,
                       max_precision_bits=args.max_precision_bits)
        inputs = {"coeffs": args.coeffs}
    else:
        if args.k is None or args.nu is None:
            raise InputError("--k and --nu are required with --optimize")
        config = SieveConfig(args.k, parse_rational(args.theta), args.nu, args.optimize)
        cert = optimize_and_certify(config, int(args.denominator_bound), args.precision_bits,
                                    args.max_precision_bits)
        inputs = {"optimize": args.optimize, "denominator_bound": str(int(args.denominator_bound))}
    rec = RunRecord("certify", {"k": config.k, "theta": format_rational(config.theta), "nu": config.nu},
                    inputs, [cert.to_record()], precision_bits=args.precision_bits, seed=args.seed)
    rec.exit_code = _exit_for([cert.verdict])
    if not args.quiet:
        lo, hi = cert.R.decimal(20)
        print(f"k={config.k} theta={format_rational(config.theta)} nu={config.nu}: "
              f"R in [{lo}, {hi}] ({cert.R.precision} bits), D >= {cert.to_record()['D_lower']}: {cert.verdict}")
    return rec


# ---------------------------------------------------------------------------
# oracle


def oracle_moments(tol=1e-6, max_n=12) -> tuple[list, bool]:
    out = []
    ok = True
    for k in range(1, 4):
        for b in range(3):
            for c in range(2):
                for mode in ("P1_complement", "P1_power"):
                    r = oracle.simplex_integral(b, c, k, mode)
                    rel = abs(r.estimate - float(r.exact)) / float(r.exact)
                    good = rel <= tol
                    ok &= good
                    out.append({"b": b, "c": c, "k": k, "mode": mode, **r.to_record(),
                                "relative_error": rel, "verdict": PASS if good else FAIL})
    ident = all(oracle.verify_binomial_identity(n, m) for n in range(1, max_n + 1) for m in range(1, n + 1))
    ok &= ident
    out.append({"binomial_identity": f"0 < m <= n <= {max_n}", "verdict": PASS if ident else FAIL})
    return out, ok


def oracle_forms(tol=1e-3, scalar_tol=1e-9, precision=128) -> tuple[list, bool]:
    out = []
    ok = True
    for theta in (Fraction(1), Fraction(1, 2)):
        for k in (2, 3):
            for b in range(2):
                for c in range(2):
                    spec = SymmetricPolynomialSpec.single(b, c)
                    for which, build in (("L", build_Ltilde), ("M", build_Mtilde)):
                        ex = oracle.extrapolate_tilde(spec, k, theta, which)
                        val = float(approximate(build(k, theta, spec.terms)[0, 0], theta, 64))
                        rel = abs(ex.estimate - val) / abs(val)
                        good = rel <= tol
                        ok &= good
                        out.append({"form": which, "k": k, "theta": format_rational(theta), "b": b, "c": c,
                                    "extrapolated": ex.estimate, "formula": val, "relative_error": rel,
                                    "verdict": PASS if good else FAIL})
        for m in range(1, 5):
            for n in range(0, 5):
                good, errs = check_mu_routes(m, n, theta, precision, scalar_tol)
                ok &= good
                out.append({"scalar": "mu", "m": m, "n": n, "theta": format_rational(theta), **errs,
                            "verdict": PASS if good else FAIL})
        for n in range(0, 6):
            good, errs = check_lambda_routes(n, theta, precision, scalar_tol)
            ok &= good
            out.append({"scalar": "lambda", "n": n, "theta": format_rational(theta), **errs,
                        "verdict": PASS if good else FAIL})
    return out, ok


def _routes(closed, quad, hyp, tol, precision):
    import mpmath

    with mpmath.workprec(precision):
        c = mpmath.mpf(closed.numerator) / closed.denominator
        h = mpmath.mpf(hyp.mid.numerator) / hyp.mid.denominator
        e_quad = float(abs(c - quad))
        e_hyp = float(abs(c - h))
        scale = max(1.0, float(abs(c)))
    return e_quad <= tol * scale and e_hyp <= tol * scale, {"quadrature_error": e_quad, "hypergeometric_error": e_hyp}


def check_mu_routes(m, n, theta, precision=128, tol=1e-9):
    from .scalars import eval_interval, mu

    closed = eval_interval(mu(m, n, theta), theta, precision).mid
    return _routes(closed, oracle.mu_quadrature(m, n, theta, precision),
                   oracle.mu_hypergeometric(m, n, theta, precision), tol, precision)


def check_lambda_routes(n, theta, precision=128, tol=1e-9):
    from .scalars import eval_interval, lambda_n

    closed = eval_interval(lambda_n(n, theta), theta, precision).mid
    return _routes(closed, oracle.lambda_quadrature(n, theta, precision),
                   oracle.lambda_hypergeometric(n, theta, precision), tol, precision)


def cmd_oracle(args) -> RunRecord:
    if args.which == "lemma7":
        out, ok = oracle_moments()
        cfg = {}
    elif args.which == "forms":
        out, ok = oracle_forms()
        cfg = {}
    else:
        rep = oracle.verify_x0_integrals(args.m, args.n, parse_rational(args.theta), args.eta, args.precision_bits)
        out, ok = [rep.to_record()], rep.passed
        cfg = {"m": args.m, "n": args.n, "theta": args.theta, "eta": args.eta}
    rec = RunRecord(f"oracle {args.which}", cfg, {}, out, precision_bits=args.precision_bits, seed=args.seed)
    rec.exit_code = EXIT_OK if ok else EXIT_FAIL
    if not args.quiet:
        bad = [o for o in out if o.get("verdict") != PASS]
        print(f"oracle {args.which}: {len(out) - len(bad)}/{len(out)} checks pass")
        for o in bad:
            print("  FAIL", json.dumps(o, sort_keys=True))
    return rec


# ---------------------------------------------------------------------------
# tuples


def cmd_tuple(args) -> RunRecord:
    if args.action == "check":
        try:
            t = load_tuple(args.file)
        except OSError as exc:
            raise InputError(str(exc)) from None
        adm = is_admissible(t)
        out = {"size": len(t), "diameter": t.diameter, "admissible": bool(adm), "witness": adm.witness}
        if args.k is not None and args.k in BUNDLED_DIAMETERS:
            out["expected_H"] = BUNDLED_DIAMETERS[args.k]
        ok = bool(adm) and (args.k is None or len(t) == args.k)
        rec = RunRecord("tuple check", {"k": args.k}, {"file": args.file}, [out],
                        precision_bits=args.precision_bits, seed=args.seed)
        if not args.quiet:
            why = "" if adm else f" (all classes mod {adm.witness} covered)"
            print(f"{args.file}: size {len(t)}, diameter {t.diameter}, "
                  f"{'admissible' if adm else 'not admissible'}{why}")
    else:
        try:
            t = greedy_search(args.k, args.strategy, args.budget, seed=args.seed)
        except BudgetExhausted as exc:
            print(str(exc), file=sys.stderr)
            rec = RunRecord("tuple search", {"k": args.k, "strategy": args.strategy, "budget": args.budget}, {},
                            [], precision_bits=args.precision_bits, seed=args.seed, exit_code=EXIT_INCONCLUSIVE)
            return rec
        ok = bool(is_admissible(t))
        rec = RunRecord("tuple search", {"k": args.k, "strategy": args.strategy, "budget": args.budget}, {},
                        [{"diameter": t.diameter, "elements": list(t.elements)}],
                        precision_bits=args.precision_bits, seed=args.seed)
        if not args.quiet:
            print(f"k={args.k}: diameter {t.diameter}")
            print(t.dumps(), end="")
    rec.exit_code = EXIT_OK if ok else EXIT_FAIL
    return rec


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--max-precision-bits", type=int, default=MAX_PRECISION_BITS)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--denominator-bound", type=float, default=float(DEFAULT_DENOMINATOR_BOUND))
    common.add_argument("--json", metavar="PATH", help="write the run record here ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="include wall time in the run record")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="e2gaps", description="Sieve bounds for gaps between E2-numbers.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("table", parents=[common], help="recompute and certify all eight table rows")
    t.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("certify", parents=[common], help="certify R_k(F) > nu for one configuration")
    c.add_argument("--k", type=int)
    c.add_argument("--theta")
    c.add_argument("--nu", type=int)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--coeffs", help="coefficient file, or a bundled name such as k10")
    g.add_argument("--optimize", type=int, metavar="NTERMS")

    o = sub.add_parser("oracle", parents=[common], help="numerical cross-checks")
    o.add_argument("which", choices=["lemma7", "forms", "x0"])
    o.add_argument("--m", type=int, default=1)
    o.add_argument("--n", type=int, default=0)
    o.add_argument("--theta", default="1")
    o.add_argument("--eta", type=float, default=1e-4)

    tp = sub.add_parser("tuple", parents=[common], help="admissible tuples")
    tsub = tp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    tc = tsub.add_parser("check", parents=[common])
    tc.add_argument("file")
    tc.add_argument("--k", type=int)
    ts = tsub.add_parser("search", parents=[common])
    ts.add_argument("--k", type=int, required=True)
    ts.add_argument("--strategy", choices=["greedy_residue_sieve", "shifted_primes"],
                    default="greedy_residue_sieve")
    ts.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    return ap


COMMANDS = {"table": cmd_table, "certify": cmd_certify, "oracle": cmd_oracle, "tuple": cmd_tuple}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        rec = COMMANDS[args.command](args)
    except (InputError, ValueError, KeyError, OSError) as exc:
        print(f"e2gaps: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.timing:
        rec.wall_time = round(time.perf_counter() - t0, 3)
    if args.json == "-":
        sys.stdout.write(rec.dumps())
    elif args.json:
        Path(args.json).write_text(rec.dumps())
    return rec.exit_code


if __name__ == "__main__":
    sys.exit(main())
