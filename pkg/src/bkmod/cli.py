"""bkctl: lengths, beta sweeps, worked examples, ledgers and self-checks.

Exit codes: 0 pass, 1 check failure or counterexample, 2 usage or input
error, 3 insufficient precision.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import re
import sys
from typing import Optional

from . import oracle
from .conjectures import (SweepConfig, derive_constants, example_bk_group_scheme,
                          example_li_petrov, ledger_l_dR, main_inequality_check, p_torsion_bound_check,
                          stability_check, sweep_beta)
from .errors import (BKError, BudgetExceeded, CountMismatch, HypothesisUnmet, InfiniteModule,
                     InsufficientPrecision, QExceedsBound, SpecError, UnsupportedSummand, WindowTooShort)
from .lengths import e_torsion_length, mod_e_length
from .modules import BKModule, CyclicSummand, filtration
from .ring import EisensteinPoly, RingParams
from .specfile import load as load_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- reports ---------------------------------------------------------------------------


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat()


def render_csv(columns: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# generated {_timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else r.get(c) for c in columns])
    return buf.getvalue()


def render_json(command: str, columns: list, rows: list, summary: dict) -> str:
    body = json.dumps({"command": command, "columns": columns, "rows": rows, "summary": summary}, indent=2)
    # the timestamp sits alone on the second line so reports differ only there
    return "{\n" + f'  "generated": "{_timestamp()}",\n' + body[2:] + "\n"


def write_report(path: str, fmt: str, command: str, columns: list, rows: list, summary: dict) -> None:
    text = render_csv(columns, rows) if fmt == "csv" else render_json(command, columns, rows, summary)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _fmt_for(path: str, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "json" if path.endswith(".json") else "csv"


def print_table(columns: list, rows: list, out=None) -> None:
    out = out if out is not None else sys.stdout
    cells = [[str("" if r.get(c) is None else r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(x[i]) for x in cells]) for i, c in enumerate(columns)]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for x in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(x, widths)).rstrip() + "\n")


# --- inline module syntax ---------------------------------------------------------------

_SUMMAND = re.compile(r"^(Free|Ppow|PUr|FUr)\s*(?:\(([^)]*)\))?$")


def parse_summands(text: str) -> tuple:
    """'PUr(1,2) + FUr(1,1+u,3) + Ppow(2) + Free' -> summands; FUr units as '1', '2', '1+u'."""
    out = []
    if text.strip() in ("", "0"):
        return ()
    for part in _split_top(text):
        m = _SUMMAND.match(part.strip())
        if not m:
            raise UsageError(f"cannot parse summand {part.strip()!r}")
        kind, args = m.group(1), [a.strip() for a in (m.group(2) or "").split(",") if a.strip()]
        try:
            if kind == "Free" and not args:
                out.append(CyclicSummand("Free"))
            elif kind == "Ppow" and len(args) == 1:
                out.append(CyclicSummand("Ppow", a=int(args[0])))
            elif kind == "PUr" and len(args) == 2:
                out.append(CyclicSummand("PUr", a=int(args[0]), r=int(args[1])))
            elif kind == "FUr" and len(args) == 3:
                out.append(CyclicSummand("FUr", alpha=int(args[0]), unit=_parse_unit(args[1]), r=int(args[2])))
            else:
                raise UsageError(f"wrong number of arguments in {part.strip()!r}")
        except ValueError as ex:
            raise UsageError(f"{part.strip()}: {ex}") from None
    return tuple(out)


def _split_top(text: str) -> list:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def _parse_unit(s: str) -> tuple:
    coeffs = {}
    for term in s.replace("-", "+-").split("+"):
        term = term.strip()
        if not term:
            continue
        m = re.fullmatch(r"(-?\d*)\*?(u(?:\^(\d+))?)?", term)
        if not m:
            raise ValueError(f"bad unit term {term!r}")
        c = m.group(1)
        c = int(c) if c not in ("", "-") else (-1 if c == "-" else 1)
        d = 0 if not m.group(2) else int(m.group(3) or 1)
        coeffs[d] = coeffs.get(d, 0) + c
    return tuple(coeffs.get(d, 0) for d in range(max(coeffs) + 1)) if coeffs else (1,)


def _module_from_args(args) -> tuple:
    """(module, E, name) from --spec/--module or inline --p/--e/--summands."""
    if args.spec:
        doc = load_spec(args.spec)
        if not args.module:
            raise UsageError("--module NAME is required with --spec")
        return doc.module(args.module), doc.eisenstein, args.module
    if args.p is None or args.e is None or args.summands is None:
        raise UsageError("give --spec FILE --module NAME, or --p P --e E --summands TEXT")
    try:
        ring = RingParams(args.p, 1, 1)
        E = EisensteinPoly.default(args.p, args.e)
        M = BKModule(ring, parse_summands(args.summands))
    except ValueError as ex:
        raise UsageError(str(ex)) from None
    return M, E, M.label()


def _n_range(text: str) -> range:
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?:\.\.|-|:)\s*(\d+))?\s*", text)
    if not m:
        raise UsageError(f"bad n range {text!r}; use e.g. 0..3")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if hi < lo:
        raise UsageError("empty n range")
    return range(lo, hi + 1)


# --- commands --------------------------------------------------------------------------------


def _try(fn):
    try:
        return fn(), None
    except BudgetExceeded:
        return None, "skipped(budget)"
    except InfiniteModule:
        return None, "infinite"


def cmd_lengths(args) -> int:
    M, E, name = _module_from_args(args)
    ns = _n_range(args.n_range) if args.n_range else range(0, (args.n_max if args.n_max is not None else 2) + 1)
    columns = ["module", "n", "etor_formula", "etor_oracle", "modE_pinf_formula", "modE_pinf_oracle", "agree"]
    rows = []
    ok = True
    for n in ns:
        ef = e_torsion_length(M, E, n)
        mf = mod_e_length(M, E, n, p_infty_only=True)
        if args.no_oracle:
            eo, mo, note = None, None, "not-run"
        else:
            eo, n1 = _try(lambda: oracle.e_torsion_length(M, E, n, args.budget))
            mo, n2 = _try(lambda: oracle.mod_e_length(M, E, n, p_infty_only=True))
            note = n1 or n2
        agree = note if note else ("yes" if (ef, mf) == (eo, mo) else "NO")
        ok = ok and agree != "NO"
        rows.append({"module": name, "n": n, "etor_formula": ef, "etor_oracle": eo,
                     "modE_pinf_formula": mf, "modE_pinf_oracle": mo, "agree": agree})
    print_table(columns, rows)
    if args.out:
        write_report(args.out, _fmt_for(args.out, args.format), "lengths", columns, rows, {"agree": ok})
    return EXIT_OK if ok else EXIT_FAIL


SWEEP_COLUMNS = ["p", "e", "module", "n_max", "in_window", "values", "cond1", "cond2", "verdict", "note"]


def _sweep_row(r) -> dict:
    return {"p": r.p, "e": r.e, "module": r.module, "n_max": r.n_max, "in_window": r.in_window,
            "values": " ".join(map(str, r.values)), "cond1": r.cond1, "cond2": r.cond2,
            "verdict": r.verdict, "note": r.note}


def _parse_inject(items) -> tuple:
    out = []
    for item in items or ():
        label, _, vals = item.partition(":")
        try:
            out.append((label or "injected", tuple(int(v) for v in vals.split(",") if v.strip())))
        except ValueError:
            raise UsageError(f"bad --inject-profile {item!r}; use LABEL:v0,v1,...") from None
    return tuple(out)


def cmd_sweep_beta(args) -> int:
    base = SweepConfig()
    if args.spec:
        doc = load_spec(args.spec)
        if doc.sweep is None:
            raise UsageError(f"{args.spec} has no sweep section")
        base = doc.sweep
    kw = dict(base.__dict__)
    if args.primes is not None:
        try:
            kw["primes"] = tuple(int(x) for x in args.primes.split(",") if x.strip())
        except ValueError:
            raise UsageError("--primes takes a comma-separated list") from None
        from .ring import is_prime

        if any(not is_prime(p) for p in kw["primes"]):
            raise UsageError("--primes must list primes")
    for k in ("r_max", "max_summands", "n_max"):
        v = getattr(args, k, None)
        if v is not None:
            kw[k] = v
    if args.audit_excluded:
        kw["audit_excluded"] = True
    if args.no_oracle:
        kw["oracle_check"] = False
    kw["budget"] = args.budget
    kw["jobs"] = args.jobs
    kw["inject"] = _parse_inject(args.inject_profile)
    rep = sweep_beta(SweepConfig(**kw))
    rows = [_sweep_row(r) for r in rep.rows]
    shown = rows if args.verbose else [r for r in rows if r["verdict"] not in ("pass",)]
    print_table(SWEEP_COLUMNS, shown)
    summary = {"cells": len(rows), "violations": len(rep.violations), "skipped": len(rep.skipped)}
    print(f"cells {summary['cells']}  violations {summary['violations']}  skipped {summary['skipped']}")
    if args.out:
        fmt = _fmt_for(args.out, args.format)
        write_report(args.out, fmt, "sweep-beta", SWEEP_COLUMNS, rows, summary)
        stem, ext = os.path.splitext(args.out)
        other = "json" if fmt == "csv" else "csv"
        write_report(stem + "." + other if ext else args.out + "." + other, other, "sweep-beta", SWEEP_COLUMNS, rows, summary)
    return rep.exit_code


def cmd_example(args) -> int:
    p = args.p
    from .ring import is_prime

    if not is_prime(p):
        raise UsageError(f"{p} is not prime")
    if args.name == "li-petrov":
        r = example_li_petrov(p)
        columns = ["degree", "l_crys", "l_dR", "e_l_crys", "left", "right", "verdict"]
        rows = [
            {"degree": 2, "l_crys": r.l2_crys, "l_dR": r.l2_dR, "e_l_crys": r.e * r.l2_crys,
             "left": r.degree2.left, "right": r.degree2.right, "verdict": "pass" if r.degree2.passed else "fail"},
            {"degree": 3, "l_crys": r.l3_crys, "l_dR": r.l3_dR, "e_l_crys": r.e * r.l3_crys,
             "left": r.degree3.left, "right": r.degree3.right, "verdict": "pass" if r.degree3.passed else "fail"},
        ]
        print(f"p = {p}, e = p^4 - p^2 = {r.e}")
        ok = r.identities_hold and r.degree2.passed and r.degree3.passed
        summary = {"p": p, "e": r.e, "identities": r.identities_hold}
    elif args.name == "bk-group-scheme":
        r = example_bk_group_scheme(p, args.e, args.n_max)
        consts = derive_constants(p, r.e)
        columns = ["n", "f(n)", "min(e,p^(n+1))"]
        rows = [{"n": n, "f(n)": v, "min(e,p^(n+1))": x} for n, (v, x) in enumerate(zip(r.profile.values, r.expected))]
        print(f"M = S/(p, u), p = {p}, e = {r.e}, a = {consts.a}")
        ok = r.beta.passed and r.profile.values == r.expected
        print(f"beta: cond1 {r.beta.cond1}, cond2 {r.beta.cond2}")
        summary = {"p": p, "e": r.e, "cond1": r.beta.cond1, "cond2": r.beta.cond2}
    elif args.name == "p-torsion":
        a = tuple(int(x) for x in args.a_decomp.split(",")) if args.a_decomp else (1, 1)
        b = tuple(int(x) for x in args.b_decomp.split(",")) if args.b_decomp else (3, 2)
        e = args.e if args.e is not None else 4
        try:
            r = p_torsion_bound_check(a, b, e)
        except CountMismatch as ex:
            print(f"count mismatch: {ex}")
            return EXIT_FAIL
        columns = ["a_decomp", "b_decomp", "e", "l_crys", "l_dR", "left", "right"]
        rows = [{"a_decomp": " ".join(map(str, a)), "b_decomp": " ".join(map(str, b)), "e": e,
                 "l_crys": r.l_crys, "l_dR": r.l_dR, "left": r.left, "right": r.right}]
        print(f"p = {p}")
        ok = r.left is not False and r.right is not False
        summary = {"p": p}
    else:
        raise UsageError(f"unknown example {args.name!r}")
    print_table(columns, rows)
    if args.out:
        write_report(args.out, _fmt_for(args.out, args.format), "example", columns, rows, summary)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ledger(args) -> int:
    if args.spec and args.ledger:
        doc = load_spec(args.spec)
        L = doc.ledger(args.ledger)
        consts = derive_constants(doc.ring.p, doc.eisenstein.degree)
        columns = ["n", "l_crys", "l_dR", "left", "right", "stable"]
        try:
            st = stability_check(L, consts)
        except WindowTooShort as ex:
            raise UsageError(str(ex)) from None
        bad_n = {n for n, _ in st.failures}
        rows = []
        ok = st.passed
        for n, dR in enumerate(L.l_dR):
            crys = L.l_crys[n] if n < len(L.l_crys) else L.l_crys[0]
            iq = main_inequality_check(crys, dR, consts.e)
            ok = ok and iq.passed
            rows.append({"n": n, "l_crys": crys, "l_dR": dR, "left": iq.left, "right": iq.right,
                         "stable": "-" if n < consts.a else ("no" if n in bad_n else "yes")})
        print(f"ledger {args.ledger}: degree {L.degree}, p = {doc.ring.p}, e = {consts.e}, a = {consts.a}")
        print_table(columns, rows)
        for n, why in st.failures:
            print(f"  n = {n}: {why}")
        if args.out:
            write_report(args.out, _fmt_for(args.out, args.format), "ledger", columns, rows, {"pass": ok})
        return EXIT_OK if ok else EXIT_FAIL
    M, E, name = _module_from_args(args)
    if M.summands is None:
        raise UsageError("ledger needs a module in summand form")
    pieces = filtration(M)
    ns = _n_range(args.n_range) if args.n_range else range(0, (args.n_max if args.n_max is not None else 2) + 1)
    columns = ["module", "n", "q_len", "l_dR"]
    rows = []
    for n in ns:
        try:
            v = ledger_l_dR(pieces, args.q_len, E, n, args.q_bound)
        except QExceedsBound as ex:
            print(f"n = {n}: {ex}")
            return EXIT_FAIL
        rows.append({"module": name, "n": n, "q_len": args.q_len, "l_dR": v})
    print_table(columns, rows)
    if args.out:
        write_report(args.out, _fmt_for(args.out, args.format), "ledger", columns, rows, {})
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run

    columns = ["check", "verdict", "seconds", "detail"]
    rows = []
    ok = True
    for r in run(args.level, jobs=args.jobs):
        ok = ok and r.passed
        rows.append({"check": r.name, "verdict": "pass" if r.passed else "fail",
                     "seconds": f"{r.seconds:.1f}", "detail": r.detail})
        print(f"{'pass' if r.passed else 'FAIL'}  {r.name}  ({r.seconds:.1f}s)  {r.detail}", flush=True)
    print("verify:", "all checks passed" if ok else "FAILED")
    if args.out:
        write_report(args.out, _fmt_for(args.out, args.format), "verify", columns, rows, {"pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ------------------------------------------------------------------------------------


def _common(sp, module=False):
    sp.add_argument("--spec", help="JSON spec file (format_version 1)")
    sp.add_argument("--out", help="write a report file")
    sp.add_argument("--format", choices=("csv", "json"), help="report format (default from --out extension, else csv)")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    sp.add_argument("--budget", type=int, default=None, help="oracle enumeration budget (elements)")
    sp.add_argument("--n-max", dest="n_max", type=int, default=None)
    if module:
        sp.add_argument("--module", help="module name inside --spec")
        sp.add_argument("--p", type=int)
        sp.add_argument("--e", type=int)
        sp.add_argument("--summands", help="inline module, e.g. 'PUr(1,2) + FUr(1,1,3)'")
        sp.add_argument("--n-range", dest="n_range", help="twists, e.g. 0..3")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bkctl", description="Lengths of twisted Breuil-Kisin modules and conjecture checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("lengths", help="E-torsion and mod-E lengths, formula against oracle")
    _common(sp, module=True)
    sp.add_argument("--no-oracle", action="store_true")
    sp.set_defaults(func=cmd_lengths)

    sp = sub.add_parser("sweep-beta", help="exhaustive beta-conjecture sweep")
    _common(sp)
    sp.add_argument("--primes", help="comma-separated primes (default 2,3)")
    sp.add_argument("--r-max", dest="r_max", type=int)
    sp.add_argument("--max-summands", dest="max_summands", type=int)
    sp.add_argument("--audit-excluded", action="store_true", help="also report cells outside the window")
    sp.add_argument("--no-oracle", action="store_true")
    sp.add_argument("--inject-profile", action="append", metavar="LABEL:v0,v1,...", help="add a profile row (testing)")
    sp.add_argument("-v", "--verbose", action="store_true", help="print passing rows too")
    sp.set_defaults(func=cmd_sweep_beta)

    sp = sub.add_parser("example", help="worked examples")
    sp.add_argument("name", choices=("li-petrov", "bk-group-scheme", "p-torsion"))
    sp.add_argument("p", type=int)
    _common(sp)
    sp.add_argument("--e", type=int)
    sp.add_argument("--a-decomp", dest="a_decomp")
    sp.add_argument("--b-decomp", dest="b_decomp")
    sp.set_defaults(func=cmd_example)

    sp = sub.add_parser("ledger", help="length ledger checks or de Rham length from pieces")
    _common(sp, module=True)
    sp.add_argument("--ledger", help="ledger name inside --spec")
    sp.add_argument("--q-len", dest="q_len", type=int, default=0)
    sp.add_argument("--q-bound", dest="q_bound", type=int)
    sp.set_defaults(func=cmd_ledger)

    sp = sub.add_parser("verify", help="run the self-check suite")
    sp.add_argument("level", nargs="?", default="fast", choices=("fast", "full"))
    _common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as ex:
        return EXIT_USAGE if ex.code not in (0, None) else EXIT_OK
    if getattr(args, "budget", None) is not None:
        os.environ["BKCTL_BUDGET"] = str(args.budget)
    if getattr(args, "jobs", 1) < 1:
        print("bkctl: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except InsufficientPrecision as ex:
        print(f"bkctl: insufficient precision: {ex}", file=sys.stderr)
        return EXIT_PRECISION
    except (UsageError, SpecError, UnsupportedSummand, HypothesisUnmet, ValueError) as ex:
        print(f"bkctl: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except BKError as ex:
        print(f"bkctl: {type(ex).__name__}: {ex}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
