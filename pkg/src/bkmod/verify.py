"""Self-check suites behind `bkctl verify`: closed forms against the oracle,
ring identities, filtration bookkeeping, quasi-filtered validation, sweeps."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from . import oracle
from .conjectures import (SweepConfig, derive_constants, example_li_petrov, sweep_beta)
from .lengths import (len_u_torsion_sum, length_contributions,
                      paper_case_table, upsilon_n_E, fur_e_valuation, in_valuation_window)
from .modules import (BKModule, FiltrationPieces, FUr, Free, Ppow, Presentation, PUr, assemble)
from .quasi_filtered import CONDITIONS, alpha_bound_sweep, identity_example, mutant, validate
from .ring import EisensteinPoly, RingParams, TruncatedSeries, frobenius


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


# --- grids shared with the test suite ----------------------------------------------------


def formula_oracle_grid(primes=(2, 3, 5), e_range=range(1, 9), r_range=range(1, 7), n_range=range(0, 4),
                        budget: Optional[int] = None) -> tuple:
    """Compare len_u_torsion_sum with oracle E-torsion on single PUr(1, r) and FUr(alpha, 1, r).

    Returns (cells checked, mismatches).
    """
    bad = []
    count = 0
    for p in primes:
        for e in e_range:
            E = EisensteinPoly.default(p, e)
            top = -(-e // (p - 1))
            for r in r_range:
                for s in [PUr(1, r)] + [FUr(a, (1,), r) for a in range(1, top + 1)]:
                    M = BKModule.of(p, s)
                    for n in n_range:
                        f = len_u_torsion_sum([s], p, E, n)
                        o = oracle.e_torsion_length(M, E, n, budget)
                        count += 1
                        if f != o:
                            bad.append((p, e, s.label(), n, f, o))
    return count, bad


def lemma_identity_grid(primes=(2, 3, 5), e_range=range(1, 9), r_range=range(1, 7), n_range=range(0, 4)) -> tuple:
    """Oracle-only identities:

    * M^(n)[E] = M[u^inf]^(n)[E] for M = u^inf part + Ppow(1) + Free;
    * M[u^inf]^(n)[E] and M[u^inf]^(n)/E have equal length;
    * the p-power torsion of M^(n)/E splits as the three-term sum.
    """
    bad = []
    count = 0
    for p in primes:
        for e in e_range:
            E = EisensteinPoly.default(p, e)
            top = -(-e // (p - 1))
            for r in r_range:
                for s in [PUr(1, r)] + [FUr(a, (1,), r) for a in range(1, top + 1)]:
                    U = BKModule.of(p, s)
                    big = BKModule.of(p, s, Ppow(1), Free())
                    pieces = FiltrationPieces.build(p, u_infty=[s], tor_u_tf=[Ppow(1)], free_rank=1)
                    for n in n_range:
                        count += 1
                        et_u = oracle.e_torsion_length(U, E, n)
                        et_big = oracle.e_torsion_length(big, E, n)
                        me_u = oracle.mod_e_length(U, E, n)
                        tot = oracle.mod_e_length(assemble(pieces), E, n, p_infty_only=True)
                        three = length_contributions(pieces, E, n).total
                        if not (et_u == et_big == me_u and tot == three):
                            bad.append((p, e, s.label(), n, et_u, et_big, me_u, tot, three))
    return count, bad


def tor_u_tf_presentations(p: int) -> list:
    """p-power torsion, u-torsion-free presentations: S/p^2 and a non-split extension of S/p by S/p."""
    P = RingParams(p, 3, 2)
    return [
        (Presentation(P, 1, (((p * p,),),), False), 2),
        (Presentation(P, 2, (((p,), (0,)), ((0, -1), (p,))), False), 2),
    ]


def tor_u_tf_grid(primes=(2, 3, 5), e_range=range(1, 7), n_range=range(0, 4)) -> list:
    """Length of (M^(n)/E)[p^inf] for u-torsion-free p-power torsion M must not depend on n."""
    bad = []
    for p in primes:
        for e in e_range:
            E = EisensteinPoly.default(p, e)
            for pres, rank in tor_u_tf_presentations(p):
                M = BKModule.from_presentation(pres)
                vals = [oracle.mod_e_length(M, E, n, p_infty_only=True) for n in n_range]
                if len(set(vals)) != 1 or vals[0] != e * rank:
                    bad.append((p, e, pres.ngens, vals))
    return bad


def mbar_grid(primes=(2, 3, 5), e_range=range(1, 7), n_range=range(0, 3)) -> list:
    """The ideal (p, u) = S^2/(u e1 - p e2): free of rank 1 with Mbar = k.

    Its twisted reduction modulo E has p-power torsion of length min(e, p^n),
    the Mbar term of the three-term formula.
    """
    bad = []
    for p in primes:
        pres = Presentation(RingParams(p, 2, 2), 2, (((0, 1), (-p,)),), False)
        M = BKModule.from_presentation(pres)
        for e in e_range:
            E = EisensteinPoly.default(p, e)
            pieces = FiltrationPieces.build(p, free_rank=1, mbar=[PUr(1, 1)])
            for n in n_range:
                o = oracle.mod_e_length(M, E, n, p_infty_only=True)
                f = length_contributions(pieces, E, n).total
                if o != f:
                    bad.append((p, e, n, o, f))
    return bad


def valuation_window_grid(primes=(2, 3, 5, 7), n_range=range(0, 4)) -> tuple:
    """upsilon_n fast path against the three-case table and honest dvr_valuation.

    Cells: 1 <= alpha <= floor(e/(p-1)) < p, alpha < e and e != p alpha.
    """
    bad = []
    count = 0
    for p in primes:
        for e in range(1, p * (p - 1)):
            top = e // (p - 1)
            for alpha in range(1, top + 1):
                if not in_valuation_window(p, e, alpha) or alpha >= e or e == p * alpha:
                    continue
                E = EisensteinPoly.default(p, e)
                for n in n_range:
                    fast = upsilon_n_E(p, e, alpha, n)
                    truth = fur_e_valuation(E, p ** n * alpha, (1,))
                    table = paper_case_table(p, e, alpha, n)
                    count += 1
                    if not (fast == truth == table):
                        bad.append((p, e, alpha, n, fast, truth, table))
    return count, bad


def random_series(rng: random.Random, P: RingParams) -> TruncatedSeries:
    return TruncatedSeries.from_coeffs(P, [rng.randrange(P.modulus) for _ in range(P.u_prec)])


def random_eisenstein(rng: random.Random, p: int, e: int) -> EisensteinPoly:
    c0 = p * rng.choice([x for x in range(1, p * p) if x % p])
    return EisensteinPoly(p, (c0,) + tuple(p * rng.randrange(-p, p + 1) for _ in range(e - 1)))


def ring_identity_failures(cells=((2, 3, 8), (3, 2, 9), (5, 2, 6)), pairs: int = 1000, polys: int = 50,
                           seed: int = 0) -> list:
    """Frobenius is a ring map; phi(E) = E^p mod p; E = u^e mod p."""
    rng = random.Random(seed)
    bad = []
    for p, m, M in cells:
        P = RingParams(p, m, M)
        for _ in range(pairs):
            x, y = random_series(rng, P), random_series(rng, P)
            if frobenius(x + y, 1) != frobenius(x, 1) + frobenius(y, 1) or frobenius(x * y, 1) != frobenius(x, 1) * frobenius(y, 1):
                bad.append(("hom", p, m, M, x, y))
        for _ in range(polys):
            e = rng.randint(1, max(1, (M - 1) // p))
            E = random_eisenstein(rng, p, e)
            Q = RingParams(p, m, p * e + 1)
            Es = E.as_series(Q)
            lhs, rhs = frobenius(Es, 1), Es ** p
            if any((a - b) % p for a, b in zip(lhs.coeffs, rhs.coeffs)):
                bad.append(("phiE", p, m, E))
            if any(c % p for c in (Es - TruncatedSeries.monomial(Q, 1, e)).coeffs):
                bad.append(("Emodp", p, m, E))
    return bad


def constants_failures(p_max: int = 13, e_max: int = 200) -> list:
    from .ring import is_prime

    bad = []
    for p in [q for q in range(2, p_max + 1) if is_prime(q)]:
        for e in range(1, e_max + 1):
            c = derive_constants(p, e)
            ok = p ** c.a * (p - 1) >= e and (c.a == 0 or p ** (c.a - 1) * (p - 1) < e)
            ok = ok and ((c.a == 0) == (e <= p - 1))
            ok = ok and c.e_tilde * (p - 1) >= e > (c.e_tilde - 1) * (p - 1)
            if not ok:
                bad.append((p, e, c))
    return bad


def quasi_filtered_failures(primes=(2, 3, 5), e_max: int = 8) -> list:
    bad = []
    for p in primes:
        q = identity_example(p, 2)
        if not validate(q).valid:
            bad.append(("identity", p))
        for c in CONDITIONS:
            rep = validate(mutant(q, c))
            if c not in rep.violations:
                bad.append(("mutant", p, c, rep.violations))
    for row in alpha_bound_sweep(primes, e_max):
        if not row.passed:
            bad.append(("alpha", row))
    return bad


def li_petrov_failures(primes=(2, 3, 5, 7, 11, 13)) -> list:
    bad = []
    for p in primes:
        rep = example_li_petrov(p)
        if not (rep.identities_hold and rep.degree2.passed and rep.degree3.passed and rep.degree2.right_slack == 0):
            bad.append(rep)
    return bad


# --- suites --------------------------------------------------------------------------------


def _timed(name: str, fn: Callable[[], object]) -> CheckResult:
    t = time.time()
    out = fn()
    if isinstance(out, tuple):
        count, bad = out
        detail = f"{count} cells, {len(bad)} mismatches" + (f"; first {bad[0]}" if bad else "")
    else:
        bad = out
        detail = f"{len(bad)} failures" + (f"; first {bad[0]}" if bad else "")
    return CheckResult(name, not bad, detail, time.time() - t)


def _sweep(config: SweepConfig):
    rep = sweep_beta(config)
    return len(rep.rows), [r for r in rep.rows if r.verdict == "fail"]


def suite(level: str = "fast", jobs: int = 1) -> list:
    """Named checks for the given level."""
    if level not in ("fast", "full"):
        raise ValueError("level is fast or full")
    full = level == "full"
    grid = dict(primes=(2, 3, 5), e_range=range(1, 9 if full else 5), r_range=range(1, 7 if full else 4),
                n_range=range(0, 4 if full else 3))
    checks = [
        ("formula-vs-oracle", lambda: formula_oracle_grid(**grid)),
        ("lemma-identities", lambda: lemma_identity_grid(**grid)),
        ("tor-u-tf-constant", lambda: tor_u_tf_grid(e_range=range(1, 7 if full else 4))),
        ("mbar-term", lambda: mbar_grid(e_range=range(1, 7 if full else 4))),
        ("valuation-table", lambda: valuation_window_grid(primes=(2, 3, 5, 7) if full else (2, 3, 5))),
        ("ring-identities", lambda: ring_identity_failures(pairs=1000 if full else 100, polys=50 if full else 10)),
        ("constants", lambda: constants_failures(13, 200)),
        ("quasi-filtered", lambda: quasi_filtered_failures(e_max=8 if full else 5)),
        ("li-petrov", li_petrov_failures),
        ("sweep-beta", lambda: _sweep(SweepConfig(jobs=jobs) if full else
                                      SweepConfig(r_max=3, max_summands=2, extra_units=False, jobs=jobs))),
    ]
    return checks


def run(level: str = "fast", jobs: int = 1, only: Optional[Iterable[str]] = None) -> list:
    results = []
    for name, fn in suite(level, jobs):
        if only is not None and name not in only:
            continue
        results.append(_timed(name, fn))
    return results
