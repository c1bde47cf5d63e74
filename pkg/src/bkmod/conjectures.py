"""Conjecture harness: constants a and e~, beta profiles, the main inequality,
length ledgers, and exhaustive sweeps over small cyclic modules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional, Sequence

from .errors import BudgetExceeded, CountMismatch, QExceedsBound, WindowTooShort
from .lengths import e_torsion_length, length_contributions
from .modules import BKModule, FiltrationPieces, FUr, PUr
from .ring import EisensteinPoly


@dataclass(frozen=True)
class DerivedConstants:
    p: int
    e: int
    a: int
    e_tilde: int


def derive_constants(p: int, e: int) -> DerivedConstants:
    """a = least n >= 0 with p^n (p-1) >= e, and e~ = ceil(e/(p-1)), by integer search."""
    if e < 1:
        raise ValueError("e must be positive")
    a = 0
    while p ** a * (p - 1) < e:
        a += 1
    return DerivedConstants(p, e, a, -(-e // (p - 1)))


@dataclass(frozen=True)
class BetaProfile:
    source: str  # "u_infty" or "mbar"
    values: tuple  # f(0), f(1), ...

    def __post_init__(self):
        if any(int(v) != v or v < 0 for v in self.values):
            raise ValueError("profile values must be non-negative integers")


def beta_profile(M: BKModule, E: EisensteinPoly, n_max: int, source: str = "u_infty") -> BetaProfile:
    """f(n) = length of M^(n+1)[E] for n = 0..n_max."""
    return BetaProfile(source, tuple(e_torsion_length(M, E, n + 1) for n in range(n_max + 1)))


@dataclass(frozen=True)
class BetaReport:
    cond1: bool
    cond2: bool
    violations: tuple  # n with f(n) > f(n+1); "a" when cond1 fails

    @property
    def passed(self) -> bool:
        return self.cond1 and self.cond2


def beta_check(profile: BetaProfile, consts: DerivedConstants) -> BetaReport:
    f = profile.values
    if len(f) <= consts.a:
        raise WindowTooShort(f"profile covers n <= {len(f) - 1} but a = {consts.a}")
    cond1 = f[consts.a] <= consts.e * f[0]
    drops = tuple(n for n in range(len(f) - 1) if f[n] > f[n + 1])
    return BetaReport(cond1, not drops, drops + (() if cond1 else ("a",)))


@dataclass(frozen=True)
class InequalityReport:
    left: bool
    right: bool
    left_slack: int  # l_dR - l_crys
    right_slack: int  # e l_crys - l_dR

    @property
    def passed(self) -> bool:
        return self.left and self.right


def main_inequality_check(l_crys: int, l_dR: int, e: int) -> InequalityReport:
    if l_crys < 0 or l_dR < 0:
        raise ValueError("lengths are non-negative")
    return InequalityReport(l_crys <= l_dR, l_dR <= e * l_crys, l_dR - l_crys, e * l_crys - l_dR)


@dataclass(frozen=True)
class LengthLedger:
    degree: int
    l_crys: tuple
    l_dR: tuple
    q_lengths: tuple = ()
    a_decomp: Optional[tuple] = None  # crystalline torsion exponents
    b_decomp: Optional[tuple] = None  # de Rham torsion exponents

    def __post_init__(self):
        if len(set(self.l_crys)) > 1:
            raise ValueError("crystalline lengths do not depend on the twist")
        if self.a_decomp is not None and self.b_decomp is not None:
            if len(self.a_decomp) != len(self.b_decomp):
                raise CountMismatch("crystalline and de Rham decompositions have different numbers of factors")
            if self.l_crys and sum(self.a_decomp) != self.l_crys[0]:
                raise ValueError("crystalline exponents do not sum to l_crys")
            if self.l_dR and sum(self.b_decomp) != self.l_dR[0]:
                raise ValueError("de Rham exponents do not sum to l_dR")


def ledger_l_dR(pieces: FiltrationPieces, q_len: int, E: EisensteinPoly, n: int,
                q_bound: Optional[int] = None) -> int:
    """l_dR at twist n: (M^(n+1)/E)[p^infty] plus the Q-length."""
    if q_len < 0:
        raise ValueError("q_len must be non-negative")
    if q_bound is not None and q_len > q_bound:
        raise QExceedsBound(f"Q-length {q_len} exceeds the E-torsion bound {q_bound}")
    return length_contributions(pieces, E, n + 1).total + q_len


def assemble_ledger(degree: int, pieces: FiltrationPieces, next_module: Optional[BKModule],
                    E: EisensteinPoly, n_max: int) -> LengthLedger:
    """Ledger whose Q-lengths are the full E-torsion of the next module, l_crys read off at n = a."""
    consts = derive_constants(pieces.u_infty.p, E.degree)
    q = [e_torsion_length(next_module, E, n + 1) if next_module is not None else 0 for n in range(n_max + 1)]
    dR = tuple(ledger_l_dR(pieces, q[n], E, n, q_bound=q[n]) for n in range(n_max + 1))
    if n_max < consts.a:
        raise WindowTooShort(f"n_max = {n_max} < a = {consts.a}")
    crys = dR[consts.a] // E.degree
    return LengthLedger(degree, (crys,) * (n_max + 1), dR, tuple(q))


@dataclass(frozen=True)
class StabilityReport:
    passed: bool
    failures: tuple  # (n, reason)


def stability_check(ledger: LengthLedger, consts: DerivedConstants) -> StabilityReport:
    """l_dR^(n) = e l_crys and constant for every n >= a."""
    if len(ledger.l_dR) <= consts.a:
        raise WindowTooShort(f"ledger covers n <= {len(ledger.l_dR) - 1} but a = {consts.a}")
    crys = ledger.l_crys[0] if ledger.l_crys else 0
    bad = []
    for n in range(consts.a, len(ledger.l_dR)):
        if ledger.l_dR[n] != consts.e * crys:
            bad.append((n, f"l_dR = {ledger.l_dR[n]} != e * l_crys = {consts.e * crys}"))
        if n > consts.a and ledger.l_dR[n] != ledger.l_dR[n - 1]:
            bad.append((n, "l_dR changes"))
    return StabilityReport(not bad, tuple(bad))


# --- sweeps -----------------------------------------------------------------------------------


def module_alpha(summands) -> int:
    """alpha(M) for sums of PUr(1, r) and FUr(alpha, x, r): Ann + (p) = (p, u^max)."""
    out = 0
    for s in summands:
        out = max(out, s.r if s.kind == "PUr" else min(s.alpha, s.r))
    return out


@dataclass(frozen=True)
class SweepConfig:
    primes: tuple = (2, 3)
    r_max: int = 4
    max_summands: int = 3
    extra_units: bool = True  # also try x = 1 + u
    n_max: Optional[int] = None  # default a + 2
    oracle_check: bool = True
    oracle_cell_limit: int = 2  # cross-check cells with at most this many summands
    audit_excluded: bool = False
    budget: Optional[int] = None  # when set, a hard cap on oracle enumeration per cell
    jobs: int = 1
    inject: tuple = ()  # (label, values) pairs appended as extra profiles


@dataclass(frozen=True)
class Cell:
    p: int
    e: int
    summands: tuple
    n_max: int
    in_window: bool

    @property
    def label(self) -> str:
        return BKModule.of(self.p, *self.summands).label()


def sweep_cells(config: SweepConfig) -> list:
    cells = []
    for p in config.primes:
        for e in range(1, p * (p - 1)):
            consts = derive_constants(p, e)
            n_max = consts.a + 2 if config.n_max is None else config.n_max
            top = e // (p - 1)
            shapes = []
            for k in range(1, config.max_summands + 1):
                for rs in itertools.combinations_with_replacement(range(1, config.r_max + 1), k):
                    shapes.append(tuple(PUr(1, r) for r in rs))
                    for alpha in range(1, max(top, 1) + 1):
                        units = [(x,) for x in range(1, p)] + ([(1, 1)] if config.extra_units else [])
                        for x in units:
                            shapes.append(tuple(FUr(alpha, x, r) for r in rs))
            for ss in shapes:
                al = module_alpha(ss)
                ok = 1 <= al <= top and p * al != e
                if ok or config.audit_excluded:
                    cells.append(Cell(p, e, ss, n_max, ok))
    return cells


@dataclass(frozen=True)
class SweepRow:
    p: int
    e: int
    module: str
    n_max: int
    in_window: bool
    values: tuple
    cond1: Optional[bool]
    cond2: Optional[bool]
    verdict: str  # pass, fail, skipped(budget), inconclusive, excluded
    note: str = ""


def _run_cell(args) -> SweepRow:
    cell, oracle_check, limit, budget = args
    from . import oracle

    p, e = cell.p, cell.e
    E = EisensteinPoly.default(p, e)
    M = BKModule.of(p, *cell.summands)
    consts = derive_constants(p, e)
    note = ""
    try:
        prof = beta_profile(M, E, cell.n_max)
        if oracle_check and len(cell.summands) <= limit:
            ora = tuple(oracle.e_torsion_length(M, E, n + 1, budget, strict=budget is not None)
                        for n in range(cell.n_max + 1))
            if ora != prof.values:
                return SweepRow(p, e, cell.label, cell.n_max, cell.in_window, prof.values, None, None, "fail",
                                f"oracle disagrees: {ora}")
            note = "oracle-checked"
    except BudgetExceeded as ex:
        return SweepRow(p, e, cell.label, cell.n_max, cell.in_window, (), None, None, "skipped(budget)", str(ex))
    rep = beta_check(prof, consts)
    if rep.passed:
        verdict = "pass"
    else:
        verdict = "fail" if cell.in_window else "excluded"
    return SweepRow(p, e, cell.label, cell.n_max, cell.in_window, prof.values, rep.cond1, rep.cond2, verdict, note)


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r.verdict == "fail"]

    @property
    def skipped(self) -> list:
        return [r for r in self.rows if r.verdict.startswith("skipped")]

    @property
    def exit_code(self) -> int:
        return 1 if self.violations else 0


def sweep_beta(config: SweepConfig = SweepConfig()) -> SweepReport:
    cells = sweep_cells(config)
    args = [(c, config.oracle_check, config.oracle_cell_limit, config.budget) for c in cells]
    if config.jobs > 1 and len(args) > 1:
        with Pool(config.jobs) as pool:
            rows = pool.map(_run_cell, args, chunksize=max(1, len(args) // (4 * config.jobs)))
    else:
        rows = [_run_cell(a) for a in args]
    for label, values in config.inject:
        p = config.primes[0] if config.primes else 2
        e = 1
        consts = derive_constants(p, e)
        rep = beta_check(BetaProfile("u_infty", tuple(values)), consts)
        rows.append(SweepRow(p, e, label, len(values) - 1, True, tuple(values), rep.cond1, rep.cond2,
                             "pass" if rep.passed else "fail", "injected"))
    rows.sort(key=lambda r: (r.p, r.e, r.module))
    return SweepReport(rows)


# --- worked examples -----------------------------------------------------------------------


@dataclass(frozen=True)
class LiPetrovReport:
    p: int
    e: int
    l2_crys: int
    l3_crys: int
    l2_dR: int
    l3_dR: int
    degree2: InequalityReport
    degree3: InequalityReport

    @property
    def identities_hold(self) -> bool:
        p, e = self.p, self.e
        return (self.l2_dR == 2 * e == e * self.l2_crys
                and 1 == self.l3_crys < self.l3_dR == p ** 3 - p ** 2 < e * self.l3_crys == p ** 4 - p ** 2)


def example_li_petrov(p: int) -> LiPetrovReport:
    """e = p^4 - p^2; de Rham torsion O_K/pi^(2e-p^3+p^2) + O_K/pi^(p^3-p^2) in degree 2."""
    e = p ** 4 - p ** 2
    l2_dR = (2 * e - p ** 3 + p ** 2) + (p ** 3 - p ** 2)
    l3_dR = p ** 3 - p ** 2
    return LiPetrovReport(p, e, 2, 1, l2_dR, l3_dR, main_inequality_check(2, l2_dR, e), main_inequality_check(1, l3_dR, e))


@dataclass(frozen=True)
class BKGroupSchemeReport:
    p: int
    e: int
    profile: BetaProfile
    beta: BetaReport
    expected: tuple


def example_bk_group_scheme(p: int, e: Optional[int] = None, n_max: Optional[int] = None) -> BKGroupSchemeReport:
    """M = S/(p, u) = k: f(n) = min(e, p^(n+1))."""
    e = p + 1 if e is None else e
    consts = derive_constants(p, e)
    n_max = consts.a + 2 if n_max is None else n_max
    M = BKModule.of(p, PUr(1, 1))
    prof = beta_profile(M, EisensteinPoly.default(p, e), n_max)
    expected = tuple(min(e, p ** (n + 1)) for n in range(n_max + 1))
    return BKGroupSchemeReport(p, e, prof, beta_check(prof, consts), expected)


@dataclass(frozen=True)
class PTorsionBoundReport:
    l_crys: int
    l_dR: int
    left: Optional[bool]  # None when the a_i = 1 hypothesis is absent
    right: Optional[bool]  # None when some b_j > e


def p_torsion_bound_check(a_decomp: Sequence[int], b_decomp: Sequence[int], e: int) -> PTorsionBoundReport:
    if len(a_decomp) != len(b_decomp):
        raise CountMismatch(f"{len(a_decomp)} crystalline factors but {len(b_decomp)} de Rham factors")
    if any(b < 1 for b in b_decomp):
        raise ValueError("de Rham exponents are at least 1")
    crys, dR = sum(a_decomp), sum(b_decomp)
    right = dR <= e * crys if all(b <= e for b in b_decomp) else None
    left = crys <= dR if all(a == 1 for a in a_decomp) else None
    return PTorsionBoundReport(crys, dR, left, right)
