"""Quasi-filtered Breuil-Kisin data (M, N, f, g, h, h') and annihilator checks.

Maps are matrices of integer polynomials against the generator lists of the
two presentations, in the row convention: row i is the image of generator i.
Composites and relations are evaluated inside one working ring
S/(p^K, u^L) large enough to hold every module involved.  For truncated
(finite) presentations this is exact; untruncated presentations are only
seen through that truncation, and reports say so.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, HypothesisUnmet, SearchInconclusive
from .linalg import matmul_mod
from .modules import Presentation, to_presentation
from .oracle import (DIM_CAP, EnumeratedModule, _image_length, _poly_of, annihilates,
                     annihilator_generators, annihilator_shape, relation_rows, scalar_ambient)
from .ring import EisensteinPoly, RingParams, TruncatedSeries

CONDITIONS = ("gf", "fg", "h'h", "hh'", "h_injective")


# --- integer polynomial matrices ------------------------------------------------


def poly_add(a, b) -> tuple:
    n = max(len(a), len(b))
    return tuple((a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n))


def poly_mul(a, b) -> tuple:
    if not a or not b:
        return (0,)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tuple(out)


def poly_pow(a, k: int) -> tuple:
    out = (1,)
    for _ in range(k):
        out = poly_mul(out, a)
    return out


def as_poly_matrix(F) -> tuple:
    return tuple(tuple(_poly_of(x) for x in row) for row in F)


def mat_mul(A, B, inner: int) -> tuple:
    """Row-convention product: first A, then B."""
    rows = len(A)
    cols = len(B[0]) if B else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = (0,)
            for k in range(inner):
                acc = poly_add(acc, poly_mul(A[i][k], B[k][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def scalar_matrix(s, g: int) -> tuple:
    s = _poly_of(s)
    return tuple(tuple(s if i == j else (0,) for j in range(g)) for i in range(g))


def mat_add(A, B) -> tuple:
    return tuple(tuple(poly_add(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(A, B))


# --- presentations inside a common working ring -------------------------------------


def _pres(M) -> Presentation:
    if isinstance(M, Presentation):
        return M
    return M.presentation if M.presentation is not None else to_presentation(M)


def embed(pres: Presentation, K: int, L: int) -> Presentation:
    """A truncated presentation rewritten over S/(p^K, u^L), K >= m and L >= M."""
    if not pres.truncated:
        raise ValueError("only truncated presentations can be embedded exactly")
    m, M = pres.params.p_prec, pres.params.u_prec
    if K < m or L < M:
        raise ValueError("embedding must enlarge the ring")
    P = RingParams(pres.p, K, L)
    g = pres.ngens
    rows = [tuple(TruncatedSeries.from_coeffs(P, x) for x in row) for row in pres.integer_relations()]
    for i in range(g):
        for extra in ([pres.p ** m] if m < K else []) + ([(0,) * M + (1,)] if M < L else []):
            rows.append(tuple(TruncatedSeries.from_coeffs(P, _poly_of(extra) if j == i else (0,)) for j in range(g)))
    return Presentation(P, g, tuple(rows), True)


def _working_module(pres: Presentation, K: int, L: int) -> EnumeratedModule:
    g = pres.ngens
    if g * L > 4 * DIM_CAP:
        raise BudgetExceeded(f"{g * L} ambient coordinates exceed the reduction cap")
    rels = [list(r) for r in pres.integer_relations()]
    if pres.truncated:
        m, M = pres.params.p_prec, pres.params.u_prec
        for i in range(g):
            if m < K:
                rels.append([(pres.p ** m,) if j == i else (0,) for j in range(g)])
            if M < L:
                rels.append([(0,) * M + (1,) if j == i else (0,) for j in range(g)])
    rows = relation_rows(rels, g, L, pres.p ** K)
    return EnumeratedModule(pres.p, K, g, L, rows)


def map_ambient(F, gA: int, gB: int, L: int, mod: int) -> np.ndarray:
    out = np.zeros((gA * L, gB * L), dtype=object)
    for i in range(gA):
        for b in range(gB):
            poly = F[i][b]
            for j in range(L):
                for k, c in enumerate(poly):
                    if c and j + k < L:
                        out[i * L + j, b * L + j + k] = (out[i * L + j, b * L + j + k] + c) % mod
    return out


# --- the datum ---------------------------------------------------------------------------


@dataclass
class QuasiFilteredBK:
    height: int
    M: object  # BKModule or Presentation
    N: object
    f: tuple  # M^(1) -> N
    g: tuple  # N -> M^(1)
    h: tuple  # N -> M
    h_prime: tuple  # M -> N
    E: EisensteinPoly
    label: str = ""

    def __post_init__(self):
        if self.height < 1:
            raise ValueError("height must be at least 1")
        self.f, self.g, self.h, self.h_prime = (as_poly_matrix(x) for x in (self.f, self.g, self.h, self.h_prime))
        gm, gn = self.pres_M.ngens, self.pres_N.ngens
        for name, F, rows, cols in (("f", self.f, gm, gn), ("g", self.g, gn, gm), ("h", self.h, gn, gm), ("h_prime", self.h_prime, gm, gn)):
            if len(F) != rows or any(len(r) != cols for r in F):
                raise ValueError(f"map {name} should be {rows}x{cols}")

    @property
    def p(self) -> int:
        return self.pres_M.p

    @property
    def pres_M(self) -> Presentation:
        return _pres(self.M)

    @property
    def pres_N(self) -> Presentation:
        return _pres(self.N)

    @property
    def pres_M1(self) -> Presentation:
        return self.pres_M.twist(1)

    @property
    def is_finite(self) -> bool:
        return self.pres_M.truncated and self.pres_N.truncated

    def working_precision(self) -> tuple:
        press = (self.pres_M, self.pres_M1, self.pres_N)
        K = max(P.params.p_prec for P in press)
        degs = [len(x) for F in (self.f, self.g, self.h, self.h_prime) for row in F for x in row]
        degs += [len(x) for P in press for row in P.integer_relations() for x in row]
        L = max([P.params.u_prec for P in press if P.truncated] + [0])
        if not self.is_finite:
            L = max(L, 2 * max(degs + [1]) + self.E.degree * self.height + 2)
        return K, L


@dataclass
class ValidationReport:
    valid: bool
    violations: list
    checks: dict
    precision: tuple
    exact: bool

    def __str__(self) -> str:
        if self.valid:
            return f"valid (precision {self.precision}, exact={self.exact})"
        return "invalid: " + ", ".join(self.violations)


class _Workspace:
    def __init__(self, qf: QuasiFilteredBK):
        self.qf = qf
        K, L = qf.working_precision()
        self.K, self.L, self.mod = K, L, qf.p ** K
        self.mods = {
            "M": _working_module(qf.pres_M, K, L),
            "M1": _working_module(qf.pres_M1, K, L),
            "N": _working_module(qf.pres_N, K, L),
        }
        self.maps = {"f": ("M1", "N", qf.f), "g": ("N", "M1", qf.g), "h": ("N", "M", qf.h), "h_prime": ("M", "N", qf.h_prime)}

    def amb(self, name):
        src, tgt, F = self.maps[name]
        return map_ambient(F, self.mods[src].g, self.mods[tgt].g, self.L, self.mod)

    def well_defined(self, name) -> bool:
        src, tgt, _ = self.maps[name]
        A, B = self.mods[src], self.mods[tgt]
        if len(A.relations) == 0 or B.group.ngens == 0:
            return True
        img = matmul_mod(np.asarray(A.relations, dtype=object), self.amb(name), self.mod)
        return not B.group.coords(img).any()

    def composite_is(self, first, second, scalar) -> bool:
        src, _, _ = self.maps[first]
        _, tgt, _ = self.maps[second]
        A, B = self.mods[src], self.mods[tgt]
        if B.group.ngens == 0 or A.g == 0:
            return True
        comp = matmul_mod(self.amb(first), self.amb(second), self.mod)
        diff = (comp - scalar_ambient(scalar, A.g, self.L, self.mod)) % self.mod
        gen_rows = diff[[i * self.L for i in range(A.g)]]
        return not B.group.coords(gen_rows).any()

    def h_injective(self) -> bool:
        N, M = self.mods["N"], self.mods["M"]
        if N.group.ngens == 0:
            return True
        A = N.group.hom_matrix(self.amb("h"), M.group)
        ker = N.group.kernel(A, M.group)
        if self.qf.is_finite:
            return N.group.subgroup_length(ker) == 0 if len(ker) else True
        # untruncated N: only the part of the kernel that survives truncation from 2L to L counts
        big = _Workspace.__new__(_Workspace)
        big.qf, big.K, big.L, big.mod = self.qf, self.K, 2 * self.L, self.mod
        big.mods = {k: _working_module(getattr(self.qf, "pres_" + k), self.K, 2 * self.L) for k in ("M", "N")}
        big.maps = self.maps
        Nb, Mb = big.mods["N"], big.mods["M"]
        kb = Nb.group.kernel(Nb.group.hom_matrix(big.amb("h"), Mb.group), Mb.group)
        return _image_length(Nb, kb, N) == 0


def validate(qf: QuasiFilteredBK) -> ValidationReport:
    ws = _Workspace(qf)
    E = qf.E.integer_coeffs()
    Ei = poly_pow(E, qf.height - 1)
    checks = {}
    for name in ("f", "g", "h", "h_prime"):
        checks["well_defined:" + name] = ws.well_defined(name)
    checks["gf"] = ws.composite_is("f", "g", Ei)
    checks["fg"] = ws.composite_is("g", "f", Ei)
    checks["h'h"] = ws.composite_is("h", "h_prime", E)
    checks["hh'"] = ws.composite_is("h_prime", "h", E)
    checks["h_injective"] = ws.h_injective()
    violations = [k for k, v in checks.items() if not v]
    return ValidationReport(not violations, violations, checks, (ws.K, ws.L), qf.is_finite)


def derived_frobenius(qf: QuasiFilteredBK) -> tuple:
    """(phi, psi) = (h o f, g o h') as polynomial matrices M^(1) -> M and M -> M^(1)."""
    gn = qf.pres_N.ngens
    return mat_mul(qf.f, qf.h, gn), mat_mul(qf.h_prime, qf.g, gn)


def frobenius_relations(qf: QuasiFilteredBK) -> dict:
    """Check psi o phi = E^i on M^(1) and phi o psi = E^i on M."""
    phi, psi = derived_frobenius(qf)
    ws = _Workspace(qf)
    ws.maps["phi"] = ("M1", "M", phi)
    ws.maps["psi"] = ("M", "M1", psi)
    Ei = poly_pow(qf.E.integer_coeffs(), qf.height)
    return {"psi_phi": ws.composite_is("phi", "psi", Ei), "phi_psi": ws.composite_is("psi", "phi", Ei)}


# --- annihilator statements --------------------------------------------------------------


def alpha_bound(e: int, i: int, p: int) -> int:
    return e * (i - 1) // (p - 1)


def _finite_module(M) -> EnumeratedModule:
    pres = _pres(M)
    if not pres.truncated:
        raise HypothesisUnmet("u-power torsion module must be given by a truncated presentation")
    return _working_module(pres, pres.params.p_prec, pres.params.u_prec)


@dataclass(frozen=True)
class AlphaBoundReport:
    alpha: int
    bound: int
    passed: bool
    ann_twist_ok: bool
    precision: tuple


def alpha_report(M, i: int, E: EisensteinPoly) -> AlphaBoundReport:
    """alpha(M) against floor(e(i-1)/(p-1)), plus E^(i-1) Ann(M) inside Ann(M^(1))."""
    pres = _pres(M)
    Mod = _finite_module(pres)
    shape = annihilator_shape(Mod)
    alpha = shape.alpha or 0
    bound = alpha_bound(E.degree, i, pres.p)
    M1 = _finite_module(pres.twist(1))
    Ei = poly_pow(E.integer_coeffs(), i - 1)
    gens = [tuple(int(c) for c in row) for row in annihilator_generators(Mod)] if Mod.length else [(1,)]
    gens += [(pres.p ** Mod.m,), (0,) * Mod.R + (1,)]
    ok = all(annihilates(M1, _sym_mul(Ei, s, Mod.p ** Mod.m)) for s in gens)
    return AlphaBoundReport(alpha, bound, alpha <= bound, ok, shape.precision)


def check_alpha_bound(qf: QuasiFilteredBK) -> AlphaBoundReport:
    return alpha_report(qf.M, qf.height, qf.E)


def _sym_mul(a, s, mod) -> tuple:
    s = tuple(((c + mod // 2) % mod) - mod // 2 for c in s)
    return poly_mul(a, s)


def _ann_plus_u_contains(Mod: EnumeratedModule, c: int) -> bool:
    """Is the constant c in Ann(M) + (u)?  Equivalently c kills M/uM."""
    if Mod.length == 0:
        return True
    gens = Mod.generators()
    quotient_rel = Mod.act((0, 1), Mod.group.coords(np.eye(Mod.g * Mod.R, dtype=object)))
    Q = Mod.group.quotient(quotient_rel)
    if Q.ngens == 0:
        return True
    img = Mod.act(c, gens)
    # map coordinates of Mod to coordinates of Q (same cyclic basis, extra relations)
    return not Q.coords(img).any()


@dataclass(frozen=True)
class CaseVerdict:
    case: int
    hypothesis: bool
    conclusion: Optional[bool]
    statement: str


def theorem_cases(M, i: int, e: int, p: int) -> list:
    """Which annihilator cases apply to (i, e, p), and whether M satisfies their conclusions.

    A case whose hypothesis holds but whose conclusion fails shows that M
    carries no quasi-filtered structure of height i.
    """
    Mod = _finite_module(M)
    zero = Mod.length == 0
    p_in = _ann_plus_u_contains(Mod, p)
    out = []
    h1 = e * (i - 1) < p - 1
    out.append(CaseVerdict(1, h1, zero if h1 else None, "M = 0"))
    h2 = e * (i - 1) == p - 1
    c2 = (not zero) and annihilates(Mod, p) and annihilates(Mod, (0, 1)) if h2 else None
    out.append(CaseVerdict(2, h2, c2, "Ann(M) = (p, u)"))
    h3 = e * (i - 1) < 2 * (p - 1)
    out.append(CaseVerdict(3, h3, _ann_plus_u_contains(Mod, p ** (i - 1)) if h3 else None, "Ann(M) + (u) contains (p^(i-1), u)"))
    h4 = i <= 2 and e < p * (p - 1)
    out.append(CaseVerdict(4, h4, (zero or p_in) if h4 else None, "Ann(M) + (u) = (p, u)"))
    return out


@dataclass(frozen=True)
class PTorsionCertificate:
    precision: tuple


@dataclass(frozen=True)
class SimpleAnnihilator:
    alpha: int
    unit: TruncatedSeries
    precision: tuple


def simple_annihilator(M, i: int, e: int, p: int):
    """Either p kills M, or Ann(M) holds u^alpha + p x with x a unit."""
    if not (i <= 2 and e < p * (p - 1)):
        raise HypothesisUnmet(f"needs i <= 2 and e < p(p-1); got i={i}, e={e}, p={p}")
    Mod = _finite_module(M)
    shape = annihilator_shape(Mod)
    if shape.p_kills:
        return PTorsionCertificate(shape.precision)
    top = -(-e // (p - 1))
    if not (1 <= shape.alpha <= top < p):
        raise HypothesisUnmet(f"alpha = {shape.alpha} is outside [1, {top}]; M is not quasi-filtered of height {i}")
    if shape.simple_element is None:
        raise SearchInconclusive(f"no u^{shape.alpha} + p x with x a unit annihilates M over S/(p^{shape.precision[0]}, u^{shape.precision[1]})")
    a, x = shape.simple_element
    return SimpleAnnihilator(a, x, shape.precision)


# --- constructions --------------------------------------------------------------------------


def identity_example(p: int, e: int, E: Optional[EisensteinPoly] = None) -> QuasiFilteredBK:
    """Height 1 with M = N = S/p, whose twist is itself: f = g = h = 1, h' = E."""
    E = E or EisensteinPoly.default(p, e)
    pres = Presentation(RingParams(p, 2, 1), 1, (((p,),),), False)
    one = (((1,),),)
    return QuasiFilteredBK(1, pres, pres, one, one, one, (((E.integer_coeffs()),),), E, "identity")


def residue_field_example(p: int, e: int, E: Optional[EisensteinPoly] = None) -> QuasiFilteredBK:
    """Height 2 with M = N = S/(p, u), f = E, g = h = 1, h' = E."""
    E = E or EisensteinPoly.default(p, e)
    pres = Presentation(RingParams(p, 1, 1), 1, (), True)
    Ec = E.integer_coeffs()
    return QuasiFilteredBK(2, pres, pres, ((Ec,),), (((1,),),), (((1,),),), ((Ec,),), E, "residue-field")


def height2_family(p: int, e: int, r: int, E: Optional[EisensteinPoly] = None) -> QuasiFilteredBK:
    """M = k[u]/u^r with r <= e/(p-1), N = k[u]/u^(pr-e).

    f = 1, g = u^e, h = u^(e-(p-1)r), h' = u^((p-1)r).  Since E = u^e on
    p-torsion modules all four composites are u^e, and h is injective
    because multiplying by u^(e-(p-1)r) sends k[u]/u^(pr-e) into k[u]/u^r.
    """
    if not 1 <= r <= e // (p - 1):
        raise ValueError("need 1 <= r <= floor(e/(p-1))")
    E = E or EisensteinPoly.default(p, e)
    s = max(0, p * r - e)
    M = Presentation(RingParams(p, 1, r), 1, (), True)
    if s:
        N = Presentation(RingParams(p, 1, s), 1, (), True)
    else:
        N = Presentation(RingParams(p, 1, 1), 1, (((1,),),), True)
    t = e - (p - 1) * r
    mono = lambda d: (((0,) * d + (1,),),)
    return QuasiFilteredBK(2, M, N, mono(0), mono(e), mono(t), mono((p - 1) * r), E, f"family(r={r})")


def _block(A, B, ra, ca, rb, cb) -> tuple:
    rows = [tuple(A[i]) + ((0,),) * cb for i in range(ra)]
    rows += [((0,),) * ca + tuple(B[i]) for i in range(rb)]
    return tuple(rows)


def direct_sum(q1: QuasiFilteredBK, q2: QuasiFilteredBK) -> QuasiFilteredBK:
    if q1.height != q2.height or q1.E != q2.E:
        raise ValueError("summands must share height and E")
    press = [q1.pres_M, q2.pres_M, q1.pres_N, q2.pres_N]
    K = max(P.params.p_prec for P in press)
    L = max(P.params.u_prec for P in press)
    M = embed(q1.pres_M, K, L).direct_sum(embed(q2.pres_M, K, L))
    N = embed(q1.pres_N, K, L).direct_sum(embed(q2.pres_N, K, L))
    m1, m2, n1, n2 = q1.pres_M.ngens, q2.pres_M.ngens, q1.pres_N.ngens, q2.pres_N.ngens
    return QuasiFilteredBK(
        q1.height, M, N,
        _block(q1.f, q2.f, m1, n1, m2, n2),
        _block(q1.g, q2.g, n1, m1, n2, m2),
        _block(q1.h, q2.h, n1, m1, n2, m2),
        _block(q1.h_prime, q2.h_prime, m1, n1, m2, n2),
        q1.E, f"{q1.label}+{q2.label}")


def mutant(qf: QuasiFilteredBK, condition: str) -> QuasiFilteredBK:
    """Break one condition: the left map of the composite gains +E, or h becomes 0."""
    E = qf.E.integer_coeffs()
    gm, gn = qf.pres_M.ngens, qf.pres_N.ngens
    kw = dict(f=qf.f, g=qf.g, h=qf.h, h_prime=qf.h_prime)
    if condition == "gf":
        kw["g"] = mat_add(qf.g, scalar_matrix(E, gn))
    elif condition == "fg":
        kw["f"] = mat_add(qf.f, scalar_matrix(E, gm))
    elif condition == "h'h":
        kw["h_prime"] = mat_add(qf.h_prime, scalar_matrix(E, gm))
    elif condition == "hh'":
        kw["h"] = mat_add(qf.h, scalar_matrix(E, gn))
    elif condition == "h_injective":
        kw["h"] = tuple(tuple((0,) for _ in range(gm)) for _ in range(gn))
    else:
        raise ValueError(f"unknown condition {condition!r}")
    return QuasiFilteredBK(qf.height, qf.M, qf.N, E=qf.E, label=f"{qf.label}/{condition}", **kw)


def family_instances(p: int, e: int, max_summands: int = 2) -> list:
    """Height-2 family members and their pairwise sums for one (p, e)."""
    base = [height2_family(p, e, r) for r in range(1, e // (p - 1) + 1)]
    out = list(base)
    if max_summands >= 2:
        for a in range(len(base)):
            for b in range(a, len(base)):
                out.append(direct_sum(base[a], base[b]))
    return out


@dataclass(frozen=True)
class AlphaSweepRow:
    p: int
    e: int
    label: str
    valid: bool
    alpha: int
    bound: int
    passed: bool


def alpha_bound_sweep(primes: Sequence[int] = (2, 3, 5), e_max: int = 8, max_summands: int = 2) -> list:
    """Validate every family instance and compare alpha with its bound."""
    rows = []
    for p in primes:
        for e in range(1, e_max + 1):
            for qf in family_instances(p, e, max_summands):
                rep = validate(qf)
                if not rep.valid:
                    rows.append(AlphaSweepRow(p, e, qf.label, False, -1, alpha_bound(e, 2, p), False))
                    continue
                ab = check_alpha_bound(qf)
                rows.append(AlphaSweepRow(p, e, qf.label, True, ab.alpha, ab.bound, ab.passed and ab.ann_twist_ok))
    return rows
