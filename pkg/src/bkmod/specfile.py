"""JSON module-spec documents (format_version 1); see docs/FORMAT.md."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .conjectures import LengthLedger, SweepConfig
from .errors import SpecError
from .modules import BKModule, CyclicSummand, Presentation
from .ring import EisensteinPoly, RingParams, TruncatedSeries

FORMAT_VERSION = 1
SWEEP_FIELDS = ("primes", "r_max", "max_summands", "extra_units", "n_max", "oracle_check", "audit_excluded")


@dataclass(frozen=True)
class SpecDocument:
    ring: RingParams
    eisenstein: EisensteinPoly
    modules: tuple = ()  # (name, BKModule) pairs, in file order
    ledgers: tuple = ()  # (name, LengthLedger) pairs
    sweep: Optional[SweepConfig] = None
    eisenstein_is_default: bool = True

    def module(self, name: str) -> BKModule:
        for k, M in self.modules:
            if k == name:
                return M
        raise SpecError(f"no module named {name!r}; have {[k for k, _ in self.modules]}")

    def ledger(self, name: str) -> LengthLedger:
        for k, L in self.ledgers:
            if k == name:
                return L
        raise SpecError(f"no ledger named {name!r}; have {[k for k, _ in self.ledgers]}")


def _need(d: dict, key: str, kind=None, where: str = ""):
    if not isinstance(d, dict) or key not in d:
        raise SpecError(f"missing field {where + key!r}")
    v = d[key]
    if kind is not None and (not isinstance(v, kind) or (kind is int and isinstance(v, bool))):
        raise SpecError(f"field {where + key!r} should be {kind.__name__}")
    return v


def _int_list(v, where):
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise SpecError(f"{where} should be a list of integers")
    return tuple(v)


def _summand_from(d: dict, p: int, where: str) -> CyclicSummand:
    kind = _need(d, "kind", str, where)
    try:
        if kind == "Free":
            s = CyclicSummand("Free")
        elif kind == "Ppow":
            s = CyclicSummand("Ppow", a=_need(d, "a", int, where))
        elif kind == "PUr":
            s = CyclicSummand("PUr", a=d.get("a", 1), r=_need(d, "r", int, where))
        elif kind == "FUr":
            unit = _int_list(d.get("unit_coeffs", [1]), where + "unit_coeffs")
            s = CyclicSummand("FUr", alpha=_need(d, "alpha", int, where), r=_need(d, "r", int, where), unit=unit)
        else:
            raise SpecError(f"{where}kind: unknown summand kind {kind!r}")
        s.check_unit(p)
    except (ValueError, TypeError) as ex:
        raise SpecError(f"{where}: {ex}") from None
    return s


def _summand_to(s: CyclicSummand) -> dict:
    if s.kind == "Free":
        return {"kind": "Free"}
    if s.kind == "Ppow":
        return {"kind": "Ppow", "a": s.a}
    if s.kind == "PUr":
        return {"kind": "PUr", "a": s.a, "r": s.r}
    return {"kind": "FUr", "alpha": s.alpha, "r": s.r, "unit_coeffs": list(s.unit)}


def _presentation_from(d: dict, ring: RingParams, where: str) -> Presentation:
    P = RingParams(ring.p, d.get("p_prec", ring.p_prec), d.get("u_prec", ring.u_prec))
    g = _need(d, "ngens", int, where)
    rels = _need(d, "relations", list, where)
    rows = []
    for i, row in enumerate(rels):
        if not isinstance(row, list) or len(row) != g:
            raise SpecError(f"{where}relations[{i}] should list {g} polynomials")
        rows.append(tuple(TruncatedSeries.from_coeffs(P, _int_list(x, f"{where}relations[{i}]")) for x in row))
    truncated = d.get("truncated", True)
    if not isinstance(truncated, bool):
        raise SpecError(f"{where}truncated should be true or false")
    return Presentation(P, g, tuple(rows), truncated)


def _presentation_to(pres: Presentation) -> dict:
    return {
        "ngens": pres.ngens,
        "p_prec": pres.params.p_prec,
        "u_prec": pres.params.u_prec,
        "truncated": pres.truncated,
        "relations": [[list(x.symmetric_coeffs()) for x in row] for row in pres.relations],
    }


def _ledger_from(d: dict, where: str) -> LengthLedger:
    try:
        return LengthLedger(
            _need(d, "degree", int, where),
            _int_list(_need(d, "l_crys", list, where), where + "l_crys"),
            _int_list(_need(d, "l_dR", list, where), where + "l_dR"),
            _int_list(d.get("q_lengths", []), where + "q_lengths"),
            _int_list(d["a_decomp"], where + "a_decomp") if d.get("a_decomp") is not None else None,
            _int_list(d["b_decomp"], where + "b_decomp") if d.get("b_decomp") is not None else None,
        )
    except ValueError as ex:
        raise SpecError(f"{where}: {ex}") from None


def _ledger_to(L: LengthLedger) -> dict:
    out = {"degree": L.degree, "l_crys": list(L.l_crys), "l_dR": list(L.l_dR), "q_lengths": list(L.q_lengths)}
    if L.a_decomp is not None:
        out["a_decomp"] = list(L.a_decomp)
    if L.b_decomp is not None:
        out["b_decomp"] = list(L.b_decomp)
    return out


def _sweep_from(d: dict) -> SweepConfig:
    unknown = set(d) - set(SWEEP_FIELDS)
    if unknown:
        raise SpecError(f"sweep: unknown fields {sorted(unknown)}")
    kw = {}
    for k in SWEEP_FIELDS:
        if k in d:
            kw[k] = tuple(_int_list(d[k], "sweep.primes")) if k == "primes" else d[k]
    try:
        cfg = SweepConfig(**kw)
    except TypeError as ex:
        raise SpecError(f"sweep: {ex}") from None
    for p in cfg.primes:
        _prime_ok(p)
    return cfg


def _prime_ok(p: int) -> bool:
    from .ring import is_prime

    if not is_prime(p):
        raise SpecError(f"sweep.primes: {p} is not prime")
    return True


def _sweep_to(cfg: SweepConfig) -> dict:
    out = {}
    for k in SWEEP_FIELDS:
        v = getattr(cfg, k)
        out[k] = list(v) if k == "primes" else v
    return out


def from_dict(doc: dict) -> SpecDocument:
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SpecError(f"format_version must be {FORMAT_VERSION}, got {version!r}")
    r = _need(doc, "ring", dict)
    try:
        ring = RingParams(_need(r, "p", int, "ring."), r.get("p_prec", 1), r.get("u_prec", 1))
    except (ValueError, TypeError) as ex:
        raise SpecError(f"ring: {ex}") from None
    ed = _need(doc, "eisenstein", dict)
    kind = ed.get("kind", "default")
    try:
        if kind == "default":
            E = EisensteinPoly.default(ring.p, _need(ed, "e", int, "eisenstein."))
        elif kind == "coeffs":
            E = EisensteinPoly(ring.p, _int_list(_need(ed, "coeffs", list, "eisenstein."), "eisenstein.coeffs"))
        else:
            raise SpecError(f"eisenstein.kind must be 'default' or 'coeffs', got {kind!r}")
    except ValueError as ex:
        if isinstance(ex, SpecError):
            raise
        raise SpecError(f"eisenstein: {ex}") from None
    modules = []
    for name, md in (doc.get("modules") or {}).items():
        where = f"modules.{name}."
        if not isinstance(md, dict):
            raise SpecError(f"{where[:-1]} should be an object")
        if "summands" in md:
            ss = tuple(_summand_from(s, ring.p, f"{where}summands[{i}].") for i, s in enumerate(_need(md, "summands", list, where)))
            M = BKModule(ring, ss)
        elif "presentation" in md:
            try:
                M = BKModule.from_presentation(_presentation_from(_need(md, "presentation", dict, where), ring, where + "presentation."))
            except ValueError as ex:
                if isinstance(ex, SpecError):
                    raise
                raise SpecError(f"{where}presentation: {ex}") from None
        else:
            raise SpecError(f"{where[:-1]} needs 'summands' or 'presentation'")
        modules.append((name, M))
    ledgers = tuple((name, _ledger_from(ld, f"ledgers.{name}.")) for name, ld in (doc.get("ledgers") or {}).items())
    sweep = _sweep_from(doc["sweep"]) if doc.get("sweep") is not None else None
    return SpecDocument(ring, E, tuple(modules), ledgers, sweep, kind == "default")


def to_dict(spec: SpecDocument) -> dict:
    if spec.eisenstein_is_default:
        ed = {"kind": "default", "e": spec.eisenstein.degree}
    else:
        ed = {"kind": "coeffs", "coeffs": list(spec.eisenstein.coeffs)}
    mods = {}
    for name, M in spec.modules:
        if M.summands is not None:
            mods[name] = {"summands": [_summand_to(s) for s in M.summands]}
        else:
            mods[name] = {"presentation": _presentation_to(M.presentation)}
    out = {
        "format_version": FORMAT_VERSION,
        "ring": {"p": spec.ring.p, "p_prec": spec.ring.p_prec, "u_prec": spec.ring.u_prec},
        "eisenstein": ed,
        "modules": mods,
    }
    if spec.ledgers:
        out["ledgers"] = {name: _ledger_to(L) for name, L in spec.ledgers}
    if spec.sweep is not None:
        out["sweep"] = _sweep_to(spec.sweep)
    return out


def loads(text: str) -> SpecDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as ex:
        raise SpecError(f"not valid JSON: {ex}") from None
    return from_dict(doc)


def dumps(spec: SpecDocument) -> str:
    return json.dumps(to_dict(spec), indent=2, sort_keys=False) + "\n"


def load(path: str) -> SpecDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as ex:
        raise SpecError(f"cannot read {path}: {ex}") from None


def dump(spec: SpecDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(spec))
