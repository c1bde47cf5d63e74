import json

import pytest

from bkmod import specfile
from bkmod.conjectures import SweepConfig
from bkmod.errors import SpecError
from bkmod.modules import FUr, PUr

DOC = {
    "format_version": 1,
    "ring": {"p": 3, "p_prec": 2, "u_prec": 6},
    "eisenstein": {"kind": "default", "e": 4},
    "modules": {
        "small": {"summands": [{"kind": "PUr", "a": 1, "r": 2}, {"kind": "FUr", "alpha": 1, "r": 3,
                                                                 "unit_coeffs": [1, 1]}]},
        "mixed": {"summands": [{"kind": "Ppow", "a": 2}, {"kind": "Free"}]},
        "ideal": {"presentation": {"ngens": 2, "p_prec": 2, "u_prec": 2, "truncated": False,
                                   "relations": [[[0, 1], [-3]]]}},
    },
    "ledgers": {"deg2": {"degree": 2, "l_crys": [1, 1, 1], "l_dR": [3, 4, 4], "q_lengths": [0, 0, 0]}},
    "sweep": {"primes": [3], "r_max": 2, "max_summands": 1},
}


def test_load_and_lookup():
    doc = specfile.from_dict(DOC)
    assert doc.ring.p == 3 and doc.eisenstein.degree == 4
    small = doc.module("small")
    assert small.summands == (FUr(1, (1, 1), 3), PUr(1, 2))
    assert doc.module("ideal").presentation.ngens == 2
    assert doc.ledger("deg2").l_dR == (3, 4, 4)
    assert doc.sweep == SweepConfig(primes=(3,), r_max=2, max_summands=1)
    with pytest.raises(SpecError):
        doc.module("missing")
    with pytest.raises(SpecError):
        doc.ledger("missing")


def test_round_trip():
    doc = specfile.from_dict(DOC)
    again = specfile.loads(specfile.dumps(doc))
    assert again == doc
    assert specfile.to_dict(again) == specfile.to_dict(doc)


def test_round_trip_explicit_eisenstein(tmp_path):
    d = dict(DOC, eisenstein={"kind": "coeffs", "coeffs": [6, 3]})
    doc = specfile.from_dict(d)
    assert not doc.eisenstein_is_default
    path = tmp_path / "s.json"
    specfile.dump(doc, str(path))
    assert specfile.load(str(path)) == doc


def bad(**changes):
    d = json.loads(json.dumps(DOC))
    for k, v in changes.items():
        d[k] = v
    return d


@pytest.mark.parametrize("doc", [
    bad(format_version=2),
    bad(ring={"p": 4}),
    bad(ring={"p_prec": 1}),
    bad(eisenstein={"kind": "coeffs", "coeffs": [9]}),
    bad(eisenstein={"kind": "weird"}),
    bad(modules={"x": {"summands": [{"kind": "PUr", "r": 0}]}}),
    bad(modules={"x": {"summands": [{"kind": "FUr", "alpha": 1, "r": 2, "unit_coeffs": [3]}]}}),
    bad(modules={"x": {"summands": [{"kind": "Other"}]}}),
    bad(modules={"x": {}}),
    bad(modules={"x": {"presentation": {"ngens": 2, "relations": [[[1]]]}}}),
    bad(ledgers={"l": {"degree": 2, "l_crys": [1, 2], "l_dR": [3, 4]}}),
    bad(sweep={"primes": [4]}),
    bad(sweep={"colour": "red"}),
    [],
])
def test_malformed_documents(doc):
    with pytest.raises(SpecError):
        specfile.from_dict(doc)


def test_not_json_and_missing_file(tmp_path):
    with pytest.raises(SpecError):
        specfile.loads("{not json")
    with pytest.raises(SpecError):
        specfile.load(str(tmp_path / "nope.json"))
