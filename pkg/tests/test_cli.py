import csv
import io
import json

import pytest

from bkmod import cli
from bkmod.errors import InsufficientPrecision
from bkmod.modules import BKModule, FUr, Ppow, PUr, Free

SPEC = {
    "format_version": 1,
    "ring": {"p": 3, "p_prec": 1, "u_prec": 1},
    "eisenstein": {"kind": "default", "e": 4},
    "modules": {"m": {"summands": [{"kind": "PUr", "a": 1, "r": 2}]}},
    "ledgers": {
        "good": {"degree": 2, "l_crys": [1, 1, 1], "l_dR": [3, 4, 4]},
        "bad": {"degree": 2, "l_crys": [1, 1, 1], "l_dR": [3, 4, 5]},
    },
    "sweep": {"primes": [3], "r_max": 2, "max_summands": 1, "extra_units": False},
}


@pytest.fixture
def spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(SPEC))
    return str(path)


def rows_of(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# generated ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_parse_summands():
    assert cli.parse_summands("PUr(1,2) + FUr(1,1+u,3) + Ppow(2) + Free") == (
        PUr(1, 2), FUr(1, (1, 1), 3), Ppow(2), Free())
    assert cli.parse_summands("0") == ()
    M = BKModule.of(5, PUr(2, 3), FUr(2, (2, 0, -3), 4), Ppow(1))
    assert BKModule.of(5, *cli.parse_summands(M.label())) == M
    with pytest.raises(cli.UsageError):
        cli.parse_summands("PUr(1)")
    with pytest.raises(cli.UsageError):
        cli.parse_summands("Banana(2)")


def test_lengths_inline(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert cli.main(["lengths", "--p", "3", "--e", "4", "--summands", "PUr(1,2)", "--n-range", "0..2",
                     "--out", str(out)]) == 0
    rows = rows_of(out)
    assert [r["etor_formula"] for r in rows] == ["2", "4", "4"]
    assert [r["etor_oracle"] for r in rows] == ["2", "4", "4"]
    assert all(r["agree"] == "yes" for r in rows)
    assert "agree" in capsys.readouterr().out


def test_lengths_zero_and_free(tmp_path):
    for text in ("0", "Free"):
        out = tmp_path / "z.csv"
        assert cli.main(["lengths", "--p", "2", "--e", "3", "--summands", text, "--out", str(out)]) == 0
        for r in rows_of(out):
            assert r["etor_formula"] == r["modE_pinf_formula"] == "0"
            assert r["etor_oracle"] == r["modE_pinf_oracle"] == "0"


def test_lengths_from_spec(spec, tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["lengths", "--spec", spec, "--module", "m", "--n-range", "1", "--out", str(out)]) == 0
    doc = json.loads(open(out).read())
    assert doc["rows"][0]["etor_formula"] == 4 and doc["summary"]["agree"] is True


@pytest.mark.parametrize("argv", [
    ["lengths", "--p", "3", "--e", "4", "--summands", "PUr(1,"],
    ["lengths", "--p", "4", "--e", "4", "--summands", "PUr(1,2)"],
    ["lengths", "--p", "3", "--summands", "PUr(1,2)"],
    ["lengths", "--p", "3", "--e", "4", "--summands", "PUr(1,2)", "--n-range", "3..1"],
    ["lengths", "--spec", "/nonexistent.json", "--module", "m"],
    ["frobnicate"],
    ["example", "nope", "2"],
    ["example", "li-petrov", "4"],
    ["verify", "--jobs", "0"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_precision_errors_exit_3(monkeypatch, capsys):
    def boom(args):
        raise InsufficientPrecision("needs more u-precision")

    monkeypatch.setattr(cli, "cmd_lengths", boom)
    assert cli.main(["lengths", "--p", "3", "--e", "4", "--summands", "PUr(1,2)"]) == 3
    assert "insufficient precision" in capsys.readouterr().err


def test_sweep_beta_writes_both_formats(spec, tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep-beta", "--spec", spec, "--jobs", "1", "--out", str(out)]) == 0
    rows = rows_of(out)
    assert rows and all(r["verdict"] == "pass" for r in rows)
    doc = json.loads(open(tmp_path / "sweep.json").read())
    assert doc["summary"]["violations"] == 0 and len(doc["rows"]) == len(rows)


def test_sweep_beta_injected_profile_exits_1(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code = cli.main(["sweep-beta", "--primes", "2", "--r-max", "1", "--max-summands", "1", "--jobs", "1",
                     "--inject-profile", "mutant:3,2,2", "--out", str(out)])
    assert code == 1
    bad = [r for r in rows_of(out) if r["verdict"] == "fail"]
    assert bad and bad[0]["module"] == "mutant" and bad[0]["values"] == "3 2 2"


def test_sweep_beta_budget_skip_exits_0(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(["sweep-beta", "--primes", "3", "--r-max", "2", "--max-summands", "1", "--jobs", "1",
                     "--budget", "1", "--out", str(out)])
    assert code == 0
    assert any(r["verdict"] == "skipped(budget)" for r in rows_of(out))


def test_reports_deterministic_modulo_timestamp(spec, tmp_path):
    texts = {}
    for fmt in ("csv", "json"):
        for k in range(2):
            out = tmp_path / f"r{k}.{fmt}"
            assert cli.main(["sweep-beta", "--spec", spec, "--jobs", "1", "--out", str(out)]) == 0
            texts[fmt, k] = open(out).read().splitlines()
    a, b = texts["csv", 0], texts["csv", 1]
    assert a[1:] == b[1:]
    a, b = texts["json", 0], texts["json", 1]
    assert a[0] == b[0] and a[2:] == b[2:] and '"generated"' in a[1]


def test_example_commands(capsys):
    assert cli.main(["example", "li-petrov", "2"]) == 0
    out = capsys.readouterr().out
    assert "e = p^4 - p^2 = 12" in out and "24" in out
    assert cli.main(["example", "bk-group-scheme", "3"]) == 0
    assert "S/(p, u)" in capsys.readouterr().out
    assert cli.main(["example", "p-torsion", "5"]) == 0
    assert cli.main(["example", "p-torsion", "5", "--a-decomp", "1,1", "--b-decomp", "1"]) == 1


def test_ledger_commands(spec, capsys):
    assert cli.main(["ledger", "--spec", spec, "--ledger", "good"]) == 0
    assert cli.main(["ledger", "--spec", spec, "--ledger", "bad"]) == 1
    assert cli.main(["ledger", "--spec", spec, "--ledger", "missing"]) == 2
    assert cli.main(["ledger", "--p", "2", "--e", "3", "--summands", "PUr(1,1)", "--n-range", "0"]) == 0
    assert "2" in capsys.readouterr().out
    assert cli.main(["ledger", "--p", "2", "--e", "3", "--summands", "0", "--q-len", "5", "--q-bound", "4"]) == 1
