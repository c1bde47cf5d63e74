"""Acceptance criteria 1-9, one test each; every test records a pass/fail line."""

import os
import subprocess
import sys
import time

from conftest import ACCEPTANCE

from bkmod import verify
from bkmod.conjectures import SweepConfig, example_li_petrov, sweep_beta


def record(k, passed, detail):
    ACCEPTANCE[k] = (passed, detail)
    print(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


def test_criterion_1_formula_vs_oracle():
    t = time.time()
    count, bad = verify.formula_oracle_grid(primes=(2, 3, 5), e_range=range(1, 9), r_range=range(1, 7),
                                            n_range=range(0, 4))
    dt = time.time() - t
    record(1, count > 0 and not bad and dt < 120,
           f"{count} cells, {len(bad)} mismatches, {dt:.0f}s" + (f"; first {bad[0]}" if bad else ""))


def test_criterion_2_lemma_identities():
    count, bad = verify.lemma_identity_grid(primes=(2, 3, 5), e_range=range(1, 9), r_range=range(1, 7),
                                            n_range=range(0, 4))
    tor = verify.tor_u_tf_grid()
    mbar = verify.mbar_grid()
    record(2, count > 0 and not bad and not tor and not mbar,
           f"{count} identity cells, {len(bad)} mismatches; tor_u_tf {len(tor)}; three-term {len(mbar)}")


def test_criterion_3_beta_sweep():
    t = time.time()
    rep = sweep_beta(SweepConfig(primes=(2, 3), r_max=4, max_summands=3))
    dt = time.time() - t
    record(3, rep.rows and rep.exit_code == 0 and not rep.skipped and dt < 300,
           f"{len(rep.rows)} cells, {len(rep.violations)} violations, {len(rep.skipped)} skipped, exit {rep.exit_code}, {dt:.0f}s")


def test_criterion_4_valuation_table():
    count, bad = verify.valuation_window_grid(primes=(2, 3, 5, 7))
    record(4, count > 0 and not bad, f"{count} cells, {len(bad)} mismatches")


def test_criterion_5_li_petrov():
    bad = []
    for p in (2, 3, 5):
        r = example_li_petrov(p)
        e = r.e
        ok = (e == p ** 4 - p ** 2 and r.l2_dR == 2 * e == e * r.l2_crys
              and 1 == r.l3_crys < r.l3_dR == p ** 3 - p ** 2 < e * r.l3_crys == p ** 4 - p ** 2)
        if not ok:
            bad.append(p)
    record(5, not bad, f"p in (2, 3, 5), failures {bad}")


def test_criterion_6_ring_identities():
    bad = verify.ring_identity_failures(pairs=1000, polys=50)
    record(6, not bad, f"3 cells x (1000 pairs, 50 polynomials), {len(bad)} failures")


def test_criterion_7_constants():
    bad = verify.constants_failures(13, 200)
    record(7, not bad, f"p <= 13, e <= 200, {len(bad)} failures")


def test_criterion_8_quasi_filtered():
    bad = verify.quasi_filtered_failures(primes=(2, 3, 5), e_max=8)
    record(8, not bad, f"identity example, 5 mutants, alpha bound sweep: {len(bad)} failures")


def test_criterion_9_mutation_sensitivity():
    env = dict(os.environ)
    env.pop("BKCTL_INJECT_FAULT", None)
    cmd = [sys.executable, "-m", "bkmod.cli", "verify", "fast", "--jobs", "1"]
    clean = subprocess.run(cmd, env=env, capture_output=True, text=True)
    env["BKCTL_INJECT_FAULT"] = "off-by-one"
    faulty = subprocess.run(cmd, env=env, capture_output=True, text=True)
    record(9, clean.returncode == 0 and faulty.returncode == 1,
           f"verify fast exits {clean.returncode} clean, {faulty.returncode} with the off-by-one fault")
