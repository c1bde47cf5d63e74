"""Generalized Breuil-Kisin modules over truncations of Z_p[[u]]: twisted
E-torsion and mod-E lengths, a brute-force oracle, quasi-filtered data and a
conjecture-checking harness."""

from .errors import *  # noqa: F401,F403
from .ring import EisensteinPoly, RingParams, TruncatedSeries, dvr_valuation, frobenius, twist_eisenstein
from .modules import (BKModule, CyclicSummand, FiltrationPieces, Free, FUr, Ppow, Presentation, PUr,
                      assemble, filtration, to_presentation, twist)
from .lengths import (e_torsion_length, len_genBK_total, len_u_torsion_general, len_u_torsion_sum,
                      length_contributions, mod_e_length, upsilon_n_E, valuation_table)
from .conjectures import (BetaProfile, DerivedConstants, LengthLedger, SweepConfig, beta_check,
                          derive_constants, example_li_petrov, ledger_l_dR, main_inequality_check,
                          p_torsion_bound_check, stability_check, sweep_beta)
from .quasi_filtered import (QuasiFilteredBK, check_alpha_bound, derived_frobenius, simple_annihilator,
                             theorem_cases, validate)

__version__ = "0.1.0"
