"""The approximate maximum-likelihood certificate (AMLC) predicate.

A BP estimate c_hat earns AMLC(delta) when it is a codeword whose cost
exceeds the LP optimum by at most delta.  Codewords are feasible for the
LP, so the LP optimum never exceeds the ML cost; a small gap therefore
certifies that c_hat is within delta of the ML decision in cost.  At
delta = 0 (and an integral LP answer) this is the classical ML
certificate.  Solver slack is handled by widening the threshold with the
LP's certified gap, never by shrinking the measured gap.
"""

from dataclasses import dataclass

import numpy as np

from .codes import is_codeword
from .lp import LpSolution, objective


@dataclass
class AmlcVerdict:
    holds: bool
    gap: float | None        # P(c_hat) - P(lambda); None when c_hat is no codeword
    is_codeword: bool
    delta: float
    tolerance_margin: float  # the certified LP gap applied as threshold slack


def amlc_check(bp, lp: LpSolution, llrs, delta: float, h) -> AmlcVerdict:
    """Evaluate AMLC(delta) for a BP outcome against an LP solution.

    Both must come from the same (h, llrs) instance; lengths are checked,
    semantic identity is the caller's contract.
    """
    llrs = np.asarray(llrs, dtype=float)
    if not (llrs.shape == (h.n_vars,) == bp.hard_decision.shape
            == lp.pseudocodeword.shape):
        raise ValueError("mismatched instance: bp, lp, llrs, and h disagree on length")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    codeword = is_codeword(h, bp.hard_decision)
    if not codeword:
        return AmlcVerdict(False, None, False, delta, lp.certified_gap)
    gap = objective(bp.hard_decision, llrs) - lp.objective
    holds = gap <= delta + lp.certified_gap
    return AmlcVerdict(holds, gap, True, delta, lp.certified_gap)
