"""Monte Carlo confidence harness for the certificate-conditioned bound.

One trial: draw a code from the regular ensemble, reject it when the LP
distance lower bound cannot clear the expurgation depth, otherwise run the
all-zero word through the channel, BP-decode, LP-decode, and test the
delta-certificate.  E failures out of L trials certify, at confidence
xi(L, E/L), that the per-code failure probability eta is below one half,
which is what the doubled ensemble bound priced in.

Confidence is reported as log2(1 - xi): the deficit is representable where
1 - 2^-600 is not.  Everything is deterministic given the master seed; each
trial owns an independent seed stream derived from (master_seed, index), so
any worker count produces the identical failure count.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .certificate import amlc_check
from .channel import ChannelModel, llr, transmit
from .codes import EnsembleSpec, avg_distance_spectrum, sample_regular_code
from .bp import bp_decode
from .ds2 import DEFAULT_GRID, BoundTable, OptGrid, overall_bound
from .lp import DEFAULT_GAP_TOL, lp_decode, min_distance_lb

ERROR_MARKER = "error"   # the harness verdict when epsilon >= 1/2


class EpsilonTooLarge(ValueError):
    """epsilon >= 1/2 carries no one-sided confidence; callers get a marker."""


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int                # 64-bit stream fingerprint for this trial
    lb_value: int
    lb_passed: bool
    bp_codeword: bool
    amlc_gap: float | None
    failed: bool
    error: str | None = None   # solver breakdowns counted failed, kept distinct


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: EnsembleSpec
    channel: ChannelModel
    delta: float
    gamma: int
    trials: int
    master_seed: int
    bp_max_iterations: int = 100
    lp_mode: str = "auto"
    lp_gap_tol: float = DEFAULT_GAP_TOL
    workers: int = 1
    ds2_grid: OptGrid = field(default_factory=lambda: DEFAULT_GRID)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.delta < 0 or self.gamma < 0:
            raise ValueError("delta and gamma must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ConfidenceReport:
    trials: int
    failures: int
    epsilon: float
    log2_confidence_deficit: float | None   # None exactly when status is the marker
    status: str                             # "ok" or ERROR_MARKER
    ds2_table: BoundTable
    config: ExperimentConfig
    records: tuple


# ---------------------------------------------------------------------------
# confidence formulas
# ---------------------------------------------------------------------------

def _failure_count(trials: int, epsilon: float) -> int:
    e = epsilon * trials
    rounded = round(e)
    if abs(e - rounded) > 1e-9 or epsilon < 0:
        raise ValueError(
            f"epsilon*L = {e} is not a nonnegative integer; epsilon must "
            f"come from an integer failure count")
    if rounded > trials:
        raise ValueError(f"failure count {rounded} exceeds {trials} trials")
    return int(rounded)


def xi(trials: int, epsilon: float) -> float:
    """Confidence deficit log2(1 - xi) for E = epsilon*L failures.

    1 - xi = 2^-L * C(L, E) * (E + 1), evaluated through log-gamma so the
    L=600 deficit stays exact where the probability itself underflows.
    """
    e = _failure_count(trials, epsilon)
    if epsilon >= 0.5:
        raise EpsilonTooLarge(f"epsilon={epsilon} >= 0.5")
    log2c = (math.lgamma(trials + 1) - math.lgamma(e + 1)
             - math.lgamma(trials - e + 1)) / math.log(2.0)
    return -trials + log2c + math.log2(e + 1)


def binomial_tail_bound(trials: int, epsilon: float):
    """log2 of the closed-form tail bound, plus the exact tail it dominates.

    The exact value sum_{k<=E} C(L,k) 2^-L comes back as a Fraction for
    diagnostic comparison; the bound itself is the xi deficit.
    """
    e = _failure_count(trials, epsilon)
    if epsilon >= 0.5:
        raise EpsilonTooLarge(f"epsilon={epsilon} >= 0.5")
    bound = xi(trials, epsilon)
    tail = Fraction(sum(math.comb(trials, k) for k in range(e + 1)),
                    2 ** trials)
    return bound, tail


# ---------------------------------------------------------------------------
# Algorithm-1 trials
# ---------------------------------------------------------------------------

def _trial_seed_roots(master_seed: int, index: int):
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    code_ss, chan_ss = ss.spawn(2)
    fingerprint = int(ss.generate_state(1, dtype=np.uint64)[0])
    code_seed = int(code_ss.generate_state(1, dtype=np.uint64)[0])
    chan_seed = int(chan_ss.generate_state(1, dtype=np.uint64)[0])
    return fingerprint, code_seed, chan_seed


def run_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    """One Algorithm-1 experiment, deterministic in (cfg.master_seed, index)."""
    fingerprint, code_seed, chan_seed = _trial_seed_roots(cfg.master_seed, index)
    try:
        code = sample_regular_code(cfg.ensemble, rng_seed=code_seed)
        lb = min_distance_lb(code, stop_at=cfg.gamma)
        if lb <= cfg.gamma:
            return TrialRecord(index, fingerprint, lb, False, False, None, True)
        zero = np.zeros(cfg.ensemble.n_vars, dtype=np.int64)
        outputs = transmit(zero, cfg.channel, rng_seed=chan_seed)
        llrs = llr(cfg.channel, outputs)
        bp = bp_decode(code, llrs, max_iterations=cfg.bp_max_iterations)
        lp = lp_decode(code, llrs, mode=cfg.lp_mode, gap_tol=cfg.lp_gap_tol)
        verdict = amlc_check(bp, lp, llrs, cfg.delta, code)
        return TrialRecord(index, fingerprint, lb, True, verdict.is_codeword,
                           verdict.gap, not verdict.holds)
    except Exception as exc:  # solver breakdown: counted failed, flagged
        return TrialRecord(index, fingerprint, 0, False, False, None, True,
                           error=f"{type(exc).__name__}: {exc}")


def run_algorithm1(cfg: ExperimentConfig) -> ConfidenceReport:
    """Full harness: L trials, failure count, confidence, attached bound."""
    if cfg.workers == 1:
        records = [run_trial(cfg, i) for i in range(cfg.trials)]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(run_trial, cfg, i) for i in range(cfg.trials)]
            records = [f.result() for f in futures]
    records.sort(key=lambda r: r.index)

    failures = sum(1 for r in records if r.failed)
    epsilon = failures / cfg.trials
    if epsilon >= 0.5:
        deficit, status = None, ERROR_MARKER
    else:
        deficit, status = xi(cfg.trials, epsilon), "ok"

    spectrum = avg_distance_spectrum(cfg.ensemble)
    table = overall_bound(cfg.delta, cfg.gamma, cfg.channel, spectrum,
                          grid=cfg.ds2_grid)
    return ConfidenceReport(trials=cfg.trials, failures=failures,
                            epsilon=epsilon, log2_confidence_deficit=deficit,
                            status=status, ds2_table=table, config=cfg,
                            records=tuple(records))


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

def write_trial_csv(records, path: str) -> None:
    lines = ["index,seed,lb_value,lb_passed,bp_codeword,amlc_gap,failed,error"]
    for r in records:
        gap = "" if r.amlc_gap is None else "%.17g" % r.amlc_gap
        err = r.error or ""
        lines.append(f"{r.index},{r.seed},{r.lb_value},{int(r.lb_passed)},"
                     f"{int(r.bp_codeword)},{gap},{int(r.failed)},{err}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def report_to_dict(report: ConfidenceReport) -> dict:
    cfg = report.config
    ch = cfg.channel
    channel_echo = {"kind": ch.kind}
    if ch.p is not None:
        channel_echo["p"] = ch.p
    else:
        channel_echo["symbols"] = [float(s) for s in ch.symbols]
        channel_echo["q0"] = [float(v) for v in ch.q0]
    table = report.ds2_table
    rows = [[int(h), float(table.ln_p1[h]), float(table.lambda_w[h]),
             float(table.rho[h]), float(table.kappa[h])]
            for h in range(table.n_vars + 1) if not table.zero_mask[h]]
    return {
        "trials": report.trials,
        "failures": report.failures,
        "epsilon": report.epsilon,
        "log2_confidence_deficit": report.log2_confidence_deficit,
        "status": report.status,
        "config": {
            "n_vars": cfg.ensemble.n_vars,
            "var_degree": cfg.ensemble.var_degree,
            "check_degree": cfg.ensemble.check_degree,
            "channel": channel_echo,
            "delta": cfg.delta,
            "gamma": cfg.gamma,
            "master_seed": cfg.master_seed,
            "bp_max_iterations": cfg.bp_max_iterations,
            "lp_mode": cfg.lp_mode,
            "lp_gap_tol": cfg.lp_gap_tol,
            "workers": cfg.workers,
        },
        "ds2": {
            "total_ln": table.total,
            "delta": table.delta,
            "gamma": table.gamma,
            "skipped_points": table.skipped_points,
            "rows": rows,
        },
    }


def write_report_json(report: ConfidenceReport, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")
