"""LDPC decoding-certificate toolkit.

Pipeline pieces: regular-ensemble code sampling and distance spectra
(codes), finite-output symmetric channels (channel), sum-product decoding
(bp), the fundamental-polytope LP decoder with certified duality gap and
distance lower bound (lp), the delta-certificate predicate (certificate),
the per-weight conditional error bound with tilting-measure optimization
(ds2), and the Monte Carlo confidence harness (confidence).
"""

from .channel import ChannelModel, bsc, llr, mbios_from_csv, mbios_from_table, reflect, transmit
from .codes import (
    EnsembleSpec,
    ParityCheckMatrix,
    SpectrumTable,
    avg_distance_spectrum,
    expurgate_spectrum,
    is_codeword,
    read_alist,
    read_spectrum_csv,
    sample_regular_code,
    write_alist,
    write_spectrum_csv,
)
from .bp import BpOutcome, bp_decode
from .lp import (
    DegreeCapExceeded,
    LpSolution,
    LpSolverError,
    fractional_distance,
    lp_decode,
    min_distance_lb,
    ml_certificate,
    objective,
)
from .certificate import AmlcVerdict, amlc_check
from .ds2 import (
    BoundTable,
    Ds2DomainError,
    Ds2Params,
    OptGrid,
    TiltingConvergenceError,
    TiltingMeasure,
    optimize_weight,
    overall_bound,
    p1_bound,
    solve_tilting,
    write_bound_csv,
)
from .confidence import (
    ConfidenceReport,
    EpsilonTooLarge,
    ExperimentConfig,
    TrialRecord,
    binomial_tail_bound,
    run_algorithm1,
    run_trial,
    write_report_json,
    write_trial_csv,
    xi,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
