"""Binary LDPC codes as Tanner graphs, the (c,d)-regular ensemble, and
ensemble-average distance spectra with expurgation.

A code is held as a ParityCheckMatrix: adjacency between N variable nodes
and M check nodes.  Regular ensembles are sampled with the Gallager
socket-permutation (configuration-model) construction.  The average
distance spectrum of that ensemble is computed exactly with big-integer
polynomial coefficients and only then moved to natural-log floats, so the
tiny low-weight entries that drive error floors survive.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .logmath import ln_bigint, ln_comb


@dataclass
class ParityCheckMatrix:
    """Sparse bipartite Tanner graph of a binary linear code.

    check_neighbors[j] is the ordered array of variable indices in check j;
    var_neighbors[i] is the ordered array of check indices touching
    variable i.  Treated as immutable after construction.
    """

    n_vars: int
    n_checks: int
    check_neighbors: list  # list of np.ndarray[int64]
    var_neighbors: list    # list of np.ndarray[int64]
    sample_attempts: int | None = field(default=None, compare=False)

    @classmethod
    def from_check_neighbors(cls, n_vars: int, check_lists) -> "ParityCheckMatrix":
        n_checks = len(check_lists)
        check_neighbors = []
        var_lists: list[list[int]] = [[] for _ in range(n_vars)]
        for j, lst in enumerate(check_lists):
            arr = np.asarray(sorted(int(i) for i in lst), dtype=np.int64)
            if arr.size and (arr[0] < 0 or arr[-1] >= n_vars):
                raise ValueError(f"check {j} references a variable outside 0..{n_vars - 1}")
            if arr.size != np.unique(arr).size:
                raise ValueError(f"check {j} has a repeated variable")
            arr.flags.writeable = False
            check_neighbors.append(arr)
            for i in arr:
                var_lists[int(i)].append(j)
        var_neighbors = []
        for lst in var_lists:
            arr = np.asarray(lst, dtype=np.int64)
            arr.flags.writeable = False
            var_neighbors.append(arr)
        return cls(n_vars, n_checks, check_neighbors, var_neighbors)

    @classmethod
    def from_dense(cls, h) -> "ParityCheckMatrix":
        h = np.asarray(h)
        rows = [np.flatnonzero(r) for r in h]
        return cls.from_check_neighbors(h.shape[1], rows)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        for j, nbrs in enumerate(self.check_neighbors):
            h[j, nbrs] = 1
        return h

    def check_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.check_neighbors], dtype=np.int64)

    def var_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.var_neighbors], dtype=np.int64)

    def n_edges(self) -> int:
        return int(sum(len(a) for a in self.check_neighbors))


@dataclass(frozen=True)
class EnsembleSpec:
    """A (c,d)-regular ensemble: n_vars variables of degree c, checks of degree d."""

    n_vars: int
    var_degree: int
    check_degree: int

    def __post_init__(self):
        n, c, d = self.n_vars, self.var_degree, self.check_degree
        if n < 1 or c < 2 or d < 3:
            raise ValueError("ensemble needs n >= 1, var_degree >= 2, check_degree >= 3")
        if (n * c) % d != 0:
            raise ValueError(f"N*c = {n * c} not divisible by check degree {d}")

    @property
    def n_checks(self) -> int:
        return self.n_vars * self.var_degree // self.check_degree


def is_codeword(h: ParityCheckMatrix, word) -> bool:
    """True iff every check neighborhood of `word` has even parity."""
    word = np.asarray(word)
    if word.shape != (h.n_vars,):
        raise ValueError(f"word length {word.shape} != ({h.n_vars},)")
    w = word.astype(np.int64)
    return all(int(np.sum(w[nbrs])) % 2 == 0 for nbrs in h.check_neighbors)


def sample_configuration(n_vars: int, var_degree: int, check_degree: int,
                         rng: np.random.Generator):
    """One raw configuration-model draw, parallel edges collapsed mod 2.

    Returns (check_lists, regular) where check_lists[j] is the sorted list of
    variables left in check j after collapse, and regular says whether the
    collapse kept every degree intact (equivalently: the permutation produced
    no duplicate (variable, check) pair).
    """
    n, c, d = n_vars, var_degree, check_degree
    m = n * c // d
    var_sockets = np.repeat(np.arange(n, dtype=np.int64), c)
    check_sockets = np.repeat(np.arange(m, dtype=np.int64), d)
    perm = rng.permutation(n * c)
    pairs = check_sockets[perm] * np.int64(n) + var_sockets
    keys, counts = np.unique(pairs, return_counts=True)
    kept = keys[counts % 2 == 1]
    regular = bool(kept.size == n * c)
    check_lists: list[list[int]] = [[] for _ in range(m)]
    for key in kept:
        check_lists[int(key) // n].append(int(key) % n)
    return check_lists, regular


def sample_regular_code(spec: EnsembleSpec, rng_seed: int) -> ParityCheckMatrix:
    """Uniform sample of the socket-permutation (c,d)-regular ensemble.

    Draws a uniformly random matching of N*c variable sockets to M*d check
    sockets; duplicate (variable, check) pairs would collapse mod 2, so any
    draw containing one breaks regularity and the whole code is redrawn.
    Deterministic given (spec, rng_seed).  The accepted matrix records how
    many draws were needed in `sample_attempts` (the rejection rate is
    roughly 1 - exp(-(c-1)(d-1)/2), independent of N).
    """
    rng = np.random.default_rng(rng_seed)
    for attempt in range(1, 100_000):
        check_lists, regular = sample_configuration(
            spec.n_vars, spec.var_degree, spec.check_degree, rng)
        if regular:
            h = ParityCheckMatrix.from_check_neighbors(spec.n_vars, check_lists)
            h.sample_attempts = attempt
            return h
    raise RuntimeError("sampler failed to produce a regular code in 100000 draws")


# ---------------------------------------------------------------------------
# average distance spectrum
# ---------------------------------------------------------------------------

@dataclass
class SpectrumTable:
    """ln(avg A_h) for h = 0..N; exact zeros carry an explicit mask bit.

    log_counts[h] is meaningful only where zero_mask[h] is False.
    """

    n_vars: int
    log_counts: np.ndarray  # float, length N+1
    zero_mask: np.ndarray   # bool, length N+1


def _poly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_pow(base: list, e: int) -> list:
    result = [1]
    sq = list(base)
    while e:
        if e & 1:
            result = _poly_mul(result, sq)
        e >>= 1
        if e:
            sq = _poly_mul(sq, sq)
    return result


@lru_cache(maxsize=32)
def config_model_log_spectrum(n: int, c: int, d: int):
    """Exact configuration-model average spectrum, as (log_counts, zero_mask).

    avg A_h = C(N,h) * coeff_{x^{ch}}[ g(x)^M ] / C(Nc, ch) with
    g(x) = ((1+x)^d + (1-x)^d) / 2.  Since g has only even powers, entries
    with c*h odd are exact zeros.  Coefficients stay exact big integers
    until the final log.  Requires c >= 1 so the single-parity-check
    identity is checkable even though public ensembles demand c >= 2.
    """
    if c < 1 or d < 1 or (n * c) % d != 0:
        raise ValueError("invalid (n, c, d) for spectrum")
    m = n * c // d
    # g in the variable z = x^2: coefficient of z^k is C(d, 2k)
    gz = [math.comb(d, 2 * k) for k in range(d // 2 + 1)]
    pz = _poly_pow(gz, m)
    log_counts = np.zeros(n + 1)
    zero_mask = np.zeros(n + 1, dtype=bool)
    for h in range(n + 1):
        e = c * h
        coeff = 0
        if e % 2 == 0 and e // 2 < len(pz):
            coeff = pz[e // 2]
        if coeff == 0:
            zero_mask[h] = True
        else:
            log_counts[h] = ln_comb(n, h) + ln_bigint(coeff) - ln_comb(n * c, e)
    log_counts.flags.writeable = False
    zero_mask.flags.writeable = False
    return log_counts, zero_mask


def avg_distance_spectrum(spec: EnsembleSpec) -> SpectrumTable:
    """ln of the ensemble-average number of weight-h codewords, h = 0..N."""
    log_counts, zero_mask = config_model_log_spectrum(
        spec.n_vars, spec.var_degree, spec.check_degree)
    return SpectrumTable(spec.n_vars, log_counts.copy(), zero_mask.copy())


def expurgate_spectrum(table: SpectrumTable, gamma: int, doubling: bool) -> SpectrumTable:
    """Spectrum of the ensemble with minimum distance forced above gamma.

    Weights 1..gamma are zero-marked (those codewords are gone by
    construction); surviving weights gain ln 2 when doubling is on, the
    price of conditioning on the at-most-half of codes that were removed.
    The h=0 entry is dropped from bound summations and is zero-marked here.
    """
    if not (0 <= gamma <= table.n_vars):
        raise ValueError(f"gamma {gamma} outside 0..{table.n_vars}")
    log_counts = table.log_counts.copy()
    zero_mask = table.zero_mask.copy()
    zero_mask[0:gamma + 1] = True
    if doubling:
        keep = ~zero_mask
        log_counts[keep] += math.log(2.0)
    return SpectrumTable(table.n_vars, log_counts, zero_mask)


# ---------------------------------------------------------------------------
# alist and CSV I/O
# ---------------------------------------------------------------------------

def write_alist(h: ParityCheckMatrix, path: str) -> None:
    """Standard alist text format (1-indexed, zero-padded adjacency rows)."""
    var_deg = h.var_degrees()
    chk_deg = h.check_degrees()
    max_c = int(var_deg.max(initial=0))
    max_d = int(chk_deg.max(initial=0))
    lines = [f"{h.n_vars} {h.n_checks}", f"{max_c} {max_d}"]
    lines.append(" ".join(str(int(x)) for x in var_deg))
    lines.append(" ".join(str(int(x)) for x in chk_deg))
    for i in range(h.n_vars):
        row = [str(int(j) + 1) for j in h.var_neighbors[i]]
        row += ["0"] * (max_c - len(row))
        lines.append(" ".join(row))
    for j in range(h.n_checks):
        row = [str(int(i) + 1) for i in h.check_neighbors[j]]
        row += ["0"] * (max_d - len(row))
        lines.append(" ".join(row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_alist(path: str) -> ParityCheckMatrix:
    with open(path) as f:
        tokens_by_line = [line.split() for line in f if line.strip()]
    try:
        n, m = int(tokens_by_line[0][0]), int(tokens_by_line[0][1])
        var_deg = [int(t) for t in tokens_by_line[2]]
        chk_deg = [int(t) for t in tokens_by_line[3]]
        if len(var_deg) != n or len(chk_deg) != m:
            raise ValueError("degree list length mismatch")
        check_lists = []
        for j in range(m):
            row = [int(t) - 1 for t in tokens_by_line[4 + n + j] if int(t) != 0]
            if len(row) != chk_deg[j]:
                raise ValueError(f"check {j} degree {len(row)} != declared {chk_deg[j]}")
            check_lists.append(row)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed alist file {path}: {exc}") from exc
    h = ParityCheckMatrix.from_check_neighbors(n, check_lists)
    if [int(x) for x in h.var_degrees()] != var_deg:
        raise ValueError(f"malformed alist file {path}: variable degrees disagree with adjacency")
    return h


def write_spectrum_csv(table: SpectrumTable, path: str) -> None:
    with open(path, "w") as f:
        f.write("h,ln_avg_Ah,zero_flag\n")
        for hw in range(table.n_vars + 1):
            if table.zero_mask[hw]:
                f.write(f"{hw},,1\n")
            else:
                f.write(f"{hw},{table.log_counts[hw]:.17g},0\n")


def read_spectrum_csv(path: str) -> SpectrumTable:
    with open(path) as f:
        header = f.readline()
        while header.startswith("#"):   # provenance comments from the CLI
            header = f.readline()
        if not header.startswith("h,"):
            raise ValueError(f"{path} is not a spectrum CSV")
        rows = [line.strip().split(",") for line in f if line.strip()]
    n = len(rows) - 1
    log_counts = np.zeros(n + 1)
    zero_mask = np.zeros(n + 1, dtype=bool)
    for hw_s, val_s, flag_s in rows:
        hw = int(hw_s)
        if flag_s == "1":
            zero_mask[hw] = True
        else:
            log_counts[hw] = float(val_s)
    return SpectrumTable(n, log_counts, zero_mask)
