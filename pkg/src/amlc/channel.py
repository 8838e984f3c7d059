"""Memoryless binary-input output-symmetric channels.

Two kinds: the BSC (outputs are bits, involution y -> 1-y) and finite
signed-alphabet MBIOS tables (involution y -> -y).  Symmetry
Q(y|0) = Q(-y|1) is validated at construction; it is what makes the
all-zero-codeword reductions used elsewhere sound.
"""

from dataclasses import dataclass

import numpy as np

P_MIN = 1e-12          # keep LLRs finite; degenerate channels are rejected
ROW_SUM_TOL = 1e-12
PAIR_TOL = 1e-12


@dataclass
class ChannelModel:
    """Finite-output channel given by Q(y|0), Q(y|1) over an ordered alphabet.

    symbols holds the output alphabet (bits 0/1 for the BSC, signed reals
    otherwise); reflect_index[k] is the position of the involution image of
    symbols[k].  Immutable after construction.
    """

    kind: str                 # "bsc" | "mbios"
    symbols: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    reflect_index: np.ndarray
    p: float | None = None    # BSC crossover, when kind == "bsc"

    def __post_init__(self):
        self.symbols.flags.writeable = False
        self.q0.flags.writeable = False
        self.q1.flags.writeable = False
        self.reflect_index.flags.writeable = False

    @property
    def log_q0(self) -> np.ndarray:
        return np.log(self.q0)

    @property
    def log_q1(self) -> np.ndarray:
        return np.log(self.q1)


def _validate_table(symbols, q0, q1) -> np.ndarray:
    if np.any(q0 <= 0) or np.any(q1 <= 0) or np.any(q0 >= 1) or np.any(q1 >= 1):
        raise ValueError("transition probabilities must lie strictly in (0,1)")
    if abs(q0.sum() - 1.0) > ROW_SUM_TOL or abs(q1.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError("channel rows must each sum to 1 within 1e-12")
    # pair each symbol with its negation and check Q(y|0) == Q(-y|1)
    reflect_index = np.empty(len(symbols), dtype=np.int64)
    for k, y in enumerate(symbols):
        matches = np.flatnonzero(np.isclose(symbols, -y, rtol=0, atol=0))
        if matches.size != 1:
            raise ValueError(f"alphabet lacks a unique involution image for symbol {y}")
        reflect_index[k] = matches[0]
    if np.max(np.abs(q0 - q1[reflect_index])) > PAIR_TOL:
        raise ValueError("asymmetric table: Q(y|0) != Q(-y|1)")
    # store q1 as the exact float mirror of q0 so the reflection identity
    # llr(-y) = -llr(y) holds bit-for-bit, not merely within tolerance
    q1_exact = q0[reflect_index].copy()
    return reflect_index, q1_exact


def bsc(p: float) -> ChannelModel:
    """Binary symmetric channel with crossover probability p."""
    if not (P_MIN <= p <= 1 - P_MIN):
        raise ValueError(f"BSC crossover p={p} outside [{P_MIN}, {1 - P_MIN}]")
    symbols = np.array([0, 1], dtype=np.int64)
    q0 = np.array([1 - p, p])
    q1 = np.array([p, 1 - p])
    reflect_index = np.array([1, 0], dtype=np.int64)
    return ChannelModel("bsc", symbols, q0, q1, reflect_index, p=float(p))


def mbios_from_table(symbols, q0, q1) -> ChannelModel:
    """Finite MBIOS channel from explicit Q(y|0), Q(y|1) rows.

    Symbols must form a sign-symmetric alphabet (y and -y both present,
    y = 0 allowed); rows must be strictly positive and sum to one.
    """
    symbols = np.asarray(symbols, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if not (len(symbols) == len(q0) == len(q1)):
        raise ValueError("symbols, q0, q1 must have equal length")
    if np.unique(symbols).size != symbols.size:
        raise ValueError("duplicate output symbols")
    reflect_index, q1 = _validate_table(symbols, q0, q1)
    return ChannelModel("mbios", symbols, q0, q1, reflect_index)


def mbios_from_csv(path: str) -> ChannelModel:
    """Load rows y, Q(y|0), Q(y|1) from a CSV file (header optional)."""
    symbols, q0, q1 = [], [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                y, a, b = float(parts[0]), float(parts[1]), float(parts[2])
            except (IndexError, ValueError):
                if not symbols:  # tolerate a header line
                    continue
                raise ValueError(f"malformed channel CSV row: {line!r}")
            symbols.append(y)
            q0.append(a)
            q1.append(b)
    if not symbols:
        raise ValueError(f"no channel rows found in {path}")
    return mbios_from_table(symbols, q0, q1)


def _symbol_indices(ch: ChannelModel, outputs: np.ndarray) -> np.ndarray:
    if ch.kind == "bsc":
        idx = np.asarray(outputs, dtype=np.int64)
        if np.any((idx != 0) & (idx != 1)):
            raise ValueError("unknown symbol for BSC output (expected bits)")
        return idx
    outputs = np.asarray(outputs, dtype=float)
    sorter = np.argsort(ch.symbols)
    pos = np.searchsorted(ch.symbols, outputs, sorter=sorter)
    pos = np.clip(pos, 0, len(ch.symbols) - 1)
    idx = sorter[pos]
    if np.any(ch.symbols[idx] != outputs):
        bad = outputs[ch.symbols[idx] != outputs][0]
        raise ValueError(f"unknown symbol {bad} for this channel")
    return idx


def transmit(word, ch: ChannelModel, rng_seed: int) -> np.ndarray:
    """i.i.d. channel outputs for `word`, deterministic given rng_seed."""
    word = np.asarray(word, dtype=np.int64)
    rng = np.random.default_rng(rng_seed)
    if ch.kind == "bsc":
        flips = rng.random(word.size) < ch.p
        return (word ^ flips.astype(np.int64)).astype(np.int64)
    u = rng.random(word.size)
    cdf0 = np.cumsum(ch.q0)
    cdf1 = np.cumsum(ch.q1)
    idx0 = np.searchsorted(cdf0, u, side="right")
    idx1 = np.searchsorted(cdf1, u, side="right")
    idx = np.where(word == 1, idx1, idx0)
    idx = np.clip(idx, 0, len(ch.symbols) - 1)
    return ch.symbols[idx]


def llr(ch: ChannelModel, outputs) -> np.ndarray:
    """Per-symbol ln Q(y|0) - ln Q(y|1)."""
    idx = _symbol_indices(ch, np.asarray(outputs))
    return ch.log_q0[idx] - ch.log_q1[idx]


def reflect(outputs, word, ch: ChannelModel) -> np.ndarray:
    """Apply the channel involution at every position where word is 1."""
    outputs = np.asarray(outputs)
    word = np.asarray(word, dtype=np.int64)
    if outputs.shape != word.shape:
        raise ValueError(f"length mismatch: outputs {outputs.shape}, word {word.shape}")
    if ch.kind == "bsc":
        return (np.asarray(outputs, dtype=np.int64) ^ word).astype(np.int64)
    idx = _symbol_indices(ch, outputs)
    reflected = ch.symbols[ch.reflect_index[idx]]
    return np.where(word == 1, reflected, outputs)
