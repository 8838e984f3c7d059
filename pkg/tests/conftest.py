"""Shared fixtures: tiny codes whose codeword sets fit in memory.

Oracles here take the dumb route on purpose (dense matrices, 2^n scans,
exact integers) so they share no code path with the package.
"""

import math

import numpy as np
import pytest

from amlc.channel import mbios_from_table
from amlc.codes import ParityCheckMatrix


def enumerate_codewords(h: ParityCheckMatrix) -> np.ndarray:
    """All codewords by exhaustive scan; rows of a (K, n) uint8 array."""
    n = h.n_vars
    assert n <= 20, "exhaustive enumeration capped to keep tests quick"
    dense = h.to_dense().astype(np.int64)
    words = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(np.int64)
    ok = (words @ dense.T) % 2 == 0
    return words[ok.all(axis=1)].astype(np.uint8)


def ml_objective_oracle(h: ParityCheckMatrix, llrs) -> tuple:
    """(min objective, list of argmin codewords) by brute force."""
    cws = enumerate_codewords(h)
    vals = cws @ np.asarray(llrs, dtype=float)
    best = vals.min()
    argmins = [cws[i] for i in np.flatnonzero(np.isclose(vals, best, atol=1e-12))]
    return float(best), argmins


def awgn_like_channel(sigma: float = 0.9, n_bins: int = 48):
    """Symmetric finite channel with many distinct LLR magnitudes.

    Discretizes a unit-means binary-input Gaussian onto symmetric bin
    centers; the rich alphabet keeps LP optima unique in random tests,
    which lattice-valued LLR tables (BSC-like) do not.
    """
    half = n_bins // 2
    centers = np.linspace(0.12, 4.0, half)
    symbols = np.concatenate([-centers[::-1], centers])
    q0 = np.exp(-((symbols - 1.0) ** 2) / (2 * sigma * sigma))
    q0 = np.maximum(q0 / q0.sum(), 1e-9)
    q0 = q0 / q0.sum()
    q1 = q0[::-1].copy()
    return mbios_from_table(symbols, q0, q1)


@pytest.fixture
def cycle3():
    # shortest cycle code: codewords 000 and 111, d_min = 3
    return ParityCheckMatrix.from_dense([[1, 1, 0], [0, 1, 1], [1, 0, 1]])


@pytest.fixture
def dmin2_code():
    # x1 = x2 forced, x3 = 0: codewords {000, 110}, d_min = 2
    return ParityCheckMatrix.from_dense([[1, 1, 0], [1, 1, 1]])


@pytest.fixture
def hamming74():
    return ParityCheckMatrix.from_dense([
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ])
