"""Log-domain helpers shared across the package.

Everything probability-like in this package is carried as a natural log
(or log2 where an interface says so) together with an explicit zero mask
where exact zeros can occur.  Large exact integers (binomials, polynomial
coefficients) get their logs through ``ln_bigint`` which stays accurate
for values far beyond float range.
"""

import math

import numpy as np

LN2 = math.log(2.0)


def ln_bigint(n: int) -> float:
    """Natural log of a positive (possibly huge) Python integer."""
    if n <= 0:
        raise ValueError("ln_bigint needs a positive integer")
    nbits = n.bit_length()
    if nbits <= 512:
        return math.log(n)
    shift = nbits - 512
    return math.log(n >> shift) + shift * LN2


def ln_comb(n: int, k: int) -> float:
    """ln C(n, k), exact combinatorics first, then one log."""
    return ln_bigint(math.comb(n, k)) if 0 <= k <= n else float("-inf")


def log2_bigint(n: int) -> float:
    return ln_bigint(n) / LN2


def logsumexp_masked(values: np.ndarray, keep: np.ndarray) -> float:
    """logsumexp over ``values[keep]``; -inf when nothing is kept."""
    vals = np.asarray(values, dtype=float)[np.asarray(keep, dtype=bool)]
    if vals.size == 0:
        return float("-inf")
    m = float(np.max(vals))
    if not np.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(vals - m))))
