"""Flooding-schedule sum-product belief propagation in the LLR domain.

Numerics are deliberately sign-symmetric: tanh/arctanh are evaluated on
magnitudes with the sign multiplied back, clips use symmetric bounds, and
message updates only ever negate, multiply, or add terms whose signs flip
coherently when the input LLRs are sign-flipped along a codeword.  That
makes the decoder-symmetry identity

    decode(reflect(y, c)).hard_decision == decode(y).hard_decision XOR c

hold exactly in floating point at every coordinate whose posterior is
nonzero.  Posteriors exactly at 0 decide bit 0 (deterministic tie rule);
tie sets themselves are preserved by the symmetry.
"""

from dataclasses import dataclass

import numpy as np

LLR_CLIP = 30.0          # message saturation
TANH_CLIP = 1.0 - 1e-15  # keeps arctanh finite


@dataclass
class BpOutcome:
    hard_decision: np.ndarray  # uint8 bits, length N
    is_codeword: bool
    iterations_used: int
    converged: bool            # stopped because the syndrome hit zero


class _EdgeIndex:
    """Flat edge layout plus padded gather/scatter index matrices."""

    def __init__(self, h):
        edge_var = []
        chk_rows = []
        for nbrs in h.check_neighbors:
            row = []
            for v in nbrs:
                row.append(len(edge_var))
                edge_var.append(int(v))
            chk_rows.append(row)
        self.n_edges = len(edge_var)
        self.edge_var = np.asarray(edge_var, dtype=np.int64)
        dmax = max((len(r) for r in chk_rows), default=0)
        self.chk_edges = np.full((h.n_checks, dmax), self.n_edges, dtype=np.int64)
        for j, row in enumerate(chk_rows):
            self.chk_edges[j, :len(row)] = row
        var_rows = [[] for _ in range(h.n_vars)]
        for e, v in enumerate(edge_var):
            var_rows[v].append(e)
        cmax = max((len(r) for r in var_rows), default=0)
        self.var_edges = np.full((h.n_vars, cmax), self.n_edges, dtype=np.int64)
        for i, row in enumerate(var_rows):
            self.var_edges[i, :len(row)] = row
        # variable index behind each check slot, sentinel N on padding
        ev_ext = np.append(self.edge_var, h.n_vars)
        self.chk_vars = ev_ext[self.chk_edges]


def _edge_index(h) -> _EdgeIndex:
    idx = getattr(h, "_bp_edge_index", None)
    if idx is None:
        idx = _EdgeIndex(h)
        h._bp_edge_index = idx
    return idx


def _syndrome_ok(bits: np.ndarray, idx: _EdgeIndex) -> bool:
    bits_ext = np.append(bits, np.uint8(0))
    parity = bits_ext[idx.chk_vars].sum(axis=1) % 2
    return not np.any(parity)


def _signed(fn, x):
    # evaluate an odd function on |x| and restore the sign by multiplication,
    # which is exact in IEEE arithmetic no matter how libm rounds
    return np.sign(x) * fn(np.abs(x))


def bp_decode(h, llrs, max_iterations: int = 100) -> BpOutcome:
    """Sum-product decode; returns the hard decision even when it is not a codeword."""
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (h.n_vars,):
        raise ValueError(f"llrs length {llrs.shape} != ({h.n_vars},)")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    idx = _edge_index(h)
    ne = idx.n_edges
    dmax = idx.chk_edges.shape[1]

    bits = (llrs < 0).astype(np.uint8)
    if _syndrome_ok(bits, idx):
        return BpOutcome(bits, True, 0, True)

    v2c = np.clip(llrs[idx.edge_var], -LLR_CLIP, LLR_CLIP)
    c2v_ext = np.zeros(ne + 1)
    t_ext = np.empty(ne + 1)
    for it in range(1, max_iterations + 1):
        t_ext[:ne] = _signed(np.tanh, 0.5 * v2c)
        t_ext[ne] = 1.0
        tmat = t_ext[idx.chk_edges]
        left = np.ones_like(tmat)
        for k in range(1, dmax):
            left[:, k] = left[:, k - 1] * tmat[:, k - 1]
        right = np.ones_like(tmat)
        for k in range(dmax - 2, -1, -1):
            right[:, k] = right[:, k + 1] * tmat[:, k + 1]
        loo = np.clip(left * right, -TANH_CLIP, TANH_CLIP)
        c2v_mat = np.clip(2.0 * _signed(np.arctanh, loo), -LLR_CLIP, LLR_CLIP)
        c2v_ext[idx.chk_edges.ravel()] = c2v_mat.ravel()
        c2v_ext[ne] = 0.0

        posterior = llrs + c2v_ext[idx.var_edges].sum(axis=1)
        bits = (posterior < 0).astype(np.uint8)
        if _syndrome_ok(bits, idx):
            return BpOutcome(bits, True, it, True)
        v2c = np.clip(posterior[idx.edge_var] - c2v_ext[:ne], -LLR_CLIP, LLR_CLIP)

    return BpOutcome(bits, False, max_iterations, False)
