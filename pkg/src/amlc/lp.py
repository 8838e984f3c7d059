"""Exact LP decoding over the fundamental polytope, ML-certificate
detection, and the fractional-distance lower bound on minimum distance.

Two equivalent formulations of the same polytope are available:

* explicit: per check j, one convex-combination weight for each of the
  2^(d_j - 1) even-weight local words, tied to the bit variables.  Exact
  and direct, exponential in check degree, used for d_j <= 8 by default.
* adaptive: bit variables only, constrained by the odd-set parity
  inequalities; violated inequalities are generated by separation until
  none remain, which certifies membership in the identical feasible set.

Every solve carries a certified optimality gap obtained by weak duality:
with all variables boxed in [0,1], any multiplier vector yields the valid
lower bound  sum_i min(0, r_i) - u.b_ub - v.b_eq  on the optimum, so the
certificate does not depend on trusting solver conventions or tolerances.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

DEFAULT_GAP_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
EXPLICIT_DEGREE_CAP = 8
FACET_DEGREE_CAP = 14     # odd-subset facet enumeration is 2^(d-1) per check
LB_ROUNDING_GUARD = 1e-6
_BOUND_SLACK = 1e-6       # how far out of [0,1] a solver answer may sit
_CUT_TOL = 1e-9
_MAX_CUT_ROUNDS = 200


class LpSolverError(RuntimeError):
    """The LP back end failed or could not certify the required gap."""


class DegreeCapExceeded(ValueError):
    """A check degree exceeds what the selected formulation can instantiate."""


@dataclass
class LpSolution:
    pseudocodeword: np.ndarray  # lambda in [0,1]^N, clamped
    objective: float            # P(lambda) = sum_i lambda_i * llr_i
    is_integral: bool           # every coordinate within 1e-6 of a bit
    certified_gap: float        # primal minus weak-duality dual bound, >= 0
    local_words: list | None = None  # optional per-check (words, weights) hook


def objective(word, llrs) -> float:
    """P(x) = sum_i x_i * llr_i."""
    word = np.asarray(word, dtype=float)
    llrs = np.asarray(llrs, dtype=float)
    if word.shape != llrs.shape:
        raise ValueError(f"length mismatch: word {word.shape}, llrs {llrs.shape}")
    return float(np.dot(word, llrs))


def _dual_bound(c_vec, res, a_ub=None, b_ub=None, a_eq=None, b_eq=None):
    """Weak-duality lower bound on the optimum, valid for any multipliers.

    All variables are boxed in [0,1], so for u >= 0 (<= rows) and free v
    (= rows):  bound = sum_i min(0, r_i) - u.b_ub - v.b_eq  with
    r = c + A_ub'u + A_eq'v.  Multipliers come from the solver but only
    their validity (u >= 0) is needed, never their convention.
    """
    r = np.array(c_vec, dtype=float)
    bound = 0.0
    if a_ub is not None and b_ub is not None and len(b_ub):
        u = np.maximum(-np.asarray(res.ineqlin.marginals, dtype=float), 0.0)
        r += a_ub.T @ u
        bound -= float(np.dot(u, b_ub))
    if a_eq is not None and b_eq is not None and len(b_eq):
        v = -np.asarray(res.eqlin.marginals, dtype=float)
        r += a_eq.T @ v
        bound -= float(np.dot(v, b_eq))
    bound += float(np.sum(np.minimum(r, 0.0)))
    return bound


def _even_subsets(degree: int):
    """All even-cardinality position subsets of range(degree), empty set first."""
    out = []
    for size in range(0, degree + 1, 2):
        out.extend(itertools.combinations(range(degree), size))
    return out


def _explicit_model(h):
    """Sparse equality system of the explicit formulation, cached on h."""
    cached = getattr(h, "_lp_explicit_model", None)
    if cached is not None:
        return cached
    n = h.n_vars
    rows, cols, vals, b_eq = [], [], [], []
    w_slices = []   # (offset, local_words) per check
    offset = n
    row = 0
    for j, nbrs in enumerate(h.check_neighbors):
        dj = len(nbrs)
        if dj == 0:
            w_slices.append((offset, []))
            continue
        words = _even_subsets(dj)
        w_slices.append((offset, words))
        # convex-combination row: sum_g w_{j,g} = 1
        for g in range(len(words)):
            rows.append(row)
            cols.append(offset + g)
            vals.append(1.0)
        b_eq.append(1.0)
        row += 1
        # consistency rows: c_i - sum_{g: position k in g} w_{j,g} = 0
        for k, i in enumerate(nbrs):
            rows.append(row)
            cols.append(int(i))
            vals.append(1.0)
            for g, word in enumerate(words):
                if k in word:
                    rows.append(row)
                    cols.append(offset + g)
                    vals.append(-1.0)
            b_eq.append(0.0)
            row += 1
        offset += len(words)
    a_eq = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(row, offset))
    model = {"a_eq": a_eq, "b_eq": np.asarray(b_eq), "n_cols": offset,
             "w_slices": w_slices}
    h._lp_explicit_model = model
    return model


def _check_solution(res, context: str):
    if res.status != 0 or res.x is None:
        raise LpSolverError(f"{context}: solver status {res.status} ({res.message})")


def _finish(lam_raw, llrs, dual_bound, gap_tol):
    if np.min(lam_raw) < -_BOUND_SLACK or np.max(lam_raw) > 1 + _BOUND_SLACK:
        raise LpSolverError("solution violates [0,1] bounds beyond tolerance")
    lam = np.clip(lam_raw, 0.0, 1.0) + 0.0  # the +0.0 clears negative zeros
    obj = objective(lam, llrs)
    gap = max(obj - dual_bound, 0.0)
    if gap > gap_tol * (1.0 + abs(obj)):
        raise LpSolverError(f"certified gap {gap:.3e} exceeds tolerance")
    is_integral = bool(np.max(np.abs(lam - np.rint(lam))) <= INTEGRALITY_TOL)
    return lam, obj, gap, is_integral


def _solve_explicit(h, llrs, gap_tol, degree_cap, keep_local_words):
    max_deg = max((len(a) for a in h.check_neighbors), default=0)
    if max_deg > degree_cap:
        raise DegreeCapExceeded(
            f"max check degree {max_deg} > explicit cap {degree_cap}; use adaptive mode")
    model = _explicit_model(h)
    c_vec = np.zeros(model["n_cols"])
    c_vec[:h.n_vars] = llrs
    res = linprog(c_vec, A_eq=model["a_eq"], b_eq=model["b_eq"],
                  bounds=(0, 1), method="highs")
    _check_solution(res, "explicit lp_decode")
    dual = _dual_bound(c_vec, res, a_eq=model["a_eq"], b_eq=model["b_eq"])
    lam, obj, gap, is_integral = _finish(res.x[:h.n_vars], llrs, dual, gap_tol)
    local = None
    if keep_local_words:
        local = []
        for (offset, words), nbrs in zip(model["w_slices"], h.check_neighbors):
            weights = res.x[offset:offset + len(words)]
            local.append((words, weights.copy()))
    return LpSolution(lam, obj, is_integral, gap, local)


def _separate(h, x, existing, tol=_CUT_TOL):
    """Most-violated odd-set parity inequality per check, if any.

    For check j the maximizing odd set takes every position with x > 1/2,
    adjusting by the coordinate nearest 1/2 when that count is even.
    Returns new cuts as (check index, frozen odd set) pairs.
    """
    found = []
    for j, nbrs in enumerate(h.check_neighbors):
        if len(nbrs) == 0:
            continue
        xv = x[nbrs]
        in_s = xv > 0.5
        if int(in_s.sum()) % 2 == 0:
            k = int(np.argmin(np.abs(xv - 0.5)))
            in_s[k] = ~in_s[k]
        lhs = float(xv[in_s].sum() - xv[~in_s].sum())
        if lhs - (int(in_s.sum()) - 1) > tol:
            key = (j, frozenset(int(i) for i in np.asarray(nbrs)[in_s]))
            if key not in existing:
                found.append(key)
    return found


def _cut_rows(h, cuts, n):
    rows, cols, vals, rhs = [], [], [], []
    for row, (j, s) in enumerate(cuts):
        for i in h.check_neighbors[j]:
            rows.append(row)
            cols.append(int(i))
            vals.append(1.0 if int(i) in s else -1.0)
        rhs.append(float(len(s) - 1))
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(cuts), n))
    return a, np.asarray(rhs)


def _solve_adaptive(h, c_vec, a_eq=None, b_eq=None, bounds=None,
                    context="adaptive lp"):
    """Cut-generation solve of min c.x over the fundamental polytope.

    Optional extra equality rows / variable bound overrides support the
    facet-restricted LPs of the fractional-distance computation.  Returns
    (x, primal-dual certified data, feasible) where feasible is False when
    the restricted problem is empty.
    """
    n = h.n_vars
    if bounds is None:
        bounds = (0, 1)
    cuts: list = []
    cut_set: set = set()
    res = None
    a_ub = b_ub = None
    for _ in range(_MAX_CUT_ROUNDS):
        a_ub, b_ub = (_cut_rows(h, cuts, n) if cuts else (None, None))
        res = linprog(c_vec, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=bounds, method="highs")
        if res.status == 2:
            return None, None, False
        _check_solution(res, context)
        new = _separate(h, res.x, cut_set)
        if not new:
            dual = _dual_bound(c_vec, res, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq)
            return res.x, dual, True
        cuts.extend(new)
        cut_set.update(new)
    raise LpSolverError(f"{context}: cut generation failed to settle in "
                        f"{_MAX_CUT_ROUNDS} rounds")


def lp_decode(h, llrs, mode: str = "auto", gap_tol: float = DEFAULT_GAP_TOL,
              degree_cap: int = EXPLICIT_DEGREE_CAP,
              keep_local_words: bool = False) -> LpSolution:
    """Certified optimum of the fundamental-polytope relaxation.

    mode: "explicit", "adaptive", or "auto" (explicit when every check
    degree fits the cap).  keep_local_words exposes the per-check
    convex-combination weights (explicit mode only).
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (h.n_vars,):
        raise ValueError(f"llrs length {llrs.shape} != ({h.n_vars},)")
    max_deg = max((len(a) for a in h.check_neighbors), default=0)
    if mode == "auto":
        mode = "explicit" if max_deg <= degree_cap else "adaptive"
    if mode == "explicit":
        return _solve_explicit(h, llrs, gap_tol, degree_cap, keep_local_words)
    if mode != "adaptive":
        raise ValueError(f"unknown lp mode {mode!r}")
    x, dual, feasible = _solve_adaptive(h, llrs, context="adaptive lp_decode")
    if not feasible:
        raise LpSolverError("adaptive lp_decode reported infeasible; H invalid?")
    lam, obj, gap, is_integral = _finish(x, llrs, dual, gap_tol)
    return LpSolution(lam, obj, is_integral, gap, None)


def ml_certificate(sol: LpSolution, h) -> bool:
    """True iff the LP answer is integral and rounds to an actual codeword."""
    from .codes import is_codeword
    if not sol.is_integral:
        return False
    rounded = np.rint(sol.pseudocodeword).astype(np.uint8)
    return is_codeword(h, rounded)


# ---------------------------------------------------------------------------
# fractional distance
# ---------------------------------------------------------------------------

def _all_parity_rows(h):
    """Every odd-set parity inequality of every check (the full projected system)."""
    cuts = []
    for j, nbrs in enumerate(h.check_neighbors):
        dj = len(nbrs)
        if dj == 0:
            continue
        if dj > FACET_DEGREE_CAP:
            raise DegreeCapExceeded(
                f"facet enumeration needs 2^{dj - 1} rows for check {j}; "
                f"cap is degree {FACET_DEGREE_CAP}")
        for size in range(1, dj + 1, 2):
            for comb in itertools.combinations(range(dj), size):
                cuts.append((j, frozenset(int(nbrs[k]) for k in comb)))
    return cuts


def _facet_list(h):
    """Facet candidates of the fundamental polytope that do not contain 0.

    Odd-set inequalities are tight at 0 exactly when |S| = 1, so sets of
    size >= 3 qualify; every x_i <= 1 facet qualifies.
    """
    facets = []
    for j, nbrs in enumerate(h.check_neighbors):
        dj = len(nbrs)
        for size in range(3, dj + 1, 2):
            for comb in itertools.combinations(range(dj), size):
                facets.append(("parity", j, frozenset(int(nbrs[k]) for k in comb)))
    for i in range(h.n_vars):
        facets.append(("var", i))
    return facets


def fractional_distance(h, stop_at: int | None = None):
    """Minimum weight over nonzero vertices of the fundamental polytope.

    Solves one LP per facet not containing the origin (each nonzero vertex
    is exposed by at least one of them) and takes the minimum.  When
    stop_at is given, returns early once the running minimum already
    forces ceil(min - guard) <= stop_at: the true minimum can only be
    lower, so a distance-bound rejection decided from the partial value is
    exact.  Returns (value, completed).
    """
    n = h.n_vars
    max_deg = max((len(a) for a in h.check_neighbors), default=0)
    ones = np.ones(n)
    best = math.inf
    use_full_system = max_deg <= FACET_DEGREE_CAP

    if use_full_system:
        all_rows = _all_parity_rows(h)
        a_ub, b_ub = _cut_rows(h, all_rows, n)
    facets = _facet_list(h)

    for facet in facets:
        if facet[0] == "parity":
            _, j, s = facet
            row, rhs = _cut_rows(h, [(j, s)], n)
            a_eq, b_eq, bounds = row, rhs, (0, 1)
        else:
            _, i = facet
            a_eq, b_eq = None, None
            bounds = [(0.0, 1.0)] * n
            bounds[i] = (1.0, 1.0)
        if use_full_system:
            res = linprog(ones, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                          bounds=bounds, method="highs")
            if res.status == 2:
                continue
            _check_solution(res, "fractional distance facet lp")
            value = float(res.fun)
        else:
            x, _, feasible = _solve_adaptive(h, ones, a_eq=a_eq, b_eq=b_eq,
                                             bounds=bounds,
                                             context="fractional distance facet lp")
            if not feasible:
                continue
            value = float(np.dot(ones, x))
        if value < best:
            best = value
            if stop_at is not None and math.ceil(best - LB_ROUNDING_GUARD) <= stop_at:
                return best, False
    if not math.isfinite(best):
        raise LpSolverError("no facet LP was feasible; degenerate H?")
    return best, True


def min_distance_lb(h, stop_at: int | None = None) -> int:
    """Integer lower bound on d_min via the fractional distance.

    ceil(fd - 1e-6) with fd <= d_min guards against upward float noise.
    stop_at enables the decision-exact early exit of fractional_distance;
    the returned value is then only an upper bound on the full LB, but its
    comparison against stop_at is exact.
    """
    value, _ = fractional_distance(h, stop_at=stop_at)
    return max(1, math.ceil(value - LB_ROUNDING_GUARD))
