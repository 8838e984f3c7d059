"""Conditional-error bound for ensembles whose decoder carries an
approximate ML certificate.

Everything here works per codeword weight h.  For each h the single-weight
error term is bounded, in natural-log domain, by

    ln P1(h) = delta*rho*lam + rho*ln A_h + rho*(n-h)*ln S1 + rho*h*ln S2

with S1 = sum_y psi^(1-1/rho) q0^(1/rho) and
     S2 = sum_y psi^(1-1/rho) q0^((1-lam*rho)/rho) q1^lam,

where psi is a tilting probability measure on the channel output alphabet.
The optimal psi has the closed form psi = zeta * q0 * (1 + kappa*r^lam)^rho
with r = q1/q0, where kappa solves a scalar fixed-point equation and zeta
normalizes.  The per-weight bound is then minimized over (lam, rho) on a
grid with local refinement, and the weight terms are combined (doubled once
for the expurgation argument) and capped at probability one.

Sums over weights span e^600 .. e^-600, so every accumulation is a
log-sum-exp and exact zeros ride on explicit masks, never on -inf tricks.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelModel
from .codes import SpectrumTable, expurgate_spectrum
from .logmath import LN2, logsumexp_masked

logger = logging.getLogger(__name__)

KAPPA_TOL = 1e-10          # absolute fixed-point residual
KAPPA_MAX_ITERS = 10_000
KAPPA_DAMPING = 0.5
_BISECT_STEPS = 200
_OSCILLATION_STRIKES = 5   # consecutive residual increases before bisection
_RHO_FLOOR = 1e-3          # refinement may not leave (0, 1]


class Ds2DomainError(ValueError):
    """Exponent parameters outside rho in (0,1] or lam >= 0."""


class TiltingConvergenceError(RuntimeError):
    def __init__(self, residual: float):
        super().__init__(f"tilting fixed point stalled at residual {residual:.3e}")
        self.residual = residual


@dataclass(frozen=True)
class Ds2Params:
    """One optimized operating point of the per-weight bound."""

    lambda_w: float   # exponent weight on the q1 factor, >= 0
    rho: float        # Gallager-style parameter in (0, 1]
    kappa: float      # fixed-point variable of the optimal tilting measure
    zeta: float       # its normalizer
    beta: float       # h / n

    def __post_init__(self):
        vals = (self.lambda_w, self.rho, self.kappa, self.zeta, self.beta)
        if not all(math.isfinite(v) for v in vals):
            raise Ds2DomainError(f"non-finite parameter in {vals}")
        if self.lambda_w < 0 or not (0.0 < self.rho <= 1.0):
            raise Ds2DomainError(
                f"lambda_w={self.lambda_w}, rho={self.rho} outside domain")
        if self.kappa < 0 or self.zeta <= 0 or not (0.0 < self.beta <= 1.0):
            raise Ds2DomainError(
                f"kappa={self.kappa}, zeta={self.zeta}, beta={self.beta} invalid")


@dataclass(frozen=True)
class TiltingMeasure:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0 or not np.all(w > 0):
            raise ValueError("tilting weights must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-10:
            raise ValueError(f"tilting weights sum to {w.sum()!r}, not 1")


@dataclass(frozen=True)
class BoundTable:
    """Per-weight ln P1(h) for h = 0..N plus the capped total.

    Arrays are indexed by h; entry 0 and every expurgated or structurally
    absent weight is zero-marked.  lambda_w/rho/kappa hold the optimizing
    parameters where defined, NaN elsewhere.  skipped_points counts grid
    evaluations dropped for fixed-point non-convergence.
    """

    n_vars: int
    ln_p1: np.ndarray
    zero_mask: np.ndarray
    lambda_w: np.ndarray
    rho: np.ndarray
    kappa: np.ndarray
    total: float
    delta: float
    gamma: int
    skipped_points: int

    def __post_init__(self):
        if self.total > 0.0:
            raise ValueError(f"total {self.total} above ln 1")


@dataclass(frozen=True)
class OptGrid:
    """Search grid for the (lam, rho) optimization."""

    lambda_min: float = 1e-3
    lambda_max: float = 50.0
    n_lambda: int = 25
    rho_min: float = 0.05
    n_rho: int = 20
    refine_rounds: int = 3
    refine_shrink: float = 5.0
    refine_points: int = 7

    def lambda_grid(self) -> np.ndarray:
        return np.geomspace(self.lambda_min, self.lambda_max, self.n_lambda)

    def rho_grid(self) -> np.ndarray:
        return np.linspace(self.rho_min, 1.0, self.n_rho)


DEFAULT_GRID = OptGrid()


def _check_domain(rho: float, lambda_w: float) -> None:
    if not (0.0 < rho <= 1.0) or lambda_w < 0:
        raise Ds2DomainError(f"rho={rho}, lambda_w={lambda_w} outside domain")


# ---------------------------------------------------------------------------
# bound evaluation
# ---------------------------------------------------------------------------

def _ln_s_terms(ln_psi, rho, lam, lnq0, lnq1):
    """ln S1 and ln S2 for batched (..., S) inputs.

    At rho == 1 the psi exponent is exactly zero and S1 is the total channel
    mass, identically one; it is pinned to 0.0 so the reduction identity
    holds to float exactness rather than to the table's row-sum tolerance.
    """
    rho = np.asarray(rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    a = (1.0 - 1.0 / rho)[..., None]
    t1 = a * ln_psi + lnq0 / rho[..., None]
    ln_s1 = logsumexp(t1, axis=-1)
    e0 = ((1.0 - lam * rho) / rho)[..., None]
    t2 = a * ln_psi + e0 * lnq0 + lam[..., None] * lnq1
    ln_s2 = logsumexp(t2, axis=-1)
    ln_s1 = np.where(rho == 1.0, 0.0, ln_s1)
    return ln_s1, ln_s2


def p1_bound(h: int, params: Ds2Params, psi: TiltingMeasure, log_Ah,
             ch: ChannelModel, delta: float, n: int):
    """ln of the single-weight error term; None passes zero-marks through."""
    _check_domain(params.rho, params.lambda_w)
    if not (1 <= h <= n):
        raise ValueError(f"weight h={h} outside 1..{n}")
    if log_Ah is None:
        return None
    if psi.weights.shape != ch.q0.shape:
        raise ValueError("tilting measure does not match channel alphabet")
    ln_psi = np.log(psi.weights)
    ln_s1, ln_s2 = _ln_s_terms(ln_psi, params.rho, params.lambda_w,
                               ch.log_q0, ch.log_q1)
    rho, lam = params.rho, params.lambda_w
    return float(delta * rho * lam + rho * log_Ah
                 + rho * (n - h) * ln_s1 + rho * h * ln_s2)


# ---------------------------------------------------------------------------
# tilting fixed point
# ---------------------------------------------------------------------------

def _kappa_map(kappa, beta_ratio, rho, lam_logr, lnq0):
    """One application of the fixed-point map, batched over points.

    kappa: (m,); beta_ratio = beta/(1-beta): (m,); lam_logr: (m, S) holding
    lam * ln r; lnq0: (S,).  Internals stay in log domain so r^lam up to
    e^700 never overflows an intermediate power.
    """
    with np.errstate(divide="ignore"):  # kappa == 0 -> ln 0 is fine here
        lnk = np.log(kappa)[:, None]
    ln_u = np.logaddexp(0.0, lnk + lam_logr)        # ln(1 + kappa r^lam)
    w = lnq0[None, :] + (rho[:, None] - 1.0) * ln_u
    num = logsumexp(w, axis=1)
    den = logsumexp(w + lam_logr, axis=1)
    with np.errstate(over="ignore"):
        return beta_ratio * np.exp(num - den)


def _solve_kappa_vec(beta, rho, lam, ch: ChannelModel, kappa0=None):
    """Solve the tilting fixed point elementwise over aligned point arrays.

    Damped iteration first; elements that oscillate or stall fall back to
    bisection on f(kappa) - kappa over [0, beta/(1-beta) * max r^-lam + 1],
    which brackets every root.  Returns (kappa, residual, ok).
    """
    beta = np.asarray(beta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    m = beta.size
    logr = ch.log_q1 - ch.log_q0
    lam_logr = lam[:, None] * logr[None, :]
    beta_ratio = beta / (1.0 - beta)

    kappa = np.array(kappa0, dtype=float, copy=True) if kappa0 is not None \
        else _kappa_map(np.zeros(m), beta_ratio, rho, lam_logr, ch.log_q0)
    kappa = np.where(np.isfinite(kappa) & (kappa >= 0), kappa, 0.0)

    resid = np.full(m, np.inf)
    strikes = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)
    needs_bisect = np.zeros(m, dtype=bool)
    for _ in range(KAPPA_MAX_ITERS):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        fv = _kappa_map(kappa[idx], beta_ratio[idx], rho[idx],
                        lam_logr[idx], ch.log_q0)
        r_new = np.abs(fv - kappa[idx])
        bad = ~np.isfinite(fv)
        done = (r_new <= KAPPA_TOL) & ~bad
        worse = (r_new >= resid[idx]) & ~bad & ~done
        strikes[idx] = np.where(worse, strikes[idx] + 1, 0)
        resid[idx] = np.where(bad, np.inf, r_new)
        upd = ~done & ~bad
        kappa[idx[upd]] = (KAPPA_DAMPING * kappa[idx][upd]
                           + (1 - KAPPA_DAMPING) * fv[upd])
        to_bisect = bad | (strikes[idx] >= _OSCILLATION_STRIKES)
        needs_bisect[idx[to_bisect & ~done]] = True
        active[idx[done | to_bisect]] = False
    needs_bisect |= active  # max-iter leftovers

    if needs_bisect.any():
        idx = np.flatnonzero(needs_bisect)
        with np.errstate(over="ignore"):
            hi = beta_ratio[idx] * np.exp(np.max(-lam_logr[idx], axis=1)) + 1.0
        hi = np.where(np.isfinite(hi), hi, 1e300)
        lo = np.zeros(idx.size)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            fv = _kappa_map(mid, beta_ratio[idx], rho[idx],
                            lam_logr[idx], ch.log_q0)
            g_pos = fv >= mid
            lo = np.where(g_pos, mid, lo)
            hi = np.where(g_pos, hi, mid)
        kappa[idx] = 0.5 * (lo + hi)
        fv = _kappa_map(kappa[idx], beta_ratio[idx], rho[idx],
                        lam_logr[idx], ch.log_q0)
        resid[idx] = np.abs(fv - kappa[idx])

    ok = np.isfinite(kappa) & (resid <= KAPPA_TOL)
    return kappa, resid, ok


def _psi_from_kappa(kappa, rho, lam, ch: ChannelModel):
    """ln psi and zeta for solved points; shapes (m, S) and (m,)."""
    logr = ch.log_q1 - ch.log_q0
    with np.errstate(divide="ignore"):
        lnk = np.log(np.asarray(kappa, dtype=float))[:, None]
    ln_u = np.logaddexp(0.0, lnk + np.asarray(lam)[:, None] * logr[None, :])
    t = ch.log_q0[None, :] + np.asarray(rho)[:, None] * ln_u
    ln_zeta = -logsumexp(t, axis=1)
    return ln_zeta[:, None] + t, np.exp(ln_zeta)


def solve_tilting(beta: float, rho: float, lambda_w: float, ch: ChannelModel):
    """Optimal tilting measure at one (beta, rho, lam) operating point."""
    _check_domain(rho, lambda_w)
    if not (0.0 < beta < 1.0):
        raise Ds2DomainError(f"beta={beta} outside (0, 1)")
    b = np.array([beta])
    r = np.array([rho])
    l = np.array([lambda_w])
    kappa, resid, ok = _solve_kappa_vec(b, r, l, ch)
    if not ok[0]:
        raise TiltingConvergenceError(float(resid[0]))
    ln_psi, zeta = _psi_from_kappa(kappa, r, l, ch)
    psi = TiltingMeasure(np.exp(ln_psi[0]))
    params = Ds2Params(lambda_w=lambda_w, rho=rho, kappa=float(kappa[0]),
                       zeta=float(zeta[0]), beta=beta)
    return psi, params


# ---------------------------------------------------------------------------
# per-weight optimization, batched over h
# ---------------------------------------------------------------------------

def _eval_solved(h_arr, log_ah, n, delta, rho, lam, kappa, ch):
    """Objective at solved kappa points aligned with h_arr."""
    ln_psi, zeta = _psi_from_kappa(kappa, rho, lam, ch)
    ln_s1, ln_s2 = _ln_s_terms(ln_psi, rho, lam, ch.log_q0, ch.log_q1)
    val = (delta * rho * lam + rho * log_ah
           + rho * (n - h_arr) * ln_s1 + rho * h_arr * ln_s2)
    return val, zeta


def _rho_one_values(h_arr, log_ah, n, delta, lam_grid, ch):
    """Closed-form column at rho=1 where the tilting measure cancels."""
    # ln S2(rho=1) per lam: sum_y q0^(1-lam) q1^lam
    t = (1.0 - lam_grid)[:, None] * ch.log_q0[None, :] \
        + lam_grid[:, None] * ch.log_q1[None, :]
    ln_s2 = logsumexp(t, axis=1)                          # (L,)
    vals = delta * lam_grid[:, None] + log_ah[None, :] \
        + ln_s2[:, None] * h_arr[None, :]                 # (L, m)
    return vals


def _optimize_batch(h_arr, log_ah, ch: ChannelModel, delta: float, n: int,
                    grid: OptGrid):
    """Minimize the per-weight bound for every h at once.

    Returns per-h arrays (value, lam, rho, kappa, zeta) plus the count of
    grid points skipped for non-convergence.  The rho=1 column needs no
    fixed point and seeds the running best, so every h always ends with a
    valid operating point even where the kappa solve cannot reach tolerance
    (beta == 1 is solved in that column's closed form).
    """
    h_arr = np.asarray(h_arr, dtype=float)
    log_ah = np.asarray(log_ah, dtype=float)
    m = h_arr.size
    beta = h_arr / float(n)
    skipped = 0

    lam_grid = np.unique(np.concatenate([grid.lambda_grid(), [0.5]]))
    base = _rho_one_values(h_arr, log_ah, n, delta, lam_grid, ch)
    pick = np.argmin(base, axis=0)
    best_val = base[pick, np.arange(m)]
    best_lam = lam_grid[pick]
    best_rho = np.ones(m)
    best_kappa = np.zeros(m)
    best_zeta = np.ones(m)

    solvable = beta < 1.0   # beta == 1 is covered by the rho=1 column
    sol = np.flatnonzero(solvable)
    if sol.size:
        ms = sol.size
        hs, las, bs = h_arr[sol], log_ah[sol], beta[sol]

        def sweep(lam_pts, rho_pts):
            # lam_pts, rho_pts: (P, ms) candidate sheets; one flat solve
            nonlocal skipped
            p = lam_pts.shape[0]
            flat = (bs[None, :].repeat(p, axis=0).ravel(),
                    rho_pts.ravel(), lam_pts.ravel())
            kappa, _, ok = _solve_kappa_vec(*flat, ch)
            skipped += int(np.count_nonzero(~ok))
            val, zeta = _eval_solved(
                np.tile(hs, p), np.tile(las, p), n, delta,
                flat[1], flat[2], kappa, ch)
            val = np.where(ok, val, np.inf).reshape(p, ms)
            pick = np.argmin(val, axis=0)
            cols = np.arange(ms)
            win = val[pick, cols] < best_val[sol]
            w = sol[win]
            best_val[w] = val[pick, cols][win]
            best_lam[w] = lam_pts[pick, cols][win]
            best_rho[w] = rho_pts[pick, cols][win]
            best_kappa[w] = kappa.reshape(p, ms)[pick, cols][win]
            best_zeta[w] = zeta.reshape(p, ms)[pick, cols][win]

        rho_interior = grid.rho_grid()[grid.rho_grid() < 1.0]
        ll, rr = np.meshgrid(lam_grid, rho_interior, indexing="ij")
        sweep(np.repeat(ll.ravel()[:, None], ms, axis=1),
              np.repeat(rr.ravel()[:, None], ms, axis=1))

        lam_w = math.log(grid.lambda_max / grid.lambda_min) / (grid.n_lambda - 1)
        rho_w = (1.0 - grid.rho_min) / (grid.n_rho - 1)
        offsets = np.linspace(-1.0, 1.0, grid.refine_points)
        du, dv = np.meshgrid(offsets, offsets, indexing="ij")
        du, dv = du.ravel()[:, None], dv.ravel()[:, None]
        for rnd in range(grid.refine_rounds):
            wl = lam_w / grid.refine_shrink ** rnd
            wr = rho_w / grid.refine_shrink ** rnd
            lam_pts = best_lam[sol][None, :] * np.exp(du * wl)
            rho_pts = np.clip(best_rho[sol][None, :] + dv * wr, _RHO_FLOOR, 1.0)
            sweep(lam_pts, rho_pts)

    if skipped:
        logger.debug("skipped %d non-convergent grid evaluations", skipped)
    return best_val, best_lam, best_rho, best_kappa, best_zeta, skipped


def optimize_weight(h: int, log_Ah, ch: ChannelModel, delta: float, n: int,
                    grid: OptGrid = DEFAULT_GRID):
    """Best achievable single-weight bound and the parameters reaching it."""
    if not (1 <= h <= n):
        raise ValueError(f"weight h={h} outside 1..{n}")
    if delta < 0:
        raise ValueError(f"delta={delta} negative")
    if log_Ah is None:
        return None, None
    val, lam, rho, kappa, zeta, _ = _optimize_batch(
        np.array([h]), np.array([log_Ah]), ch, delta, n, grid)
    params = Ds2Params(lambda_w=float(lam[0]), rho=float(rho[0]),
                       kappa=float(kappa[0]), zeta=float(zeta[0]),
                       beta=h / float(n))
    return float(val[0]), params


def overall_bound(delta: float, gamma: int, ch: ChannelModel,
                  spectrum: SpectrumTable, grid: OptGrid = DEFAULT_GRID) -> BoundTable:
    """Ensemble error bound after expurgation to minimum distance > gamma.

    The factor 2 that prices the at-least-half survival of the expurgated
    ensemble is applied here, exactly once, on the summed total.
    """
    if delta < 0:
        raise ValueError(f"delta={delta} negative")
    n = spectrum.n_vars
    exp_spec = expurgate_spectrum(spectrum, gamma, doubling=True)
    keep = ~exp_spec.zero_mask
    keep[0] = False
    hs = np.flatnonzero(keep)

    ln_p1 = np.full(n + 1, np.nan)
    lam = np.full(n + 1, np.nan)
    rho = np.full(n + 1, np.nan)
    kappa = np.full(n + 1, np.nan)
    zero_mask = np.ones(n + 1, dtype=bool)
    skipped = 0
    if hs.size:
        val, lam_b, rho_b, kap_b, _, skipped = _optimize_batch(
            hs, exp_spec.log_counts[hs], ch, delta, n, grid)
        ln_p1[hs] = val
        lam[hs] = lam_b
        rho[hs] = rho_b
        kappa[hs] = kap_b
        zero_mask[hs] = False

    total = min(LN2 + logsumexp_masked(ln_p1, ~zero_mask), 0.0)
    for arr in (ln_p1, zero_mask, lam, rho, kappa):
        arr.setflags(write=False)
    return BoundTable(n_vars=n, ln_p1=ln_p1, zero_mask=zero_mask,
                      lambda_w=lam, rho=rho, kappa=kappa, total=float(total),
                      delta=float(delta), gamma=int(gamma),
                      skipped_points=int(skipped))


def write_bound_csv(table: BoundTable, path: str) -> None:
    """Per-weight rows (h, ln_P1, lambda, rho, kappa) plus a summary row."""
    lines = ["h,ln_P1,lambda,rho,kappa"]
    for h in range(1, table.n_vars + 1):
        if table.zero_mask[h]:
            continue
        lines.append("%d,%.17g,%.17g,%.17g,%.17g" % (
            h, table.ln_p1[h], table.lambda_w[h], table.rho[h], table.kappa[h]))
    lines.append("total,%.17g,delta=%.17g,gamma=%d,skipped=%d" % (
        table.total, table.delta, table.gamma, table.skipped_points))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
