"""
Blocklength / SNR design that maximises ESP (equivalently minimises average SL).

Equal-SNR regime throughout: Bob and Eve share one SNR `snr`. Three problems:

* :func:`optimal_blocklength` -- best integer L in (D, L_max) at fixed SNR.
* :func:`optimal_snr` -- best SNR at fixed L.
* :func:`joint_optimize` -- coordinate ascent alternating the two.

Each single-variable solver collects candidates from the saturated closed
form (rate equal to capacity, P_e = 1/2) and from every interior stationary
point of dESP, located by sign bracketing and bisection, then keeps the
candidate with the largest exact ESP.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import bisect

from seclat import latency
from seclat.errors import DomainError, InfeasibleError, InfiniteLatencyError, NoThresholdError
from seclat.fbl import (
    LN2,
    _divergence_term,
    _ret,
    _tail_argument,
    capacity,
    detection_prob,
    esp_equal_snr,
    q_function,
    q_function_series,
)

CLOSED_FORM = "closed-form"
IMPLICIT = "implicit-stationary"
KINK = "saturation-kink"
BOUNDARY = "boundary"
SCAN = "scan"

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass
class SolverConfig:
    l_max: int = 1000
    gamma_bounds: tuple = (1e-3, 1e3)
    tol_gamma: float = 1e-9
    max_iters: int = 100
    taylor_terms: int | None = None
    gamma_grid_points: int = 2001

    def validate(self, payload_bits=None):
        lo, hi = self.gamma_bounds
        if not (0 < lo < hi and math.isfinite(hi)):
            raise DomainError("gamma_bounds must be positive and ordered")
        if self.tol_gamma <= 0 or self.max_iters < 1:
            raise DomainError("tol_gamma must be > 0 and max_iters >= 1")
        if payload_bits is not None and self.l_max <= payload_bits + 1:
            raise InfeasibleError(
                f"l_max={self.l_max} leaves no integer L with {payload_bits} < L < l_max"
            )


@dataclass
class OptimizationResult:
    """Outcome of one optimisation.

    `variable` is the optimal L (int), the optimal SNR (linear float), or a
    ``(snr, L)`` pair for the joint problem.
    """

    variable: object
    branch: str
    achieved_esp: float
    achieved_avg_sl: float | None
    iterations: int
    residual: float
    converged: bool = True
    fallback: bool = False
    at_boundary: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        if isinstance(self.variable, tuple):
            d["variable"] = list(self.variable)
        return d


# ---------------------------------------------------------------------------
# derivatives


def _p_err(snr, payload_bits, blocklength, terms=None):
    t = _tail_argument(snr, payload_bits, blocklength)
    return q_function(t) if terms is None else q_function_series(t, terms)


def d_pe_d_l(snr, payload_bits, blocklength):
    """dP_e/dL = -(1+g)(C L + D) / (2 sqrt(2 pi g (g+2) L^3)) exp(-t^2/2)."""
    g = np.asarray(snr, dtype=float)
    n = np.asarray(blocklength, dtype=float)
    t = _tail_argument(snr, payload_bits, blocklength)
    c = np.log1p(g) / LN2
    out = -(1 + g) * (c * n + payload_bits) / (2 * np.sqrt(2 * np.pi * g * (g + 2) * n ** 3))
    return _ret(out * np.exp(-0.5 * t * t))


def d_pd_d_l(snr, blocklength):
    """dP_d/dL = sqrt((ln(1+g) - g/(1+g)) / (16 L)); zero where P_d is clamped at 1."""
    raw, _ = detection_prob(snr, blocklength)
    n = np.asarray(blocklength, dtype=float)
    d = np.sqrt(_divergence_term(np.asarray(snr, dtype=float)) / (16.0 * n))
    return _ret(np.where(np.asarray(raw) < 1.0, d, 0.0))


def d_esp_d_l(snr, payload_bits, blocklength, terms=None):
    """dESP/dL = P_e'(2 P_d (1 - P_e) - 1) - (1 - P_e)^2 P_d'."""
    pe = np.asarray(_p_err(snr, payload_bits, blocklength, terms))
    _, pd = detection_prob(snr, blocklength)
    out = (
        np.asarray(d_pe_d_l(snr, payload_bits, blocklength)) * (2 * np.asarray(pd) * (1 - pe) - 1)
        - (1 - pe) ** 2 * np.asarray(d_pd_d_l(snr, blocklength))
    )
    return _ret(out)


def d_pe_d_gamma(snr, payload_bits, blocklength):
    """dP_e/dg = sqrt(L) (ln2 (C - D/L) - g(g+2)) / (ln2 (g(g+2))^{3/2}) phi(t)."""
    g = np.asarray(snr, dtype=float)
    n = np.asarray(blocklength, dtype=float)
    t = _tail_argument(snr, payload_bits, blocklength)
    u = g * (g + 2)
    c = np.log1p(g) / LN2
    out = np.sqrt(n) * (LN2 * (c - payload_bits / n) - u) / (LN2 * u ** 1.5)
    return _ret(out * np.exp(-0.5 * t * t) / _SQRT_2PI)


def d_pd_d_gamma(snr, blocklength):
    """dP_d/dg = sqrt(L) g (g+1)^{-3/2} / (4 sqrt((g+1) ln(g+1) - g)); zero where clamped."""
    raw, _ = detection_prob(snr, blocklength)
    g = np.asarray(snr, dtype=float)
    n = np.asarray(blocklength, dtype=float)
    # (g+1) ln(g+1) - g == (g+1) * (ln(1+g) - g/(1+g))
    d = np.sqrt(n) * g * (g + 1) ** -1.5 / (4 * np.sqrt((g + 1) * _divergence_term(g)))
    return _ret(np.where(np.asarray(raw) < 1.0, d, 0.0))


def d_esp_d_gamma(snr, payload_bits, blocklength, terms=None):
    """dESP/dg = P_e'(2 P_d (1 - P_e) - 1) - (1 - P_e)^2 P_d'."""
    pe = np.asarray(_p_err(snr, payload_bits, blocklength, terms))
    _, pd = detection_prob(snr, blocklength)
    out = (
        np.asarray(d_pe_d_gamma(snr, payload_bits, blocklength)) * (2 * np.asarray(pd) * (1 - pe) - 1)
        - (1 - pe) ** 2 * np.asarray(d_pd_d_gamma(snr, blocklength))
    )
    return _ret(out)


# ---------------------------------------------------------------------------
# thresholds


def _check_threshold_payload(payload_bits):
    if payload_bits * LN2 <= 4.0:
        raise NoThresholdError(
            f"D={payload_bits}: D ln2 = {payload_bits * LN2:.4f} <= 4, no saturation threshold"
        )


def _expand_bracket(f, lo, hi):
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("could not bracket root")
    return lo, hi


def gamma_threshold(payload_bits):
    """SNR above which the closed-form blocklength saturates detection.

    Root of g / ((g+1) ln(g+1)) = (D ln2 - 4) / (D ln2); the left side falls
    monotonically from 1 to 0.
    """
    _check_threshold_payload(payload_bits)
    rhs = (payload_bits * LN2 - 4.0) / (payload_bits * LN2)

    def f(g):
        return rhs - g / ((g + 1.0) * math.log1p(g))

    lo, hi = _expand_bracket(f, 1e-12, 1.0)
    return bisect(f, lo, hi, xtol=1e-300, rtol=1e-12, maxiter=2000)


def gamma_threshold_lhs(snr):
    return snr / ((snr + 1.0) * math.log1p(snr))


def threshold_h(blocklength, payload_bits):
    """L (1 - 2^{-D/L}); increases towards D ln2."""
    return -blocklength * math.expm1(-payload_bits / blocklength * LN2)


def blocklength_threshold(payload_bits):
    """Blocklength below which the closed-form SNR saturates detection.

    Root of L (1 - 2^{-D/L}) = D ln2 - 4.
    """
    _check_threshold_payload(payload_bits)
    target = payload_bits * LN2 - 4.0

    def f(n):
        return threshold_h(n, payload_bits) - target

    lo, hi = _expand_bracket(f, 1e-9, float(payload_bits))
    return bisect(f, lo, hi, xtol=1e-300, rtol=1e-12, maxiter=2000)


# ---------------------------------------------------------------------------
# single-variable solvers


def _sign_brackets(x, y):
    """Index pairs (i, j) where y goes from > 0 at x[i] to < 0 at x[j], zeros in between."""
    out = []
    last_pos = None
    for k, v in enumerate(y):
        if v > 0:
            last_pos = k
        elif v < 0:
            if last_pos is not None:
                out.append((last_pos, k))
            last_pos = None
    return out


def _latency_or_none(esp_value, lam, slot):
    if lam is None or slot is None:
        return None
    try:
        return latency.average_sl(esp_value, lam, slot)
    except InfiniteLatencyError:
        return math.inf


def optimal_blocklength(snr, payload_bits, config=None, lam=None, slot=None):
    """Integer L in (D, L_max) maximising exact ESP at fixed SNR.

    If detection is saturated at L = D / log2(1+g) that closed form is a
    candidate; interior stationary points of dESP/dL are added from sign
    brackets on the integer grid. The winner is the integer with the largest
    exact ESP and is checked to beat both integer neighbours.
    """
    config = config or SolverConfig()
    config.validate(payload_bits)
    if not (snr > 0 and math.isfinite(snr)):
        raise DomainError("snr must be finite and > 0")
    lo, hi = payload_bits + 1, config.l_max - 1
    terms = config.taylor_terms

    def esp_at(n):
        return float(esp_equal_snr(snr, payload_bits, n))

    candidates = {}  # integer L -> (branch, residual)
    iterations = 0
    l_cf = payload_bits / capacity(snr)
    raw_cf, _ = detection_prob(snr, l_cf)
    closed = raw_cf >= 1.0
    if closed:
        res = abs(d_esp_d_l(snr, payload_bits, l_cf, terms))
        for n in (math.floor(l_cf), math.ceil(l_cf)):
            n = min(max(n, lo), hi)
            br = CLOSED_FORM if lo < l_cf < hi else BOUNDARY
            candidates.setdefault(n, (br, res))

    grid = np.arange(lo, hi + 1, dtype=float)
    deriv = np.asarray(d_esp_d_l(snr, payload_bits, grid, terms))
    roots = []
    for i, j in _sign_brackets(grid, deriv):
        def f(n):
            return d_esp_d_l(snr, payload_bits, n, terms)

        root, info = bisect(f, grid[i], grid[j], xtol=1e-10, full_output=True, disp=False)
        iterations += info.iterations
        raw_root, _ = detection_prob(snr, root)
        res = abs(f(root))
        if closed and abs(root - l_cf) < 1.0 and raw_root >= 1.0:
            continue  # same point as the closed form
        if abs(raw_root - 1.0) < 1e-6 and res > 1e-9:
            br = KINK  # maximum sits on the saturation corner, derivative jumps there
        else:
            br = IMPLICIT
        roots.append(root)
        for n in (math.floor(root), math.ceil(root)):
            candidates.setdefault(min(max(n, lo), hi), (br, res))

    fallback = False
    if not candidates:
        fallback = True
        vals = np.asarray(esp_equal_snr(snr, payload_bits, grid))
        k = int(np.argmax(vals))
        candidates[int(grid[k])] = (BOUNDARY if k in (0, len(grid) - 1) else SCAN, math.nan)
    else:
        if deriv[-1] > 0:
            candidates.setdefault(hi, (BOUNDARY, math.nan))
        if deriv[0] < 0:
            candidates.setdefault(lo, (BOUNDARY, math.nan))

    best = max(sorted(candidates), key=esp_at)
    branch, residual = candidates[best]

    # integer local-argmax certificate; walk uphill if a neighbour wins
    steps = 0
    while True:
        nbrs = [n for n in (best - 1, best + 1) if lo <= n <= hi]
        up = max(nbrs, key=esp_at, default=best)
        if esp_at(up) > esp_at(best):
            best, branch, residual = up, SCAN, math.nan
            steps += 1
        else:
            break

    value = esp_at(best)
    return OptimizationResult(
        variable=int(best),
        branch=branch,
        achieved_esp=value,
        achieved_avg_sl=_latency_or_none(value, lam, slot),
        iterations=iterations,
        residual=float(residual),
        fallback=fallback,
        at_boundary=best in (lo, hi) and branch == BOUNDARY,
        diagnostics={
            "closed_form_blocklength": l_cf,
            "closed_form_saturated": bool(closed),
            "stationary_roots": roots,
            "candidates": sorted(candidates),
            "certificate_steps": steps,
        },
    )


def optimal_snr(blocklength, payload_bits, config=None, lam=None, slot=None):
    """SNR in `gamma_bounds` maximising exact ESP at fixed blocklength.

    Closed form 2^{D/L} - 1 when detection saturates there, plus interior
    stationary points of dESP/dg bracketed on a log grid and bisected in
    log-SNR to `tol_gamma`.
    """
    config = config or SolverConfig()
    config.validate()
    if blocklength < 1 or payload_bits < 1:
        raise DomainError("blocklength and payload_bits must be >= 1")
    g_lo, g_hi = config.gamma_bounds
    terms = config.taylor_terms

    def esp_at(g):
        return float(esp_equal_snr(g, payload_bits, blocklength))

    def f_log(u):
        return d_esp_d_gamma(math.exp(u), payload_bits, blocklength, terms)

    candidates = []  # (snr, branch, residual)
    iterations = 0
    g_cf = math.expm1(payload_bits / blocklength * LN2)
    raw_cf, _ = detection_prob(g_cf, blocklength)
    closed = raw_cf >= 1.0 and g_lo <= g_cf <= g_hi
    if closed:
        candidates.append((g_cf, CLOSED_FORM, abs(d_esp_d_gamma(g_cf, payload_bits, blocklength, terms))))

    grid = np.geomspace(g_lo, g_hi, config.gamma_grid_points)
    deriv = np.asarray(d_esp_d_gamma(grid, payload_bits, blocklength, terms))
    for i, j in _sign_brackets(grid, deriv):
        # 1e-4 * tol_gamma in log-SNR keeps |dESP/dg| at the root below tol_gamma too
        u, info = bisect(
            f_log, math.log(grid[i]), math.log(grid[j]),
            xtol=1e-4 * config.tol_gamma, maxiter=500, full_output=True, disp=False,
        )
        iterations += info.iterations
        g = math.exp(u)
        raw_root, _ = detection_prob(g, blocklength)
        if closed and abs(g / g_cf - 1.0) < 1e-4 and raw_root >= 1.0:
            continue
        res = abs(d_esp_d_gamma(g, payload_bits, blocklength, terms))
        br = KINK if abs(raw_root - 1.0) < 1e-6 and res > 1e-9 else IMPLICIT
        candidates.append((g, br, res))

    fallback = False
    grid_esp = np.asarray(esp_equal_snr(grid, payload_bits, blocklength))
    if not candidates:
        fallback = True
        k = int(np.argmax(grid_esp))
        candidates.append((float(grid[k]), BOUNDARY if k in (0, len(grid) - 1) else SCAN, math.nan))
    else:
        if deriv[-1] > 0:
            candidates.append((g_hi, BOUNDARY, math.nan))
        if deriv[0] < 0:
            candidates.append((g_lo, BOUNDARY, math.nan))

    best_g, branch, residual = max(candidates, key=lambda c: esp_at(c[0]))
    value = esp_at(best_g)
    grid_best = float(grid_esp.max())
    return OptimizationResult(
        variable=float(best_g),
        branch=branch,
        achieved_esp=value,
        achieved_avg_sl=_latency_or_none(value, lam, slot),
        iterations=iterations,
        residual=float(residual),
        fallback=fallback,
        at_boundary=branch == BOUNDARY,
        diagnostics={
            "closed_form_snr": g_cf,
            "closed_form_saturated": bool(raw_cf >= 1.0),
            "candidates": [c[0] for c in candidates],
            "grid_best_esp": grid_best,
            "certificate_ok": bool(value >= grid_best - 1e-12),
        },
    )


# ---------------------------------------------------------------------------
# joint


def _ascend(payload_bits, snr0, l0, config):
    snr, n = snr0, l0
    cur = float(esp_equal_snr(snr, payload_bits, n)) if snr is not None else -math.inf
    history = [(snr, n, cur)]
    converged = False
    for it in range(1, config.max_iters + 1):
        prev_snr, prev_n = snr, n
        r = optimal_snr(n, payload_bits, config)
        if r.achieved_esp >= cur:
            snr, cur = r.variable, r.achieved_esp
        r = optimal_blocklength(snr, payload_bits, config)
        if r.achieved_esp >= cur:
            n, cur = r.variable, r.achieved_esp
        history.append((snr, n, cur))
        if prev_snr is not None and n == prev_n and abs(snr - prev_snr) <= 1e-6 * prev_snr:
            converged = True
            break
    return snr, n, cur, it, converged, history


def joint_optimize(payload_bits, config=None, lam=None, slot=None, starts=None):
    """Coordinate ascent over (SNR, L), alternating the two single-variable solvers.

    Each sweep first re-optimises the SNR at the current L, then L at the new
    SNR; a move is only accepted when it does not lower ESP. The surface has a
    ridge at ESP = 1/4 where both closed forms are mutual fixed points, so the
    ascent is run from two starts, ``(0 dB, ceil(1.5 D))`` and the longest
    feasible blocklength, and the better end point is returned.
    """
    config = config or SolverConfig()
    config.validate(payload_bits)
    lo, hi = payload_bits + 1, config.l_max - 1
    if starts is None:
        starts = [(1.0, min(max(math.ceil(1.5 * payload_bits), lo), hi)), (None, hi)]
    runs = []
    for snr0, l0 in starts:
        runs.append(_ascend(payload_bits, snr0, l0, config))
    best = max(runs, key=lambda r: r[2])
    snr, n, value, iters, converged, _ = best
    r_snr = optimal_snr(n, payload_bits, config)
    return OptimizationResult(
        variable=(float(snr), int(n)),
        branch=r_snr.branch,
        achieved_esp=value,
        achieved_avg_sl=_latency_or_none(value, lam, slot),
        iterations=iters,
        residual=r_snr.residual,
        converged=converged,
        at_boundary=n == hi,
        diagnostics={
            "starts": [[s, l] for s, l in starts],
            "histories": [[list(h) for h in r[5]] for r in runs],
            "start_esp": [r[2] for r in runs],
        },
    )
