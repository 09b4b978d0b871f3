"""Adaptive one-dimensional quadrature and bounded maximization.

The integrator is a globally adaptive Gauss-Kronrod scheme: every interval is
estimated with a 15-point Kronrod rule whose embedded 7-point Gauss rule
supplies the error estimate, and the interval with the largest error is
bisected until the summed error drops below tolerance.  The error estimate
follows the classical rescaling

    err = resasc * min(1, (200 * |K15 - G7| / resasc)**1.5)

where resasc is the Kronrod estimate of the integral of |f - mean(f)|, which
guards against the raw difference |K15 - G7| being accidentally small.

Endpoints are never evaluated, so integrable endpoint singularities such as
t**(-0.8) near t = 0 are handled by subdivision alone.

Improper integrals over [a, inf) are reduced to proper ones by truncation: the
integrand's tail is fitted with a power-law envelope C * r**(-beta) from
samples at geometrically spaced radii, the analytic tail bound
C * R**(1-beta) / (beta - 1) fixes a cutoff R at which the discarded mass is
below tolerance, and [a, R] is integrated under the substitution r = exp(x).
"""

import heapq
import itertools
import math

import numpy as np

from .errors import QuadratureError

# 15-point Kronrod nodes on [-1, 1] (positive half, descending) and weights.
# Odd-index nodes together with the centre form the embedded 7-point Gauss rule.
_XGK = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
)
_WGK = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
)
_WGK_CENTER = 0.209482141084728
_WG = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
)
_WG_CENTER = 0.417959183673469

# Full 15-node layout in ascending order: [-x0, ..., -x6, 0, x6, ..., x0].
_NODES = np.array([-x for x in _XGK] + [0.0] + [x for x in reversed(_XGK)])
_WEIGHTS_K = np.array(list(_WGK) + [_WGK_CENTER] + list(reversed(_WGK)))
_WEIGHTS_G = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG):
    _WEIGHTS_G[_i] = _w
    _WEIGHTS_G[14 - _i] = _w
_WEIGHTS_G[7] = _WG_CENTER

_EPS = np.finfo(float).eps


def _panel(f, a: float, b: float):
    """Apply the K15/G7 pair to one interval, returning (value, error)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        raise QuadratureError(
            f"integrand must map a vector of {x.size} points to as many values, "
            f"got shape {y.shape}"
        )
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise QuadratureError(f"integrand non-finite near x = {bad!r}")
    resk = half * float(_WEIGHTS_K @ y)
    resg = half * float(_WEIGHTS_G @ y)
    resabs = abs(half) * float(_WEIGHTS_K @ np.abs(y))
    mean = resk / (b - a)
    resasc = abs(half) * float(_WEIGHTS_K @ np.abs(y - mean))
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    # Round-off floor: a panel cannot be trusted below machine noise of resabs.
    err = max(err, 50.0 * _EPS * resabs)
    return resk, err


def integrate(f, a: float, b: float, rel_tol: float = 1e-12,
              abs_tol: float = 1e-300, max_panels: int = 2048):
    """Integrate a vectorized callable f over the finite interval [a, b].

    Returns (value, error_estimate).  Raises QuadratureError if the requested
    tolerance cannot be met within max_panels subdivisions or when further
    bisection would fall below floating-point resolution.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise QuadratureError(f"integrate requires finite bounds, got [{a}, {b}]")
    if a == b:
        return 0.0, 0.0
    counter = itertools.count()
    val, err = _panel(f, a, b)
    # Heap entries: (-error, tiebreak, a, b, value, error).  The tiebreak makes
    # the subdivision order, and hence the result, fully deterministic.
    heap = [(-err, next(counter), a, b, val, err)]
    total_val, total_err = val, err
    while total_err > max(abs_tol, rel_tol * abs(total_val)):
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"needed more than {max_panels} panels on [{a}, {b}] "
                f"(error {total_err:.3e}, value {total_val:.3e})"
            )
        _, _, pa, pb, pval, perr = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:
            # Interval at floating-point resolution; cannot refine further.
            raise QuadratureError(
                f"interval [{pa}, {pb}] no longer divisible, error {perr:.3e}"
            )
        v1, e1 = _panel(f, pa, pm)
        v2, e2 = _panel(f, pm, pb)
        heapq.heappush(heap, (-e1, next(counter), pa, pm, v1, e1))
        heapq.heappush(heap, (-e2, next(counter), pm, pb, v2, e2))
        total_val += (v1 + v2) - pval
        total_err += (e1 + e2) - perr
    # Recompute the totals by compensated summation over the final partition;
    # the incremental updates above accumulate round-off over many panels.
    total_val = math.fsum(entry[4] for entry in heap)
    total_err = math.fsum(entry[5] for entry in heap)
    return total_val, total_err


def _tail_envelope(f, r0: float):
    """Fit |f| ~ C * r**(-beta) from samples at geometrically spaced radii.

    Returns (log_c, beta) with a small safety margin folded into both; the
    envelope constant is kept in log form because steep fitted exponents make
    C itself overflow.  log_c = -inf means the tail is numerically zero.
    Raises QuadratureError when the samples do not support an integrable
    power decay.
    """
    ratio = 4.0
    radii = r0 * ratio ** np.arange(12)
    vals = np.abs(np.asarray(f(radii), dtype=float))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("tail samples of integrand are non-finite")
    if np.all(vals < 1e-300):
        # Tail already numerically zero; any cutoff beyond r0 works.
        return -math.inf, 2.0
    # Trailing exact zeros mean the tail underflowed; fit the envelope on the
    # samples before them.  Faster-than-power decay extrapolated as a power
    # law only overestimates such a tail, so the bound stays valid.
    m = len(vals)
    while m > 0 and vals[m - 1] == 0.0:
        m -= 1
    # Within the kept range, use the last run of positive samples; interior
    # zeros would corrupt the slope estimates.
    k = m
    while k > 0 and vals[k - 1] > 0.0:
        k -= 1
    tail_vals = vals[k:m]
    tail_radii = radii[k:m]
    if len(tail_vals) < 4:
        raise QuadratureError("too few usable tail samples to estimate decay")
    slopes = np.log(tail_vals[:-1] / tail_vals[1:]) / math.log(ratio)
    beta = float(min(slopes[-3:]))
    if beta <= 1.001:
        raise QuadratureError(
            f"integrand tail decays like r**(-{beta:.3f}); not integrable "
            "or too slow to truncate"
        )
    beta = beta * (1.0 - 1e-3)  # lean conservative before bounding the tail
    if beta <= 1.0005:
        raise QuadratureError(f"tail decay rate {beta:.4f} too close to r**(-1)")
    log_c = math.log(1.5) + float(
        np.max(np.log(tail_vals) + beta * np.log(tail_radii))
    )
    return log_c, beta


def integrate_decaying(f, a: float, rel_tol: float = 1e-12,
                       abs_tol: float = 1e-300, max_panels: int = 4096):
    """Integrate a vectorized callable f over [a, inf), a > 0.

    The integrand must eventually decay at least like r**(-beta) with beta > 1.
    Returns (value, error_estimate) where the estimate includes the analytic
    bound on the truncated tail.
    """
    if not (math.isfinite(a) and a > 0.0):
        raise QuadratureError(f"lower bound must be finite and positive, got {a}")
    r0 = 4.0 * a
    log_c, beta = _tail_envelope(f, r0)

    def on_log_scale(x):
        r = np.exp(x)
        return np.asarray(f(r), dtype=float) * r

    # Coarse pass to set the scale of the absolute tail budget.
    coarse, _ = integrate(on_log_scale, math.log(a), math.log(r0 * 4.0 ** 11),
                          rel_tol=1e-6, abs_tol=abs_tol, max_panels=max_panels)
    budget = 0.1 * max(abs_tol, rel_tol * abs(coarse))
    if log_c == -math.inf:
        r_cut = r0 * 4.0 ** 11
        tail_bound = 0.0
    else:
        if budget <= 0.0:
            raise QuadratureError("cannot truncate tail: zero error budget")
        # Solve C r_cut**(1 - beta) / (beta - 1) = budget in log form; the
        # envelope constant can be astronomically large or small.
        log_r_cut = (math.log(budget) + math.log(beta - 1.0) - log_c) / (1.0 - beta)
        log_r_cut = max(log_r_cut, math.log(r0) + 11.0 * math.log(4.0))
        if log_r_cut > 120.0 * math.log(10.0):
            raise QuadratureError(
                f"tail bound needs cutoff exp({log_r_cut:.1f}); decay too slow "
                "to truncate"
            )
        r_cut = math.exp(log_r_cut)
        log_tail = log_c + (1.0 - beta) * log_r_cut - math.log(beta - 1.0)
        tail_bound = math.exp(log_tail) if log_tail > -700.0 else 0.0
    value, err = integrate(on_log_scale, math.log(a), math.log(r_cut),
                           rel_tol=0.9 * rel_tol, abs_tol=0.9 * abs_tol,
                           max_panels=max_panels)
    return value, err + tail_bound


def golden_max(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 200):
    """Golden-section maximization of f on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if (b - a) <= tol * (abs(a) + abs(b) + 1.0):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def maximize(f, a: float, b: float, n_grid: int = 4096):
    """Maximize a scalar continuous f over [a, b], b possibly infinite.

    A dense grid scan locates the neighbourhood of the global maximum and
    golden-section search refines it; grid endpoints stay in contention so
    boundary maxima are found exactly.  An infinite right endpoint is handled
    by the substitution r = 1/x, which compresses [a, inf) into (0, 1/a] and
    concentrates samples where a decaying profile can still be large.  Returns
    (argmax, max_value).
    """
    if n_grid < 16:
        raise QuadratureError("maximize needs at least 16 grid points")
    if math.isinf(b):
        if a <= 0.0:
            raise QuadratureError("infinite-domain maximize requires a > 0")
        # Geometric spacing covers twelve decades of r at uniform log density,
        # so suprema approached at infinity are resolved to round-off while
        # interior peaks still land within a golden-section bracket.
        xs = np.geomspace(1.0 / a, 1e-12 / a, n_grid)
        g = lambda x: f(1.0 / x)
        vals = np.array([g(x) for x in xs])
        i = int(np.argmax(vals))
        lo = xs[min(i + 1, n_grid - 1)]
        hi = xs[max(i - 1, 0)]
        x_best, v_best = golden_max(g, lo, hi)
        if vals[i] > v_best:
            x_best, v_best = xs[i], vals[i]
        return 1.0 / float(x_best), float(v_best)
    xs = np.linspace(a, b, n_grid)
    vals = np.array([f(x) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("maximize: non-finite sample on grid")
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, n_grid - 1)]
    x_best, v_best = golden_max(f, lo, hi)
    if vals[i] > v_best:
        x_best, v_best = xs[i], vals[i]
    return float(x_best), float(v_best)
