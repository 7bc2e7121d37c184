"""Brute-force radial convolutions and the restricted integrals h_n, g_n.

For d >= 2 an integral  int F1(|x - y|) F2(|y|) dy  of radial functions is
written in the coordinates u = s + t, v = s - t with s = |x - y|, t = |y|.
The domain becomes the strip u >= |x|, |v| <= |x|, the exponential factor
depends on u alone and the geometric weight factorizes:

    c_d (2R)^{2-d} s t [(u^2 - R^2)(R^2 - v^2)]^{(d-3)/2} du dv,   R = |x|,

with c_d the area of S^{d-2}.  Restricting both radii below L cuts the strip
to the triangle |v| <= 2L - u.  Both directions use composite Gauss-Legendre
panels, graded toward the strip edges and vectorized over all radii R.  On the
line the two admissible points y = t, y = -t are summed directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .density import DensitySpec, Variant, density_f, sphere_area
from .quadrature import gauss_legendre, graded_rule, graded_rule_two_sided
from .tables import RadialTable, make_grid

log = logging.getLogger(__name__)

RadialFn = Callable[[np.ndarray], np.ndarray]

# table resolution
GRID_H = 0.05
GRID_RMAX = 200.0
CHUNK = 2_000_000


@dataclass(frozen=True)
class ConvRule:
    """Panel layout: line t-rule; strip u offsets (near / bridge / far panels) and a v-rule."""

    line_levels: int = 8
    line_npts: int = 8
    u_near_levels: int = 8
    u_bridge: int = 4
    u_far_ratio: float = 1.3
    u_npts: int = 8
    v_levels: int = 6
    v_npts: int = 8


# fine: ~1e-9 relative; fast: ~1e-6, for the long series behind p_lambda
RULES = {"fine": ConvRule(), "fast": ConvRule(line_levels=6, line_npts=6, u_far_ratio=1.5,
                                              u_npts=6, v_levels=4, v_npts=6)}


class QuadratureError(RuntimeError):
    """Raised when an adaptive integral misses its tolerance; carries the worst cell."""

    def __init__(self, msg, cell=None, estimate=None):
        super().__init__(msg)
        self.cell = cell
        self.estimate = estimate


def _sphere_factor(d: int) -> float:
    """Surface of S^{d-2}."""
    return 2.0 * math.pi ** ((d - 1) / 2) / math.gamma((d - 1) / 2)


# ---------------------------------------------------------------------------
# d = 1


def _t_pieces(R, L, tsupp, tail, cuts=()):
    """Intervals [a, b] (per radius) covering t = |y| on the side y <= R / 2."""
    if L is None:
        a0 = np.full_like(R, tsupp)
        pieces = [(a0, R / 2, True),
                  (np.maximum(a0, R / 2), R, False),
                  (np.maximum(a0, R), R + tail, False)]
    else:
        lo = np.maximum(tsupp, R - L)
        pieces = [(lo, R / 2, True), (np.maximum(lo, R / 2), L, False)]
    if not cuts:
        return pieces
    out = []
    for a, b, sing in pieces:
        b = np.maximum(a, b)
        pts = np.sort(np.stack([a, b] + [np.clip(c, a, b) for c in cuts]), axis=0)
        # a zero-width first slice must not steal the substitution, so every slice keeps it
        out += [(lo, hi, sing) for lo, hi in zip(pts[:-1], pts[1:])]
    return out


def _line_half(P, Q, R, L, tsupp, sing_q, tail, kinks_p, kinks_q, splits, rule):
    """int over {y <= R/2} (optionally |y|, |R - y| < L) of Q(|y|) P(|R - y|) dy."""
    cuts = list(kinks_q) + list(splits)
    # s = R -+ t, so kinks of P become moving cut points in t
    cuts += [k for c in kinks_p for k in (R - c, c - R)]
    ts, tw = [], []
    for a, b, may_be_singular in _t_pieces(R, L, tsupp, tail, cuts):
        b = np.maximum(a, b)
        q = sing_q if (may_be_singular and tsupp == 0.0) else 1.0
        tau, w = graded_rule(levels=rule.line_levels, ratio=4.0, npts=rule.line_npts,
                             singular_power=q)
        ts.append(a[:, None] + (b - a)[:, None] * tau[None, :])
        tw.append((b - a)[:, None] * w[None, :])
    t = np.concatenate(ts, axis=1)
    wt = np.concatenate(tw, axis=1)
    Rc = R[:, None]
    live = wt > 0
    qt = np.zeros_like(t)
    qt[live] = Q(t[live])
    wt = wt * qt
    s0 = np.abs(Rc - t)
    ok0 = (t <= Rc / 2) & live
    s1 = Rc + t
    ok1 = live.copy()
    if L is not None:
        ok0 &= s0 < L[:, None]
        ok1 &= s1 < L[:, None]
    p0 = np.zeros_like(t)
    p1 = np.zeros_like(t)
    p0[ok0] = P(s0[ok0])
    p1[ok1] = P(s1[ok1])
    return np.sum(wt * (p0 + p1), axis=1)


# ---------------------------------------------------------------------------
# d >= 2


def _u_offsets(R, span, m, V, rule, breaks=()):
    """Panel edges for w = u - R: geometric toward 0 at scale min(R, 1/m), then out to V.

    breaks are radii c where a factor changes form; the line s = c or t = c
    enters the strip at w = 2c - 2R and leaves it at w = 2c.
    """
    S = np.minimum(R, 1.0 / m)
    near = S[:, None] * 4.0 ** -np.arange(rule.u_near_levels, -1, -1, dtype=float)
    frac = np.arange(1, rule.u_bridge + 1) / rule.u_bridge
    bridge = S[:, None] * ((1.0 / m) / S)[:, None] ** frac
    nfar = max(1, int(math.ceil(math.log(max(V * m, 1.0 + 1e-9)) / math.log(rule.u_far_ratio))))
    far = np.minimum((1.0 / m) * rule.u_far_ratio ** np.arange(1, nfar + 1, dtype=float), V)
    far[-1] = V
    cols = [np.zeros((R.size, 1)), near, bridge, np.broadcast_to(far, (R.size, nfar))]
    for c in breaks:
        cols.append(np.maximum(np.stack([2 * c - 2 * R, np.full_like(R, 2.0 * c)], axis=1), 0.0))
    edges = np.concatenate(cols, axis=1)
    if breaks:
        edges = np.sort(edges, axis=1)
    return np.minimum(np.maximum.accumulate(edges, axis=1), span[:, None])


def _strip_chunk(P, Q, R, d, L, supp_p, supp_q, kinks_p, kinks_q, m, V, rule):
    nR = R.size
    span = np.full_like(R, V) if L is None else np.maximum(2 * L - R, 0.0)
    breaks = tuple(kinks_p) + tuple(kinks_q) + tuple(c for c in (supp_p, supp_q) if c > 0)
    edges = _u_offsets(R, span, m, V, rule, breaks)
    gx, gw = gauss_legendre(rule.u_npts)
    qu = 2.0 if d == 2 else 1.0
    a, b = edges[:, :-1], edges[:, 1:]
    x = np.broadcast_to(gx, a.shape[:1] + (a.shape[1], rule.u_npts)).copy()
    wq = np.broadcast_to(gw, x.shape).copy()
    # panels starting at w = 0: w = b gx^q flattens the w^{(d-3)/2} edge factor
    first = a == 0
    x[first] = gx**qu
    wq[first] = qu * gx ** (qu - 1.0) * gw
    w = (a[..., None] + (b - a)[..., None] * x).reshape(nR, -1)
    ww = ((b - a)[..., None] * wq).reshape(nR, -1)
    Rc = R[:, None]
    u = Rc + w
    if L is None:
        HmR = np.zeros_like(w)  # H - R
    else:
        HmR = 2 * (L[:, None] - Rc) - w
    H = Rc + HmR
    sig_lo = np.full_like(w, -1.0)
    sig_hi = np.full_like(w, 1.0)
    live = (ww > 0) & (H > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        Hs = np.where(live, H, 1.0)
        if supp_p > 0:
            sig_lo = np.maximum(sig_lo, (2 * supp_p - u) / Hs)
        if supp_q > 0:
            sig_hi = np.minimum(sig_hi, (u - 2 * supp_q) / Hs)
        sig_hi = np.maximum(sig_hi, sig_lo)
        cuts = [sig_lo, sig_hi]
        cuts += [np.clip((2 * c - u) / Hs, sig_lo, sig_hi) for c in kinks_p]
        cuts += [np.clip((u - 2 * c) / Hs, sig_lo, sig_hi) for c in kinks_q]
    cuts = np.sort(np.stack(cuts), axis=0)
    qv = 2.0 if d == 2 else 1.0
    tau, comp, sw = graded_rule_two_sided(levels=rule.v_levels, ratio=4.0, npts=rule.v_npts,
                                          q_lo=qv, q_hi=qv)
    expo = (d - 3) / 2
    base = _sphere_factor(d) * (2 * Rc) ** (2 - d) * Hs * ww
    if d != 3:
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.where(ww > 0, base * (w * (2 * Rc + w)) ** expo, 0.0)
    total = np.zeros(nR)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        width = (hi - lo)[..., None]
        sig = lo[..., None] + width * tau
        # 1 + sigma and 1 - sigma from the nearest exact end
        one_p = (1.0 + lo)[..., None] + width * tau
        one_m = (1.0 - hi)[..., None] + width * comp
        Rn = Rc[..., None]
        dH = HmR[..., None] * sig
        s2 = w[..., None] + Rn * one_p + dH  # 2 s
        t2 = w[..., None] + Rn * one_m - dH  # 2 t
        wt = width * sw * base[..., None]
        if d != 3:
            rv = (Rn * one_m - dH) * (Rn * one_p + dH)  # R^2 - v^2
            with np.errstate(divide="ignore", invalid="ignore"):
                wt = wt * np.abs(rv) ** expo
        ok = (wt > 0) & live[..., None] & (s2 > 0) & (t2 > 0)
        vals = np.zeros_like(s2)
        s_ok, t_ok = 0.5 * s2[ok], 0.5 * t2[ok]
        vals[ok] = P(s_ok) * Q(t_ok) * s_ok * t_ok * wt[ok]
        total += vals.sum(axis=(1, 2))
    return total


def convolve_radial(P: RadialFn, Q: RadialFn, R, d: int, *, L=None, supp_p: float = 0.0,
                    supp_q: float = 0.0, sing_p: float = 1.0, sing_q: float = 1.0,
                    m: float = 1.0, tail: Optional[float] = None, kinks_p=(), kinks_q=(),
                    splits=(), rule: str = "fine") -> np.ndarray:
    """int_{R^d} P(|x-y|) Q(|y|) dy at |x| = R for every R in the array.

    L restricts to |y| < L and |x - y| < L (scalar or per-radius).  supp_* is
    the left end of each function's support, sing_* the substitution power for
    a singular centre (line only), m the exponential rate setting the panel
    scale, tail the reach of u - R, kinks_* radii where a function is only
    continuous, splits extra cut points for |y| on the line, rule a key of RULES.
    """
    cr = RULES[rule]
    R = np.atleast_1d(np.asarray(R, dtype=float))
    tail = 40.0 / m if tail is None else tail
    out = np.empty_like(R)
    Larr = None if L is None else np.broadcast_to(np.asarray(L, dtype=float), R.shape)
    if d == 1:
        step = max(1, CHUNK // (200 * (1 + len(kinks_q) + 2 * len(kinks_p) + len(splits))))
    else:
        nu = (cr.u_near_levels + cr.u_bridge + 60) * cr.u_npts
        nv = 2 * (cr.v_levels + 1) * cr.v_npts * (1 + len(kinks_p) + len(kinks_q))
        step = max(1, CHUNK // (nu * nv))
    for i in range(0, R.size, step):
        sl = slice(i, i + step)
        Ls = None if Larr is None else Larr[sl]
        if d == 1:
            out[sl] = (_line_half(P, Q, R[sl], Ls, supp_q, sing_q, tail, kinks_p, kinks_q, splits, cr)
                       + _line_half(Q, P, R[sl], Ls, supp_p, sing_p, tail, kinks_q, kinks_p, splits, cr))
        else:
            out[sl] = _strip_chunk(P, Q, R[sl], d, Ls, supp_p, supp_q, kinks_p, kinks_q, m, tail, cr)
    return out


def _sing_power(spec: DensitySpec) -> float:
    return 1.0 / (spec.d - spec.gamma) if spec.singular else 1.0


def _tail(spec: DensitySpec, n: int) -> float:
    """Reach beyond R: mass of f^{(n-1)*} sits near (n - 1) d / m."""
    return (40.0 + 2.0 * spec.d * n) / spec.m


def _splits(spec: DensitySpec, n: int) -> tuple:
    if spec.d > 1:
        return ()
    reach = _tail(spec, n)
    return tuple(c / spec.m for c in (2.0, 8.0, 16.0, 32.0, 64.0, 128.0) if c / spec.m < reach)


def _kinks(spec: DensitySpec) -> tuple:
    return (1.0,) if spec.variant is Variant.CUTOFF and spec.gamma > 0 else ()


def f_callable(spec: DensitySpec) -> RadialFn:
    return lambda r: density_f(spec, r)


@lru_cache(maxsize=None)
def _default_grid(offset: float = 0.0, nodes: tuple = ()) -> np.ndarray:
    return make_grid(offset, GRID_RMAX, GRID_H, nodes=nodes)


_FN_TABLES: dict = {}


def nfold_table(spec: DensitySpec, n: int, grid: Optional[np.ndarray] = None,
                rule: str = "fine") -> RadialTable:
    """f^{n*} sampled on the grid, by repeated convolution with f (memoized)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    key = (spec, n, None if grid is None else tuple(np.round(grid, 14)), rule)
    if key in _FN_TABLES:
        return _FN_TABLES[key]
    g = _default_grid() if grid is None else np.asarray(grid, dtype=float)
    if n == 1:
        vals = density_f(spec, g)
    else:
        prev = nfold_table(spec, n - 1, grid, rule)
        vals = fnstar_points(spec, n, g, prev=prev, rule=rule)
    table = RadialTable(g, vals, kind="conv_power", n=n, spec=spec)
    _FN_TABLES[key] = table
    return table


def nfold_convolution(spec: DensitySpec, n: int, grid=None) -> RadialTable:
    return nfold_table(spec, n, grid)


def fnstar_points(spec: DensitySpec, n: int, x, prev: Optional[RadialTable] = None,
                  rule: str = "fine") -> np.ndarray:
    """f^{n*}(x): the last convolution is done at the exact radii x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n == 1:
        return density_f(spec, x)
    f = f_callable(spec)
    if n == 2:
        inner = f
    else:
        inner = prev if prev is not None else nfold_table(spec, n - 1)
    q = _sing_power(spec)
    k = _kinks(spec)
    return convolve_radial(f, inner, x, spec.d, sing_p=q, sing_q=q, m=spec.m, tail=_tail(spec, n),
                           kinks_p=k, kinks_q=k, splits=_splits(spec, n), rule=rule)


def fnstar(spec: DensitySpec, n: int, x):
    out = fnstar_points(spec, n, x)
    return out[0] if np.ndim(x) == 0 else out


def radial_mass(table_or_fn, d: int, r_max: float = GRID_RMAX) -> float:
    """int_{R^d} F(|y|) dy for a radial function, by graded quadrature in r."""
    tau, w = graded_rule(levels=12, ratio=4.0, npts=16, both_ends=False, singular_power=1.0)
    total = 0.0
    edges = np.concatenate([[0.0], np.geomspace(1e-6, r_max, 40)])
    for a, b in zip(edges[:-1], edges[1:]):
        r = a + (b - a) * tau
        total += np.sum((b - a) * w * table_or_fn(r) * r ** (d - 1))
    return sphere_area(d) * total


# ---------------------------------------------------------------------------
# restricted integrals


_HG_TABLES: dict = {}


def _restricted_points(spec: DensitySpec, kind: str, n: int, x, prev: Optional[RadialTable]):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    if n == 1:
        return np.ones_like(x)
    shift = 1.0 if kind == "h" else 0.0
    L = x - shift
    ok = L > x / 2  # lens nonempty
    if kind == "h":
        ok &= x > n
    if not np.any(ok):
        return out
    f = f_callable(spec)
    if n == 2:
        qfun, supp = f, 0.0
    else:
        qfun = lambda r: density_f(spec, r) * prev(r)  # noqa: E731
        supp = prev.offset
    q = _sing_power(spec)
    xs = x[ok]
    val = convolve_radial(f, qfun, xs, spec.d, L=L[ok], supp_p=0.0, supp_q=supp,
                          sing_p=q, sing_q=q, m=spec.m, tail=_tail(spec, n),
                          kinks_p=_kinks(spec), kinks_q=_kinks(spec), splits=_splits(spec, n))
    out[ok] = val / density_f(spec, xs)
    return out


def restricted_table(spec: DensitySpec, kind: str, n: int) -> RadialTable:
    """Memoized table of h_n (kind 'h') or g_n (kind 'g'), built innermost-first."""
    if kind not in ("h", "g"):
        raise ValueError("kind must be 'h' or 'g'")
    key = (spec, kind, n)
    if key in _HG_TABLES:
        return _HG_TABLES[key]
    if n == 1:
        table = RadialTable(_default_grid(), np.ones_like(_default_grid()), kind=kind, n=1, spec=spec)
    else:
        prev = restricted_table(spec, kind, n - 1)
        offset = float(n) if kind == "h" else 0.0
        # dividing by f puts a kink at r = 1 for the cutoff profile
        breaks = (1.0,) if (offset < 1 and _kinks(spec)) else ()
        grid = _default_grid(offset, breaks)
        vals = _restricted_points(spec, kind, n, grid, prev)
        table = RadialTable(grid, vals, kind=kind, n=n, spec=spec, offset=offset, breaks=breaks)
    _HG_TABLES[key] = table
    return table


def _check_n(n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 4:
        raise ValueError("restricted integrals are capped at n <= 4")


def h_n_direct(spec: DensitySpec, n: int, x1):
    """h_n(x) with |x| = x1; the last level is integrated at x1 itself."""
    _check_n(n)
    prev = restricted_table(spec, "h", n - 1) if n >= 3 else None
    out = _restricted_points(spec, "h", n, x1, prev)
    return out[0] if np.ndim(x1) == 0 else out


def g_n_direct(spec: DensitySpec, n: int, x1):
    _check_n(n)
    prev = restricted_table(spec, "g", n - 1) if n >= 3 else None
    out = _restricted_points(spec, "g", n, x1, prev)
    return out[0] if np.ndim(x1) == 0 else out


# ---------------------------------------------------------------------------
# independent adaptive route


def reduce_radial_integral(F1: RadialFn, F2: RadialFn, d: int, x1: float, *, rtol: float = 1e-7,
                           reach: Optional[float] = None, kinks=()) -> float:
    """int_{R^d} F1(|x-y|) F2(|y|) dy at x = (x1, 0, ..., 0), by nested adaptive quadrature.

    Uses the (y1, r) half-plane reduction with weight |S^{d-2}| r^{d-2};
    breakpoints at y1 in {0, x1} and at the ball boundaries.  ``reach`` bounds
    the integration domain (default: 60 + 2 x1).
    """
    if d < 2:
        raise ValueError("the (y1, r) reduction needs d >= 2")
    if not x1 > 0:
        raise ValueError("x1 must be positive")
    reach = reach if reach is not None else 60.0 + 2 * x1
    worst = {"err": 0.0, "cell": None}

    def inner(y1):
        def g(r):
            return F1(math.hypot(x1 - y1, r)) * F2(math.hypot(y1, r)) * r ** (d - 2)
        cand = [abs(y1), abs(x1 - y1)]
        for c in kinks:
            cand += [math.sqrt(c * c - z * z) for z in (y1, x1 - y1) if abs(z) < c]
        pts = sorted({p for p in cand if 0 < p < reach})
        val, err = integrate.quad(g, 0.0, reach, points=pts or None, epsabs=0, epsrel=rtol * 0.1,
                                  limit=400)
        if err > worst["err"]:
            worst.update(err=err, cell=("r", y1))
        return val

    edges = {-reach, 0.0, x1 / 2, x1, x1 + reach}
    for c in kinks:
        edges |= {-c, c, x1 - c, x1 + c}
    edges = sorted(e for e in edges if -reach <= e <= x1 + reach)
    total, total_err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(inner, a, b, epsabs=0, epsrel=rtol * 0.1, limit=400)
        total += val
        total_err += err
    total *= _sphere_factor(d)
    total_err *= _sphere_factor(d)
    if total != 0 and total_err > rtol * abs(total) * 10:
        raise QuadratureError(f"reduce_radial_integral missed rtol={rtol}: err={total_err:.3g}",
                              cell=worst["cell"], estimate=total)
    return total


def clear_caches():
    _FN_TABLES.clear()
    _HG_TABLES.clear()
