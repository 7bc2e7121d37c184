"""One-dimensional majorant/minorant sequences H_n, G_n and their closed-form bounds."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special

from .density import ConstantsBundle, DensitySpec, Variant, compute_constants, log_profile_g
from .quadrature import graded_rule_two_sided
from .special import inc_beta, beta as beta_fn
from .tables import RadialTable, make_grid

RULE = dict(levels=8, ratio=4.0, npts=10)
GRID_H = 0.02
GRID_RMAX = 200.0

_TABLES: dict = {}


def _weight_exp(d: int) -> float:
    return (d - 1) / 2


def truncated_gaussian_moment(d: int, m: float, u):
    """W(u) = int_0^{sqrt u} e^{-m s^2} s^{d-2} ds, via the lower incomplete gamma."""
    u = np.asarray(u, dtype=float)
    a = (d - 1) / 2
    return 0.5 * m ** (-a) * special.gamma(a) * special.gammainc(a, m * np.maximum(u, 0.0))


def _endpoint_power(e: float) -> float:
    """Substitution power that smooths a (rho - end)^e endpoint."""
    if e >= 0 and abs(e - round(e)) < 1e-12:
        return 1.0
    return 1.0 / (1.0 + e)


def _piecewise_integral(lo, hi, cuts, integrand, q_lo=1.0, q_hi=1.0):
    """sum_i int_{c_i}^{c_{i+1}} integrand(rho) d rho for per-row breakpoints.

    lo, hi: arrays (nR,); cuts: extra per-row breakpoints, clipped into [lo, hi].
    integrand(rho, row_index_array) -> values, same shape as rho.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.maximum(np.asarray(hi, dtype=float), lo)
    pts = [lo, hi] + [np.clip(c, lo, hi) for c in cuts]
    pts = np.sort(np.stack(pts), axis=0)
    total = np.zeros_like(lo)
    npieces = pts.shape[0] - 1
    for i in range(npieces):
        a, b = pts[i], pts[i + 1]
        ql = q_lo if i == 0 else 1.0
        qh = q_hi if i == npieces - 1 else 1.0
        tau, comp, w = graded_rule_two_sided(q_lo=ql, q_hi=qh, **RULE)
        span = (b - a)[:, None]
        rho = a[:, None] + span * tau
        # distance to the right end, kept accurate near it
        rest = (hi - b)[:, None] + span * comp
        ww = span * w
        live = ww > 0
        vals = np.zeros_like(rho)
        rows = np.broadcast_to(np.arange(lo.size)[:, None], rho.shape)
        vals[live] = integrand(rho[live], rest[live], rows[live])
        total += np.sum(ww * vals, axis=1)
    return total


def _g_of(spec: DensitySpec) -> Callable:
    return lambda r: np.exp(log_profile_g(spec, r))


def _G_points(spec: DensitySpec, n: int, r, prev) -> np.ndarray:
    """G_n at radii r, integrating against G_{n-1} given as a callable."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    if n == 1:
        return np.ones_like(r)
    ok = r > 0
    if not np.any(ok):
        return out
    R = r[ok]
    d, k = spec.d, _weight_exp(spec.d)
    lg = lambda x: log_profile_g(spec, x)  # noqa: E731
    logdenom = lg(R) + k * np.log(R)

    def integrand(rho, rest, rows):
        # rest = r - rho, accurate near the right end
        v = lg(rest) + lg(rho) + k * (np.log(rest) + np.log(rho)) - logdenom[rows]
        val = np.exp(v) * prev(rho)
        if d > 1:
            val = val * truncated_gaussian_moment(d, spec.m, np.minimum(rho, rest))
        return val

    ge = spec.gamma if spec.variant is Variant.PURE else 0.0
    inner_n = n - 1
    e_lo = (d - ge) * inner_n - 1.0
    e_hi = d - 1.0 - ge
    cuts = [R / 2]
    if spec.variant is Variant.CUTOFF and spec.gamma > 0:
        cuts += [np.full_like(R, 1.0), R - 1.0]
    out[ok] = _piecewise_integral(np.zeros_like(R), R, cuts, integrand,
                                  q_lo=_endpoint_power(e_lo), q_hi=_endpoint_power(e_hi))
    return out


def _H_points(spec: DensitySpec, n: int, r, prev) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    if n == 1:
        return np.ones_like(r)
    lo_lim = 1.0 if n == 2 else float(n - 1)
    ok = r - 1.0 > lo_lim
    if not np.any(ok):
        return out
    R = r[ok]
    k = _weight_exp(spec.d)
    lg = lambda x: log_profile_g(spec, x)  # noqa: E731
    logdenom = lg(R) + k * np.log(R)

    def integrand(rho, rest, rows):
        s = rest + 1.0  # r - rho
        v = lg(s) + lg(rho) + k * (np.log(s) + np.log(rho)) - logdenom[rows]
        return np.exp(v) * prev(rho)

    out[ok] = _piecewise_integral(np.full_like(R, lo_lim), R - 1.0, [], integrand)
    return out


def _table(spec: DensitySpec, kind: str, n: int) -> RadialTable:
    key = (spec, kind, n)
    if key in _TABLES:
        return _TABLES[key]
    offset = float(n) if (kind == "H" and n >= 2) else 0.0
    # dividing by g puts a kink at r = 1 for the cutoff profile
    breaks = (1.0,) if (kind == "G" and spec.variant is Variant.CUTOFF and spec.gamma > 0) else ()
    grid = make_grid(offset, GRID_RMAX, GRID_H, nodes=breaks)
    if n == 1:
        vals = np.ones_like(grid)
    else:
        prev = _callable(spec, kind, n - 1)
        pts = _G_points if kind == "G" else _H_points
        vals = pts(spec, n, grid, prev)
    table = RadialTable(grid, vals, kind=kind, n=n, spec=spec, offset=offset, breaks=breaks)
    _TABLES[key] = table
    return table


def _callable(spec: DensitySpec, kind: str, n: int):
    if n == 1:
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    return _table(spec, kind, n)


def _check(n: int, r):
    if n < 1:
        raise ValueError("n must be >= 1")
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be nonnegative")


def H_n(spec: DensitySpec, n: int, r):
    """H_n(r); the outer integral is evaluated at r itself, inner levels come from tables."""
    _check(n, r)
    prev = _callable(spec, "H", n - 1) if n >= 2 else None
    out = _H_points(spec, n, r, prev)
    return out[0] if np.ndim(r) == 0 else out


def G_n(spec: DensitySpec, n: int, r):
    _check(n, r)
    prev = _callable(spec, "G", n - 1) if n >= 2 else None
    out = _G_points(spec, n, r, prev)
    return out[0] if np.ndim(r) == 0 else out


def H_table(spec: DensitySpec, n: int) -> RadialTable:
    return _table(spec, "H", n)


def G_table(spec: DensitySpec, n: int) -> RadialTable:
    return _table(spec, "G", n)


def _gamma_ratio(a: float, n: int) -> float:
    """Gamma(a)^n / Gamma(a n)."""
    return math.exp(n * math.lgamma(a) - math.lgamma(a * n))


def H_n_closed_bound(d: int, gamma: float, n: int, r):
    a = (d + 1) / 2 - gamma
    if not a > 0:
        raise ValueError("needs gamma < (d+1)/2")
    r = np.asarray(r, dtype=float)
    out = _gamma_ratio(a, n) * r ** (a * (n - 1))
    return float(out) if out.ndim == 0 else out


def _lower_a(spec: DensitySpec) -> float:
    return spec.d - spec.gamma if spec.variant is Variant.PURE else float(spec.d)


def G_n_lower_bound(spec: DensitySpec, consts: ConstantsBundle | None, n: int, r, *,
                    bounded_range: bool = False):
    """(C/2)^{n-1} Gamma(a)^n / Gamma(a n) r^{rho2 (n-1)}, valid for r >= 1.

    bounded_range=True gives the sharper C^{n-1} form valid on [1, r0].
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    consts = consts or compute_constants(spec)
    rho2 = (spec.d + 1) / 2 - spec.gamma
    a = _lower_a(spec)
    c = consts.C_r0 if bounded_range else consts.C_r0 / 2
    out = c ** (n - 1) * _gamma_ratio(a, n) * r ** (rho2 * (n - 1))
    return float(out) if out.ndim == 0 else out


def G_n_lower_bound_small(spec: DensitySpec, consts: ConstantsBundle | None, n: int, r):
    """Lower bound for G_n on (0, r0]."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    consts = consts or compute_constants(spec)
    C = consts.C_r0
    if spec.variant is Variant.PURE:
        a = spec.d - spec.gamma
        out = C ** (n - 1) * _gamma_ratio(a, n) * r ** (a * (n - 1))
    else:
        d = spec.d
        base = r**d * np.maximum(1.0, r) ** (-spec.gamma)
        out = C ** (n - 1) * _gamma_ratio(float(d), n) * base ** (n - 1)
    return float(out) if out.ndim == 0 else out


def G2_one_step_lower(spec: DensitySpec, r: float, consts: ConstantsBundle | None = None) -> float:
    """Right-hand side of the one-step inequality for G_2 (branch chosen by r vs r0)."""
    consts = consts or compute_constants(spec)
    C, d = consts.C_r0, spec.d
    cut = spec.variant is Variant.CUTOFF
    b = float(d) if cut else d - spec.gamma
    if r <= consts.r0:
        base = r**d * max(1.0, r) ** (-spec.gamma) if cut else r ** (d - spec.gamma)
        return C * base * beta_fn(b, b)
    rho2 = (d + 1) / 2 - spec.gamma
    a = (d + 1) / 2 if cut else rho2
    # int_{1/r}^1 u^{a-1} (1-u)^{b-1} du
    tail = beta_fn(a, b) - inc_beta(1.0 / r, a, b)
    return C * r**rho2 * tail


def g_n_exact_1d(gamma: float, n: int, x):
    """Closed form of g_n on the line for the pure power profile."""
    if not 0 <= gamma < 1:
        raise ValueError("needs 0 <= gamma < 1")
    x = np.abs(np.asarray(x, dtype=float))
    a = 1.0 - gamma
    out = _gamma_ratio(a, n) * x ** (a * (n - 1))
    return float(out) if out.ndim == 0 else out


def clear_caches():
    _TABLES.clear()
