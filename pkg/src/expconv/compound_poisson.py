"""Compound Poisson density p_lambda and the two-sided bounds for f^{n*} and p_lambda."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special, stats

from . import oracle
from .aux import _gamma_ratio
from .density import ConstantsBundle, DensitySpec, Variant, compute_constants, density_f, sphere_area
from .quadrature import gauss_legendre
from .special import wright_log
from .tables import RadialTable, make_grid

# tables behind the series: coarser grid, longer reach, fast rule (~1e-6 per level)
PL_GRID_H = 0.2
PL_RMAX = 400.0
PL_RULE = "fast"
N_CAP = 60
# certificate radius for whole-table sums
TABLE_CERT_RMAX = 100.0


class SeriesNotConverged(RuntimeError):
    """The truncated series missed its tolerance within the term cap."""


@dataclass(frozen=True)
class PLambdaResult:
    x: float
    lam: float
    value: float
    n_terms: int
    truncation_bound: float  # ratio-extrapolated tail of the computed terms
    majorant_bound: float  # rigorous tail from the explicit majorants (may be loose)

    @property
    def accepted(self) -> bool:
        return self.truncation_bound < 1e-8 * self.value


@lru_cache(maxsize=None)
def pl_grid() -> np.ndarray:
    return make_grid(0.0, PL_RMAX, PL_GRID_H)


def series_table(spec: DensitySpec, n: int) -> RadialTable:
    """f^{n*} on the series grid."""
    return oracle.nfold_table(spec, n, pl_grid(), PL_RULE)


def _log_coef(lam: float, n: int) -> float:
    return n * math.log(lam) - math.lgamma(n + 1)


def _term_values(spec: DensitySpec, n: int, x: np.ndarray) -> np.ndarray:
    """f^{n*}(x), last convolution evaluated at x itself."""
    if n == 1:
        return density_f(spec, x)
    prev = series_table(spec, n - 1) if n >= 3 else None
    return oracle.fnstar_points(spec, n, x, prev=prev, rule="fine")


def _ratio_tail(terms: list) -> tuple[np.ndarray, np.ndarray]:
    """Geometric extrapolation of the remaining terms; inf where ratios are not yet decreasing."""
    t = np.array(terms)
    last = t[-1]
    tail = np.full(last.shape, np.inf)
    if len(terms) < 3:
        return tail, np.zeros(last.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        q1 = t[-1] / t[-2]
        q0 = t[-2] / t[-3]
    ok = (q1 < 1) & (q1 <= q0 * (1 + 1e-12))
    tail[ok] = last[ok] * q1[ok] / (1 - q1[ok])
    zero = last == 0
    tail[zero] = 0.0
    return tail, ok | zero


def p_lambda(spec: DensitySpec, lam: float, x, tol: float = 1e-8, n_max: int = N_CAP):
    """p_lambda(x) = e^{-lam ||f||_1} sum_n lam^n f^{n*}(x) / n!.

    Terms are added until the extrapolated tail is below tol times the partial
    sum at every x.  Returns a PLambdaResult (or a list for array x).
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0) or np.any(xs > PL_RMAX):
        raise ValueError(f"x must lie in (0, {PL_RMAX}]")
    consts = compute_constants(spec)
    terms = []
    partial = np.zeros_like(xs)
    done = False
    n = 0
    tail = np.full_like(xs, np.inf)
    while n < n_max:
        n += 1
        terms.append(math.exp(_log_coef(lam, n)) * _term_values(spec, n, xs))
        partial = partial + terms[-1]
        tail, _ = _ratio_tail(terms)
        if n >= 2 and np.all(tail <= tol * partial):
            done = True
            break
    if not done:
        bad = xs[~(tail <= tol * partial)]
        raise SeriesNotConverged(f"p_lambda series for {spec.label}, lambda={lam} not converged "
                                 f"within {n_max} terms at x={bad.tolist()}")
    scale = math.exp(-lam * consts.l1_norm)
    out = []
    for i, xi in enumerate(xs):
        maj = majorant_tail(spec, consts, lam, float(xi), n)
        out.append(PLambdaResult(float(xi), lam, scale * partial[i], n, scale * tail[i], maj))
    return out[0] if np.ndim(x) == 0 else out


def p_lambda_value(spec: DensitySpec, lam: float, x, tol: float = 1e-8):
    res = p_lambda(spec, lam, x, tol)
    if isinstance(res, list):
        return np.array([r.value for r in res])
    return res.value


# ---------------------------------------------------------------------------
# rigorous tails


def _poisson_sf_log(k: int, mu: float) -> float:
    """log P(Poisson(mu) > k)."""
    if k < 0:
        return 0.0
    return float(stats.poisson.logsf(k, mu))


def _dsp_tail(lam: float, K: float, N: int) -> float:
    """sum_{n > N} lam^n n K^{n-1} / n! = lam e^{lam K} P(Poisson(lam K) >= N)."""
    if K == 0:
        return lam if N == 0 else 0.0
    return lam * math.exp(lam * K + _poisson_sf_log(N - 1, lam * K))


def majorant_tail(spec: DensitySpec, consts: ConstantsBundle, lam: float, x: float, N: int,
                  dsp_C: Optional[float] = None) -> float:
    """Rigorous bound on e^{-lam||f||} sum_{n > N} lam^n f^{n*}(x) / n!.

    |x| < 1: f^{n*} <= n (C2 ||f||)^{n-1} f.  |x| >= 1 in the main range: the
    binomial bound with h_i <= M3^{i-1} H_i and the closed bound for H_i, summed
    over n in closed form through Poisson tails.  Outside the main range the
    bounded-h_2 bound n (M2 + C)^{n-1} f with C = dsp_C (sup of h_2).
    """
    fx = float(density_f(spec, x))
    scale = math.exp(-lam * consts.l1_norm) * fx
    if x < 1:
        return scale * _dsp_tail(lam, consts.C2 * consts.l1_norm, N)
    if not spec.in_main_range:
        if dsp_C is None:
            return math.inf
        return scale * _dsp_tail(lam, consts.M2 + dsp_C, N)
    a = (spec.d + 1) / 2 - spec.gamma
    mu = lam * consts.M2
    # sum_i lam^i h_i / i! * e^{mu} P(Poisson(mu) > N - i)
    i = np.arange(1, 4000, dtype=float)
    log_h = ((i - 1) * math.log(consts.M3) + i * special.gammaln(a) - special.gammaln(a * i)
             + a * (i - 1) * math.log(x))
    log_t = i * math.log(lam) + log_h - special.gammaln(i + 1) + mu
    sf = np.where(i > N, 0.0, stats.poisson.logsf(N - i, mu))
    total = special.logsumexp(log_t + sf)
    return scale * math.exp(total)


# ---------------------------------------------------------------------------
# whole-table sums, mass and radial CDF


@dataclass
class PLambdaTable:
    spec: DensitySpec
    lam: float
    table: RadialTable
    n_terms: int
    max_rel_tail: float  # extrapolated relative tail over nodes r <= TABLE_CERT_RMAX

    @property
    def atom(self) -> float:
        return math.exp(-self.lam * compute_constants(self.spec).l1_norm)

    def __call__(self, r):
        return self.table(r)

    def mass(self) -> float:
        return oracle.radial_mass(self.table, self.spec.d, PL_RMAX)

    def radial_cdf(self, r) -> np.ndarray:
        """P(|X| <= r | N >= 1) for the compound Poisson vector X."""
        r = np.asarray(r, dtype=float)
        d = self.spec.d
        edges = np.concatenate([[0.0], self.table.grid])
        gx, gw = gauss_legendre(12)
        area = sphere_area(d)

        def panel(a, b):
            # power substitution flattens the r^{d-1-gamma} start
            s = a[:, None] + (b - a)[:, None] * gx**2
            w = (b - a)[:, None] * 2 * gx * gw
            return np.sum(w * self.table(s) * s ** (d - 1), axis=1) * area

        cum = np.concatenate([[0.0], np.cumsum(panel(edges[:-1], edges[1:]))])
        norm = 1.0 - self.atom
        flat = np.clip(r.ravel(), 0.0, edges[-1])
        k = np.clip(np.searchsorted(edges, flat, side="right") - 1, 0, edges.size - 2)
        out = (cum[k] + panel(edges[k], flat)) / norm
        out = np.minimum(out, 1.0).reshape(r.shape)
        return out[()] if out.ndim == 0 else out


_PL_TABLES: dict = {}


def p_lambda_table(spec: DensitySpec, lam: float, tol: float = 1e-8, n_max: int = N_CAP) -> PLambdaTable:
    key = (spec, lam, tol)
    if key in _PL_TABLES:
        return _PL_TABLES[key]
    g = pl_grid()
    cert = g <= TABLE_CERT_RMAX
    terms, partial = [], np.zeros_like(g)
    rel = np.inf
    for n in range(1, n_max + 1):
        terms.append(math.exp(_log_coef(lam, n)) * series_table(spec, n).values)
        partial = partial + terms[-1]
        tail, _ = _ratio_tail([t[cert] for t in terms])
        rel = float(np.max(tail / partial[cert]))
        if n >= 2 and rel <= tol:
            break
    else:
        raise SeriesNotConverged(f"p_lambda table for {spec.label}, lambda={lam}: relative tail {rel:.3g}")
    scale = math.exp(-lam * compute_constants(spec).l1_norm)
    table = RadialTable(g, scale * partial, kind="plambda", n=n, spec=spec)
    out = PLambdaTable(spec, lam, table, n, rel)
    _PL_TABLES[key] = out
    return out


# ---------------------------------------------------------------------------
# bounds


def _require_main(spec: DensitySpec):
    if not spec.in_main_range:
        raise ValueError(f"needs gamma < (d+1)/2 ({spec.label})")


def _require_x(x: float, at_least_one: bool = True):
    if at_least_one and not x >= 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if not at_least_one and not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x}")


def _use_1d_sharp(spec: DensitySpec) -> bool:
    return spec.d == 1 and spec.variant is Variant.PURE


def nstar_bounds(spec: DensitySpec, consts: Optional[ConstantsBundle], n: int, x: float) -> tuple[float, float]:
    """(lower, upper) for f^{n*}(x), |x| >= 1."""
    _require_x(x)
    _require_main(spec)
    if n < 1:
        raise ValueError("n must be >= 1")
    c = consts or compute_constants(spec)
    fx = float(density_f(spec, x))
    if _use_1d_sharp(spec):
        a = 1.0 - spec.gamma
        lead = _gamma_ratio(a, n)
        extra = 2 * c.M2 * n * c.M3 * (c.M2 + math.gamma(a)) ** (n - 1) / x**a
        base = fx * x ** (a * (n - 1))
        return lead * base, (lead + extra) * base
    base = fx * x ** (c.rho2 * (n - 1))
    lower = c.D1 ** (n - 1) * _gamma_ratio(c.rho1, n) * base
    upper = (c.D2 ** (n - 1) * _gamma_ratio(c.rho2, n)
             + 2 * c.M2 * n * (c.M2 + c.kappa2) ** (n - 1) / (c.D2 * x**c.rho2)) * base
    return lower, upper


def _wright_params(spec: DensitySpec, c: ConstantsBundle):
    """(rho_low, kappa_low, rho_up, kappa_up, power of x)."""
    if _use_1d_sharp(spec):
        a = 1.0 - spec.gamma
        return a, math.gamma(a), a, math.gamma(a), a
    return c.rho1, c.kappa1, c.rho2, c.kappa2, c.rho2


def p_lambda_bounds_wright_log(spec: DensitySpec, consts: Optional[ConstantsBundle], lam: float,
                               x: float) -> tuple[float, float]:
    """Logs of the Wright-function sandwich for p_lambda(x), |x| >= 1."""
    _require_x(x)
    _require_main(spec)
    c = consts or compute_constants(spec)
    r_lo, k_lo, r_up, k_up, p = _wright_params(spec, c)
    base = -lam * c.l1_norm - spec.m * x - (spec.d + 1) / 2 * math.log(x)
    s = lam * x**p
    return base + wright_log(r_lo, 0.0, k_lo * s), base + c.M2 * lam + wright_log(r_up, 0.0, k_up * s)


def p_lambda_bounds_wright(spec, consts, lam, x) -> tuple[float, float]:
    lo, hi = p_lambda_bounds_wright_log(spec, consts, lam, x)
    return math.exp(lo), math.exp(hi)


@dataclass(frozen=True)
class RegimeConstants:
    E1: float
    E2: float
    E3: float
    E4: float
    E5: float
    E6: float


# slack on the upper exponent so the polynomial prefactor is absorbed
E6_SLACK = 1.05


@lru_cache(maxsize=None)
def regime_constants(spec: DensitySpec) -> RegimeConstants:
    """E1, E2 from the explicit small-regime argument; E3-E6 fitted to the Wright sandwich.

    E4 is the exact leading exponent for the lower Wright function; E6 that of
    the upper one times E6_SLACK.  E3 (E5) is the min (max) of the ratio of the
    Wright function to the exponential over s = lam |x|^rho2 in [1, 1e8].
    """
    _require_main(spec)
    c = compute_constants(spec)
    r_lo, k_lo, r_up, k_up, _ = _wright_params(spec, c)
    d1 = 1.0 if _use_1d_sharp(spec) else c.D1
    E1 = d1
    E2 = math.exp(c.M2 + wright_log(r_up, 0.0, k_up))
    E4 = (1 + 1 / r_lo) * (r_lo * k_lo) ** (1 / (r_lo + 1))
    E6 = E6_SLACK * (1 + 1 / r_up) * (r_up * k_up) ** (1 / (r_up + 1))
    ss = np.geomspace(1.0, 1e8, 801)
    lo = [wright_log(r_lo, 0.0, k_lo * s) - E4 * s ** (1 / (r_lo + 1)) for s in ss]
    hi = [wright_log(r_up, 0.0, k_up * s) - E6 * s ** (1 / (r_up + 1)) for s in ss]
    return RegimeConstants(E1, E2, math.exp(min(lo)), E4, math.exp(max(hi)), E6)


def p_lambda_bounds_regimes(spec: DensitySpec, consts: Optional[ConstantsBundle], lam: float,
                            x: float) -> tuple[str, float, float]:
    """('small' | 'large', lower, upper) for p_lambda(x), |x| >= 1."""
    _require_x(x)
    _require_main(spec)
    c = consts or compute_constants(spec)
    E = regime_constants(spec)
    p = _wright_params(spec, c)[4]
    s = lam * x**p
    if s <= 1:
        base = lam * math.exp(-lam * c.l1_norm - spec.m * x) * x ** (-spec.gamma)
        return "small", E.E1 * base, E.E2 * base
    r_lo, r_up = _wright_params(spec, c)[0], _wright_params(spec, c)[2]
    logb = -lam * c.l1_norm - spec.m * x - (spec.d + 1) / 2 * math.log(x)
    lower = math.exp(logb + math.log(E.E3) + E.E4 * s ** (1 / (r_lo + 1))) if E.E3 > 0 else 0.0
    upper = math.exp(logb + math.log(E.E5) + lam * c.M2 + E.E6 * s ** (1 / (r_up + 1)))
    return "large", lower, upper


def p_lambda_small_x_bounds(spec: DensitySpec, consts: Optional[ConstantsBundle], lam: float,
                            x: float) -> tuple[float, float]:
    """lam e^{-lam||f||} f(x) <= p_lambda(x) <= e^{(M2 - ||f||) lam} lam f(x), 0 < |x| < 1."""
    _require_x(x, at_least_one=False)
    c = consts or compute_constants(spec)
    fx = float(density_f(spec, x))
    return lam * math.exp(-lam * c.l1_norm) * fx, math.exp((c.M2 - c.l1_norm) * lam) * lam * fx


def series_bounds_hg(spec: DensitySpec, consts: Optional[ConstantsBundle], lam: float, x: float,
                     n_max: int = 3) -> tuple[float, float]:
    """Partial g-series lower bound and h-series upper bound for p_lambda(x), |x| >= 1.

    The h-series is truncated at n_max and closed with the majorant
    sum_{i > n_max} lam^i M3^{i-1} H_i / i! (closed H bound), so both sides stay rigorous.
    """
    _require_x(x)
    c = consts or compute_constants(spec)
    fx = float(density_f(spec, x))
    scale = math.exp(-lam * c.l1_norm) * fx
    gs = [oracle.g_n_direct(spec, n, x) for n in range(1, n_max + 1)]
    hs = [oracle.h_n_direct(spec, n, x) for n in range(1, n_max + 1)]
    g_sum = sum(lam**n * g / math.factorial(n) for n, g in enumerate(gs, start=1))
    h_sum = sum(lam**n * h / math.factorial(n) for n, h in enumerate(hs, start=1))
    if spec.in_main_range:
        a = (spec.d + 1) / 2 - spec.gamma
        i = np.arange(n_max + 1, 4000, dtype=float)
        lt = (i * math.log(lam) + (i - 1) * math.log(c.M3) + i * special.gammaln(a)
              - special.gammaln(a * i) + a * (i - 1) * math.log(x) - special.gammaln(i + 1))
        h_sum += math.exp(special.logsumexp(lt))
    else:
        h_sum = math.inf
    return scale * g_sum, math.exp(c.M2 * lam) * scale * h_sum


def clear_caches():
    _PL_TABLES.clear()
    regime_constants.cache_clear()
