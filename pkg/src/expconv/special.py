"""Special-function kernel: gamma/beta family, a series 2F1, the Wright function."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma needs x > 0, got {x}")
    return float(special.gammaln(x))


def beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise ValueError(f"beta needs positive arguments, got a={a}, b={b}")
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def inc_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete beta B_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"inc_beta needs x in [0, 1], got {x}")
    if not (a > 0 and b > 0):
        raise ValueError(f"inc_beta needs positive a, b, got a={a}, b={b}")
    return float(special.betainc(a, b, x)) * beta(a, b)


def hypergeom_2f1(a: float, b: float, c: float, x: float, rtol: float = 1e-17,
                  max_terms: int = 100_000) -> tuple[float, float]:
    """Gauss series F(a, b, c; x) for x in [0, 1); returns (value, tail_bound)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"series 2F1 needs x in [0, 1), got {x}")
    if not c > 0:
        raise ValueError("c must be positive")
    terms = [1.0]
    term = 1.0
    total = 1.0
    for s in range(max_terms):
        factor = (a + s) * (b + s) / ((c + s) * (s + 1))
        ratio = factor * x
        term *= ratio
        terms.append(term)
        total += term
        if s > max(a, b, c) and ratio < 1 and abs(term) <= rtol * abs(total):
            q = x * max(1.0, factor)
            tail = abs(term) * q / (1 - q)
            return math.fsum(terms), tail
    raise RuntimeError("2F1 series did not converge")


def beta_quotient_threshold(a0: float, b: float) -> float:
    """Radius r0 beyond which 2 B_{1/r}(a, b) <= B(a, b) for every a >= a0."""
    if not 0 < a0 <= 1:
        raise ValueError(f"a0 must lie in (0, 1], got {a0}")
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    fl = math.floor(b)
    frac = b - fl
    ce = math.ceil(b)
    first = (8.0 * ce**fl / a0 ** (1.0 - frac)) ** (1.0 / a0)
    second = (2.0 ** (1.0 / a0) * math.exp(1.0 / math.e)) ** (2 * fl)
    return first * second


class Regime(str, enum.Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class WrightEval:
    rho: float
    beta: float
    t: float
    log_value: float
    regime: Regime
    rel_err: float

    @property
    def value(self) -> float:
        # may overflow to inf for very large t; log_value stays finite
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_value))

    @property
    def err_estimate(self) -> float:
        return self.value * self.rel_err


def wright_switch(rho: float) -> float:
    """t above which the largest series term sits beyond index 150."""
    return rho**rho * 150.0 ** (rho + 1)


def _peak_index(rho: float, t: float) -> float:
    return (t / rho**rho) ** (1.0 / (rho + 1))


def wright_series_log(rho: float, beta_: float, t: float) -> tuple[float, float]:
    """log phi(rho, beta; t) by direct summation; returns (log_value, relative tail bound)."""
    if t == 0:
        if beta_ == 0:
            return -math.inf, 0.0
        return -log_gamma(beta_), 0.0
    logt = math.log(t)
    start = 1 if beta_ == 0 else 0
    peak = _peak_index(rho, t)
    stop = int(2 * peak + 40)
    while True:
        n = np.arange(start, stop + 1, dtype=float)
        lt = n * logt - special.gammaln(rho * n + beta_) - special.gammaln(n + 1)
        top = lt.max()
        # the log-terms are concave in n, so successive ratios never increase
        tail_ok = (lt.size >= 4 and lt[-1] < lt[-2]
                   and np.all(lt[-3:] < top + math.log(1e-16) - math.log(lt.size)))
        if tail_ok:
            break
        stop *= 2
    shifted = np.exp(lt - top)
    total = math.fsum(shifted.tolist())
    q = math.exp(lt[-1] - lt[-2])
    tail = shifted[-1] * q / (1 - q) / total
    return top + math.log(total), tail


def wright_leading_log(rho: float, beta_: float, t: float) -> tuple[float, float]:
    """Leading large-t form in log space; returns (log_value, relative error scale)."""
    z = (rho * t) ** (1.0 / (rho + 1))
    logv = ((1 - 2 * beta_) / (2 * rho + 2)) * math.log(rho * t) + (1 + 1 / rho) * z \
        - 0.5 * math.log(2 * math.pi * (rho + 1))
    return logv, 1.0 / z


def wright_asymptotic_log(rho: float, beta_: float, t: float) -> tuple[float, float]:
    """Saddle point of the series in the summation index, with the first Laplace correction.

    S(n) = n log t - log Gamma(rho n + beta) - log Gamma(n + 1) is concave; the sum
    equals the integral of e^S up to exponentially small terms once the peak is
    a few indices wide.  Returns (log_value, relative error scale).
    """
    logt = math.log(t)

    def dS(n):
        return logt - rho * special.digamma(rho * n + beta_) - special.digamma(n + 1)

    lo, hi = 1e-12, 2 * _peak_index(rho, t) + 10
    if dS(lo) <= 0:
        raise ValueError(f"t={t} too small for the asymptotic regime")
    while dS(hi) > 0:
        hi *= 2
    n = optimize.brentq(dS, lo, hi, xtol=1e-13, rtol=1e-15)
    S = n * logt - special.gammaln(rho * n + beta_) - special.gammaln(n + 1)
    x = rho * n + beta_
    a = rho**2 * special.polygamma(1, x) + special.polygamma(1, n + 1)
    b = -(rho**3 * special.polygamma(2, x) + special.polygamma(2, n + 1))
    c = -(rho**4 * special.polygamma(3, x) + special.polygamma(3, n + 1))
    corr = c / (8 * a * a) + 5 * b * b / (24 * a**3)
    logv = float(S + 0.5 * math.log(2 * math.pi / a) + math.log1p(corr))
    return logv, float(max(corr * corr, abs(corr) / n) + 1e-15 * abs(logv))


def wright_phi(rho: float, beta_: float, t: float, regime: Regime | str | None = None) -> WrightEval:
    """phi(rho, beta; t) = sum_n t^n / (Gamma(rho n + beta) n!).

    The regime is picked from t unless forced.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if beta_ < 0 or t < 0:
        raise ValueError("beta and t must be nonnegative")
    if regime is None:
        regime = Regime.SERIES if t <= wright_switch(rho) else Regime.ASYMPTOTIC
    regime = Regime(regime)
    if regime is Regime.SERIES:
        logv, rel = wright_series_log(rho, beta_, t)
    else:
        if t <= 0:
            raise ValueError("asymptotic regime needs t > 0")
        logv, rel = wright_asymptotic_log(rho, beta_, t)
    return WrightEval(rho, beta_, t, logv, regime, rel)


def wright_log(rho: float, beta_: float, t: float) -> float:
    return wright_phi(rho, beta_, t).log_value


def wright_envelope(rho: float, beta_: float, ts=None) -> tuple[float, float]:
    """Empirical (min, max) of phi / (t^{(1-2b)/(2rho+2)} exp((1+1/rho)(rho t)^{1/(rho+1)})) over t."""
    if ts is None:
        ts = np.geomspace(1.0, 1e6, 61)
    logs = []
    for t in ts:
        lv = wright_phi(rho, beta_, float(t)).log_value
        ref = ((1 - 2 * beta_) / (2 * rho + 2)) * math.log(t) + (1 + 1 / rho) * (rho * t) ** (1 / (rho + 1))
        logs.append(lv - ref)
    logs = np.array(logs)
    return float(np.exp(logs.min())), float(np.exp(logs.max()))
