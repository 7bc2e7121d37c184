"""The density family f(x) = exp(-m|x|) g(|x|) and its explicit constants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np
from scipy import integrate, special

from .special import beta_quotient_threshold


class Variant(str, enum.Enum):
    PURE = "pure"  # g(r) = r^-gamma
    CUTOFF = "cutoff"  # g(r) = (1 v r)^-gamma


@dataclass(frozen=True)
class DensitySpec:
    d: int
    m: float
    gamma: float
    variant: Variant = Variant.PURE

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not self.m > 0:
            raise ValueError(f"rate m must be positive, got {self.m}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.variant is Variant.PURE and not self.gamma < self.d:
            raise ValueError(
                f"pure power profile needs gamma < d for integrability (gamma={self.gamma}, d={self.d})"
            )

    @property
    def in_main_range(self) -> bool:
        return self.gamma < (self.d + 1) / 2

    @property
    def singular(self) -> bool:
        """True when f blows up at the origin."""
        return self.variant is Variant.PURE and self.gamma > 0

    @property
    def label(self) -> str:
        return f"d={self.d},m={self.m:g},gamma={self.gamma:g},{self.variant.value}"


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_volume(d: int, radius: float = 1.0) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


def profile_g(spec: DensitySpec, r):
    """Profile g(r); the pure power profile returns +inf at r = 0 when gamma > 0."""
    r = np.asarray(r, dtype=float)
    if spec.gamma == 0:
        out = np.ones_like(r)
    elif spec.variant is Variant.PURE:
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, np.power(np.where(r > 0, r, 1.0), -spec.gamma), np.inf)
    else:
        out = np.power(np.maximum(r, 1.0), -spec.gamma)
    return out[()] if out.ndim == 0 else out


def log_profile_g(spec: DensitySpec, r):
    r = np.asarray(r, dtype=float)
    if spec.gamma == 0:
        out = np.zeros_like(r)
    elif spec.variant is Variant.PURE:
        with np.errstate(divide="ignore"):
            out = -spec.gamma * np.log(r)
    else:
        out = -spec.gamma * np.log(np.maximum(r, 1.0))
    return out[()] if out.ndim == 0 else out


def density_f(spec: DensitySpec, r):
    """f at radius r: exp(-m r) g(r). Singular value at the origin propagates as +inf."""
    r = np.asarray(r, dtype=float)
    out = np.exp(-spec.m * r) * profile_g(spec, r)
    return out[()] if np.ndim(out) == 0 else out


def log_density_f(spec: DensitySpec, r):
    r = np.asarray(r, dtype=float)
    out = -spec.m * r + log_profile_g(spec, r)
    return out[()] if np.ndim(out) == 0 else out


def _upper_gamma(a: float, x: float) -> float:
    """Non-regularized upper incomplete gamma, valid for any real a (including a <= 0)."""
    if a > 0:
        return float(special.gammaincc(a, x) * special.gamma(a))
    return float(mpmath.gammainc(a, x))


def _lower_gamma(a: float, x: float) -> float:
    return float(special.gammainc(a, x) * special.gamma(a))


def radial_mass_split(spec: DensitySpec) -> tuple[float, float]:
    """Radial masses of f on the pieces r < 1 and r >= 1 (surface factor included)."""
    d, m, gam = spec.d, spec.m, spec.gamma
    s = sphere_area(d)
    if spec.variant is Variant.PURE:
        inner = _lower_gamma(d - gam, m) / m ** (d - gam)
    else:
        inner = _lower_gamma(d, m) / m**d
    outer = _upper_gamma(d - gam, m) / m ** (d - gam)
    return s * inner, s * outer


def l1_norm(spec: DensitySpec) -> float:
    """||f||_1, analytic."""
    d, m, gam = spec.d, spec.m, spec.gamma
    if spec.variant is Variant.PURE:
        return sphere_area(d) * math.gamma(d - gam) / m ** (d - gam)
    inner, outer = radial_mass_split(spec)
    return inner + outer


def l1_norm_quadrature(spec: DensitySpec) -> float:
    """||f||_1 by adaptive radial quadrature; an independent check of l1_norm."""
    d = spec.d

    def integrand(r):
        return r ** (d - 1) * density_f(spec, r)

    a, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    b, _ = integrate.quad(integrand, 1.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return sphere_area(d) * (a + b)


def m3_integral(d: int, m: float) -> float:
    """int_0^inf exp(-(m/pi^2) s^2/sqrt(1+s^2)) s^{d-2} ds."""
    c = m / math.pi**2

    def integrand(s):
        return math.exp(-c * s * s / math.sqrt(1.0 + s * s)) * s ** (d - 2)

    # for s >= 1 the integrand is below s^{d-2} exp(-c s / sqrt 2); pick S with negligible tail
    rate = c / math.sqrt(2.0)
    upper = 1.0
    while True:
        tail = float(special.gammaincc(d - 1, rate * upper)) * math.gamma(d - 1) / rate ** (d - 1)
        if tail < 1e-13:
            break
        upper *= 1.5
    edges = np.concatenate([[0.0, 1.0], np.geomspace(2.0, upper, 24)])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=0, epsrel=1e-12, limit=200)
        total += val
    return total


@dataclass(frozen=True)
class ConstantsBundle:
    """Explicit constants for one density spec.

    The compound Poisson fields (r0, C_r0, rho*, kappa*, D*) are only meaningful
    in the main range gamma < (d+1)/2; outside it they are NaN.
    """

    spec: DensitySpec
    C1: float
    C2: float
    C3: float
    M1: float
    M2: float
    M3: float
    M4: float
    l1_norm: float
    r0: float
    C_r0: float
    rho1: float
    rho2: float
    kappa1: float
    kappa2: float
    D1: float
    D2: float
    extras: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        keys = ["C1", "C2", "C3", "M1", "M2", "M3", "M4", "l1_norm", "r0", "C_r0",
                "rho1", "rho2", "kappa1", "kappa2", "D1", "D2"]
        return {k: getattr(self, k) for k in keys}


_CONSTANTS_CACHE: dict = {}


def compute_constants(spec: DensitySpec) -> ConstantsBundle:
    if spec in _CONSTANTS_CACHE:
        return _CONSTANTS_CACHE[spec]
    d, m, gam = spec.d, spec.m, spec.gamma
    norm = l1_norm(spec)
    C1 = C2 = math.exp(m) * 2.0**gam
    C3 = 2.0**gam
    M1 = float(density_f(spec, 1.0)) * ball_volume(d, 0.5)
    M2 = max(C1, C2) * norm
    if d >= 2:
        M3 = max(1.0, 2 * math.pi ** ((d - 1) / 2) / math.gamma((d - 1) / 2) * m3_integral(d, m))
        M4 = min(1.0, 2.0 ** (d - 1) / (C3 * math.pi ** ((d - 3) / 2) * math.gamma((d - 1) / 2)))
    else:
        M3 = 1.0
        M4 = 1.0

    nan = float("nan")
    r0 = C_r0 = rho1 = rho2 = kappa1 = kappa2 = D1 = D2 = nan
    if spec.in_main_range:
        if spec.variant is Variant.PURE:
            a0, b = min(1.0, d - gam), d - gam
            rho1 = d - gam
        else:
            a0, b = 1.0, float(d)
            rho1 = float(d)
        r0 = beta_quotient_threshold(a0, b)
        C_r0 = 1.0 if d == 1 else math.exp(-m * r0) / (d - 1)
        rho2 = (d + 1) / 2 - gam
        if d == 1:
            D1, D2 = C_r0 / 2, 1.0
        else:
            D1, D2 = C_r0 * M4 / 2, M3
        kappa1 = D1 * math.gamma(rho1)
        kappa2 = D2 * math.gamma(rho2)
    bundle = ConstantsBundle(spec, C1, C2, C3, M1, M2, M3, M4, norm, r0, C_r0,
                             rho1, rho2, kappa1, kappa2, D1, D2)
    _CONSTANTS_CACHE[spec] = bundle
    return bundle


def verify_assumptions(spec: DensitySpec, grid, consts: Optional[ConstantsBundle] = None,
                       tol: float = 1e-12):
    """Check (A.a)-(A.c) and the doubling of g on a radius grid; returns BoundCheckRecords."""
    from .records import BoundCheckRecord

    consts = consts or compute_constants(spec)
    grid = np.asarray(sorted(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    out = []

    fvals = density_f(spec, grid)
    if grid.size > 1:
        # worst successive increase; lhs = f(r_{i+1}), rhs = f(r_i)
        i = int(np.argmax(fvals[1:] - fvals[:-1]))
        out.append(BoundCheckRecord.make("assump.monotone", spec, lhs=fvals[i + 1], rhs=fvals[i], tol=tol))
    else:
        out.append(BoundCheckRecord.make("assump.monotone", spec, lhs=0.0, rhs=0.0, tol=tol))

    def worst_ratio(pairs):
        if not pairs:
            return 0.0
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        return float(np.max(np.exp(log_density_f(spec, x) - log_density_f(spec, y))))

    # (A.b): 1 <= x <= y <= x + 1
    xs = grid[grid >= 1]
    pairs = [(x, y) for x in xs for y in np.linspace(x, x + 1, 9)]
    if pairs:
        out.append(BoundCheckRecord.make("assump.C1", spec, lhs=worst_ratio(pairs), rhs=consts.C1, tol=tol))
    # (A.c): x <= 1 against 2x
    xs = grid[(grid > 0) & (grid <= 1)]
    if xs.size:
        out.append(BoundCheckRecord.make("assump.C2", spec, lhs=worst_ratio([(x, 2 * x) for x in xs]),
                                         rhs=consts.C2, tol=tol))
    xs = grid[grid > 0]
    if xs.size:
        ratio = np.max(np.exp(log_profile_g(spec, xs) - log_profile_g(spec, 2 * xs)))
        out.append(BoundCheckRecord.make("assump.C3", spec, lhs=float(ratio), rhs=consts.C3, tol=tol))
    return out
