"""Radial functions sampled on a graded grid."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import BSpline, make_interp_spline
from scipy.special import lambertw

from .density import DensitySpec, Variant
from .records import fmt

# grid map xi(u) = log(u) + u / SCALE with u = r - offset: geometric near the support
# start, uniform (step h * SCALE) far out
SCALE = 4.0


def xi_of(u):
    return np.log(u) + u / SCALE


def u_of(xi):
    return SCALE * np.real(lambertw(np.exp(xi) / SCALE))


def make_grid(offset: float = 0.0, r_max: float = 200.0, h: float = 0.02, u_min: float = 1e-4,
              nodes=()) -> np.ndarray:
    """Nodes uniform in xi; extra nodes (e.g. kinks) replace their nearest neighbours."""
    x0, x1 = xi_of(u_min), xi_of(r_max - offset)
    k = int(np.ceil((x1 - x0) / h))
    xi = np.linspace(x0, x1, k + 1)
    for c in nodes:
        if c - offset <= u_min or c >= r_max:
            continue
        xc = xi_of(c - offset)
        xi = np.sort(np.append(xi[np.abs(xi - xc) > 0.5 * h], xc))
    grid = offset + u_of(xi)
    for c in nodes:
        i = int(np.argmin(np.abs(grid - c)))
        if abs(grid[i] - c) < 1e-9 * max(1.0, c):
            grid[i] = c
    return grid


def _interp(x, y) -> BSpline:
    k = 5 if x.size > 5 else (3 if x.size > 3 else 1)
    return make_interp_spline(x, y, k=k)


@dataclass
class RadialTable:
    """Positive radial function on (offset, inf), zero on [0, offset].

    Interpolation is a quintic spline of log(value) in xi(r - offset), split at
    the break radii, and extended beyond both ends (power law at the support
    start, exponential decay past the last node).
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "conv_power"
    n: int = 1
    spec: Optional[DensitySpec] = None
    offset: float = 0.0
    breaks: tuple = ()  # grid radii where the function is only continuous
    _spline: BSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(~(self.values > 0)) or np.any(~np.isfinite(self.values)):
            raise ValueError(f"table values must be finite and positive ({self.kind}, n={self.n})")
        self._xi = xi_of(self.grid - self.offset)
        self._logv = np.log(self.values)
        # one spline per piece between breaks
        cuts = [0]
        for b in sorted(self.breaks):
            i = int(np.argmin(np.abs(self.grid - b)))
            if not np.isclose(self.grid[i], b, rtol=1e-12, atol=0.0):
                raise ValueError(f"break {b} is not a grid node")
            if 2 <= i <= self.grid.size - 3:
                cuts.append(i)
        cuts.append(self.grid.size - 1)
        self._piece_lo = np.array([self._xi[c] for c in cuts[1:-1]])
        self._pieces = [_interp(self._xi[a:b + 1], self._logv[a:b + 1]) for a, b in zip(cuts[:-1], cuts[1:])]
        self._spline = self._pieces[0]
        u = self.grid[:2] - self.offset
        # power law below the first node, exponential-type decay past the last
        self._slope_lo = (self._logv[1] - self._logv[0]) / np.log(u[1] / u[0])
        self._slope_hi = (self._logv[-1] - self._logv[-2]) / (self._xi[-1] - self._xi[-2])

    def log_eval(self, r):
        r = np.asarray(r, dtype=float)
        u = r - self.offset
        out = np.full(r.shape, -np.inf)
        pos = u > 0
        if not np.any(pos):
            return out
        xi = xi_of(u[pos])
        if len(self._pieces) == 1:
            v = self._spline(xi)
        else:
            which = np.searchsorted(self._piece_lo, xi, side="right")
            v = np.empty_like(xi)
            for k, sp in enumerate(self._pieces):
                sel = which == k
                if np.any(sel):
                    v[sel] = sp(xi[sel])
        lo = xi < self._xi[0]
        hi = xi > self._xi[-1]
        v[lo] = self._logv[0] + self._slope_lo * np.log(u[pos][lo] / (self.grid[0] - self.offset))
        v[hi] = self._logv[-1] + self._slope_hi * (xi[hi] - self._xi[-1])
        out[pos] = v
        return out

    def __call__(self, r):
        out = np.exp(self.log_eval(r))
        return out[()] if out.ndim == 0 else out

    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        s = self.spec
        buf.write("# kind,n,d,m,gamma,variant\n")
        if s is not None:
            buf.write(f"# {self.kind},{self.n},{s.d},{fmt(float(s.m))},{fmt(float(s.gamma))},{s.variant.value}\n")
        else:
            buf.write(f"# {self.kind},{self.n},,,,\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value"])
        for r, v in zip(self.grid, self.values):
            w.writerow([fmt(float(r)), fmt(float(v))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, offset: float = 0.0) -> "RadialTable":
        lines = text.splitlines()
        meta = lines[1].lstrip("# ").split(",")
        kind, n = meta[0], int(meta[1])
        spec = None
        if meta[2]:
            spec = DensitySpec(int(meta[2]), float(meta[3]), float(meta[4]), Variant(meta[5]))
        rows = list(csv.reader(lines[3:]))
        grid = np.array([float(r[0]) for r in rows])
        values = np.array([float(r[1]) for r in rows])
        if kind in ("h", "H"):
            offset = float(n) if n >= 2 else 0.0
        return cls(grid, values, kind=kind, n=n, spec=spec, offset=offset)
