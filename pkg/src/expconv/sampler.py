"""Exact Monte Carlo sampling of the compound Poisson law P_lambda."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from .density import DensitySpec, Variant, l1_norm, radial_mass_split
from .records import fmt

# draws per independent stream; fixed so batches do not depend on scheduling
STREAM_BLOCK = 1 << 16


@dataclass
class SampleBatch:
    spec: DensitySpec
    lam: float
    seed: int
    points: np.ndarray  # (count, d)
    atom_count: int

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def to_csv(self, path=None) -> str:
        s = self.spec
        buf = io.StringIO()
        buf.write(f"# d={s.d},m={fmt(float(s.m))},gamma={fmt(float(s.gamma))},variant={s.variant.value},"
                  f"lambda={fmt(float(self.lam))},seed={self.seed},atom_count={self.atom_count}\n")
        buf.write(",".join(f"x_{i + 1}" for i in range(s.d)) + "\n")
        for row in self.points:
            buf.write(",".join(fmt(float(v)) for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def cutoff_piece_weights(spec: DensitySpec) -> tuple[float, float]:
    """Probabilities of r < 1 and r >= 1 under the radial marginal of f / ||f||_1."""
    inner, outer = radial_mass_split(spec)
    total = inner + outer
    return inner / total, outer / total


def _sample_cutoff(spec: DensitySpec, size: int, rng: np.random.Generator) -> np.ndarray:
    d, m = spec.d, spec.m
    w_in, _ = cutoff_piece_weights(spec)
    inner = rng.random(size) < w_in
    out = np.empty(size)
    k = int(inner.sum())
    # r < 1: density ~ r^{d-1} e^{-mr}, inverse CDF of the truncated gamma law
    u = rng.random(k)
    out[inner] = special.gammaincinv(d, u * special.gammainc(d, m)) / m
    k = size - k
    a = d - spec.gamma
    if a > 0:
        # r >= 1: density ~ r^{a-1} e^{-mr}, inverse of the upper tail
        u = rng.random(k)
        out[~inner] = special.gammainccinv(a, u * special.gammaincc(a, m)) / m
    else:
        # a <= 0 has no regularized form; accept 1 + Exp(m) with probability r^{a-1} <= 1
        vals = np.empty(0)
        while vals.size < k:
            r = 1.0 + rng.exponential(1.0 / m, size=2 * (k - vals.size) + 16)
            keep = rng.random(r.size) < r ** (a - 1.0)
            vals = np.concatenate([vals, r[keep]])
        out[~inner] = vals[:k]
    return out


def sample_radius(spec: DensitySpec, rng: np.random.Generator, size: Optional[int] = None):
    """Radius of a draw from f / ||f||_1."""
    n = 1 if size is None else size
    if spec.variant is Variant.PURE or spec.gamma == 0:
        r = rng.gamma(spec.d - spec.gamma, 1.0 / spec.m, size=n)
    else:
        r = _sample_cutoff(spec, n, rng)
    return float(r[0]) if size is None else r


def sample_directions(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((size, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_jumps(spec: DensitySpec, size: int, rng: np.random.Generator) -> np.ndarray:
    return sample_radius(spec, rng, size)[:, None] * sample_directions(spec.d, size, rng)


def _block(spec: DensitySpec, lam: float, count: int, rng: np.random.Generator):
    counts = rng.poisson(lam * l1_norm(spec), size=count)
    total = int(counts.sum())
    jumps = sample_jumps(spec, total, rng)
    owner = np.repeat(np.arange(count), counts)
    pts = np.zeros((count, spec.d))
    for j in range(spec.d):
        pts[:, j] = np.bincount(owner, weights=jumps[:, j], minlength=count)
    return pts, int(np.sum(counts == 0))


def sample_compound_poisson(spec: DensitySpec, lam: float, count: int, seed: int,
                            threads: int = 1) -> SampleBatch:
    """count draws of sum_{k <= N} Y_k with N ~ Poisson(lam ||f||_1), Y_k iid ~ f / ||f||_1.

    Stream i of seed covers draws [i * STREAM_BLOCK, (i + 1) * STREAM_BLOCK), so
    the batch is identical for any thread count.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    nblocks = max(1, math.ceil(count / STREAM_BLOCK))
    children = np.random.SeedSequence(seed).spawn(nblocks)
    sizes = [min(STREAM_BLOCK, count - i * STREAM_BLOCK) for i in range(nblocks)]

    def run(i):
        return _block(spec, lam, max(sizes[i], 0), np.random.default_rng(children[i]))

    if threads > 1 and nblocks > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(nblocks)))
    else:
        parts = [run(i) for i in range(nblocks)]
    pts = np.concatenate([p[0] for p in parts], axis=0) if parts else np.zeros((0, spec.d))
    atoms = sum(p[1] for p in parts)
    return SampleBatch(spec, lam, int(seed), pts[:count], atoms)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical_1pct: float
    n: int

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_1pct


def ks_against(radii: np.ndarray, cdf) -> KSResult:
    """Two-sided KS statistic of the radii vs. a CDF, with the asymptotic 1% critical value."""
    r = np.sort(np.asarray(radii, dtype=float))
    n = r.size
    F = np.asarray(cdf(r), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    crit = float(stats.kstwobign.isf(0.01) / math.sqrt(n))
    return KSResult(stat, crit, n)


def atom_check(batch: SampleBatch, sigmas: float = 4.0) -> tuple[float, float, bool]:
    """(observed fraction, expected e^{-lam||f||}, within sigmas binomial standard deviations)."""
    p = math.exp(-batch.lam * l1_norm(batch.spec))
    n = batch.count
    frac = batch.atom_count / n
    sd = math.sqrt(p * (1 - p) / n)
    return frac, p, abs(frac - p) <= sigmas * sd + 1e-15
