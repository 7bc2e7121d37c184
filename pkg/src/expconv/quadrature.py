"""Graded composite Gauss-Legendre rules, vectorized over many integration intervals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def graded_rule(levels: int = 8, ratio: float = 4.0, npts: int = 8, both_ends: bool = True,
                singular_power: float = 1.0):
    """Nodes/weights on [0, 1] with panels shrinking geometrically toward the ends.

    With singular_power q != 1 the innermost panel at 0 uses tau = e * w^q, which
    flattens an endpoint behaviour tau^(1/q - 1).
    """
    small = ratio ** -np.arange(levels, 0, -1, dtype=float)
    if both_ends:
        edges = np.concatenate([[0.0], 0.5 * small, [0.5], 1.0 - 0.5 * small[::-1], [1.0]])
    else:
        edges = np.concatenate([[0.0], small, [1.0]])
    gx, gw = gauss_legendre(npts)
    nodes, weights = [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if i == 0 and singular_power != 1.0:
            nodes.append(a + (b - a) * gx**singular_power)
            weights.append((b - a) * singular_power * gx ** (singular_power - 1.0) * gw)
        else:
            nodes.append(a + (b - a) * gx)
            weights.append((b - a) * gw)
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=None)
def graded_rule_two_sided(levels: int = 6, ratio: float = 4.0, npts: int = 8,
                          q_lo: float = 1.0, q_hi: float = 1.0):
    """Like graded_rule with substitutions at both ends.

    Returns (tau, 1 - tau, weights); the complement is built from the mirrored
    construction so it keeps full relative precision near 1.
    """
    half_n, half_w = _half_rule(levels, ratio, npts, q_lo)
    mir_n, mir_w = _half_rule(levels, ratio, npts, q_hi)
    tau = np.concatenate([half_n, 1.0 - mir_n[::-1]])
    comp = np.concatenate([1.0 - half_n, mir_n[::-1]])
    return tau, comp, np.concatenate([half_w, mir_w[::-1]])


def _half_rule(levels, ratio, npts, q):
    small = 0.5 * ratio ** -np.arange(levels, 0, -1, dtype=float)
    edges = np.concatenate([[0.0], small, [0.5]])
    gx, gw = gauss_legendre(npts)
    nodes, weights = [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if i == 0 and q != 1.0:
            nodes.append(a + (b - a) * gx**q)
            weights.append((b - a) * q * gx ** (q - 1.0) * gw)
        else:
            nodes.append(a + (b - a) * gx)
            weights.append((b - a) * gw)
    return np.concatenate(nodes), np.concatenate(weights)
