"""Named verification suites over a parameter matrix, producing BoundCheckRecords."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

from . import aux, compound_poisson as cp, oracle, sampler
from .density import DensitySpec, Variant, compute_constants, density_f, verify_assumptions
from .records import BoundCheckRecord, SuiteReport
from .special import beta as beta_fn, beta_quotient_threshold, inc_beta, wright_phi

rec = BoundCheckRecord.make


def default_gammas(d: int) -> list[float]:
    return [0.0, (d + 1) / 4]


@dataclass
class SuiteConfig:
    suite: str = "all"
    d: list = field(default_factory=lambda: [1, 2, 3])
    gamma: Optional[list] = None  # None: per-d defaults {0, (d+1)/4}
    m: list = field(default_factory=lambda: [0.5, 1.0])
    variant: list = field(default_factory=lambda: ["pure", "cutoff"])
    lam: list = field(default_factory=lambda: [0.25, 1.0, 4.0])
    x: list = field(default_factory=lambda: [1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0])
    n: list = field(default_factory=lambda: [1, 2, 3])
    small_x: list = field(default_factory=lambda: [0.1, 0.5, 0.9])
    divergence_x: list = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    tol: float = 1e-5
    cert_tol: float = 1e-8
    plambda_cap: float = 12.0  # lambda ||f||_1 above this is skipped
    seed: int = 20240607
    sample_count: int = 100_000
    threads: int = 1
    out: Optional[str] = None

    @classmethod
    def from_json(cls, path: str, **overrides) -> "SuiteConfig":
        with open(path) as fh:
            raw = json.load(fh)
        if "lambda" in raw:
            raw["lam"] = raw.pop("lambda")
        names = {f.name for f in fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})

    def specs(self) -> list[DensitySpec]:
        out = []
        for d in self.d:
            gammas = default_gammas(d) if self.gamma is None else self.gamma
            for g in gammas:
                for v in self.variant:
                    for m in self.m:
                        if g == 0 and v == "cutoff" and "pure" in self.variant:
                            continue  # same density as the pure profile
                        if v == "pure" and not g < d:
                            continue
                        spec = DensitySpec(d, float(m), float(g), Variant(v))
                        if spec not in out:
                            out.append(spec)
        return out


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get("EXPCONV_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ValueError(f"EXPCONV_THREADS must be an integer, got {raw!r}") from exc


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = 1e3 * (time.perf_counter() - self.t0)


def _log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def _strict_increase(check_id, spec, xs, vals, ms, note=""):
    out = []
    for i in range(len(xs) - 1):
        r = rec(check_id, spec, lhs=vals[i], rhs=vals[i + 1], tol=0.0, x=float(xs[i + 1]),
                runtime_ms=ms, note=note or f"x {xs[i]:g} -> {xs[i + 1]:g}")
        r.passed = bool(vals[i] < vals[i + 1])
        out.append(r)
    return out


def _in_scope(spec: DensitySpec, lam: float, cfg: SuiteConfig) -> bool:
    return lam * compute_constants(spec).l1_norm <= cfg.plambda_cap


# ---------------------------------------------------------------------------
# per-spec suites: fn(spec, cfg, skipped) -> records


def suite_assumptions(spec, cfg, skipped):
    grid = sorted(set(cfg.x) | set(np.geomspace(1e-3, 100.0, 50).tolist()))
    with _Timer() as t:
        recs = verify_assumptions(spec, grid)
    for r in recs:
        r.runtime_ms = t.ms / len(recs)
    return recs


def suite_thm1(spec, cfg, skipped):
    c = compute_constants(spec)
    out = []
    xs = np.array([x for x in cfg.x if x >= 1], dtype=float)
    small = np.array([x for x in cfg.x if x <= 2], dtype=float)
    for n in [n for n in cfg.n if n >= 2]:
        with _Timer() as t:
            fx = density_f(spec, xs)
            fn = oracle.fnstar_points(spec, n, xs, prev=oracle.nfold_table(spec, n - 1) if n >= 3 else None)
            hs = [oracle.h_n_direct(spec, i, xs) for i in range(1, n + 1)]
            gn = oracle.g_n_direct(spec, n, xs)
            upper = fx * sum(math.comb(n, i) * c.M2 ** (n - i) * hs[i - 1] for i in range(1, n + 1))
            lower = fx * np.maximum(gn, c.M1 ** (n - 1))
        ms = t.ms / (4 * xs.size)
        for j, x in enumerate(xs):
            out.append(rec("thm1.binomial", spec, lhs=fn[j], rhs=upper[j], tol=cfg.tol, n=n, x=x, runtime_ms=ms))
            out.append(rec("lem.lower_gen", spec, lhs=lower[j], rhs=fn[j], tol=cfg.tol, n=n, x=x, runtime_ms=ms))
            out.append(rec("oracle.h_le_g", spec, lhs=hs[n - 1][j], rhs=gn[j], tol=cfg.tol, n=n, x=x, runtime_ms=ms))
        if small.size:
            fs = oracle.fnstar_points(spec, n, small, prev=oracle.nfold_table(spec, n - 1) if n >= 3 else None)
            bound = n * (c.C2 * c.l1_norm) ** (n - 1) * density_f(spec, small)
            for j, x in enumerate(small):
                out.append(rec("lem.es_for_dob", spec, lhs=fs[j], rhs=bound[j], tol=cfg.tol, n=n, x=x))
    return out


def suite_thm2(spec, cfg, skipped):
    """h_n <= M3^{n-1} H_n and g_n >= M4^{n-1} G_n (d >= 2)."""
    if spec.d < 2:
        return []
    c = compute_constants(spec)
    out = []
    xs = np.array([x for x in cfg.x if x >= 1], dtype=float)
    for n in [n for n in cfg.n if n >= 2]:
        with _Timer() as t:
            h = oracle.h_n_direct(spec, n, xs)
            H = aux.H_n(spec, n, xs)
            g = oracle.g_n_direct(spec, n, xs)
            G = aux.G_n(spec, n, xs)
        ms = t.ms / (2 * xs.size)
        for j, x in enumerate(xs):
            out.append(rec("thm2.hn_le_Hn", spec, lhs=h[j], rhs=c.M3 ** (n - 1) * H[j], tol=cfg.tol, n=n, x=x,
                           runtime_ms=ms))
            out.append(rec("thm4.gn_ge_Gn", spec, lhs=c.M4 ** (n - 1) * G[j], rhs=g[j], tol=cfg.tol, n=n, x=x,
                           runtime_ms=ms))
    return out


def suite_althn(spec, cfg, skipped):
    if not spec.in_main_range:
        return []
    out = []
    xs = np.array([x for x in cfg.x if x >= 1], dtype=float)
    for n in (2, 3, 4):
        with _Timer() as t:
            H = aux.H_n(spec, n, xs)
            B = aux.H_n_closed_bound(spec.d, spec.gamma, n, xs)
        for j, x in enumerate(xs):
            out.append(rec("lem.altHn", spec, lhs=H[j], rhs=B[j], tol=cfg.tol, n=n, x=x,
                           runtime_ms=t.ms / xs.size))
    return out


def suite_glower(spec, cfg, skipped):
    if not spec.in_main_range:
        return []
    c = compute_constants(spec)
    out = []
    note = "vacuous lower bound" if c.C_r0 == 0 else ""
    big = np.array([x for x in cfg.x if x >= 1], dtype=float)
    small = np.array(sorted({0.1, 0.5} | {x for x in cfg.x if x <= c.r0}), dtype=float)
    mid = big[big <= c.r0]
    for n in (2, 3, 4):
        with _Timer() as t:
            G = aux.G_n(spec, n, big)
            lb = aux.G_n_lower_bound(spec, c, n, big)
            Gs = aux.G_n(spec, n, small)
            ls = aux.G_n_lower_bound_small(spec, c, n, small)
            Gm = aux.G_n(spec, n, mid)
            lm = aux.G_n_lower_bound(spec, c, n, mid, bounded_range=True)
        for j, x in enumerate(big):
            out.append(rec("lem.G_lower", spec, lhs=lb[j], rhs=G[j], tol=cfg.tol, n=n, x=x, note=note))
        for j, x in enumerate(small):
            out.append(rec("lem.low_es_small", spec, lhs=ls[j], rhs=Gs[j], tol=cfg.tol, n=n, x=x, note=note))
        for j, x in enumerate(mid):
            out.append(rec("cor.col1", spec, lhs=lm[j], rhs=Gm[j], tol=cfg.tol, n=n, x=x, note=note,
                           runtime_ms=t.ms / (big.size + small.size + mid.size)))
    for x in sorted(set(cfg.x) | {0.5}):
        G2 = float(aux.G_n(spec, 2, x))
        out.append(rec("lem.estima", spec, lhs=aux.G2_one_step_lower(spec, x, c), rhs=G2, tol=cfg.tol,
                       n=2, x=x, note=note))
    return out


_PL_CACHE: dict = {}


def _plambda(spec, lam, xs):
    key = (spec, lam, tuple(xs))
    if key not in _PL_CACHE:
        _PL_CACHE[key] = cp.p_lambda(spec, lam, list(xs))
    return _PL_CACHE[key]


def suite_poisson(spec, cfg, skipped):
    if not spec.in_main_range:
        return []
    c = compute_constants(spec)
    out = []
    xs = np.array([x for x in cfg.x if x >= 1], dtype=float)
    note = "vacuous lower bound" if c.D1 == 0 else ""
    for n in cfg.n:
        with _Timer() as t:
            fn = oracle.fnstar_points(spec, n, xs, prev=oracle.nfold_table(spec, n - 1) if n >= 3 else None)
        for j, x in enumerate(xs):
            lo, hi = cp.nstar_bounds(spec, c, n, float(x))
            out.append(rec("thm_poisson.nstar_lower", spec, lhs=lo, rhs=fn[j], tol=cfg.tol, n=n, x=x,
                           note=note, runtime_ms=t.ms / xs.size))
            out.append(rec("thm_poisson.nstar_upper", spec, lhs=fn[j], rhs=hi, tol=cfg.tol, n=n, x=x))
    for lam in cfg.lam:
        if not _in_scope(spec, lam, cfg):
            skipped.append(f"thm_poisson {spec.label} lambda={lam:g}: lambda*||f||_1="
                           f"{lam * c.l1_norm:.4g} > {cfg.plambda_cap:g}")
            continue
        with _Timer() as t:
            res = _plambda(spec, lam, xs)
        ms = t.ms / xs.size
        for r in res:
            llo, lhi = cp.p_lambda_bounds_wright_log(spec, c, lam, r.x)
            lv = _log(r.value)
            out.append(rec("thm_poisson.sandwich_lower", spec, lhs=math.exp(llo), rhs=r.value, tol=cfg.tol,
                           lam=lam, x=r.x, log_lhs=llo, log_rhs=lv, runtime_ms=ms, note=note))
            out.append(rec("thm_poisson.sandwich_upper", spec, lhs=r.value, rhs=math.exp(min(lhi, 700.0)),
                           tol=cfg.tol, lam=lam, x=r.x, log_lhs=lv, log_rhs=lhi))
            out.append(rec("thm_poisson.certificate", spec, lhs=r.truncation_bound, rhs=cfg.cert_tol * r.value,
                           tol=0.0, lam=lam, x=r.x, n=r.n_terms,
                           note=f"rigorous majorant/value={r.majorant_bound / r.value:.3g}"))
    return out


def suite_cor_poiss(spec, cfg, skipped):
    c = compute_constants(spec)
    out = []
    xs = np.array(cfg.small_x, dtype=float)
    big = np.array([x for x in cfg.x if x >= 1], dtype=float)
    for lam in cfg.lam:
        if not _in_scope(spec, lam, cfg):
            skipped.append(f"cor_poiss {spec.label} lambda={lam:g}: lambda*||f||_1="
                           f"{lam * c.l1_norm:.4g} > {cfg.plambda_cap:g}")
            continue
        with _Timer() as t:
            res = _plambda(spec, lam, xs)
        for r in res:
            lo, hi = cp.p_lambda_small_x_bounds(spec, c, lam, r.x)
            out.append(rec("cor_poiss.small_x_lower", spec, lhs=lo, rhs=r.value, tol=cfg.tol, lam=lam, x=r.x,
                           runtime_ms=t.ms / xs.size))
            out.append(rec("cor_poiss.small_x_upper", spec, lhs=r.value, rhs=hi, tol=cfg.tol, lam=lam, x=r.x))
        if not spec.in_main_range:
            continue
        res = _plambda(spec, lam, big)
        for r in res:
            lo, hi = cp.series_bounds_hg(spec, c, lam, r.x)
            out.append(rec("cor_poiss.g_series", spec, lhs=lo, rhs=r.value, tol=cfg.tol, lam=lam, x=r.x))
            out.append(rec("cor_poiss.h_series", spec, lhs=r.value, rhs=hi, tol=cfg.tol, lam=lam, x=r.x))
    return out


def suite_cor_final(spec, cfg, skipped):
    if not spec.in_main_range:
        return []
    c = compute_constants(spec)
    out = []
    xs = np.array([x for x in cfg.x if x >= 1], dtype=float)
    for lam in cfg.lam:
        if not _in_scope(spec, lam, cfg):
            skipped.append(f"cor_final {spec.label} lambda={lam:g}: lambda*||f||_1="
                           f"{lam * c.l1_norm:.4g} > {cfg.plambda_cap:g}")
            continue
        for r in _plambda(spec, lam, xs):
            regime, lo, hi = cp.p_lambda_bounds_regimes(spec, c, lam, r.x)
            note = f"{regime}; self-consistent"
            if lo == 0:
                note += "; vacuous lower bound"
            out.append(rec("cor_final.regimes_lower", spec, lhs=lo, rhs=r.value, tol=cfg.tol, lam=lam, x=r.x,
                           note=note))
            out.append(rec("cor_final.regimes_upper", spec, lhs=r.value, rhs=hi, tol=cfg.tol, lam=lam, x=r.x,
                           note=note))
    return out


def suite_divergence(spec, cfg, skipped):
    if not spec.in_main_range:
        return []
    xs = np.array(cfg.divergence_x, dtype=float)
    out = []
    with _Timer() as t:
        g2 = oracle.g_n_direct(spec, 2, xs)
        f2 = oracle.fnstar_points(spec, 2, xs)
        f3 = oracle.fnstar_points(spec, 3, xs, prev=oracle.nfold_table(spec, 2))
    out += _strict_increase("cor_general_prop.g2_increasing", spec, xs, g2, t.ms)
    out += _strict_increase("cor_general_prop.f3_over_f2_increasing", spec, xs, f3 / f2, t.ms)
    for lam in cfg.lam:
        if not _in_scope(spec, lam, cfg):
            skipped.append(f"divergence {spec.label} lambda={lam:g}: out of p_lambda scope")
            continue
        p = np.array([r.value for r in _plambda(spec, lam, xs)])
        recs = _strict_increase("cor_general_prop.plambda_over_f2_increasing", spec, xs, p / f2, 0.0)
        for r in recs:
            r.lam = lam
        out += recs
    if spec.d == 1:
        ratio = f2[-1] / (density_f(spec, xs[-1]) * g2[-1])
        r = rec("cor_general_prop.ratio_at_80", spec, lhs=abs(ratio - 1.0), rhs=0.3, tol=0.0, n=2, x=xs[-1],
                note=f"f2/(f g2)={ratio:.6g}")
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# global suites: fn(cfg, skipped) -> records


def suite_beta_quotient(cfg, skipped):
    out = []
    for a0 in (0.25, 0.5, 1.0):
        for b in (0.5, 1.0, 2.0, 3.5):
            r0 = beta_quotient_threshold(a0, b)
            rs = np.geomspace(r0, 100 * r0, 20)
            for k in (1.0, 1.5, 2.0, 3.0, 5.0):
                a = a0 * k
                B = beta_fn(a, b)
                lhs = [2 * inc_beta(1.0 / r, a, b) for r in rs]
                j = int(np.argmax(lhs))
                out.append(rec("lem.beta_quotient", None, lhs=lhs[j], rhs=B, tol=0.0, x=float(rs[j]),
                               note=f"a0={a0:g},a={a:g},b={b:g}; worst of 20 r"))
    return out


WRIGHT_REF = 1.5906368


def suite_wright(cfg, skipped):
    out = []
    v = wright_phi(1.0, 0.0, 1.0).value
    out.append(rec("wright.value", None, lhs=abs(v - WRIGHT_REF), rhs=1e-6, tol=0.0, x=1.0,
                   note=f"phi(1,0;1)={v:.10f}"))
    for rho in (0.5, 1.0, 2.0):
        for t, tol in ((400.0, 0.05), (1e4, 0.01)):
            s = wright_phi(rho, 0.0, t, "series").log_value
            a = wright_phi(rho, 0.0, t, "asymptotic").log_value
            rel = abs(math.expm1(a - s))
            out.append(rec("wright.regimes", None, lhs=rel, rhs=tol, tol=0.0, x=t, note=f"rho={rho:g}"))
    return out


def suite_th1d(cfg, skipped):
    out = []
    for gam in (0.0, 0.5):
        spec = DensitySpec(1, 1.0, gam)
        c = compute_constants(spec)
        xs = np.array([10.0, 50.0, 100.0])
        a = 1.0 - gam
        for n in (2, 3):
            fn = oracle.fnstar_points(spec, n, xs, prev=oracle.nfold_table(spec, n - 1) if n >= 3 else None)
            ratio = fn / (density_f(spec, xs) * xs ** (a * (n - 1)))
            lead = aux._gamma_ratio(a, n)
            for j, x in enumerate(xs):
                extra = 2 * c.M2 * n * c.M3 * (c.M2 + math.gamma(a)) ** (n - 1) / x**a
                out.append(rec("th1d.lower", spec, lhs=lead, rhs=ratio[j], tol=cfg.tol, n=n, x=x))
                out.append(rec("th1d.upper", spec, lhs=ratio[j], rhs=lead + extra, tol=cfg.tol, n=n, x=x))
            if gam == 0 and n == 2:
                out.append(rec("th1d.limit", spec, lhs=abs(ratio[-1] - 1.01), rhs=1e-6, tol=0.0, n=2, x=100.0,
                               note=f"ratio={ratio[-1]:.12g}"))
    return out


def suite_gn1d(cfg, skipped):
    out = []
    probe = np.concatenate([np.geomspace(1e-3, 1, 30), np.linspace(1.03, 79.97, 120)])
    for gam in (0.0, 0.25, 0.5):
        spec = DensitySpec(1, 1.0, gam)
        for n in (2, 3, 4):
            tab = aux.G_table(spec, n)
            nodes = tab.grid[tab.grid <= 80]
            err_nodes = np.abs(tab.values[: nodes.size] / aux.g_n_exact_1d(gam, n, nodes) - 1).max()
            err_probe = np.abs(tab(probe) / aux.g_n_exact_1d(gam, n, probe) - 1).max()
            err = float(max(err_nodes, err_probe))
            out.append(rec("lem.direct_1d_gn", spec, lhs=err, rhs=1e-8, tol=0.0, n=n,
                           note="max relative error, table nodes and interpolated probes, r <= 80"))
    return out


DSP_SPEC = DensitySpec(1, 1.0, 2.0, Variant.CUTOFF)


def suite_dsp(cfg, skipped):
    spec = DSP_SPEC
    c = compute_constants(spec)
    C = float(oracle.restricted_table(spec, "h", 2).values.max())
    xs = np.array([2.0, 5.0, 10.0, 20.0])
    out = []
    for n in (1, 2, 3):
        fn = oracle.fnstar_points(spec, n, xs, prev=oracle.nfold_table(spec, n - 1) if n >= 3 else None)
        fx = density_f(spec, xs)
        for j, x in enumerate(xs):
            out.append(rec("cor_general_prop.dsp_lower", spec, lhs=n * (c.M1 / 2) ** (n - 1) * fx[j], rhs=fn[j],
                           tol=cfg.tol, n=n, x=x))
            out.append(rec("cor_general_prop.dsp_upper", spec, lhs=fn[j], rhs=n * (c.M2 + C) ** (n - 1) * fx[j],
                           tol=cfg.tol, n=n, x=x, note=f"C=sup grid h_2={C:.6g}"))
    for lam in (0.25, 1.0):
        for r in cp.p_lambda(spec, lam, list(xs)):
            fx = float(density_f(spec, r.x))
            lo = math.exp((c.M1 / 2 - c.l1_norm) * lam) * lam * fx
            hi = math.exp((c.M2 + C - c.l1_norm) * lam) * lam * fx
            out.append(rec("cor_general_prop.dsp_plambda_lower", spec, lhs=lo, rhs=r.value, tol=cfg.tol,
                           lam=lam, x=r.x))
            out.append(rec("cor_general_prop.dsp_plambda_upper", spec, lhs=r.value, rhs=hi, tol=cfg.tol,
                           lam=lam, x=r.x))
    return out


SAMPLER_CASES = ((1, 0.0, 1.0, 1.0), (2, 0.5, 1.0, 2.0))


def suite_sampler(cfg, skipped):
    out = []
    for d, gam, m, lam in SAMPLER_CASES:
        spec = DensitySpec(d, m, gam)
        with _Timer() as t:
            batch = sampler.sample_compound_poisson(spec, lam, cfg.sample_count, cfg.seed, threads=cfg.threads)
            table = cp.p_lambda_table(spec, lam)
            radii = batch.radii[np.any(batch.points != 0, axis=1)]
            ks = sampler.ks_against(radii, table.radial_cdf)
        out.append(rec("sampler.ks", spec, lhs=ks.statistic, rhs=ks.critical_1pct, tol=0.0, lam=lam,
                       runtime_ms=t.ms, note=f"n={ks.n},seed={cfg.seed}"))
        frac, p, _ = sampler.atom_check(batch)
        sd = math.sqrt(p * (1 - p) / batch.count)
        out.append(rec("sampler.atom", spec, lhs=abs(frac - p), rhs=4 * sd, tol=0.0, lam=lam,
                       note=f"atom fraction={frac:.6g}, expected={p:.6g}"))
    return out


PER_SPEC: dict[str, Callable] = {
    "assumptions": suite_assumptions,
    "thm1": suite_thm1,
    "thm2": suite_thm2,
    "thm4": suite_thm2,
    "althn": suite_althn,
    "glower": suite_glower,
    "poisson": suite_poisson,
    "cor_poiss": suite_cor_poiss,
    "cor_final": suite_cor_final,
    "divergence": suite_divergence,
}
GLOBAL: dict[str, Callable] = {
    "beta_quotient": suite_beta_quotient,
    "wright": suite_wright,
    "th1d": suite_th1d,
    "gn1d": suite_gn1d,
    "dsp": suite_dsp,
    "sampler": suite_sampler,
}
ALL_ORDER = ["assumptions", "wright", "beta_quotient", "gn1d", "th1d", "thm1", "thm2", "althn", "glower",
             "poisson", "cor_poiss", "cor_final", "dsp", "divergence", "sampler"]
SUITE_NAMES = sorted(set(PER_SPEC) | set(GLOBAL) | {"all"})


def _expand(name: str) -> list[str]:
    if name == "all":
        return ALL_ORDER
    if name not in PER_SPEC and name not in GLOBAL:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    return ["thm2"] if name == "thm4" else [name]


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    """Run the configured suite(s); records come back in a fixed order for any thread count."""
    names = _expand(cfg.suite)
    report = SuiteReport(cfg.suite)
    specs = cfg.specs()
    spec_names = [n for n in names if n in PER_SPEC]

    def run_spec(spec):
        res, skipped, errors = {}, [], []
        for name in spec_names:
            try:
                res[name] = PER_SPEC[name](spec, cfg, skipped)
            except Exception as exc:  # reported, exit code 2
                res[name] = []
                errors.append(f"{name} {spec.label}: {type(exc).__name__}: {exc}")
        return res, skipped, errors

    def run_global(name):
        skipped = []
        try:
            return GLOBAL[name](cfg, skipped), skipped, []
        except Exception as exc:
            return [], skipped, [f"{name}: {type(exc).__name__}: {exc}"]

    glob_names = [n for n in names if n in GLOBAL]
    threads = max(1, cfg.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            spec_res = list(ex.map(run_spec, specs)) if spec_names else []
            glob_res = dict(zip(glob_names, ex.map(run_global, glob_names)))
    else:
        spec_res = [run_spec(s) for s in specs] if spec_names else []
        glob_res = {n: run_global(n) for n in glob_names}

    for name in names:
        if name in GLOBAL:
            recs, skipped, errors = glob_res[name]
            report.records += recs
            report.skipped += skipped
            report.errors += errors
        else:
            for res, _, _ in spec_res:
                report.records += res.get(name, [])
    for _, skipped, errors in spec_res:
        report.skipped += skipped
        report.errors += errors
    return report


def clear_caches():
    _PL_CACHE.clear()
