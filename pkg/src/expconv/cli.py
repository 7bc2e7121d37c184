"""Command-line front end: constants | eval | verify | sample | plot-data."""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional

import numpy as np

from . import aux, compound_poisson as cp, oracle, sampler, suites
from .density import DensitySpec, compute_constants, density_f, l1_norm
from .records import fmt, write_records_csv
from .special import wright_phi

OBJECTS = ["f", "l1", "constants", "fnstar", "hn", "gn", "Hn", "Gn", "gn1d", "wright", "plambda", "bounds"]
PLOTS = ["sandwich-plambda", "nstar", "regimes"]


def _spec_args(p: argparse.ArgumentParser, defaults: bool = True):
    p.add_argument("--d", type=int, default=1 if defaults else None)
    p.add_argument("--gamma", type=float, default=0.0 if defaults else None)
    p.add_argument("--m", type=float, default=1.0 if defaults else None)
    p.add_argument("--variant", choices=["pure", "cutoff"], default="pure" if defaults else None)


def _spec(a) -> DensitySpec:
    return DensitySpec(a.d, a.m, a.gamma, a.variant)


def _emit_rows(header, rows, out=None):
    w = csv.writer(out or sys.stdout, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def cmd_constants(a) -> int:
    c = compute_constants(_spec(a))
    for k, v in c.as_dict().items():
        print(f"{k},{fmt(float(v))}")
    return 0


def _values(a, fn):
    xs = np.asarray(a.x, dtype=float)
    vals = np.atleast_1d(fn(xs))
    if xs.size == 1:
        print(fmt(float(vals[0])))
    else:
        _emit_rows(["x", "value"], zip(xs.tolist(), vals.tolist()))


def _need(a, *names):
    for n in names:
        if getattr(a, n) is None:
            raise ValueError(f"--{n.replace('lam', 'lambda')} is required for eval {a.object}")


def cmd_eval(a) -> int:
    obj = a.object
    if obj == "wright":
        _need(a, "rho", "t")
        w = wright_phi(a.rho, a.beta, a.t)
        print(fmt(w.value))
        print(f"# regime={w.regime.value},rel_err={fmt(w.rel_err)}")
        return 0
    if obj == "gn1d":
        _need(a, "n", "x")
        _values(a, lambda x: aux.g_n_exact_1d(a.gamma, a.n, x))
        return 0
    spec = _spec(a)
    if obj == "constants":
        return cmd_constants(a)
    if obj == "l1":
        print(fmt(l1_norm(spec)))
        return 0
    if obj == "f":
        _need(a, "x")
        _values(a, lambda x: density_f(spec, x))
        return 0
    if obj in ("fnstar", "hn", "gn", "Hn", "Gn"):
        _need(a, "n")
        if a.table:
            table = {"fnstar": lambda: oracle.nfold_table(spec, a.n),
                     "hn": lambda: oracle.restricted_table(spec, "h", a.n),
                     "gn": lambda: oracle.restricted_table(spec, "g", a.n),
                     "Hn": lambda: aux.H_table(spec, a.n),
                     "Gn": lambda: aux.G_table(spec, a.n)}[obj]()
            sys.stdout.write(table.to_csv())
            return 0
        _need(a, "x")
        fn = {"fnstar": lambda x: oracle.fnstar(spec, a.n, x),
              "hn": lambda x: oracle.h_n_direct(spec, a.n, x),
              "gn": lambda x: oracle.g_n_direct(spec, a.n, x),
              "Hn": lambda x: aux.H_n(spec, a.n, x),
              "Gn": lambda x: aux.G_n(spec, a.n, x)}[obj]
        _values(a, fn)
        return 0
    if obj == "plambda":
        _need(a, "lam", "x")
        res = cp.p_lambda(spec, a.lam, list(a.x))
        _emit_rows(["x", "value", "n_terms", "truncation_bound", "majorant_bound"],
                   [(r.x, r.value, r.n_terms, r.truncation_bound, r.majorant_bound) for r in res])
        return 0
    if obj == "bounds":
        _need(a, "x")
        c = compute_constants(spec)
        rows = []
        for x in a.x:
            if a.n is not None:
                lo, hi = cp.nstar_bounds(spec, c, a.n, x)
                rows.append((x, "nstar", lo, hi))
                continue
            _need(a, "lam")
            if x < 1:
                lo, hi = cp.p_lambda_small_x_bounds(spec, c, a.lam, x)
                rows.append((x, "small_x", lo, hi))
            else:
                lo, hi = cp.p_lambda_bounds_wright(spec, c, a.lam, x)
                rows.append((x, "wright", lo, hi))
                regime, lo, hi = cp.p_lambda_bounds_regimes(spec, c, a.lam, x)
                rows.append((x, f"regime_{regime}", lo, hi))
        _emit_rows(["x", "kind", "lower", "upper"], rows)
        return 0
    raise ValueError(f"unknown object {obj!r}")


def _config(a) -> suites.SuiteConfig:
    over = dict(suite=a.suite, tol=a.tol, out=a.out, seed=a.seed, sample_count=a.count)
    if a.lam is not None:
        over["lam"] = a.lam
    if a.x is not None:
        over["x"] = a.x
    if a.n is not None:
        over["n"] = a.n
    single = any(v is not None for v in (a.d, a.gamma, a.m, a.variant))
    if single and a.matrix == "default":
        raise ValueError("--matrix default cannot be combined with spec flags")
    if single:
        DensitySpec(a.d or 1, a.m if a.m is not None else 1.0, a.gamma if a.gamma is not None else 0.0,
                    a.variant or "pure")  # validates
        over.update(d=[a.d if a.d is not None else 1], m=[a.m if a.m is not None else 1.0],
                    gamma=[a.gamma if a.gamma is not None else 0.0],
                    variant=[a.variant or "pure"])
    if a.config:
        cfg = suites.SuiteConfig.from_json(a.config, **over)
    else:
        cfg = suites.SuiteConfig(**{k: v for k, v in over.items() if v is not None})
    cfg.threads = a.threads or suites.threads_from_env(cfg.threads)
    return cfg


def cmd_verify(a) -> int:
    cfg = _config(a)
    report = suites.run_suite(cfg)
    if cfg.out:
        write_records_csv(report.records, cfg.out)
    print(report.summary())
    for r in report.records:
        if not r.passed:
            print(f"FAIL {r.check_id} d={r.d} m={r.m} gamma={r.gamma} {r.variant} n={r.n} "
                  f"lambda={r.lam} x={r.x} lhs={fmt(r.lhs)} rhs={fmt(r.rhs)} {r.note}")
    for s in report.skipped:
        print(f"SKIP {s}")
    for e in report.errors:
        print(f"ERROR {e}", file=sys.stderr)
    return report.exit_code


def cmd_sample(a) -> int:
    spec = _spec(a)
    threads = a.threads or suites.threads_from_env()
    batch = sampler.sample_compound_poisson(spec, a.lam, a.count, a.seed, threads=threads)
    if a.out:
        batch.to_csv(a.out)
        frac, p, ok = sampler.atom_check(batch)
        print(f"count={batch.count} atom_count={batch.atom_count} atom_fraction={fmt(frac)} expected={fmt(p)}")
    else:
        sys.stdout.write(batch.to_csv())
    return 0


def cmd_plot(a) -> int:
    spec = _spec(a)
    c = compute_constants(spec)
    xs = np.linspace(a.xmin, a.xmax, a.points) if a.xmax >= a.xmin else np.array([])
    rows = []
    if a.kind == "nstar":
        if a.n is None:
            raise ValueError("plot-data nstar needs --n")
        if xs.size:
            prev = oracle.nfold_table(spec, a.n - 1) if a.n >= 3 else None
            vals = oracle.fnstar_points(spec, a.n, xs, prev=prev)
            for x, v in zip(xs, vals):
                lo, hi = cp.nstar_bounds(spec, c, a.n, float(x))
                rows.append((float(x), float(v), lo, hi))
    else:
        if a.lam is None:
            raise ValueError(f"plot-data {a.kind} needs --lambda")
        res = cp.p_lambda(spec, a.lam, xs.tolist()) if xs.size else []
        for r in res:
            if a.kind == "sandwich-plambda":
                lo, hi = cp.p_lambda_bounds_wright(spec, c, a.lam, r.x)
            else:
                _, lo, hi = cp.p_lambda_bounds_regimes(spec, c, a.lam, r.x)
            rows.append((r.x, r.value, lo, hi))
    _emit_rows(["x", "oracle", "lower", "upper"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expconv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", help="print the explicit constants of a density")
    _spec_args(s)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("eval", help="evaluate one object")
    s.add_argument("object", choices=OBJECTS)
    _spec_args(s)
    s.add_argument("--n", type=int)
    s.add_argument("--x", type=float, nargs="+")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--t", type=float)
    s.add_argument("--table", action="store_true", help="emit the RadialTable CSV")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("--suite", required=True)
    s.add_argument("--matrix", choices=["default"])
    s.add_argument("--config", help="flat JSON config; flags override it")
    _spec_args(s, defaults=False)
    s.add_argument("--lambda", dest="lam", type=float, nargs="+")
    s.add_argument("--x", type=float, nargs="+")
    s.add_argument("--n", type=int, nargs="+")
    s.add_argument("--tol", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--count", type=int, help="sampler draws")
    s.add_argument("--out", help="CSV report path")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="draw from the compound Poisson law")
    _spec_args(s)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--count", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("plot-data", help="x, oracle, lower, upper columns")
    s.add_argument("kind", choices=PLOTS)
    _spec_args(s)
    s.add_argument("--n", type=int)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--xmin", type=float, default=1.0)
    s.add_argument("--xmax", type=float, default=20.0)
    s.add_argument("--points", type=int, default=40)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return a.func(a)
    except Exception as exc:
        print(f"expconv: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
