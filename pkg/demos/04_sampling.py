"""Monte Carlo check of p_lambda in the plane.

Draw the compound Poisson vector directly, then compare the empirical radial
distribution with the one obtained by integrating the numerical p_lambda.
"""

import numpy as np

from expconv import DensitySpec, p_lambda_table, sample_compound_poisson
from expconv.sampler import atom_check, ks_against

spec, lam = DensitySpec(2, 1.0, 0.5), 2.0
batch = sample_compound_poisson(spec, lam, 100_000, seed=7)
frac, p, ok = atom_check(batch)
print(f"atom fraction {frac:.5f}, expected {p:.5f} ({'ok' if ok else 'off'})")

table = p_lambda_table(spec, lam)
radii = batch.radii[batch.radii > 0]
ks = ks_against(radii, table.radial_cdf)
print(f"KS statistic {ks.statistic:.5f}, 1% critical value {ks.critical_1pct:.5f}, n = {ks.n}")

edges = np.linspace(0, 12, 13)
counts, _ = np.histogram(radii, bins=edges)
expected = np.diff(table.radial_cdf(edges)) * radii.size
print("\n  r-bin     observed  expected")
for a, b, o, e in zip(edges[:-1], edges[1:], counts, expected):
    print(f"  [{a:4.1f},{b:4.1f})  {o:8d}  {e:9.1f}")
