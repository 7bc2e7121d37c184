"""Why these densities are not convolution equivalent.

In the main range gamma < (d+1)/2 the ratio f^{2*}/f keeps growing like a
power of |x|, and so does f^{3*}/f^{2*}.  With a fast-decaying cutoff profile
(gamma = 2 on the line) the same ratios level off.
"""

import numpy as np

from expconv import DensitySpec, density_f, fnstar
from expconv.oracle import g_n_direct, nfold_table, fnstar_points

xs = np.array([10.0, 20.0, 40.0, 80.0])
cases = [DensitySpec(1, 1.0, 0.0), DensitySpec(2, 1.0, 0.75), DensitySpec(3, 1.0, 1.0),
         DensitySpec(1, 1.0, 2.0, "cutoff")]

for spec in cases:
    f = density_f(spec, xs)
    f2 = fnstar(spec, 2, xs)
    f3 = fnstar_points(spec, 3, xs, prev=nfold_table(spec, 2))
    g2 = g_n_direct(spec, 2, xs)
    tag = "main range" if spec.in_main_range else "fast decay"
    print(f"\n{spec.label}  ({tag})")
    print("   x     f2/f           f3/f2          g2")
    for row in zip(xs, f2 / f, f3 / f2, g2):
        print("  {:4.0f}  {:.6e}  {:.6e}  {:.6e}".format(*row))
