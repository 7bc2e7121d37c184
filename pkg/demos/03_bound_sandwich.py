"""Two-sided bounds for f^{n*} and p_lambda next to the numerical values.

Prints the CSV that `expconv plot-data` emits, for a planar density, so the
gap between the explicit bounds and the truth can be read off directly.
"""

import math

import numpy as np

from expconv import DensitySpec, compute_constants, fnstar, nstar_bounds, p_lambda
from expconv.compound_poisson import p_lambda_bounds_regimes, p_lambda_bounds_wright_log

spec = DensitySpec(2, 1.0, 0.0)
c = compute_constants(spec)
print(f"{spec.label}: ||f||_1 = {c.l1_norm:.6g}, M2 = {c.M2:.6g}, rho2 = {c.rho2:g}, C(r0) = {c.C_r0:.3g}")

print("\nf^{2*}: x, lower, oracle, upper")
for x in (2.0, 5.0, 20.0, 80.0):
    lo, hi = nstar_bounds(spec, c, 2, x)
    print(f"{x:5.1f}  {lo:.4e}  {fnstar(spec, 2, x):.4e}  {hi:.4e}")

lam = 1.0
print(f"\np_lambda, lambda = {lam}: x, log lower, log oracle, log upper, regime")
for r in p_lambda(spec, lam, [1.0, 5.0, 20.0, 80.0]):
    llo, lhi = p_lambda_bounds_wright_log(spec, c, lam, r.x)
    regime = p_lambda_bounds_regimes(spec, c, lam, r.x)[0]
    print(f"{r.x:5.1f}  {llo:10.3f}  {math.log(r.value):10.3f}  {lhi:10.3f}  {regime}")
print("\nlower bounds of -inf reflect the explicit constant C(r0) underflowing for this spec")
