"""Convolution powers on the line against their closed forms.

For f(x) = e^{-|x|} every power f^{n*} is e^{-x} times a polynomial of degree
n - 1, so the oracle can be checked to machine precision, and the compound
Poisson density p_lambda can be compared with a long exact series.
"""

import math

import mpmath as mp
import numpy as np

from expconv import DensitySpec, fnstar, p_lambda
from expconv.aux import g_n_exact_1d
from expconv.oracle import g_n_direct


def laplace_power(n, x):
    s = sum(math.factorial(n - 1 + k) / (math.factorial(k) * math.factorial(n - 1 - k) * 2**k) * x ** (n - 1 - k)
            for k in range(n))
    return math.exp(-x) * s / math.factorial(n - 1)


spec = DensitySpec(d=1, m=1.0, gamma=0.0)
xs = np.array([0.5, 2.0, 10.0, 40.0])

print("n   x      oracle                  closed form             rel.err")
for n in (2, 3, 4):
    for x, v in zip(xs, fnstar(spec, n, xs)):
        ref = laplace_power(n, x)
        print(f"{n}  {x:5.1f}  {v:.17g}  {ref:.17g}  {abs(v / ref - 1):.1e}")

# restricted integral over |y| < |x|, |x - y| < |x| grows like x^{n-1}/(n-1)!
print("\ng_n(x) on the line: direct integration vs closed form")
for n in (2, 3):
    print(n, g_n_direct(spec, n, 10.0), g_n_exact_1d(0.0, n, 10.0))

mp.mp.dps = 30
ref = mp.exp(-2) * mp.fsum(mp.mpf(laplace_power(n, 2.0)) / mp.factorial(n) for n in range(1, 120))
res = p_lambda(spec, 1.0, 2.0)
print(f"\np_1(2) = {res.value:.15g} using {res.n_terms} terms; exact series {float(ref):.15g}")
print(f"extrapolated tail {res.truncation_bound:.2e}, rigorous majorant {res.majorant_bound:.2e}")
