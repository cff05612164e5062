"""Tail dependence of a survival Clayton pair.

The empirical lambda at (u, 1) is compared with its closed form u / (1 + u)
for theta = 1.
"""

import math

import numpy as np

from fmee import (ClosedFormLambda, CopulaModel, KnConfig, Sample, WeightVector,
                  lambda_hat, pseudo_obs, sample_copula)

n = 10000
s = Sample(sample_copula(CopulaModel("survival_clayton", 2, 1.0), n, seed=11),
           np.zeros((n, 1)))
w = WeightVector(np.full(n, 1.0 / n))
kn = KnConfig(math.ceil(n ** 0.7), n)
p = pseudo_obs(s, w)
oracle = ClosedFormLambda("survival_clayton", 1.0)

print("    u   estimate   exact")
for u in np.linspace(0.1, 1.0, 10):
    print(f"{u:5.2f}   {float(lambda_hat(s, w, 0, 1, kn, (u, 1.0), pseudo=p)):.4f}   "
          f"{float(oracle(u)):.4f}")
