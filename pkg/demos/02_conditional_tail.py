"""Conditional quantiles and the tail index at a covariate point.

With a constant covariate every observation gets the same weight, so the
estimates can be read against the known Lomax quantities.
"""

import numpy as np

from fmee import (ConditionalModel, HillConfig, MarginalFamily, cond_quantile,
                  nw_weights, estimate_tail,
                  generate_dataset, auto_bandwidth)

gamma, scales = 0.4, (1.0, 3.0)
model = ConditionalModel(tuple(MarginalFamily("lomax", gamma, s) for s in scales),
                         gamma_intercept=gamma, gamma_clip=None, p=10)
sample = generate_dataset(model, 20000, seed=3)
y = np.zeros(model.p)
w = nw_weights(sample, y, auto_bandwidth(sample, y))

for level in (0.9, 0.99):
    q = cond_quantile(sample, w, 0, level)
    exact = scales[0] * ((1 - level) ** -gamma - 1)
    print(f"quantile at {level}: estimate {q:.3f}, exact {exact:.3f}")

est = estimate_tail(sample, w, HillConfig(alpha_n=0.99))
print(f"tail index: estimate {est.gamma_hat:.3f}, true {gamma}")
print(f"tail ratios: estimate {np.round(est.c_hat, 3)}, "
      f"true {np.round(model.tail_ratios(y), 3)}")
