"""Kernel weights around a functional covariate.

Draws Fourier curves, picks a target curve, and shows how the automatic
bandwidth and the kernel turn distances into normalized weights.
"""

import numpy as np

from fmee import (ConditionalModel, Kernel, MarginalFamily, Metric, auto_bandwidth,
                  generate_dataset, nw_weights, small_ball_estimate)

model = ConditionalModel((MarginalFamily("lomax", 0.5),) * 2, covariate="fourier", p=50)
sample = generate_dataset(model, 5000, seed=7)
y = sample.y[0]

for metric in (Metric("l2"), Metric("sup")):
    h = auto_bandwidth(sample, y, metric)
    for kernel in (Kernel("uniform"), Kernel("quadratic")):
        w = nw_weights(sample, y, h, kernel, metric)
        nz = np.count_nonzero(w.weights)
        print(f"{metric.kind:>7} {kernel.kind:>9}: h={h:.4f}  non-zero weights={nz}  "
              f"sum={w.weights.sum():.12f}  psi_hat={small_ball_estimate(sample, y, h, metric):.4f}")
