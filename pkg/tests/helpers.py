"""Shared oracles for the test-suite."""

import numpy as np

from fmee import XiEstimate, loss, loss_gradient

LAMBDA_KINDS = [("independence", None), ("comonotone", None), ("survival_clayton", 1.0)]


def random_configuration(rng):
    d = int(rng.integers(2, 4))
    gamma = float(rng.choice([0.3, 0.5, 0.7]))
    family, theta = LAMBDA_KINDS[int(rng.integers(0, 3))]
    c = np.r_[1.0, rng.uniform(0.5, 2.0, d - 1)]
    xi = XiEstimate.closed_form(gamma, c, family, theta)
    point = rng.uniform(0.1, 10.0, d)
    return point, xi


def central_difference(f, x, h=1e-6):
    out = np.empty_like(x)
    for r in range(x.size):
        e = np.zeros_like(x)
        e[r] = h
        out[r] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def gradient_relative_error(point, xi):
    g = loss_gradient(point, xi)
    fd = central_difference(lambda z: loss(z, xi), point)
    return float(np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1e-8))
