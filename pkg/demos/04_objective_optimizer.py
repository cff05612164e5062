"""The plug-in loss with true tail quantities and its minimizer.

For independent and comonotone margins the optimum is known in closed form,
so the multi-start optimizer can be checked directly.
"""

import numpy as np

from fmee import (Box, ConditionalModel, MEELoss, MarginalFamily,
                  multi_start_minimize, theta_star_analytic)
from fmee.objective import default_starts

for copula in ("independence", "comonotone"):
    model = ConditionalModel((MarginalFamily("lomax", 0.3),) * 3, copula=copula,
                             gamma_intercept=0.3, gamma_clip=None, p=5)
    y = np.zeros(model.p)
    xi = model.xi_true(y)
    box = Box.uniform(model.d, 1e-3, 1e3)
    obj = MEELoss(xi)
    rep = multi_start_minimize(obj.fun, obj.grad, box, default_starts(xi.gamma, xi.c, box))
    exact = theta_star_analytic(model, y).as_array()
    print(f"{copula:>12}: minimizer {np.round(rep.x, 8)}  closed form {exact}  "
          f"loss {rep.fun:.2e}  converged {rep.best.converged}")
