"""Two curves, one scalar coordinate: how local linear differs from a local mean.

With X = {0.5, 0.25} and y = {1, 2} the line through both points hits 3 at
zero, while the kernel-weighted mean is 1.5. The penalized estimator walks
from one to the other as alpha shrinks.
"""

import numpy as np

from fllr import (FunctionalSample, RegScheme, build_factorization, direct_program_solve,
                  local_linear_fit, nadaraya_watson_fit, naive)

sample = FunctionalSample(np.array([[0.5], [0.25]]), np.array([1.0, 2.0]))
x0, k, h = np.zeros(1), naive(), 1.0

f = build_factorization(sample, x0, k, h)
print("eigenvalue", f.eigenvalues, "local mean", f.zbar)

print("Nadaraya-Watson:", nadaraya_watson_fit(sample, x0, k, h).estimate)

print(f"{'alpha':>8} {'m_hat':>12} {'weights':>26} {'slope':>10} {'oracle a':>12}")
for alpha in (1e-1, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10):
    fit = local_linear_fit(sample, x0, k, h, RegScheme.penalization(alpha))
    a, phi = direct_program_solve(sample, x0, k, h, alpha)
    print(f"{alpha:8.0e} {fit.estimate:12.8f} {str(np.round(fit.weights, 6)):>26} "
          f"{fit.gradient[0]:10.5f} {a:12.8f}")

# weights may be negative: the far point is extrapolated against
exact = local_linear_fit(sample, x0, k, h, RegScheme("tikhonov", alpha=0.0, allow_zero_alpha=True))
print("unregularized limit:", exact.estimate, "weights", exact.weights)
