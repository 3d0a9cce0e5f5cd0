"""Small ball probabilities of a Gaussian process with fast eigenvalue decay.

Exponentially decaying eigenvalues put the process in the log-squared
regime. We estimate F(h) from 10^5 draws, fit the parametric family and look
at the ratio that governs the local covariance operator near zero.
"""

import numpy as np

from fllr import EmpiricalF, KLSpec, sample_kl
from fllr.small_ball import LOG_SQUARED, check_gamma_limit, fit_family, rho

kl = KLSpec("exponential", 1.0, d=20)
X = sample_kl(kl, 100_000, seed=7)
dist = np.linalg.norm(X, axis=1)
F = EmpiricalF.from_norms(dist)

fit = fit_family(F, LOG_SQUARED)
fam = fit.family
print(f"fitted log-squared family: C1={fam.C1:.3f} C2={fam.C2:.3f} "
      f"(residual {fit.residual_norm:.3f})")

scale = np.median(dist)
print(f"{'h':>8} {'F_hat':>10} {'F_fit':>10} {'E[K|Z|^2]/(F h^2)':>20}")
for m in (0.5, 0.3, 0.2, 0.1):
    h = m * scale
    ratio = np.mean(np.where(dist <= h, dist ** 2, 0.0)) / (F(h) * h * h)
    print(f"{h:8.4f} {F(h):10.5f} {float(fam(h)):10.5f} {ratio:20.3f}")

# the Gamma_0 limit F(s + x rho(s)) / F(s) -> e^x, read off the fitted family
for s in (1e-1, 1e-2, 1e-4):
    rep = check_gamma_limit(fam.log_F, lambda v: rho(fam, v), [s], [-1.0, 1.0],
                            log_scale=True)
    print(f"s={s:g}: max relative deviation from e^x {rep['max_rel_dev']:.4f}")
