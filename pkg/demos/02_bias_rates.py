"""Noiseless bias against bandwidth, local linear versus local constant.

A quadratic regression function is evaluated at a rough point, one whose
coordinates decay like a typical draw, where the local mean is pulled by the
slope and the local linear fit is not. The printed log-log slopes show the
extra order of the local linear bias.
"""

import numpy as np

from fllr import KLSpec, RegressionSpec, SchemePolicy, bias_slope_experiment, naive
from fllr.harness import make_x0

kl = KLSpec("exponential", 1.0, d=20)
x0 = make_x0(kl, "rough", 1.0)
quad = np.zeros(kl.d)
quad[0] = 1.0
# gradient of m at x0 is the all-ones curve
reg = RegressionSpec(0.0, 1.0 - 2.0 * quad * x0, quad, noise_sigma=0.0)

# r_n tied to h with a small constant so that regularization bias stays below h^2
policy = SchemePolicy("penalization", policy="rn_h", rn_scale=1e-3)
rows, rep = bias_slope_experiment(kl, reg, x0, naive(), n=4000,
                                  multipliers=(0.8, 1.0, 1.2, 1.5, 1.9, 2.4, 3.0),
                                  policy=policy, replicates=5, seed=0)

print(f"{'h':>8} {'active':>7} {'bias LL':>12} {'bias NW':>12}")
for r in rows:
    print(f"{r.h:8.4f} {r.min_active:7d} {r.bias_ll:12.3e} {r.bias_nw:12.3e}")
print(f"|bias| slope: LL {rep.slope_abs_ll:.2f}, NW {rep.slope_abs_nw:.2f}, "
      f"difference {rep.difference:.2f}")
