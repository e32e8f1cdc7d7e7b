"""Compressed-sensing baselines: IHT and LCAMP on a sparse wavelet pyramid.

Run: python3 demos/03_recovery.py
"""

import numpy as np

from kspace_select.masks import random_lowfreq_mask, support_from_image
from kspace_select.recovery import RecoveryConfig, SensingOperator, iht, lcamp
from kspace_select.transforms import idwt2

rng = np.random.default_rng(4)
y = np.zeros((16, 16))
y.flat[rng.choice(256, 5, replace=False)] = rng.choice([-1.0, 1.0], 5)

A = SensingOperator(random_lowfreq_mask((16, 16), 128, seed=4, decay=np.inf))
f_j = A.forward(y)

history = []
out = iht(A, f_j, RecoveryConfig(max_iters=100, rel_tol=1e-12, n=5), history)
print(f"IHT: {len(history)} iterations, max error {np.abs(out - y).max():.2e}")

# LCAMP is told where the coefficients may live (here: exactly the true support).
location = support_from_image(idwt2(y), 5)
out = lcamp(A, f_j, location, RecoveryConfig(max_iters=100, rel_tol=1e-12))
print(f"LCAMP with the true location mask: max error {np.abs(out - y).max():.2e}")
