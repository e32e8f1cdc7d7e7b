"""Exhaustive search on a tiny signal as a yardstick for the heuristics.

Run: python3 demos/05_oracle.py
"""

import numpy as np

from kspace_select import brute_force_optimal_mask, dwt2, erec_direct
from kspace_select.evaluation import all_mask_errors
from kspace_select.masks import algo1_max_modulus, algo3_interference, support_from_image
from kspace_select.transforms import idwt2

rng = np.random.default_rng(7)
coeffs = np.zeros(16)
coeffs[rng.choice(16, 3, replace=False)] = rng.standard_normal(3)
x = idwt2(coeffs, 4)
support = support_from_image(x, 3, levels=4)
y = dwt2(x, 4)

errs = all_mask_errors(x, support, 4)
best, value = brute_force_optimal_mask(x, support, 4)
print(f"{len(errs)} masks of 4 frequencies: best {value:.4f}, median {np.median(errs):.4f}, worst {errs.max():.4f}")
print("optimal frequencies:", best.indices.tolist())
for name, mask in [("algo1", algo1_max_modulus(x, 4)), ("algo3", algo3_interference(x, support, 4))]:
    e = erec_direct(y, support, mask)
    print(f"{name}: {mask.indices.tolist()} erec {e:.4f} (rank {int(np.sum(errs < e - 1e-12)) + 1})")
