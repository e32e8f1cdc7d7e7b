"""Choosing which frequencies to measure from a prior image.

The four selectors all read a mean image (here a static phantom) and return
a mask of m frequencies. The masks are scored by the reconstruction error on
the wavelet support of a later frame.

Run: python3 demos/02_mask_selection.py
"""

import numpy as np

from kspace_select import SequenceSpec, build_sequence, dwt2, erec_direct, relative_percent_error
from kspace_select.evaluation import reconstruct
from kspace_select.masks import (
    algo1_max_modulus,
    algo2_per_resolution,
    algo3_interference,
    algo4_influence,
    random_lowfreq_mask,
    support_from_image,
)
from kspace_select.transforms import dft2

seq = build_sequence(SequenceSpec(n=64, frames=30, tau=5))
xbar = seq.frames[:5].mean(axis=0)
target = seq.frames[seq.peak_frame]
m = int(0.1 * xbar.size)
support = support_from_image(xbar, m)

masks = {
    "algo1 (largest moduli)": algo1_max_modulus(xbar, m),
    "algo2 (per resolution)": algo2_per_resolution(support, m),
    "algo3 (interference)": algo3_interference(xbar, support, m),
    "algo4 (influence)": algo4_influence(support, m),
    "random low-frequency": random_lowfreq_mask(xbar.shape, m, seed=0),
}
print(f"{m} of {xbar.size} frequencies, scored on the bolus-peak frame {seq.peak_frame}")
for name, mask in masks.items():
    erec = erec_direct(dwt2(target), support, mask)
    err = relative_percent_error(reconstruct(dft2(target), mask.with_fill(dft2(xbar))), target, seq.roi)
    print(f"  {name:24s} erec {erec:7.3f}   mean-filled error {err:6.2f}%")
