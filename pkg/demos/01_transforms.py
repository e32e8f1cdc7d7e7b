"""Fourier and wavelet transforms, and the spectra of wavelet atoms.

Run: python3 demos/01_transforms.py
"""

import numpy as np

from kspace_select import dft2, dwt2, idft2, idwt2
from kspace_select.transforms import Slot, freq_of_wavelet_atom

rng = np.random.default_rng(0)
img = rng.standard_normal((32, 32))

# Both transforms are orthonormal: energy is preserved and inverses are exact.
f, y = dft2(img), dwt2(img, levels=4)
print("||x||, ||F x||, ||W x||:", *(f"{np.linalg.norm(v):.6f}" for v in (img, f, y)))
print("round-trip errors:", np.abs(idft2(f) - img).max(), np.abs(idwt2(y) - img).max())

# Atoms of one subband are translates of each other, so their spectra share one modulus.
a = np.abs(freq_of_wavelet_atom((32, 32), Slot(2, "dd", (0, 0))))
b = np.abs(freq_of_wavelet_atom((32, 32), Slot(2, "dd", (3, 1))))
print("spectrum modulus difference between two translated atoms:", np.abs(a - b).max())

# Coarse atoms concentrate near DC, fine atoms near the band edge.
for level in (1, 4):
    spec = np.abs(freq_of_wavelet_atom((32, 32), Slot(level, "dd", (0, 0)))) ** 2
    k = np.abs(np.fft.fftfreq(32, 1 / 32))
    radius = np.hypot(k[:, None], k[None, :])
    print(f"level {level} diagonal atom: mean frequency radius {np.sum(spec * radius):.2f}")
