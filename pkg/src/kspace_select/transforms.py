"""Unitary Fourier and orthonormal wavelet transforms on square grids.

Everything here works on 1-D signals of length N or on N x N images, with N a
power of two. Images are plain numpy arrays; k-space arrays are complex with
the DC term at index 0 along every axis and ``norm="ortho"`` scaling, so both
transforms are isometries and the adjoint of each is its inverse.

Flat indices are row-major (``np.ravel_multi_index``) over the array shape.
The same convention is used for frequencies ``(u, v)`` and for coefficients of
the in-place wavelet pyramid, so a mask or a support is just a set of ints.

Pyramid layout, for ``levels = L``: the approximation block of side ``N/2**L``
sits at the origin; detail level ``j`` (1 = coarsest, L = finest) occupies the
blocks of side ``N/2**(L-j+1)`` next to it. A subband is named by one letter
per axis, ``'a'`` for the lowpass and ``'d'`` for the highpass branch, e.g.
``'ad'`` is lowpass along axis 0 and highpass along axis 1.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

import numpy as np

from .errors import SizingError, SlotError

_SQ2 = np.sqrt(2.0)
_SQ3 = np.sqrt(3.0)

# Lowpass analysis filters of orthonormal families.
WAVELETS = {
    "haar": np.array([1.0, 1.0]) / _SQ2,
    "db2": np.array([1 + _SQ3, 3 + _SQ3, 3 - _SQ3, 1 - _SQ3]) / (4 * _SQ2),
}

DEFAULT_LEVELS = 4
DEFAULT_WAVELET = "haar"


class Slot(NamedTuple):
    """Address of one pyramid coefficient."""

    level: int
    subband: str
    position: tuple


def check_grid(shape) -> int:
    """Validate a 1-D or square 2-D power-of-two shape and return its side."""
    shape = tuple(shape)
    if len(shape) not in (1, 2):
        raise SizingError(f"expected a 1-D or 2-D grid, got shape {shape}")
    n = shape[0]
    if any(s != n for s in shape):
        raise SizingError(f"grid must be square, got shape {shape}")
    if n < 2 or n & (n - 1):
        raise SizingError(f"side must be a power of two >= 2, got {n}")
    return n


def check_levels(shape, levels: int) -> None:
    n = check_grid(shape)
    if levels < 0 or (1 << levels) > n:
        raise SizingError(f"{levels} levels do not fit a side of {n}")


def _filters(wavelet: str):
    try:
        h = WAVELETS[wavelet]
    except KeyError:
        raise ValueError(f"unknown wavelet family {wavelet!r}") from None
    g = h[::-1] * (-1.0) ** np.arange(len(h))
    return h, g


# --------------------------------------------------------------------------
# Fourier


def _mirror(f: np.ndarray) -> np.ndarray:
    """Return ``f[(-u) mod N, (-v) mod N]``."""
    axes = tuple(range(f.ndim))
    return np.roll(np.flip(f, axes), 1, axes)


def hermitian_part(f: np.ndarray) -> np.ndarray:
    """Project a spectrum onto the spectra of real images."""
    return 0.5 * (f + np.conj(_mirror(f)))


def dft2(img: np.ndarray) -> np.ndarray:
    """Unitary DFT of a 1-D signal or a square image.

    For real input the output is made exactly conjugate symmetric, so moduli of
    paired frequencies compare equal and tie-breaking stays deterministic.
    """
    img = np.asarray(img)
    check_grid(img.shape)
    f = np.fft.fftn(img, norm="ortho")
    if not np.iscomplexobj(img):
        f = hermitian_part(f)
    return f


def idft2(f: np.ndarray, return_imag: bool = False):
    """Inverse unitary DFT, returning the real part.

    Zero-filled or partially replaced spectra are generally not conjugate
    symmetric, so the inverse has an imaginary component. It is discarded; pass
    ``return_imag=True`` to also get its 2-norm.
    """
    f = np.asarray(f)
    check_grid(f.shape)
    x = np.fft.ifftn(f, norm="ortho")
    if return_imag:
        return x.real.copy(), float(np.linalg.norm(x.imag))
    return x.real.copy()


def idft2_complex(f: np.ndarray) -> np.ndarray:
    """Inverse unitary DFT without discarding the imaginary part."""
    f = np.asarray(f)
    check_grid(f.shape)
    return np.fft.ifftn(f, norm="ortho")


def conjugate_index(h: int, shape) -> int:
    """Flat index of the frequency paired with ``h`` by conjugate symmetry."""
    n = check_grid(shape)
    uv = np.unravel_index(h, shape)
    return int(np.ravel_multi_index(tuple((-c) % n for c in uv), shape))


def shift_phase(shape, displacement) -> np.ndarray:
    """Spectrum multiplier for a circular shift of the signal by ``displacement``."""
    n = check_grid(shape)
    grids = np.meshgrid(*(np.arange(n) for _ in shape), indexing="ij")
    arg = sum(g * d for g, d in zip(grids, displacement))
    return np.exp(-2j * np.pi * (arg % n) / n)


# --------------------------------------------------------------------------
# Wavelets


def _analyze(x: np.ndarray, axis: int, h, g) -> np.ndarray:
    m = x.shape[axis]
    if len(h) == 2:
        even = np.take(x, np.arange(0, m, 2), axis=axis)
        odd = np.take(x, np.arange(1, m, 2), axis=axis)
        return np.concatenate([h[0] * even + h[1] * odd, g[0] * even + g[1] * odd], axis=axis)
    k2 = 2 * np.arange(m // 2)
    a = 0.0
    d = 0.0
    for tap, (hn, gn) in enumerate(zip(h, g)):
        xs = np.take(x, (k2 + tap) % m, axis=axis)
        a = a + hn * xs
        d = d + gn * xs
    return np.concatenate([a, d], axis=axis)


def _synthesize(c: np.ndarray, axis: int, h, g) -> np.ndarray:
    m = c.shape[axis]
    a, d = np.split(c, 2, axis=axis)
    if len(h) == 2:
        even = h[0] * a + g[0] * d
        odd = h[1] * a + g[1] * d
        return np.stack([even, odd], axis=axis + 1).reshape(c.shape)
    out = np.zeros_like(c)
    k2 = 2 * np.arange(m // 2)
    moved = np.moveaxis(out, axis, 0)
    am = np.moveaxis(a, axis, 0)
    dm = np.moveaxis(d, axis, 0)
    for tap, (hn, gn) in enumerate(zip(h, g)):
        # taps wrap onto distinct targets for a fixed tap, so fancy-index += is safe
        moved[(k2 + tap) % m] += hn * am + gn * dm
    return out


def dwt2(img: np.ndarray, levels: int = DEFAULT_LEVELS, wavelet: str = DEFAULT_WAVELET) -> np.ndarray:
    """Multilevel separable orthonormal DWT with periodic extension.

    Each level transforms the current approximation block along the last axis
    (rows) and then along the first. Complex input is transformed componentwise.

    Args:
        img: signal or square image, side a power of two.
        levels: decomposition depth, at most ``log2(N)``.
        wavelet: key of ``WAVELETS``.

    Returns:
        Array of the same shape holding the in-place pyramid.
    """
    img = np.asarray(img)
    check_levels(img.shape, levels)
    h, g = _filters(wavelet)
    y = img.astype(np.result_type(img.dtype, np.float64), copy=True)
    s = img.shape[0]
    for _ in range(levels):
        block = tuple(slice(0, s) for _ in range(img.ndim))
        sub = y[block]
        for axis in reversed(range(img.ndim)):
            sub = _analyze(sub, axis, h, g)
        y[block] = sub
        s //= 2
    return y


def idwt2(y: np.ndarray, levels: int = DEFAULT_LEVELS, wavelet: str = DEFAULT_WAVELET) -> np.ndarray:
    """Inverse of :func:`dwt2`."""
    y = np.asarray(y)
    check_levels(y.shape, levels)
    h, g = _filters(wavelet)
    x = y.astype(np.result_type(y.dtype, np.float64), copy=True)
    n = y.shape[0]
    for lev in reversed(range(levels)):
        s = n >> lev
        block = tuple(slice(0, s) for _ in range(y.ndim))
        sub = x[block]
        for axis in range(y.ndim):
            sub = _synthesize(sub, axis, h, g)
        x[block] = sub
    return x


# --------------------------------------------------------------------------
# Pyramid indexing


def subbands(ndim: int, level: int) -> list[str]:
    """Subband names at a level; the approximation level has just one."""
    if level == 0:
        return ["a" * ndim]
    return ["".join(p) for p in product("ad", repeat=ndim) if "d" in p]


def block_side(n: int, levels: int, level: int) -> int:
    """Side of the pyramid blocks belonging to ``level``."""
    return n >> levels if level == 0 else n >> (levels - level + 1)


def atom_stride(levels: int, level: int) -> int:
    """Spatial shift between neighbouring atoms of one subband."""
    return 1 << (levels if level == 0 else levels - level + 1)


def slot_to_flat(shape, levels: int, slot: Slot) -> int:
    n = check_grid(shape)
    check_levels(shape, levels)
    level, band, pos = slot
    if not 0 <= level <= levels or band not in subbands(len(shape), level):
        raise SlotError(f"no subband {band!r} at level {level} of a {levels}-level pyramid")
    pos = tuple(np.atleast_1d(pos))
    side = block_side(n, levels, level)
    if len(pos) != len(shape) or any(not 0 <= p < side for p in pos):
        raise SlotError(f"position {pos} outside a block of side {side}")
    coords = tuple(int(p) + (side if c == "d" else 0) for p, c in zip(pos, band))
    return int(np.ravel_multi_index(coords, shape))


def flat_to_slot(shape, levels: int, index: int) -> Slot:
    n = check_grid(shape)
    check_levels(shape, levels)
    if not 0 <= index < n ** len(shape):
        raise SlotError(f"flat index {index} out of range")
    coords = np.unravel_index(index, shape)
    top = max(coords)
    coarse = n >> levels
    if top < coarse:
        return Slot(0, "a" * len(shape), tuple(int(c) for c in coords))
    side = 1 << (int(top).bit_length() - 1)
    level = levels - int(np.log2(n // side)) + 1
    band = "".join("d" if c >= side else "a" for c in coords)
    pos = tuple(int(c) - (side if b == "d" else 0) for c, b in zip(coords, band))
    return Slot(level, band, pos)


def level_map(shape, levels: int) -> np.ndarray:
    """Integer array giving the level of every pyramid coefficient."""
    n = check_grid(shape)
    check_levels(shape, levels)
    top = np.zeros(shape, dtype=int)
    for axis in range(len(shape)):
        c = np.arange(n).reshape([-1 if a == axis else 1 for a in range(len(shape))])
        top = np.maximum(top, c)
    lev = np.zeros(shape, dtype=int)
    for level in range(1, levels + 1):
        side = block_side(n, levels, level)
        lev[(top >= side) & (top < 2 * side)] = level
    return lev


def subband_map(shape, levels: int) -> np.ndarray:
    """Object array of subband names, aligned with :func:`level_map`."""
    n = check_grid(shape)
    lev = level_map(shape, levels)
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        level = lev[idx]
        side = block_side(n, levels, level)
        out[idx] = "a" * len(shape) if level == 0 else "".join("d" if c >= side else "a" for c in idx)
    return out


# --------------------------------------------------------------------------
# Compound operators on single atoms


def freq_of_wavelet_atom(shape, slot: Slot, levels: int = DEFAULT_LEVELS,
                         wavelet: str = DEFAULT_WAVELET) -> np.ndarray:
    """Spectrum of a single unit wavelet coefficient, ``dft2(idwt2(e_slot))``."""
    y = np.zeros(shape)
    y.flat[slot_to_flat(shape, levels, slot)] = 1.0
    return dft2(idwt2(y, levels, wavelet))


def translated_atom_spectrum(base: np.ndarray, levels: int, slot: Slot) -> np.ndarray:
    """Spectrum of ``slot`` from the spectrum of its subband's atom at position 0.

    Atoms of one subband are circular shifts of each other, so their spectra
    differ only by a linear phase and share the same modulus.
    """
    stride = atom_stride(levels, slot.level)
    disp = tuple(stride * p for p in slot.position)
    return base * shift_phase(base.shape, disp)


class AtomSpectra:
    """Cached spectra of unit wavelet atoms for one grid and pyramid.

    The spectrum of each subband's atom at position 0 is computed once with the
    fast transforms; any other atom of that subband is obtained by applying the
    shift phase, separably along each axis.
    """

    def __init__(self, shape, levels: int = DEFAULT_LEVELS, wavelet: str = DEFAULT_WAVELET):
        self.shape = tuple(shape)
        self.n = check_grid(self.shape)
        check_levels(self.shape, levels)
        self.levels = levels
        self.wavelet = wavelet
        self._base = {}
        u = np.arange(self.n)
        self._ramp = np.exp(-2j * np.pi * (np.outer(u, u) % self.n) / self.n)

    def base(self, level: int, band: str) -> np.ndarray:
        key = (level, band)
        if key not in self._base:
            pos = (0,) * len(self.shape)
            self._base[key] = freq_of_wavelet_atom(self.shape, Slot(level, band, pos),
                                                   self.levels, self.wavelet)
        return self._base[key]

    def __call__(self, slot: Slot) -> np.ndarray:
        spec = self.base(slot.level, slot.subband)
        stride = atom_stride(self.levels, slot.level)
        out = spec
        for axis, p in enumerate(slot.position):
            d = (stride * p) % self.n
            if d:
                shape = [1] * len(self.shape)
                shape[axis] = self.n
                out = out * self._ramp[d].reshape(shape)
        return out if out is not spec else spec.copy()


def wavelet_of_freq_atom(shape, h: int, levels: int = DEFAULT_LEVELS,
                         wavelet: str = DEFAULT_WAVELET, real: bool = False) -> np.ndarray:
    """Wavelet coefficients of the single-frequency image ``idft(e_h)``.

    The complex exponential is kept whole by default, giving a unit-norm
    complex pyramid. With ``real=True`` only the cosine part is transformed,
    which has norm ``1/sqrt(2)`` unless ``h`` is its own conjugate.
    """
    total = int(np.prod(shape))
    if not 0 <= h < total:
        raise SlotError(f"frequency index {h} out of range for shape {tuple(shape)}")
    e = np.zeros(shape, dtype=complex)
    e.flat[h] = 1.0
    x = idft2(e) if real else idft2_complex(e)
    return dwt2(x, levels, wavelet)
