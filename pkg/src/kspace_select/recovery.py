"""Compressed-sensing baselines: IHT and LCAMP with the sensing matrix F_J W^T."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, SizingError
from .masks import FreqMask, SparseSupport, top_k_mask
from .transforms import DEFAULT_LEVELS, DEFAULT_WAVELET, dft2, dwt2, idft2, idwt2

DIVERGENCE_FACTOR = 1e6


class SensingOperator:
    """``y -> (F W^T y)_J`` on real pyramids, with its real adjoint.

    The adjoint is taken with respect to the real inner product
    ``Re <A y, f>``, so it is the real part of ``W F^H`` applied to the
    zero-extended measurements, i.e. the zero-filled reconstruction.
    """

    def __init__(self, mask: FreqMask, levels: int = DEFAULT_LEVELS, wavelet: str = DEFAULT_WAVELET):
        self.mask = mask
        self.shape = mask.shape
        self.levels = levels
        self.wavelet = wavelet

    @property
    def m(self) -> int:
        return self.mask.m

    def forward(self, y: np.ndarray) -> np.ndarray:
        return dft2(idwt2(y, self.levels, self.wavelet)).ravel()[self.mask.indices]

    def adjoint(self, f_j: np.ndarray) -> np.ndarray:
        full = np.zeros(self.shape, dtype=complex)
        full.flat[self.mask.indices] = f_j
        return dwt2(idft2(full), self.levels, self.wavelet)

    def measure(self, img: np.ndarray) -> np.ndarray:
        """Measurements of an image (not a pyramid)."""
        return dft2(img).ravel()[self.mask.indices]


@dataclass(frozen=True)
class RecoveryConfig:
    max_iters: int = 100
    rel_tol: float = 1e-6
    n: int | None = None
    lcamp_r0: str = "zero"

    def __post_init__(self):
        if self.lcamp_r0 not in ("zero", "measurements"):
            raise ValueError("lcamp_r0 must be 'zero' or 'measurements'")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


def hard_threshold(z: np.ndarray, n: int) -> np.ndarray:
    """Keep the ``n`` largest-magnitude entries of ``z`` (ties to lowest index)."""
    z = np.asarray(z)
    if not 0 <= n <= z.size:
        raise SizingError(f"cannot keep {n} of {z.size} entries")
    return np.where(top_k_mask(np.abs(z), n), z, 0)


def _converged(new, old, rel_tol) -> bool:
    ref = np.linalg.norm(old)
    if ref == 0:
        return np.linalg.norm(new) == 0
    return np.linalg.norm(new - old) / ref < rel_tol


def _guard(x, f_norm, it):
    if np.linalg.norm(x) > DIVERGENCE_FACTOR * f_norm:
        raise DivergenceError(f"iterate norm exceeded {DIVERGENCE_FACTOR:g} x measurement norm at iteration {it}")


def iht(A: SensingOperator, f_j: np.ndarray, cfg: RecoveryConfig, history: list | None = None) -> np.ndarray:
    """Iterative hard thresholding with unit step, starting from zero.

    Stops when the relative change of the iterate drops below ``cfg.rel_tol``
    or after ``cfg.max_iters`` iterations. Pass a list as ``history`` to
    collect every iterate.
    """
    if cfg.n is None:
        raise ValueError("IHT needs a sparsity level cfg.n")
    f_j = np.asarray(f_j)
    if f_j.shape != (A.m,):
        raise SizingError(f"expected {A.m} measurements, got shape {f_j.shape}")
    f_norm = np.linalg.norm(f_j)
    x = np.zeros(A.shape)
    for it in range(1, cfg.max_iters + 1):
        new = hard_threshold(x + A.adjoint(f_j - A.forward(x)), cfg.n)
        _guard(new, f_norm, it)
        if history is not None:
            history.append(new)
        done = _converged(new, x, cfg.rel_tol)
        x = new
        if done:
            break
    return x


def lcamp(A: SensingOperator, f_j: np.ndarray, M: SparseSupport, cfg: RecoveryConfig,
          history: list | None = None) -> np.ndarray:
    """Location-constrained AMP recursion.

    ``r_i = f - A x_{i-1} + rho c r_{i-1}`` and ``x_i = (x_{i-1} + A^T r_i) * M``
    with ``rho = N_total / m``, ``c = |supp M| / N_total`` and ``x_0 = 0``.
    ``r_0`` is zero by default, so ``r_1 = f``; ``cfg.lcamp_r0 = "measurements"``
    starts from ``r_0 = f`` instead. ``M`` is used as a binary mask.
    """
    f_j = np.asarray(f_j)
    if f_j.shape != (A.m,):
        raise SizingError(f"expected {A.m} measurements, got shape {f_j.shape}")
    total = int(np.prod(A.shape))
    onsager = (total / A.m) * (M.n / total)
    keep = M.mask
    f_norm = np.linalg.norm(f_j)
    x = np.zeros(A.shape)
    r = f_j.astype(complex) if cfg.lcamp_r0 == "measurements" else np.zeros(A.m, dtype=complex)
    for it in range(1, cfg.max_iters + 1):
        r = f_j - A.forward(x) + onsager * r
        new = (x + A.adjoint(r)) * keep
        _guard(new, f_norm, it)
        if history is not None:
            history.append(new)
        done = _converged(new, x, cfg.rel_tol)
        x = new
        if done:
            break
    return x
