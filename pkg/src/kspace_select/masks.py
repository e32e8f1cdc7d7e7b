"""Frequency measurement sets and the heuristics that choose them.

A mask is the set ``J`` of flat k-space indices that are measured; everything
else is either zero-filled or, when the mask carries a ``fill`` spectrum,
replaced by the spectrum of a prior image. All selectors return exactly ``m``
indices and break ties towards the lowest flat index.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import EmptySupportError, SizingError
from .transforms import (
    DEFAULT_LEVELS,
    DEFAULT_WAVELET,
    AtomSpectra,
    check_grid,
    dft2,
    dwt2,
    flat_to_slot,
    hermitian_part,
    idwt2,
    level_map,
    wavelet_of_freq_atom,
)

DEFAULT_DECAY = 0.15


def top_k(values: np.ndarray, k: int) -> np.ndarray:
    """Flat indices of the ``k`` largest entries, ties to the lowest index."""
    return np.argsort(-np.asarray(values).ravel(), kind="stable")[:k]


def top_k_mask(values: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the set :func:`top_k` selects, in linear time."""
    flat = np.asarray(values).ravel()
    keep = np.zeros(flat.size, dtype=bool)
    if k <= 0:
        return keep.reshape(np.shape(values))
    if k >= flat.size:
        keep[:] = True
        return keep.reshape(np.shape(values))
    kth = np.partition(flat, flat.size - k)[flat.size - k]
    above = flat > kth
    keep[above] = True
    ties = np.flatnonzero(flat == kth)[: k - int(above.sum())]
    keep[ties] = True
    return keep.reshape(np.shape(values))


def _check_budget(m: int, total: int, lo: int = 1) -> None:
    if not lo <= m <= total:
        raise SizingError(f"budget {m} outside [{lo}, {total}]")


@dataclass(frozen=True)
class FreqMask:
    """Measured frequency set ``J`` for a grid of ``shape``.

    ``fill`` is an optional full spectrum whose entries replace the unmeasured
    frequencies at reconstruction time.
    """

    shape: tuple
    indices: np.ndarray
    fill: np.ndarray | None = None

    def __post_init__(self):
        shape = tuple(self.shape)
        check_grid(shape)
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if len(idx) != len(np.asarray(self.indices).ravel()):
            raise SizingError("mask indices must be distinct")
        total = int(np.prod(shape))
        if len(idx) and (idx[0] < 0 or idx[-1] >= total):
            raise SizingError("mask index out of range")
        if self.fill is not None and np.shape(self.fill) != shape:
            raise SizingError(f"fill spectrum shape {np.shape(self.fill)} != {shape}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "indices", idx)

    @property
    def m(self) -> int:
        return len(self.indices)

    @property
    def total(self) -> int:
        return int(np.prod(self.shape))

    @property
    def selected(self) -> np.ndarray:
        sel = np.zeros(self.shape, dtype=bool)
        sel.flat[self.indices] = True
        return sel

    @property
    def complement(self) -> np.ndarray:
        return np.flatnonzero(~self.selected)

    def with_fill(self, fill: np.ndarray | None) -> FreqMask:
        return replace(self, fill=None if fill is None else np.asarray(fill, dtype=complex))

    def __eq__(self, other):
        if not isinstance(other, FreqMask):
            return NotImplemented
        same_fill = (self.fill is None and other.fill is None) or (
            self.fill is not None and other.fill is not None and np.array_equal(self.fill, other.fill))
        return self.shape == other.shape and np.array_equal(self.indices, other.indices) and same_fill

    __hash__ = None


@dataclass(frozen=True)
class SparseSupport:
    """Positions ``I`` of the significant wavelet coefficients.

    ``indices`` are flat pyramid indices ordered by decreasing coefficient
    magnitude (the order Algorithm 3 consumes them in).
    """

    shape: tuple
    indices: np.ndarray
    levels: int = DEFAULT_LEVELS
    wavelet: str = DEFAULT_WAVELET

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(self.shape))
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if len(np.unique(idx)) != len(idx):
            raise SizingError("support indices must be distinct")
        object.__setattr__(self, "indices", idx)

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def mask(self) -> np.ndarray:
        sel = np.zeros(self.shape, dtype=bool)
        sel.flat[self.indices] = True
        return sel

    @property
    def level_counts(self) -> np.ndarray:
        """``n_j`` for ``j = 0..levels`` (0 = approximation, ``levels`` = finest)."""
        lev = level_map(self.shape, self.levels).ravel()[self.indices]
        return np.bincount(lev, minlength=self.levels + 1)

    def group_counts(self) -> dict:
        """Support counts per ``(level, subband)``, in level then subband order."""
        counts = {}
        for i in self.indices:
            s = flat_to_slot(self.shape, self.levels, int(i))
            key = (s.level, s.subband)
            counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items()))


@dataclass(frozen=True)
class MeanImageState:
    xbar: np.ndarray
    a: float = 1.0
    tau: int = 5

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"blending weight a={self.a} outside [0, 1]")
        if not np.all(np.isfinite(self.xbar)):
            raise ValueError("mean image has non-finite entries")


# --------------------------------------------------------------------------
# Support extraction


def support_from_image(xbar: np.ndarray, n: int, levels: int = DEFAULT_LEVELS,
                       wavelet: str = DEFAULT_WAVELET) -> SparseSupport:
    """Keep the ``n`` largest-magnitude wavelet coefficients of ``xbar``."""
    xbar = np.asarray(xbar, dtype=float)
    _check_budget(n, xbar.size)
    y = dwt2(xbar, levels, wavelet)
    return SparseSupport(xbar.shape, top_k(np.abs(y), n), levels, wavelet)


# --------------------------------------------------------------------------
# Algorithm 1


def algo1_max_modulus(xbar: np.ndarray, m: int) -> FreqMask:
    """Measure the ``m`` frequencies of largest modulus in the prior's spectrum."""
    xbar = np.asarray(xbar, dtype=float)
    _check_budget(m, xbar.size)
    f = dft2(xbar)
    return FreqMask(xbar.shape, top_k(np.abs(f), m))


# --------------------------------------------------------------------------
# Algorithm 2


def _require_support(support: SparseSupport) -> None:
    if support.n == 0:
        raise EmptySupportError("selector needs at least one support coefficient")


def _algo2_groups(support: SparseSupport):
    """Per-group ``(weight, frequency order)`` with weight ``2**(j/2) n_g / n``."""
    spectra = AtomSpectra(support.shape, support.levels, support.wavelet)
    groups = []
    for (level, band), count in support.group_counts().items():
        weight = 2.0 ** (level / 2) * count / support.n
        order = top_k(np.abs(spectra.base(level, band)), support.mask.size)
        groups.append((weight, order))
    return groups


def _algo2_literal(groups, param: float, total: int) -> np.ndarray:
    chosen = np.zeros(total, dtype=bool)
    for weight, order in groups:
        count = min(int(np.floor(weight * param + 0.5)), total)
        chosen[order[:count]] = True
    return np.flatnonzero(chosen)


def algo2_per_resolution(support: SparseSupport, m: int, param: float | None = None) -> FreqMask:
    """Per-resolution allocation of measurements.

    Each occupied subband contributes the ``round(2**(j/2) * n_g / n * param)``
    strongest frequencies of its representative atom's spectrum, where ``n_g``
    is the number of support coefficients in that subband of level ``j``.

    With ``param=None`` the scale is calibrated so that the union has exactly
    ``m`` elements: every (group, rank) entry switches on at the scale
    ``(rank + 0.5) / weight``, and entries are admitted in order of that
    threshold until the budget is met. This is the limit of a bisection on
    ``param``, with simultaneous thresholds resolved by level, subband, rank.
    An explicit ``param`` reproduces the literal allocation and ignores ``m``.
    """
    _require_support(support)
    total = int(np.prod(support.shape))
    _check_budget(m, total)
    groups = _algo2_groups(support)

    if param is not None:
        return FreqMask(support.shape, _algo2_literal(groups, param, total))

    thresholds = []
    ranks = np.arange(total)
    for g, (weight, order) in enumerate(groups):
        thresholds.append(np.stack([(ranks + 0.5) / weight, np.full(total, g), ranks]))
    thr = np.concatenate(thresholds, axis=1)
    sweep = np.lexsort((thr[2], thr[1], thr[0]))
    taken = np.zeros(total, dtype=bool)
    picked = []
    for col in sweep:
        h = groups[int(thr[1, col])][1][int(thr[2, col])]
        if not taken[h]:
            taken[h] = True
            picked.append(h)
            if len(picked) == m:
                break
    return FreqMask(support.shape, np.array(picked, dtype=np.int64))


def algo2_param(support: SparseSupport, m: int) -> float:
    """Smallest scale at which the literal Algorithm 2 reaches ``m`` frequencies."""
    _require_support(support)
    total = int(np.prod(support.shape))
    _check_budget(m, total)
    groups = _algo2_groups(support)
    lo, hi = 0.0, 1.0

    def size(p):
        return len(_algo2_literal(groups, p, total))

    while size(hi) < m:
        hi *= 2.0
        if hi > 1e12:
            raise SizingError(f"budget {m} unreachable for this support")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if size(mid) >= m:
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------
# Algorithm 3


def algo3_interference(xbar: np.ndarray, support: SparseSupport, m: int) -> FreqMask:
    """Greedy selection on spectra of growing partial signals.

    Support coefficients are added one at a time in decreasing magnitude; after
    each addition the strongest frequency of the partial signal's spectrum that
    is not yet measured joins the mask. If the budget exceeds the support size
    the remaining frequencies are taken from the full partial signal's
    spectrum in decreasing modulus; if it is smaller, selection stops early.
    """
    _require_support(support)
    xbar = np.asarray(xbar, dtype=float)
    _check_budget(m, xbar.size)
    y = dwt2(xbar, support.levels, support.wavelet).ravel()
    spectra = AtomSpectra(support.shape, support.levels, support.wavelet)

    f = np.zeros(support.shape, dtype=complex)
    taken = np.zeros(xbar.size, dtype=bool)
    picked = []
    for i in support.indices[:m]:
        slot = flat_to_slot(support.shape, support.levels, int(i))
        f += y[i] * spectra(slot)
        mod = np.abs(hermitian_part(f)).ravel()
        mod[taken] = -1.0
        h = int(np.argmax(mod))
        taken[h] = True
        picked.append(h)
    if len(picked) < m:
        mod = np.abs(hermitian_part(f)).ravel()
        mod[taken] = -1.0
        picked.extend(int(h) for h in top_k(mod, m - len(picked)))
    return FreqMask(support.shape, np.array(picked, dtype=np.int64))


# --------------------------------------------------------------------------
# Algorithm 4


def influence_scores(support: SparseSupport, method: str = "atoms", workers: int = 1) -> np.ndarray:
    """``v(h) = max_{i in I} |(W F^H e_h)_i|`` for every frequency ``h``.

    ``method="columns"`` transforms every unit frequency (N**2 transforms, may
    be spread over ``workers`` threads). ``method="atoms"`` uses
    ``|(W F^H)_{ih}| = |(F W^T)_{hi}|`` and the fact that atoms of one subband
    share a spectrum modulus, so one transform per occupied subband suffices.
    """
    total = int(np.prod(support.shape))
    if method == "atoms":
        spectra = AtomSpectra(support.shape, support.levels, support.wavelet)
        v = np.zeros(support.shape)
        for level, band in support.group_counts():
            np.maximum(v, np.abs(spectra.base(level, band)), out=v)
        return v
    if method != "columns":
        raise ValueError(f"unknown influence method {method!r}")
    idx = support.indices

    def column(h):
        col = wavelet_of_freq_atom(support.shape, h, support.levels, support.wavelet)
        return np.abs(col.ravel()[idx]).max() if len(idx) else 0.0

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(column, range(total)))
    else:
        vals = [column(h) for h in range(total)]
    return np.array(vals).reshape(support.shape)


def nuisance_spectrum(support: SparseSupport) -> np.ndarray:
    """``|F W^T 1_S|``: spectrum excited by unit values on the off-support slots."""
    ybar = (~support.mask).astype(float)
    return np.abs(dft2(idwt2(ybar, support.levels, support.wavelet)))


def algo4_influence(support: SparseSupport, m: int, method: str = "atoms", workers: int = 1) -> FreqMask:
    """Rank frequencies by influence on ``I`` against excitation of ``S``.

    The two thresholded criteria are folded into one score
    ``v(h) / (fbar(h) + eps)`` with ``eps = 1e-12 * max(fbar)``, and the top
    ``m`` are returned. With an empty complement the score is ``v`` alone.
    """
    total = int(np.prod(support.shape))
    _check_budget(m, total)
    v = influence_scores(support, method, workers)
    fbar = nuisance_spectrum(support)
    peak = fbar.max()
    score = v if peak == 0 else v / (fbar + 1e-12 * peak)
    return FreqMask(support.shape, top_k(score, m))


# --------------------------------------------------------------------------
# Random masks for the compressed-sensing baselines


def centered_radius(shape) -> np.ndarray:
    """Distance of every DFT index from DC, with wrap-around to signed frequencies."""
    n = check_grid(shape)
    k = np.fft.fftfreq(n, d=1.0 / n)
    grids = np.meshgrid(*(k for _ in shape), indexing="ij")
    return np.sqrt(sum(g ** 2 for g in grids))


def random_lowfreq_mask(shape, m: int, seed: int, decay: float = DEFAULT_DECAY) -> FreqMask:
    """Draw ``m`` distinct frequencies with probability ``exp(-r**2 / (2 decay**2 N**2))``.

    Successive weighted sampling without replacement, done in one shot with
    the Gumbel-top-k construction. ``decay=np.inf`` gives uniform sampling.
    """
    shape = tuple(shape)
    n = check_grid(shape)
    total = int(np.prod(shape))
    _check_budget(m, total, lo=0)
    rng = np.random.default_rng(seed)
    gumbel = rng.gumbel(size=total)
    if np.isinf(decay):
        logw = np.zeros(total)
    else:
        if decay <= 0:
            raise ValueError("decay must be positive")
        logw = -(centered_radius(shape).ravel() ** 2) / (2 * decay ** 2 * n ** 2)
    return FreqMask(shape, top_k(logw + gumbel, m))


# --------------------------------------------------------------------------
# Adaptive prior and mask application


def adaptive_update(state: MeanImageState, xtilde: np.ndarray) -> MeanImageState:
    """Blend the last reconstruction into the prior: ``a * xbar + (1 - a) * xtilde``."""
    xtilde = np.asarray(xtilde, dtype=float)
    if xtilde.shape != np.shape(state.xbar):
        raise SizingError(f"frame shape {xtilde.shape} != prior shape {np.shape(state.xbar)}")
    if state.a == 1.0:
        return state
    return replace(state, xbar=state.a * state.xbar + (1.0 - state.a) * xtilde)


def apply_mask(f: np.ndarray, mask: FreqMask) -> np.ndarray:
    """Keep measured entries of ``f``; fill the rest with zeros or ``mask.fill``."""
    f = np.asarray(f)
    if f.shape != mask.shape:
        raise SizingError(f"spectrum shape {f.shape} != mask shape {mask.shape}")
    out = np.zeros(f.shape, dtype=complex) if mask.fill is None else mask.fill.astype(complex, copy=True)
    out.flat[mask.indices] = f.flat[mask.indices]
    return out
