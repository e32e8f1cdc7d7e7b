"""Reconstruction, error measures and the sequence benchmark."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import ComplexityError, SizingError, UndefinedReferenceError
from .masks import (
    DEFAULT_DECAY,
    FreqMask,
    MeanImageState,
    SparseSupport,
    adaptive_update,
    algo1_max_modulus,
    algo2_per_resolution,
    algo3_interference,
    algo4_influence,
    apply_mask,
    random_lowfreq_mask,
    support_from_image,
)
from .phantom import DynamicSequence
from .recovery import RecoveryConfig, SensingOperator, iht, lcamp
from .transforms import (
    DEFAULT_LEVELS,
    DEFAULT_WAVELET,
    dft2,
    dwt2,
    idft2,
    idft2_complex,
    idwt2,
)

DETERMINISTIC = ("algo1", "algo2", "algo3", "algo4")
BASELINES = ("iht", "lcamp")
METHODS = DETERMINISTIC + BASELINES


def reconstruct(f: np.ndarray, mask: FreqMask) -> np.ndarray:
    """Real-part inverse DFT of the masked (zero- or mean-filled) spectrum."""
    return idft2(apply_mask(f, mask))


def erec_direct(y: np.ndarray, support: SparseSupport, mask: FreqMask, real: bool = False) -> float:
    """Norm of the reconstruction error on the support, from the discarded frequencies only.

    Transforms the zero-extended discarded spectrum ``f_R`` back to the
    wavelet domain and restricts it to ``I``, i.e. ``||W_IR F_R^H f_R||``.
    With ``real=True`` the image is reduced to its real part first, which is
    the error the real-part reconstruction actually makes.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != mask.shape or y.shape != support.shape:
        raise SizingError("pyramid, support and mask shapes differ")
    f = dft2(idwt2(y, support.levels, support.wavelet))
    discarded = f.copy()
    discarded.flat[mask.indices] = 0.0
    img = idft2(discarded) if real else idft2_complex(discarded)
    err = dwt2(img, support.levels, support.wavelet).ravel()[support.indices]
    return float(np.linalg.norm(err))


def relative_percent_error(xhat: np.ndarray, x: np.ndarray, roi: np.ndarray | None = None) -> float:
    """``100 ||(xhat - x)|_roi|| / ||x|_roi||``."""
    xhat, x = np.asarray(xhat, dtype=float), np.asarray(x, dtype=float)
    if xhat.shape != x.shape:
        raise SizingError(f"shapes differ: {xhat.shape} vs {x.shape}")
    if roi is None:
        roi = np.ones(x.shape, dtype=bool)
    if not roi.any():
        raise UndefinedReferenceError("empty evaluation region")
    ref = np.linalg.norm(x[roi])
    if ref == 0:
        raise UndefinedReferenceError("reference image vanishes on the evaluation region")
    return float(100.0 * np.linalg.norm(xhat[roi] - x[roi]) / ref)


# --------------------------------------------------------------------------
# Exhaustive oracle

MAX_BRUTE_TOTAL = 24
MAX_BRUTE_MASKS = 10 ** 6


def brute_force_optimal_mask(x: np.ndarray, support: SparseSupport, m: int, real: bool = False,
                             chunk: int = 4096):
    """Enumerate every ``m``-subset and return the one minimising :func:`erec_direct`.

    Exact ties (to ``1e-12 ||f||``) go to the lexicographically first subset.
    Errors are evaluated from precomputed columns ``f_h W F^H e_h`` restricted
    to the support, summed over the discarded set.

    Returns:
        ``(mask, value)``.
    """
    x = np.asarray(x, dtype=float)
    total = x.size
    if total > MAX_BRUTE_TOTAL or comb(total, m) > MAX_BRUTE_MASKS:
        raise ComplexityError(f"C({total}, {m}) masks is beyond the exhaustive limit")
    if not 0 <= m <= total:
        raise SizingError(f"budget {m} outside [0, {total}]")
    f = dft2(x).ravel()
    cols = np.empty((total, support.n), dtype=complex)
    for h in range(total):
        e = np.zeros(x.shape, dtype=complex)
        e.flat[h] = f[h]
        img = idft2(e) if real else idft2_complex(e)
        cols[h] = dwt2(img, support.levels, support.wavelet).ravel()[support.indices]
    everything = cols.sum(axis=0)

    values, subsets = [], []
    it = combinations(range(total), m)
    while True:
        batch = [s for _, s in zip(range(chunk), it)]
        if not batch:
            break
        ind = np.zeros((len(batch), total))
        ind[np.repeat(np.arange(len(batch)), m), np.array(batch, dtype=int).ravel()] = 1.0
        values.append(np.linalg.norm(everything[None, :] - ind @ cols, axis=1))
        subsets.extend(batch)
    values = np.concatenate(values)
    tol = 1e-12 * max(np.linalg.norm(f), 1.0)
    first = int(np.flatnonzero(values <= values.min() + tol)[0])
    best_set = subsets[first]
    return FreqMask(x.shape, np.array(best_set, dtype=np.int64)), float(values[first])


def all_mask_errors(x: np.ndarray, support: SparseSupport, m: int, real: bool = False) -> np.ndarray:
    """:func:`erec_direct` for every ``m``-subset, in lexicographic order."""
    x = np.asarray(x, dtype=float)
    if comb(x.size, m) > MAX_BRUTE_MASKS:
        raise ComplexityError("too many masks to enumerate")
    y = dwt2(x, support.levels, support.wavelet)
    return np.array([erec_direct(y, support, FreqMask(x.shape, np.array(s, dtype=np.int64)), real)
                     for s in combinations(range(x.size), m)])


# --------------------------------------------------------------------------
# Sequence benchmark


@dataclass(frozen=True)
class BenchmarkConfig:
    """Knobs of one benchmark run.

    ``sparsity`` is the support size given to Algorithms 2-4 (default ``m``);
    ``cs_sparsity`` is the sparsity level of IHT and the size of LCAMP's
    location mask (default ``m // 2``). ``fill`` is ``"mean"`` or ``"zero"``
    for the deterministic methods; the baselines always work zero-filled.
    """

    levels: int = DEFAULT_LEVELS
    wavelet: str = DEFAULT_WAVELET
    sparsity: int | None = None
    cs_sparsity: int | None = None
    a: float = 1.0
    fill: str = "mean"
    adaptive_fill: bool = True
    decay: float = DEFAULT_DECAY
    mask_seed: int = 0
    max_iters: int = 100
    rel_tol: float = 1e-6
    algo4_method: str = "atoms"
    workers: int = 1

    def __post_init__(self):
        if self.fill not in ("mean", "zero"):
            raise ValueError(f"fill must be 'mean' or 'zero', got {self.fill!r}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a={self.a} outside [0, 1]")


@dataclass
class ErrorReport:
    method: str
    m_fraction: float
    frames: np.ndarray
    errors: np.ndarray
    bootstrap_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    params: dict = field(default_factory=dict)
    reconstructions: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        """Mean over the undersampled frames only."""
        return float(np.mean(self.errors)) if len(self.errors) else float("nan")

    @property
    def mean_all(self) -> float:
        """Mean over every frame, the fully sampled bootstrap frames included."""
        both = np.concatenate([self.bootstrap_errors, self.errors])
        return float(np.mean(both)) if len(both) else float("nan")

    def window_mean(self, center: int, half_width: int = 5) -> float:
        sel = np.abs(self.frames - center) <= half_width
        return float(np.mean(self.errors[sel]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "m_fraction", "frame", "error_pct"])
        frac = f"{self.m_fraction:.4g}"
        for t, e in zip(self.frames, self.errors):
            w.writerow([self.method, frac, int(t), f"{e:.10g}"])
        w.writerow([self.method, frac, "mean", f"{self.mean:.10g}"])
        w.writerow([self.method, frac, "mean_all", f"{self.mean_all:.10g}"])
        return buf.getvalue()


def _deterministic_mask(method, xbar, m, cfg: BenchmarkConfig) -> FreqMask:
    if method == "algo1":
        return algo1_max_modulus(xbar, m)
    support = support_from_image(xbar, cfg.sparsity or m, cfg.levels, cfg.wavelet)
    if method == "algo2":
        return algo2_per_resolution(support, m)
    if method == "algo3":
        return algo3_interference(xbar, support, m)
    return algo4_influence(support, m, cfg.algo4_method, cfg.workers)


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_sequence_benchmark(seq: DynamicSequence, method: str, m: int,
                           cfg: BenchmarkConfig = BenchmarkConfig(),
                           keep_frames=()) -> ErrorReport:
    """Reconstruct frames ``tau..T-1`` of ``seq`` with ``method`` at budget ``m``.

    The first ``tau`` frames are taken as fully sampled and averaged into the
    prior image. Deterministic methods derive a mask from the prior (and, with
    ``cfg.a < 1``, from the running blend of prior and reconstructions);
    baselines use a seeded random low-frequency mask. Reconstructions of the
    frames listed in ``keep_frames`` are returned in ``report.reconstructions``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    frames = np.asarray(seq.frames, dtype=float)
    T = len(frames)
    tau = seq.spec.tau if seq.spec is not None else 5
    shape = frames.shape[1:]
    total = int(np.prod(shape))
    if not 1 <= m <= total:
        raise SizingError(f"budget {m} outside [1, {total}]")
    if not 1 <= tau < T:
        raise SizingError(f"need 1 <= tau < T, got tau={tau}, T={T}")
    xbar = frames[:tau].mean(axis=0)
    keep = set(int(k) for k in keep_frames)
    targets = list(range(tau, T))

    if method in DETERMINISTIC:
        base_fill = dft2(xbar) if cfg.fill == "mean" else None
        mask = _deterministic_mask(method, xbar, m, cfg).with_fill(base_fill)
        if cfg.a == 1.0:
            recs = _map(lambda t: reconstruct(dft2(frames[t]), mask), targets, cfg.workers)
        else:
            state = MeanImageState(xbar, cfg.a, tau)
            recs = []
            for t in targets:
                recs.append(reconstruct(dft2(frames[t]), mask))
                state = adaptive_update(state, recs[-1])
                fill = None
                if cfg.fill == "mean":
                    fill = dft2(state.xbar) if cfg.adaptive_fill else base_fill
                mask = _deterministic_mask(method, state.xbar, m, cfg).with_fill(fill)
    else:
        cs_n = cfg.cs_sparsity or max(1, m // 2)
        mask = random_lowfreq_mask(shape, m, cfg.mask_seed, cfg.decay)
        A = SensingOperator(mask, cfg.levels, cfg.wavelet)
        rcfg = RecoveryConfig(cfg.max_iters, cfg.rel_tol, cs_n)
        location = support_from_image(xbar, cs_n, cfg.levels, cfg.wavelet)

        def solve(t):
            f_j = A.measure(frames[t])
            y = iht(A, f_j, rcfg) if method == "iht" else lcamp(A, f_j, location, rcfg)
            return idwt2(y, cfg.levels, cfg.wavelet)

        recs = _map(solve, targets, cfg.workers)

    errors = np.array([relative_percent_error(r, frames[t], seq.roi) for r, t in zip(recs, targets)])
    boot = np.array([relative_percent_error(frames[t], frames[t], seq.roi) for t in range(tau)])
    params = {"m": m, "tau": tau, **asdict(cfg)}
    kept = {t: r for t, r in zip(targets, recs) if t in keep}
    return ErrorReport(method, m / total, np.array(targets), errors, boot, params, kept)
