"""Synthetic DSC-MRI sequences built on the Shepp-Logan head phantom.

Each frame is the static phantom plus, inside a few regions, a gamma-variate
bolus curve with a delayed recirculation bump. Curves are perturbed by
multiplicative log-normal noise and frames by white Gaussian noise at a target
SNR measured on the head region. Randomness for frame ``t`` comes from its own
stream ``SeedSequence(seed, spawn_key=(t,))`` so frames can be produced in any
order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SizingError
from .formats import dump_raw, load_raw
from .transforms import check_grid

# Modified Shepp-Logan (Toft): intensity, semi-axes a, b, centre x0, y0, tilt in degrees.
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


def pixel_coordinates(n: int):
    """``(x, y)`` of pixel centres on ``[-1, 1]``; x grows with column, y with decreasing row."""
    c = -1.0 + (2 * np.arange(n) + 1) / n
    x = np.broadcast_to(c[None, :], (n, n))
    y = np.broadcast_to(c[::-1, None], (n, n))
    return x, y


def inside_ellipse(x, y, a, b, x0, y0, tilt_deg):
    phi = np.radians(tilt_deg)
    dx, dy = np.asarray(x) - x0, np.asarray(y) - y0
    xr = dx * np.cos(phi) + dy * np.sin(phi)
    yr = -dx * np.sin(phi) + dy * np.cos(phi)
    return (xr / a) ** 2 + (yr / b) ** 2 <= 1.0


def shepp_logan_value(x, y):
    """Unscaled phantom intensity at continuous coordinates."""
    total = np.zeros(np.broadcast(x, y).shape)
    for rho, a, b, x0, y0, tilt in SHEPP_LOGAN_ELLIPSES:
        total = total + rho * inside_ellipse(x, y, a, b, x0, y0, tilt)
    return total


def shepp_logan(n: int) -> np.ndarray:
    """Ten-ellipse phantom sampled at pixel centres and scaled to ``[0, 1]``."""
    check_grid((n, n))
    # intensities are multiples of 0.1; drop the rounding residue of the sums
    img = np.round(shepp_logan_value(*pixel_coordinates(n)), 12)
    lo, hi = img.min(), img.max()
    return (img - lo) / (hi - lo)


def head_mask(n: int) -> np.ndarray:
    """Interior of the outer head ellipse; the evaluation region."""
    _, a, b, x0, y0, tilt = SHEPP_LOGAN_ELLIPSES[0]
    return inside_ellipse(*pixel_coordinates(n), a, b, x0, y0, tilt)


# --------------------------------------------------------------------------
# Contrast curves


@dataclass(frozen=True)
class GammaParams:
    amplitude: float = 0.3
    t0: float = 15.0
    alpha: float = 3.0
    beta: float = 1.5
    recirc_delay: float = 12.0
    recirc_gain: float = 0.3
    recirc_alpha: float = 3.0
    recirc_beta: float = 1.5

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.recirc_alpha <= 0 or self.recirc_beta <= 0:
            raise ValueError("gamma shape and scale must be positive")
        if self.amplitude < 0 or self.t0 < 0:
            raise ValueError("amplitude and onset must be non-negative")
        if not 0 <= self.recirc_gain <= 1:
            raise ValueError("recirculation gain must lie in [0, 1]")

    @property
    def peak_time(self) -> float:
        return self.t0 + self.alpha * self.beta


def _peak_normalized_gamma(t, amplitude, t0, alpha, beta):
    s = np.asarray(t, dtype=float) - t0
    out = np.zeros_like(s)
    pos = s > 0
    u = s[pos] / (alpha * beta)
    out[pos] = amplitude * u ** alpha * np.exp(alpha - s[pos] / beta)
    return out


def gamma_variate(t, p: GammaParams):
    """Bolus curve with recirculation; the primary term peaks at ``A`` at ``t0 + alpha beta``."""
    t = np.asarray(t, dtype=float)
    y = _peak_normalized_gamma(t, p.amplitude, p.t0, p.alpha, p.beta)
    y = y + _peak_normalized_gamma(t, p.recirc_gain * p.amplitude, p.t0 + p.recirc_delay,
                                   p.recirc_alpha, p.recirc_beta)
    return y if y.ndim else float(y)


# --------------------------------------------------------------------------
# Regions and sequences


@dataclass(frozen=True)
class Region:
    """A contrast region: an ellipse ``(a, b, x0, y0, tilt)`` or a box ``(x0, x1, y0, y1)``."""

    kind: str
    geometry: tuple
    gamma: GammaParams = GammaParams()

    def pixels(self, n: int) -> np.ndarray:
        g = self.geometry
        if self.kind == "ellipse":
            a, b, x0, y0, _ = g
            r = max(a, b)
            if abs(x0) + r > 1 or abs(y0) + r > 1:
                raise SizingError(f"ellipse region {g} leaves the image")
            return inside_ellipse(*pixel_coordinates(n), *g)
        if self.kind == "rect":
            x0, x1, y0, y1 = g
            if min(x0, y0) < -1 or max(x1, y1) > 1 or x0 >= x1 or y0 >= y1:
                raise SizingError(f"box region {g} leaves the image or is empty")
            x, y = pixel_coordinates(n)
            return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        raise ValueError(f"unknown region kind {self.kind!r}")


def default_regions() -> tuple:
    """Two ellipses and a vessel-like bar with staggered bolus arrival."""
    return (
        Region("ellipse", (0.11, 0.31, 0.22, 0.0, -18.0), GammaParams(t0=15.0)),
        Region("ellipse", (0.21, 0.25, 0.0, 0.35, 0.0), GammaParams(t0=18.0)),
        Region("rect", (-0.50, -0.44, -0.50, 0.50), GammaParams(t0=12.0)),
    )


@dataclass(frozen=True)
class SequenceSpec:
    n: int = 128
    frames: int = 80
    tau: int = 5
    regions: tuple = field(default_factory=default_regions)
    snr_db: float = np.inf
    curve_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        check_grid((self.n, self.n))
        if self.frames < 1:
            raise ValueError("a sequence needs at least one frame")
        if not 0 <= self.tau < self.frames:
            raise ValueError(f"bootstrap count tau={self.tau} must be below frames={self.frames}")
        if self.curve_sigma < 0:
            raise ValueError("curve noise sigma must be non-negative")


@dataclass
class DynamicSequence:
    frames: np.ndarray
    roi: np.ndarray
    truth_curves: np.ndarray
    spec: SequenceSpec | None = None

    @property
    def peak_frame(self) -> int:
        """Frame where the summed noiseless contrast is largest."""
        return int(np.argmax(self.truth_curves.sum(axis=0)))


def frame_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))


def add_white_noise(img: np.ndarray, snr_db: float, seed, roi: np.ndarray | None = None) -> np.ndarray:
    """Add Gaussian noise of variance ``P / 10**(snr_db/10)``, ``P`` the mean power on ``roi``.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    img = np.asarray(img, dtype=float)
    if np.isposinf(snr_db):
        return img.copy()
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    ref = img if roi is None else img[roi]
    sigma = np.sqrt(np.mean(ref ** 2) / 10 ** (snr_db / 10))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return img + sigma * rng.standard_normal(img.shape)


def build_frame(spec: SequenceSpec, t: int, base=None, masks=None, roi=None) -> np.ndarray:
    base = shepp_logan(spec.n) if base is None else base
    masks = [r.pixels(spec.n) for r in spec.regions] if masks is None else masks
    roi = head_mask(spec.n) if roi is None else roi
    rng = frame_rng(spec.seed, t)
    z = rng.standard_normal(len(spec.regions))
    frame = base.copy()
    for r, (region, pix) in enumerate(zip(spec.regions, masks)):
        frame[pix] += gamma_variate(t, region.gamma) * np.exp(spec.curve_sigma * z[r])
    return add_white_noise(frame, spec.snr_db, rng, roi)


def build_sequence(spec: SequenceSpec) -> DynamicSequence:
    base = shepp_logan(spec.n)
    masks = [r.pixels(spec.n) for r in spec.regions]
    roi = head_mask(spec.n)
    frames = np.stack([build_frame(spec, t, base, masks, roi) for t in range(spec.frames)])
    t = np.arange(spec.frames)
    curves = np.array([gamma_variate(t, r.gamma) for r in spec.regions]).reshape(len(spec.regions), spec.frames)
    return DynamicSequence(frames, roi, curves, spec)


# --------------------------------------------------------------------------
# Dump / load


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def region_to_text(region: Region) -> str:
    g = region.gamma
    gamma = (g.amplitude, g.t0, g.alpha, g.beta, g.recirc_delay, g.recirc_gain, g.recirc_alpha, g.recirc_beta)
    return " ".join([region.kind, *map(_fmt, region.geometry), "|", *map(_fmt, gamma)])


def region_from_text(text: str) -> Region:
    left, right = text.split("|")
    kind, *geom = left.split()
    return Region(kind, tuple(float(v) for v in geom), GammaParams(*(float(v) for v in right.split())))


def dump_sequence(seq: DynamicSequence, outdir) -> Path:
    """Write one raw dump per frame plus ``manifest.txt``; returns the manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = seq.spec
    lines = []
    if spec is not None:
        lines += [f"n = {spec.n}", f"frames = {spec.frames}", f"tau = {spec.tau}",
                  f"snr_db = {_fmt(spec.snr_db)}", f"curve_sigma = {_fmt(spec.curve_sigma)}",
                  f"seed = {spec.seed}"]
        lines += [f"region = {region_to_text(r)}" for r in spec.regions]
    for r, curve in enumerate(seq.truth_curves):
        lines.append(f"truth_{r} = " + ",".join(_fmt(v) for v in curve))
    for t, frame in enumerate(seq.frames):
        name = f"frame_{t:03d}.ksh"
        dump_raw(outdir / name, frame)
        lines.append(f"frame = {name}")
    manifest = outdir / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_sequence(manifest) -> DynamicSequence:
    manifest = Path(manifest)
    kv, regions, frames, curves = {}, [], [], {}
    for line in manifest.read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "region":
            regions.append(region_from_text(value))
        elif key == "frame":
            frames.append(load_raw(manifest.parent / value))
        elif key.startswith("truth_"):
            curves[int(key[6:])] = [float(v) for v in value.split(",")]
        else:
            kv[key] = value
    spec = None
    if "n" in kv:
        spec = SequenceSpec(n=int(kv["n"]), frames=int(kv["frames"]), tau=int(kv["tau"]),
                            regions=tuple(regions), snr_db=float(kv["snr_db"]),
                            curve_sigma=float(kv["curve_sigma"]), seed=int(kv["seed"]))
    stack = np.stack(frames)
    truth = np.array([curves[k] for k in sorted(curves)]).reshape(len(curves), len(frames))
    return DynamicSequence(stack, head_mask(stack.shape[1]), truth, spec)
