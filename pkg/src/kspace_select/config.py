"""Experiment configuration files.

Grammar, one setting per line::

    # comment
    key = value
    key = item, item, item

Blank lines and ``#`` comments are ignored, keys are case-sensitive and may
appear once. Lists are comma separated. Unknown keys are an error. The same
grammar is used for the ``params.txt`` block echoed next to every output, and
parsing that block gives back the original configuration.

Keys (defaults in brackets):

    sequence       path to a saved sequence manifest; overrides the phantom keys []
    n              phantom side [128]
    frames         number of frames T [80]
    tau            fully sampled bootstrap frames [5]
    snr_db         image SNR in dB, ``inf`` for none [inf]
    curve_sigma    log-normal curve noise [0.1]
    seeds          phantom seed, then baseline mask seed [0, 0]
    methods        any of algo1..algo4, iht, lcamp [all six]
    fractions      measured fraction of N**2 per column [0.1, 0.2, 0.33, 0.5]
    a_values       blending weights for sweep-adaptive [1.0, 0.9, ..., 0.0]
    sweep_method   selector used by sweep-adaptive [algo1]
    sweep_fraction measured fraction for sweep-adaptive [0.1]
    levels         wavelet depth [4]
    wavelet        haar or db2 [haar]
    sparsity       support size for algo2..algo4, 0 = m [0]
    cs_sparsity    IHT sparsity and LCAMP mask size, 0 = m // 2 [0]
    fill           mean or zero [mean]
    decay          random mask decay, ``inf`` for uniform [0.15]
    max_iters      IHT/LCAMP iteration cap [100]
    rel_tol        IHT/LCAMP stopping tolerance [1e-06]
    algo4_method   atoms or columns [atoms]
    workers        threads for per-frame work [1]
    showcase_frame frame to dump, ``peak`` for the bolus peak [peak]
    output_dir     where results go [results]
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .evaluation import METHODS

DEFAULT_FRACTIONS = (0.10, 0.20, 0.33, 0.50)
DEFAULT_A_VALUES = tuple(round(1.0 - 0.1 * k, 1) for k in range(11))


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


@dataclass(frozen=True)
class ExperimentConfig:
    sequence: str = ""
    n: int = 128
    frames: int = 80
    tau: int = 5
    snr_db: float = float("inf")
    curve_sigma: float = 0.1
    seeds: tuple = (0, 0)
    methods: tuple = METHODS
    fractions: tuple = DEFAULT_FRACTIONS
    a_values: tuple = DEFAULT_A_VALUES
    sweep_method: str = "algo1"
    sweep_fraction: float = 0.1
    levels: int = 4
    wavelet: str = "haar"
    sparsity: int = 0
    cs_sparsity: int = 0
    fill: str = "mean"
    decay: float = 0.15
    max_iters: int = 100
    rel_tol: float = 1e-6
    algo4_method: str = "atoms"
    workers: int = 1
    showcase_frame: str = "peak"
    output_dir: str = "results"

    def __post_init__(self):
        unknown = [m for m in self.methods + (self.sweep_method,) if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown method(s) {', '.join(unknown)}; expected {', '.join(METHODS)}")
        if not self.methods:
            raise ConfigError("methods must not be empty")
        if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
            raise ConfigError("fractions must lie in (0, 1]")
        if not 0 < self.sweep_fraction <= 1:
            raise ConfigError("sweep_fraction must lie in (0, 1]")
        if any(not 0 <= a <= 1 for a in self.a_values):
            raise ConfigError("a_values must lie in [0, 1]")
        if len(self.seeds) != 2:
            raise ConfigError("seeds takes two values: phantom seed, mask seed")
        if self.frames < 1 or self.n < 2:
            raise ConfigError("frames and n must be positive")
        if not 1 <= self.tau < self.frames:
            raise ConfigError(f"need 1 <= tau < frames, got tau={self.tau}, frames={self.frames}")
        if self.fill not in ("mean", "zero"):
            raise ConfigError("fill must be mean or zero")
        if self.algo4_method not in ("atoms", "columns"):
            raise ConfigError("algo4_method must be atoms or columns")
        if self.max_iters < 1 or not self.rel_tol > 0 or self.workers < 1:
            raise ConfigError("max_iters, rel_tol and workers must be positive")
        if self.showcase_frame != "peak" and not self.showcase_frame.isdigit():
            raise ConfigError("showcase_frame must be a frame number or 'peak'")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))


_LIST_TYPES = {"seeds": int, "methods": str, "fractions": float, "a_values": float}


def _convert(key: str, raw: str, default):
    try:
        if key in _LIST_TYPES:
            items = [s.strip() for s in raw.split(",") if s.strip()]
            return tuple(_LIST_TYPES[key](s) for s in items)
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str, **overrides) -> ExperimentConfig:
    defaults = {f.name: f.default for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, defaults[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **overrides)
