"""On-disk formats: raw array dumps and mask files.

Raw dump::

    KSH <kind> <N> <N>\\n
    <little-endian float64 payload, row-major>

``kind`` is ``real`` or ``complex-interleaved`` (re, im pairs).

Mask file::

    MASK <N> <m>
    <flat index>      # one per line, ascending

A mean-fill spectrum, when present, is written next to the mask as a raw
dump at ``<mask path>.fill.ksh``.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import SizingError

_LE = np.dtype("<f8")


def atomic_write(path, data: bytes) -> None:
    """Write via a temporary sibling and rename, so readers never see half a file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def dump_raw(path, arr: np.ndarray) -> None:
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SizingError(f"raw dumps hold square images, got shape {arr.shape}")
    n = arr.shape[0]
    if np.iscomplexobj(arr):
        kind = "complex-interleaved"
        payload = np.stack([arr.real, arr.imag], axis=-1).astype(_LE).tobytes()
    else:
        kind = "real"
        payload = arr.astype(_LE).tobytes()
    atomic_write(path, f"KSH {kind} {n} {n}\n".encode("ascii") + payload)


def load_raw(path) -> np.ndarray:
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    parts = data[:nl].decode("ascii").split()
    if len(parts) != 4 or parts[0] != "KSH":
        raise ValueError(f"{path}: not a KSH dump")
    kind, n0, n1 = parts[1], int(parts[2]), int(parts[3])
    flat = np.frombuffer(data[nl + 1:], dtype=_LE).astype(np.float64)
    if kind == "real":
        return flat.reshape(n0, n1)
    if kind == "complex-interleaved":
        pairs = flat.reshape(n0, n1, 2)
        return pairs[..., 0] + 1j * pairs[..., 1]
    raise ValueError(f"{path}: unknown kind {kind!r}")


def fill_path(mask_path) -> Path:
    mask_path = Path(mask_path)
    return mask_path.with_name(mask_path.name + ".fill.ksh")


def write_mask(path, mask) -> None:
    """Write a :class:`~kspace_select.masks.FreqMask` and its fill sidecar."""
    n = mask.shape[0]
    lines = [f"MASK {n} {mask.m}"] + [str(int(h)) for h in mask.indices]
    atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))
    side = fill_path(path)
    if mask.fill is not None:
        dump_raw(side, mask.fill)
    elif side.exists():
        side.unlink()


def read_mask(path, ndim: int = 2):
    from .masks import FreqMask

    lines = Path(path).read_text().split()
    if len(lines) < 3 or lines[0] != "MASK":
        raise ValueError(f"{path}: not a mask file")
    n, m = int(lines[1]), int(lines[2])
    idx = np.array([int(t) for t in lines[3:]], dtype=np.int64)
    if len(idx) != m:
        raise ValueError(f"{path}: header says {m} indices, found {len(idx)}")
    side = fill_path(path)
    fill = load_raw(side) if side.exists() else None
    return FreqMask((n,) * ndim, idx, fill)
