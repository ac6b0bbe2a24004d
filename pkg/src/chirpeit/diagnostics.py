"""Peak, width and comparison measures on sampled spectra and envelopes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FloquetSpectrum

__all__ = [
    "Peak",
    "ladder_peaks",
    "fwhm",
    "count_peaks",
    "mirrored_modulus",
    "relative_l2",
]


@dataclass(frozen=True)
class Peak:
    order: int
    target: float
    freq: float
    height: float
    is_local_max: bool


def ladder_peaks(spectrum: FloquetSpectrum, orders, window: float | None = None) -> list[Peak]:
    """Largest ``|Omega|`` within ``window`` of each ``-n Delta``.

    ``is_local_max`` is false when the maximum sits on the window edge, i.e.
    there is no genuine peak near the ladder point.
    """
    freqs, vals = spectrum.flat()
    mod = np.abs(vals)
    delta = spectrum.delta
    window = 0.25 * delta if window is None else window
    out = []
    for n in orders:
        target = -n * delta
        sel = np.flatnonzero(np.abs(freqs - target) <= window)
        k = sel[np.argmax(mod[sel])]
        interior = sel[0] < k < sel[-1]
        out.append(Peak(int(n), target, float(freqs[k]), float(mod[k]), bool(interior)))
    return out


def fwhm(x: np.ndarray, y: np.ndarray, index: int | None = None) -> float:
    """Full width at half maximum of the peak at ``index`` (default: global max)."""
    y = np.asarray(y, dtype=float)
    k = int(np.argmax(y)) if index is None else int(index)
    half = 0.5 * y[k]
    lo = k
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = k
    while hi < len(y) - 1 and y[hi] > half:
        hi += 1
    if y[lo] > half or y[hi] > half:
        return float("inf")
    xl = x[lo] + (half - y[lo]) * (x[lo + 1] - x[lo]) / (y[lo + 1] - y[lo])
    xr = x[hi - 1] + (half - y[hi - 1]) * (x[hi] - x[hi - 1]) / (y[hi] - y[hi - 1])
    return float(xr - xl)


def count_peaks(y: np.ndarray, rel_height: float = 0.05) -> int:
    """Number of strict local maxima higher than ``rel_height * max(y)``."""
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        return int(y.size > 0)
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > rel_height * y.max())
    return int(inner.sum())


def mirrored_modulus(spectrum: FloquetSpectrum) -> np.ndarray:
    """``|Omega(-w)|`` on the ascending flat grid (zero where ``-w`` is off-grid)."""
    _, vals = spectrum.flat()
    mod = np.abs(vals)
    out = np.zeros_like(mod)
    # flat grid is -(S+1/2)D + k dw, so -f_k = f_{M-k}
    out[1:] = mod[:0:-1]
    return out


def relative_l2(a: np.ndarray, ref: np.ndarray) -> float:
    a = np.asarray(a)
    ref = np.asarray(ref)
    return float(np.linalg.norm(a - ref) / np.linalg.norm(ref))
