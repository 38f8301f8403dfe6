"""Per-pixel noise, edge evidence, reliability and regularization weight maps.

The noise estimate is the 2D spectral flatness (geometric over arithmetic
mean of the power spectrum) of a sliding window, so a white-noise patch
scores near 1 and a structured patch near 0. Reliability combines it with
edge evidence as ``R = (1 - N) * G`` and the regularization weight is
``w = 1 - R``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import median_filter

from .imagegrid import ImageGrid, gradient

ZERO_POWER_GUARD = 1e-10


@dataclass(frozen=True)
class SpectralWindow:
    size: int = 16
    stride: int | None = None
    epsilon: float = 1e-12
    dc_policy: str = "exclude_dc"
    # optional median smoothing of the noise map, 0 = off
    median_size: int = 0

    def __post_init__(self):
        if self.stride is None:
            object.__setattr__(self, "stride", self.size // 2)
        if self.size < 4 or self.size & (self.size - 1):
            raise ValueError(f"window size must be a power of two >= 4, got {self.size}")
        if not 1 <= self.stride <= self.size:
            raise ValueError(f"stride must lie in [1, {self.size}], got {self.stride}")
        if self.dc_policy != "exclude_dc":
            raise ValueError(f"unsupported dc_policy {self.dc_policy!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.median_size < 0:
            raise ValueError("median_size must be >= 0")


@dataclass(frozen=True)
class ReliabilityBundle:
    noise: ImageGrid
    edge: ImageGrid
    reliability: ImageGrid
    weight: ImageGrid


def _flatness_batch(blocks: np.ndarray, eps: float) -> np.ndarray:
    """Spectral flatness of a stack of square blocks, shape (n, s, s)."""
    s = blocks.shape[-1]
    spec = np.fft.fft2(blocks, axes=(-2, -1))
    power = (spec.real ** 2 + spec.imag ** 2) / float(s * s)
    power = power.reshape(power.shape[0], -1)[:, 1:]  # drop DC
    arith = power.mean(axis=1)
    geo = np.exp(np.log(power + eps).mean(axis=1))
    flat = geo / (arith + eps)
    flat[arith < ZERO_POWER_GUARD] = 0.0
    return np.clip(flat, 0.0, 1.0)


def spectral_flatness(block, cfg: SpectralWindow = SpectralWindow()) -> float:
    """Flatness in [0, 1] of one ``cfg.size`` x ``cfg.size`` block, DC bin excluded.

    A constant block (no power outside DC) returns 0.
    """
    arr = block.data if isinstance(block, ImageGrid) else np.asarray(block, dtype=np.float64)
    if arr.shape != (cfg.size, cfg.size):
        raise ValueError(f"block shape {arr.shape} does not match window {cfg.size}x{cfg.size}")
    return float(_flatness_batch(arr[None, :, :], cfg.epsilon)[0])


def _window_starts(length: int, size: int, stride: int) -> np.ndarray:
    starts = list(range(0, length - size + 1, stride))
    if starts[-1] != length - size:
        starts.append(length - size)
    return np.array(starts)


def _interp_axis(values: np.ndarray, centers: np.ndarray, n: int, axis: int) -> np.ndarray:
    coords = np.arange(n, dtype=np.float64)
    moved = np.moveaxis(values, axis, -1)
    out = np.empty(moved.shape[:-1] + (n,))
    for idx in np.ndindex(moved.shape[:-1]):
        out[idx] = np.interp(coords, centers, moved[idx])
    return np.moveaxis(out, -1, axis)


def noise_map(img: ImageGrid, cfg: SpectralWindow = SpectralWindow()) -> ImageGrid:
    """Sliding-window spectral flatness, bilinearly upsampled to full resolution."""
    s = cfg.size
    if img.width < s or img.height < s:
        raise ValueError(f"image {img.width}x{img.height} is smaller than the {s}x{s} window")
    ys = _window_starts(img.height, s, cfg.stride)
    xs = _window_starts(img.width, s, cfg.stride)
    windows = sliding_window_view(img.data, (s, s))[np.ix_(ys, xs)]
    blocks = windows.reshape(-1, s, s)
    blocks = blocks - blocks.mean(axis=(1, 2), keepdims=True)
    samples = _flatness_batch(blocks, cfg.epsilon).reshape(len(ys), len(xs))

    half = (s - 1) / 2.0
    full = _interp_axis(samples, xs + half, img.width, axis=1)
    full = _interp_axis(full, ys + half, img.height, axis=0)
    if cfg.median_size > 1:
        full = median_filter(full, size=cfg.median_size, mode="nearest")
    return ImageGrid(np.clip(full, 0.0, 1.0))


def edge_evidence(img: ImageGrid) -> ImageGrid:
    """``max(|gx|, |gy|)`` normalized by its global maximum (all zeros if flat)."""
    g = gradient(img)
    raw = np.maximum(np.abs(g.gx.data), np.abs(g.gy.data))
    peak = raw.max()
    if peak <= 0:
        return ImageGrid(np.zeros_like(raw))
    return ImageGrid(np.clip(raw / peak, 0.0, 1.0))


def combine(noise: ImageGrid, edge: ImageGrid) -> ReliabilityBundle:
    """Fuse precomputed noise and edge maps into a bundle."""
    if noise.shape != edge.shape:
        raise ValueError(f"noise {noise.shape} and edge {edge.shape} maps differ in shape")
    n = np.clip(noise.data, 0.0, 1.0)
    g = np.clip(edge.data, 0.0, 1.0)
    r = np.clip((1.0 - n) * g, 0.0, 1.0)
    w = np.clip(1.0 - r, 0.0, 1.0)
    return ReliabilityBundle(ImageGrid(n), ImageGrid(g), ImageGrid(r), ImageGrid(w))


def reliability_bundle(img: ImageGrid, cfg: SpectralWindow = SpectralWindow()) -> ReliabilityBundle:
    return combine(noise_map(img, cfg), edge_evidence(img))
