"""Synthetic benchmark: chirped sinusoidal boundary, blur ramp and noise ramp.

The boundary gets smoother toward the left (frequency chirps up left to
right) while blur and noise both increase toward the left, so each image
mixes easy and hard regions.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imagegrid import ImageGrid, gaussian_blur

N_IMAGES = 16
AMPLITUDES = (6.0, 12.0, 18.0, 24.0)
# (freq_hi, noise_sigma_hi, blur_sigma_hi), ramped jointly
DIFFICULTY = ((4.0, 0.1, 1.0), (6.0, 0.2, 2.0), (8.0, 0.3, 3.0), (10.0, 0.4, 4.0))


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 512
    height: int = 128
    object_intensity: float = 0.25
    background_intensity: float = 0.75
    base_y: float | None = None
    amplitude: float = 12.0
    freq_lo: float = 1.0
    freq_hi: float = 8.0
    noise_sigma_lo: float = 0.02
    noise_sigma_hi: float = 0.2
    blur_sigma_lo: float = 0.0
    blur_sigma_hi: float = 2.0
    seed: int = 0
    # +1: noise/blur grow toward the left edge, -1: toward the right edge
    ramp_direction: int = 1

    def __post_init__(self):
        if self.base_y is None:
            object.__setattr__(self, "base_y", self.height / 2.0)
        if self.width < 8 or self.height < 8:
            raise ValueError("synthetic images need at least 8x8 pixels")
        if min(self.noise_sigma_lo, self.noise_sigma_hi) < 0:
            raise ValueError("noise sigmas must be >= 0")
        if min(self.blur_sigma_lo, self.blur_sigma_hi) < 0:
            raise ValueError("blur sigmas must be >= 0")
        if not 0 <= self.amplitude < self.height / 2.0 - 2:
            raise ValueError(f"amplitude must lie in [0, height/2 - 2), got {self.amplitude}")
        if self.freq_lo > self.freq_hi:
            raise ValueError("freq_lo must not exceed freq_hi")
        if self.ramp_direction not in (1, -1):
            raise ValueError("ramp_direction must be +1 or -1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown SyntheticSpec fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class GroundTruth:
    boundary_y: np.ndarray
    contour_pixels: list[tuple[int, int]]

    def as_array(self) -> np.ndarray:
        return np.array(self.contour_pixels, dtype=np.int64)

    @property
    def anchors(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Boundary crossings of the left and right image borders."""
        return self.contour_pixels[0], self.contour_pixels[-1]


def _left_ramp(spec: SyntheticSpec) -> np.ndarray:
    """Per-column interpolation factor, 1 where noise/blur peak, 0 at the other edge."""
    u = np.arange(spec.width) / (spec.width - 1)
    return 1.0 - u if spec.ramp_direction == 1 else u


def boundary_curve(spec: SyntheticSpec) -> GroundTruth:
    u = np.arange(spec.width) / (spec.width - 1)
    phase = 2 * np.pi * (spec.freq_lo * u + (spec.freq_hi - spec.freq_lo) * u ** 2 / 2)
    by = spec.base_y + spec.amplitude * np.sin(phase)
    if by.min() < 1 or by.max() > spec.height - 2:
        raise ValueError("boundary leaves the image interior; reduce amplitude or move base_y")
    pixels = [(int(x), int(np.rint(y))) for x, y in enumerate(by)]
    return GroundTruth(by, pixels)


def render(spec: SyntheticSpec) -> tuple[ImageGrid, GroundTruth]:
    """Noise-free image and its ground truth.

    Rows below the boundary (larger y) hold the object. The pixel row
    straddling the boundary is anti-aliased by its covered fraction.
    """
    truth = boundary_curve(spec)
    rows = np.arange(spec.height, dtype=np.float64)[:, None]
    cover = np.clip(rows + 0.5 - truth.boundary_y[None, :], 0.0, 1.0)
    img = spec.background_intensity + (spec.object_intensity - spec.background_intensity) * cover
    grid = ImageGrid(img)
    if spec.blur_sigma_lo == spec.blur_sigma_hi:
        return gaussian_blur(grid, spec.blur_sigma_lo), truth
    near = gaussian_blur(grid, spec.blur_sigma_lo).data
    far = gaussian_blur(grid, spec.blur_sigma_hi).data
    t = _left_ramp(spec)[None, :]
    return ImageGrid((1.0 - t) * near + t * far), truth


def noise_sigma_profile(spec: SyntheticSpec) -> np.ndarray:
    t = _left_ramp(spec)
    return spec.noise_sigma_lo + (spec.noise_sigma_hi - spec.noise_sigma_lo) * t


def add_ramped_noise(img: ImageGrid, spec: SyntheticSpec) -> ImageGrid:
    """Add column-ramped white Gaussian noise seeded by ``spec.seed``; clamp to [0, 1]."""
    if img.width != spec.width:
        raise ValueError(f"image width {img.width} does not match spec width {spec.width}")
    sigma = noise_sigma_profile(spec)
    if not np.any(sigma):
        return img
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(img.shape) * sigma[None, :]
    return ImageGrid(np.clip(img.data + noise, 0.0, 1.0))


def realization_seed(family_seed: int, image_id: int, realization: int) -> int:
    """64-bit noise seed depending only on (family, image, realization)."""
    ss = np.random.SeedSequence(entropy=int(family_seed), spawn_key=(int(image_id), int(realization)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def with_seed(spec: SyntheticSpec, seed: int) -> SyntheticSpec:
    return dataclasses.replace(spec, seed=int(seed))


def family_specs(family_seed: int = 0) -> list[SyntheticSpec]:
    """The 16 specs: amplitude x joint (frequency, noise, blur) difficulty."""
    specs = []
    for i, amp in enumerate(AMPLITUDES):
        for j, (f_hi, n_hi, b_hi) in enumerate(DIFFICULTY):
            specs.append(SyntheticSpec(
                amplitude=amp, freq_lo=1.0, freq_hi=f_hi,
                noise_sigma_lo=0.02, noise_sigma_hi=n_hi,
                blur_sigma_lo=0.0, blur_sigma_hi=b_hi,
                seed=realization_seed(family_seed, 4 * i + j, 0),
            ))
    return specs


def corpus(family_seed: int = 0) -> list[tuple[SyntheticSpec, ImageGrid, GroundTruth]]:
    out = []
    for spec in family_specs(family_seed):
        clean, truth = render(spec)
        out.append((spec, clean, truth))
    return out


# --------------------------------------------------------------------------
# on-disk layout

def image_dir_name(image_id: int) -> str:
    return f"image_{image_id:02d}"


def write_truth_csv(path, truth: GroundTruth) -> None:
    from .graphseg import write_contour_csv

    write_contour_csv(path, truth.contour_pixels)


def write_corpus(out_dir, family_seed: int = 0, realizations: int = 25) -> list[Path]:
    """Write ``image_XX/{clean.pgm,truth.csv,spec.json,noisy_<r>.pgm}`` per image."""
    from .imagegrid import save_image

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for image_id, (spec, clean, truth) in enumerate(corpus(family_seed)):
        d = out_dir / image_dir_name(image_id)
        d.mkdir(exist_ok=True)
        save_image(clean, d / "clean.pgm")
        write_truth_csv(d / "truth.csv", truth)
        meta = {"image_id": image_id, "family_seed": int(family_seed), "spec": spec.to_dict()}
        (d / "spec.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        for r in range(realizations):
            noisy = add_ramped_noise(clean, with_seed(spec, realization_seed(family_seed, image_id, r)))
            save_image(noisy, d / f"noisy_{r}.pgm")
        written.append(d)
    return written


def read_corpus(corpus_dir):
    """Rebuild ``[(image_id, family_seed, spec, clean, truth, n_noisy)]`` from disk."""
    corpus_dir = Path(corpus_dir)
    dirs = sorted(p for p in corpus_dir.glob("image_*") if p.is_dir())
    if not dirs:
        raise ValueError(f"{corpus_dir}: no image_* directories")
    entries = []
    for d in dirs:
        meta = json.loads((d / "spec.json").read_text())
        spec = SyntheticSpec.from_dict(meta["spec"])
        clean, truth = render(spec)
        n_noisy = len(list(d.glob("noisy_*.pgm")))
        entries.append((int(meta["image_id"]), int(meta["family_seed"]), spec, clean, truth, n_noisy))
    return entries
