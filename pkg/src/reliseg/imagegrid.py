"""Raster type, grayscale image I/O and basic scalar-field operators.

All maps in the package are :class:`ImageGrid` instances wrapping a 2D
``float64`` array indexed ``[y, x]`` (row 0 is the top image row).
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

RMAP_MAGIC = b"RMAP"


class ImageFormatError(ValueError):
    """Base class for image decoding problems."""


class MalformedHeaderError(ImageFormatError):
    pass


class UnsupportedImageError(ImageFormatError):
    pass


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """A 2D scalar field, row-major, ``data[y, x]``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"ImageGrid needs a non-empty 2D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ImageGrid intensities must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    @classmethod
    def zeros(cls, width: int, height: int) -> "ImageGrid":
        return cls(np.zeros((height, width)))


@dataclass(frozen=True)
class GradientPair:
    gx: ImageGrid
    gy: ImageGrid


# --------------------------------------------------------------------------
# file formats

def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
    else:
        fmt = path.suffix.lower().lstrip(".")
    if fmt not in ("pgm", "png", "rmap"):
        raise UnsupportedImageError(f"unsupported format: {fmt!r}")
    return fmt


def _pgm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    n = len(raw)
    while len(tokens) < count:
        while pos < n and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < n and raw[pos:pos + 1] == b"#":
            while pos < n and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeaderError("truncated PGM header")
        start = pos
        while pos < n and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    return tokens, pos


def _read_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        if magic in (b"P3", b"P6"):
            raise UnsupportedImageError("unsupported: not grayscale")
        raise MalformedHeaderError(f"not a PGM file: magic {magic!r}")
    tokens, pos = _pgm_tokens(raw[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric PGM header field: {tokens}") from exc
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise UnsupportedImageError(f"unsupported bit depth: maxval {maxval}")
    body = raw[2 + pos:]
    count = width * height
    if magic == b"P2":
        try:
            values = np.array(body.split(), dtype=np.int64)
        except ValueError as exc:
            raise MalformedHeaderError("non-numeric PGM pixel data") from exc
        if values.size < count:
            raise MalformedHeaderError("truncated PGM pixel data")
        values = values[:count]
    else:
        # exactly one whitespace byte separates header and raster
        body = body[1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(body) < count * dtype.itemsize:
            raise MalformedHeaderError("truncated PGM pixel data")
        values = np.frombuffer(body, dtype=dtype, count=count).astype(np.int64)
    if values.min() < 0 or values.max() > maxval:
        raise MalformedHeaderError("PGM pixel value outside [0, maxval]")
    return values.reshape(height, width) / float(maxval)


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.array(im)
    except UnidentifiedImageError as exc:
        raise MalformedHeaderError(f"cannot decode PNG {path}") from exc
    if mode in ("L",):
        return arr.astype(np.float64) / 255.0
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        if arr.max(initial=0) > 65535 or arr.min(initial=0) < 0:
            raise UnsupportedImageError(f"unsupported bit depth in mode {mode}")
        return arr.astype(np.float64) / 65535.0
    if mode in ("1", "P", "LA", "F"):
        raise UnsupportedImageError(f"unsupported bit depth / mode {mode}")
    raise UnsupportedImageError("unsupported: not grayscale")


def _read_rmap(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != RMAP_MAGIC:
        raise MalformedHeaderError("not an RMAP file")
    width, height = struct.unpack("<II", raw[4:12])
    count = width * height
    if width == 0 or height == 0 or len(raw) != 12 + 4 * count:
        raise MalformedHeaderError("RMAP size does not match header")
    return np.frombuffer(raw[12:], dtype="<f4").astype(np.float64).reshape(height, width)


def load_image(path, format: str | None = None) -> ImageGrid:
    """Load a grayscale image, rescaled to [0, 1] by the format's max value.

    ``format`` is one of ``pgm``, ``png`` or ``rmap``; inferred from the
    suffix when omitted. RMAP maps are returned as stored (no rescale).
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    reader = {"pgm": _read_pgm, "png": _read_png, "rmap": _read_rmap}[fmt]
    return ImageGrid(reader(path))


def _quantize(grid: ImageGrid, maxval: int) -> np.ndarray:
    return np.rint(np.clip(grid.data, 0.0, 1.0) * maxval).astype(np.int64)


def save_image(grid: ImageGrid, path, format: str | None = None, binary: bool = True) -> None:
    """Write ``grid`` as 8-bit PGM (P5, or P2 with ``binary=False``), 8-bit PNG or RMAP."""
    path = Path(path)
    fmt = _detect_format(path, format)
    if fmt == "rmap":
        header = RMAP_MAGIC + struct.pack("<II", grid.width, grid.height)
        payload = header + grid.data.astype("<f4").tobytes()
    elif fmt == "pgm":
        q = _quantize(grid, 255)
        if binary:
            header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
            payload = header + q.astype(np.uint8).tobytes()
        else:
            lines = [f"P2\n{grid.width} {grid.height}\n255"]
            lines += [" ".join(str(v) for v in row) for row in q]
            payload = ("\n".join(lines) + "\n").encode("ascii")
    else:
        from PIL import Image

        q = _quantize(grid, 255).astype(np.uint8)
        Image.fromarray(q, mode="L").save(path, format="PNG")
        return
    path.write_bytes(payload)


# --------------------------------------------------------------------------
# operators

def gradient(img: ImageGrid) -> GradientPair:
    """Central differences inside, one-sided differences on the border."""
    if img.width < 2 or img.height < 2:
        raise ValueError(f"gradient needs at least 2x2 pixels, got {img.width}x{img.height}")
    gy, gx = np.gradient(img.data)
    return GradientPair(ImageGrid(gx), ImageGrid(gy))


def gradient_magnitude(img: ImageGrid) -> np.ndarray:
    g = gradient(img)
    return np.hypot(g.gx.data, g.gy.data)


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: ImageGrid, sigma: float) -> ImageGrid:
    """Separable Gaussian blur, kernel radius ``ceil(3 sigma)``, edge replication."""
    if not math.isfinite(sigma):
        raise ValueError("sigma must be finite")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    k = gaussian_kernel(sigma)
    out = correlate1d(img.data, k, axis=0, mode="nearest")
    out = correlate1d(out, k, axis=1, mode="nearest")
    return ImageGrid(out)
