"""Grayscale image I/O, resizing, and column-stacking.

Images are 2-D float64 arrays of shape (height, width) with values in
[0, 1]; 8-bit integers exist only at the file boundary.  Supported
formats: PGM P2/P5 (8-bit, maxval 255) and 8-bit PNG (grayscale, or RGB
collapsed to luma on load).
"""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class ImageFormatError(Exception):
    """The file exists but its header or payload is malformed."""


class UnsupportedImageError(Exception):
    """Recognized format with an unsupported variant (bit depth, mode)."""


@dataclass(frozen=True)
class ImageStack:
    """A set of equally sized images stacked as matrix columns.

    Column j is the row-major pixel scan of image j, so the matrix has
    shape (width*height, count).
    """

    width: int
    height: int
    count: int
    matrix: np.ndarray


def _as_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    return img


def load_image(path) -> np.ndarray:
    """Load a PGM (P2/P5) or PNG image as floats in [0, 1].

    RGB PNGs collapse to luma 0.299R + 0.587G + 0.114B before scaling.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    head = path.open("rb").read(2)
    if head in (b"P2", b"P5"):
        return _load_pgm(path)
    return _load_png(path)


def _load_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    # header: magic, width, height, maxval as whitespace/comment-separated tokens
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)").match(raw, pos)
        if m is None:
            raise ImageFormatError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric PGM header fields") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedImageError(f"{path}: only 8-bit PGM (maxval 255) supported")
    n = width * height
    if magic == b"P5":
        data = raw[pos + 1:pos + 1 + n]  # single whitespace byte after maxval
        if len(data) < n:
            raise ImageFormatError(f"{path}: PGM payload shorter than {n} bytes")
        values = np.frombuffer(data, dtype=np.uint8)
    else:
        fields = raw[pos:].split()
        if len(fields) < n:
            raise ImageFormatError(f"{path}: expected {n} PGM samples, got {len(fields)}")
        try:
            values = np.array([int(f) for f in fields[:n]], dtype=np.int64)
        except ValueError:
            raise ImageFormatError(f"{path}: non-numeric PGM sample") from None
        if values.min() < 0 or values.max() > 255:
            raise ImageFormatError(f"{path}: PGM sample out of range 0..255")
    return values.reshape(height, width).astype(float) / 255.0


def _load_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: cannot decode image: {exc}") from exc
    if mode == "L":
        return arr.astype(float) / 255.0
    if mode == "RGB":
        rgb = arr.astype(float)
        luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        return np.clip(luma / 255.0, 0.0, 1.0)
    raise UnsupportedImageError(
        f"{path}: unsupported image mode {mode!r} (need 8-bit grayscale or RGB)")


def quantize(img) -> np.ndarray:
    """Clamp to [0, 1] and map to 8-bit, rounding half away from zero."""
    img = np.clip(_as_image(img), 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path) -> None:
    """Write an image as PGM P5 (.pgm) or 8-bit grayscale PNG (.png)."""
    path = Path(path)
    data = quantize(img)
    if path.suffix.lower() == ".pgm":
        h, w = data.shape
        with path.open("wb") as f:
            f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            f.write(data.tobytes())
    elif path.suffix.lower() == ".png":
        Image.fromarray(data, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported output extension: {path.suffix!r}")


def resize_bilinear(img, new_w: int, new_h: int) -> np.ndarray:
    """Bilinear resize with pixel centers at (i + 0.5)/n and edge clamping."""
    img = _as_image(img)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target dimensions must be positive, got {new_w}x{new_h}")
    h, w = img.shape
    if (new_h, new_w) == (h, w):
        return img.copy()

    def _axis_coords(n_src, n_dst):
        x = (np.arange(n_dst) + 0.5) * n_src / n_dst - 0.5
        x = np.clip(x, 0.0, n_src - 1.0)
        lo = np.floor(x).astype(int)
        hi = np.minimum(lo + 1, n_src - 1)
        return lo, hi, x - lo

    r0, r1, fy = _axis_coords(h, new_h)
    c0, c1, fx = _axis_coords(w, new_w)
    top = img[r0][:, c0] * (1 - fx) + img[r0][:, c1] * fx
    bot = img[r1][:, c0] * (1 - fx) + img[r1][:, c1] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def stack(images) -> ImageStack:
    """Stack images as matrix columns (row-major scan per image)."""
    images = [_as_image(im) for im in images]
    if not images:
        raise ValueError("cannot stack an empty image list")
    h, w = images[0].shape
    for i, im in enumerate(images):
        if im.shape != (h, w):
            raise ValueError(
                f"image {i} has shape {im.shape[::-1]}, expected {(w, h)}")
    matrix = np.column_stack([im.ravel() for im in images])
    return ImageStack(width=w, height=h, count=len(images), matrix=matrix)


def unstack(s: ImageStack) -> list:
    """Inverse of stack; out-of-range values are clamped to [0, 1]."""
    if s.matrix.shape != (s.width * s.height, s.count):
        raise ValueError(
            f"stack matrix has shape {s.matrix.shape}, expected "
            f"{(s.width * s.height, s.count)}")
    return [np.clip(s.matrix[:, j].reshape(s.height, s.width), 0.0, 1.0)
            for j in range(s.count)]
