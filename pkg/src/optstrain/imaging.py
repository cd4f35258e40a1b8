"""Shared image substrate: frame loading, smoothing, edge response, resizing.

A frame is a 2-D float64 array of shape (height, width) with intensities in
[0, 1].  Row index is y (top to bottom), column index is x (left to right).
All convolutions replicate the edge pixels at the border so that constant
images stay constant and no spurious border gradients appear.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

# ITU-601 luma weights for color -> grayscale conversion.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

FRAME_EXTENSIONS = (".png", ".pgm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

SOBEL_VERTICAL_MASK = np.array(
    [[-1.0, 0.0, 1.0],
     [-2.0, 0.0, 2.0],
     [-1.0, 0.0, 1.0]]
)


class SequenceError(Exception):
    """Base class for frame-sequence loading failures."""


class SequenceTooShortError(SequenceError):
    """Fewer than two frames; consecutive-pair processing is impossible."""


class FrameSizeMismatchError(SequenceError):
    """Frames within one sequence differ in width or height."""


class FrameDecodeError(SequenceError):
    """A frame file exists but cannot be decoded as an image."""


@dataclass
class FrameSequence:
    """Ordered grayscale frames of one video sample.

    Attributes:
        video_id: Unique sample identifier.
        subject_id: Identifier of the person in the video.
        label: Class name of the sample.
        frames: List of (H, W) float64 arrays, intensities in [0, 1].
        fps: Frames per second; metadata only, never used numerically.
    """

    video_id: str
    subject_id: str
    label: str
    frames: list = field(repr=False)
    fps: float = 0.0

    def __post_init__(self):
        if len(self.frames) < 2:
            raise SequenceTooShortError(
                f"sequence too short: {self.video_id!r} has {len(self.frames)} "
                f"frame(s), need at least 2"
            )
        h, w = self.frames[0].shape
        for i, frame in enumerate(self.frames):
            if frame.shape != (h, w):
                raise FrameSizeMismatchError(
                    f"frame {i} of {self.video_id!r} is {frame.shape[1]}x"
                    f"{frame.shape[0]}, expected {w}x{h}"
                )

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    def __len__(self) -> int:
        return len(self.frames)


def to_grayscale(pixels: np.ndarray) -> np.ndarray:
    """Convert an 8-bit image array to a float64 grayscale frame in [0, 1].

    Color images are reduced with the fixed ITU-601 weighted sum
    0.299 R + 0.587 G + 0.114 B; an alpha channel, if present, is ignored.
    """
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 3:
        r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
        arr = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(arr / 255.0, 0.0, 1.0)


def load_frame(path) -> np.ndarray:
    """Decode one 8-bit image file into a grayscale frame."""
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                pixels = np.asarray(img)
            elif img.mode in ("RGB", "RGBA", "P"):
                pixels = np.asarray(img.convert("RGB"))
            else:
                pixels = np.asarray(img.convert("L"))
    except (UnidentifiedImageError, OSError) as exc:
        raise FrameDecodeError(f"cannot decode frame file {path}: {exc}") from exc
    return to_grayscale(pixels)


def load_sequence(entry) -> FrameSequence:
    """Load the frame directory of one manifest entry into a FrameSequence.

    Frames are taken in lexicographic filename order, decoded to grayscale
    and scaled to [0, 1].  When the entry carries onset/offset frame indices
    the sequence is trimmed to that inclusive range.

    Args:
        entry: Object with attributes video_id, subject_id, label, frame_dir
            and optional onset/offset (e.g. a pipeline.ManifestEntry).

    Raises:
        FileNotFoundError: frame_dir does not exist or holds no image files.
        SequenceTooShortError: fewer than two frames.
        FrameSizeMismatchError: frames of differing dimensions.
        FrameDecodeError: an unreadable image file.
    """
    frame_dir = entry.frame_dir
    if not os.path.isdir(frame_dir):
        raise FileNotFoundError(f"frame directory not found: {frame_dir}")
    names = sorted(
        n for n in os.listdir(frame_dir)
        if n.lower().endswith(FRAME_EXTENSIONS)
    )
    if not names:
        raise FileNotFoundError(f"no image files in {frame_dir}")

    onset = getattr(entry, "onset", None)
    offset = getattr(entry, "offset", None)
    if onset is not None or offset is not None:
        lo = 0 if onset is None else int(onset)
        hi = len(names) - 1 if offset is None else int(offset)
        names = names[lo:hi + 1]

    frames = [load_frame(os.path.join(frame_dir, n)) for n in names]
    return FrameSequence(
        video_id=entry.video_id,
        subject_id=entry.subject_id,
        label=entry.label,
        frames=frames,
    )


def gaussian_kernel(size: int = 5, sigma: float = 0.5) -> np.ndarray:
    """Build a square 2-D Gaussian kernel whose coefficients sum to 1."""
    if size % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    half = size // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    xx, yy = np.meshgrid(coords, coords)
    kernel = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_filter(frame: np.ndarray, size: int = 5, sigma: float = 0.5) -> np.ndarray:
    """Smooth a frame with a normalized Gaussian kernel, edge-replicated."""
    kernel = gaussian_kernel(size, sigma)
    return ndimage.correlate(np.asarray(frame, dtype=np.float64), kernel, mode="nearest")


def sobel_vertical(frame: np.ndarray) -> np.ndarray:
    """Absolute response of the 3x3 vertical-edge Sobel mask.

    The mask differentiates horizontally, so it fires on vertical edges and
    is exactly zero on images that are constant along x.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] < 3 or frame.shape[1] < 3:
        raise ValueError(f"frame must be at least 3x3, got {frame.shape[1]}x{frame.shape[0]}")
    return np.abs(ndimage.correlate(frame, SOBEL_VERTICAL_MASK, mode="nearest"))


def bilinear_sample(frame: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a frame at real-valued coordinates with bilinear weights.

    Coordinates are clamped to the valid pixel range, which replicates the
    edge rows/columns for out-of-bounds queries.
    """
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = (1.0 - fx) * frame[y0, x0] + fx * frame[y0, x1]
    bot = (1.0 - fx) * frame[y1, x0] + fx * frame[y1, x1]
    return (1.0 - fy) * top + fy * bot


def resize_bilinear(frame: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Resize a frame to (out_h, out_w) by bilinear interpolation.

    Corner pixels map onto corner pixels, so resizing to the input size is
    the identity and constant frames stay constant.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {out_w}x{out_h}")
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape
    xs = np.linspace(0.0, w - 1.0, out_w) if out_w > 1 else np.array([(w - 1) / 2.0])
    ys = np.linspace(0.0, h - 1.0, out_h) if out_h > 1 else np.array([(h - 1) / 2.0])
    grid_x, grid_y = np.meshgrid(xs, ys)
    return bilinear_sample(frame, grid_x, grid_y)


def gradient(field: np.ndarray, axis: int) -> np.ndarray:
    """First derivative with unit spacing along one axis.

    Central differences in the interior, one-sided first-order differences
    on the two border lines.
    """
    field = np.asarray(field, dtype=np.float64)
    n = field.shape[axis]
    out = np.empty_like(field)
    if n < 2:
        out[:] = 0.0
        return out

    def sl(a, b):
        idx = [slice(None)] * field.ndim
        idx[axis] = slice(a, b)
        return tuple(idx)

    out[sl(1, n - 1)] = 0.5 * (field[sl(2, n)] - field[sl(0, n - 2)])
    out[sl(0, 1)] = field[sl(1, 2)] - field[sl(0, 1)]
    out[sl(n - 1, n)] = field[sl(n - 1, n)] - field[sl(n - 2, n - 1)]
    return out


def save_grayscale_png(frame: np.ndarray, path, normalize: bool = True) -> None:
    """Write a frame as an 8-bit grayscale PNG, max-normalized by default."""
    arr = np.asarray(frame, dtype=np.float64)
    if normalize:
        peak = arr.max()
        if peak > 0:
            arr = arr / peak
    data = np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def write_pgm(frame_u8: np.ndarray, path) -> None:
    """Write an 8-bit grayscale array as a binary (P5) PGM file."""
    arr = np.asarray(frame_u8, dtype=np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())
