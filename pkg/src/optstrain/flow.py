"""Dense optical flow between consecutive frames.

Windowed least squares on the brightness-constancy constraint: around every
pixel, the spatial gradients and the temporal difference over a small square
window define an overdetermined linear system for the motion vector (p, q).
The 2x2 normal equations are solved in closed form per pixel.  Windows whose
normal matrix is near-singular (flat patches, aperture-limited texture)
produce (0, 0) instead of an unstable estimate, so the field is always
finite.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import gradient

DEFAULT_WINDOW = 5
DEFAULT_TAU_EIG = 1e-6
DEFAULT_COND_MAX = 1e8


@dataclass
class FlowField:
    """Per-pixel 2-D motion between two frames.

    Attributes:
        p: (H, W) horizontal velocity in pixels/frame (positive = rightward).
        q: (H, W) vertical velocity in pixels/frame (positive = downward).
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        if self.p.shape != self.q.shape:
            raise ValueError(f"p and q shapes differ: {self.p.shape} vs {self.q.shape}")
        if not (np.isfinite(self.p).all() and np.isfinite(self.q).all()):
            raise ValueError("flow field contains non-finite values")

    @property
    def height(self) -> int:
        return self.p.shape[0]

    @property
    def width(self) -> int:
        return self.p.shape[1]


def estimate_flow(
    f1: np.ndarray,
    f2: np.ndarray,
    window: int = DEFAULT_WINDOW,
    tau_eig: float = DEFAULT_TAU_EIG,
    cond_max: float = DEFAULT_COND_MAX,
) -> FlowField:
    """Estimate dense flow from frame f1 to frame f2.

    Spatial gradients are central differences of the mean frame (f1+f2)/2,
    the temporal gradient is f2 - f1, and both are aggregated over a
    `window` x `window` neighbourhood (edge-replicated).  A pixel whose
    2x2 normal matrix has smallest eigenvalue below `tau_eig`, or condition
    number above `cond_max`, gets the zero vector.

    Args:
        f1: First frame, (H, W) float array.
        f2: Second frame, same shape.
        window: Odd window span >= 3.
        tau_eig: Degeneracy threshold on the smallest eigenvalue.
        cond_max: Upper bound on the eigenvalue ratio.

    Returns:
        FlowField with finite p, q of shape (H, W).
    """
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError(f"frame shapes differ: {f1.shape} vs {f2.shape}")
    if window % 2 == 0 or window < 3:
        raise ValueError(f"window must be odd and >= 3, got {window}")

    mean = 0.5 * (f1 + f2)
    ix = gradient(mean, axis=1)
    iy = gradient(mean, axis=0)
    it = f2 - f1

    def window_sum(a):
        return ndimage.uniform_filter(a, size=window, mode="nearest") * (window * window)

    a11 = window_sum(ix * ix)
    a12 = window_sum(ix * iy)
    a22 = window_sum(iy * iy)
    b1 = -window_sum(ix * it)
    b2 = -window_sum(iy * it)

    trace = a11 + a22
    det = a11 * a22 - a12 * a12
    disc = np.sqrt(np.maximum(trace * trace - 4.0 * det, 0.0))
    lam_min = 0.5 * (trace - disc)
    lam_max = 0.5 * (trace + disc)

    ok = (lam_min >= tau_eig) & (lam_max <= cond_max * lam_min)
    safe_det = np.where(ok, det, 1.0)
    p = np.where(ok, (a22 * b1 - a12 * b2) / safe_det, 0.0)
    q = np.where(ok, (a11 * b2 - a12 * b1) / safe_det, 0.0)
    return FlowField(p=p, q=q)


def save_flow(flow: FlowField, path) -> None:
    """Dump a flow field as a little-endian binary file.

    Layout: uint32 width, uint32 height, then the p plane and the q plane
    as row-major float32.
    """
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", flow.width, flow.height))
        fh.write(flow.p.astype("<f4").tobytes())
        fh.write(flow.q.astype("<f4").tobytes())


def load_flow(path) -> FlowField:
    """Read a flow field written by save_flow."""
    with open(path, "rb") as fh:
        width, height = struct.unpack("<II", fh.read(8))
        n = width * height
        p = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(height, width)
        q = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(height, width)
    return FlowField(p=p.astype(np.float64), q=q.astype(np.float64))
