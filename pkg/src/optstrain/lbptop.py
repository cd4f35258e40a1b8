"""Block-based LBP-TOP dynamic-texture descriptor over a video volume.

A volume is a (T, H, W) float array.  Local binary pattern codes are
computed on three orthogonal planes through each central voxel:

    plane 0 (XY): appearance        neighbours at (x + r_x cos a, y - r_y sin a)
    plane 1 (XT): horizontal motion neighbours at (x + r_x cos a, t + r_t sin a)
    plane 2 (YT): vertical motion   neighbours at (y - r_y sin a, t + r_t cos a)

with a = 2*pi*p/P.  Each neighbour is thresholded against the centre value
(>= counts as 1) and the bits weighted by 2^p form the code.  Non-integer
sample positions are interpolated bilinearly in the sampling plane;
positions within 1e-9 of a grid point are read directly, so integer radii
never interpolate.

Codes can only be computed where every plane's neighbourhood fits inside
the volume, so counting is restricted to the common central region that
leaves margins r_x, r_y and r_t on the respective axes.  The XY plane is
partitioned into n_blocks x n_blocks blocks (remainder pixels join the last
block of each axis) and per block and plane the code counts are
sum-normalized into a histogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PLANE_XY, PLANE_XT, PLANE_YT = 0, 1, 2

_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class LbpTopParams:
    """Neighbour counts, radii, block grid and histogram width.

    bins_per_plane may be 2^P (all codes) or 2^P - 1 (the top code bin is
    dropped after counting, before normalization).
    """

    p_xy: int = 4
    p_xt: int = 4
    p_yt: int = 4
    r_x: int = 1
    r_y: int = 1
    r_t: int = 4
    n_blocks: int = 5
    bins_per_plane: int = 15

    def __post_init__(self):
        if min(self.p_xy, self.p_xt, self.p_yt) < 4:
            raise ValueError("neighbour counts must be >= 4")
        if min(self.r_x, self.r_y, self.r_t) < 1:
            raise ValueError("radii must be >= 1")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")
        for p in (self.p_xy, self.p_xt, self.p_yt):
            if self.bins_per_plane not in (2 ** p, 2 ** p - 1):
                raise ValueError(
                    f"bins_per_plane must be 2^P or 2^P - 1; got "
                    f"{self.bins_per_plane} with P={p}"
                )

    def neighbours(self, plane: int) -> int:
        return (self.p_xy, self.p_xt, self.p_yt)[plane]

    def descriptor_length(self) -> int:
        return self.n_blocks * self.n_blocks * 3 * self.bins_per_plane


def _snap(value: float) -> float:
    rounded = round(value)
    return float(rounded) if abs(value - rounded) < _SNAP_TOL else value


def _neighbour_offsets(plane: int, params: LbpTopParams) -> list[tuple[float, float, float]]:
    """(dx, dy, dt) offsets of the P sample points on one plane's circle."""
    count = params.neighbours(plane)
    offsets = []
    for p in range(count):
        angle = 2.0 * math.pi * p / count
        if plane == PLANE_XY:
            dx, dy, dt = params.r_x * math.cos(angle), -params.r_y * math.sin(angle), 0.0
        elif plane == PLANE_XT:
            dx, dy, dt = params.r_x * math.cos(angle), 0.0, params.r_t * math.sin(angle)
        elif plane == PLANE_YT:
            dx, dy, dt = 0.0, -params.r_y * math.sin(angle), params.r_t * math.cos(angle)
        else:
            raise ValueError(f"plane must be 0, 1 or 2, got {plane}")
        offsets.append((_snap(dx), _snap(dy), _snap(dt)))
    return offsets


def _taps(offset: tuple[float, float, float]) -> list[tuple[int, int, int, float]]:
    """Integer corner shifts and bilinear weights for one sample offset.

    Returned as (sx, sy, st, weight) with weight > 0, in raster order of the
    fractional axes, so scalar and vectorized sampling accumulate in the
    same order.
    """
    axes = []
    for value in offset:
        lo = math.floor(value)
        frac = value - lo
        if frac == 0.0:
            axes.append([(int(lo), 1.0)])
        else:
            axes.append([(int(lo), 1.0 - frac), (int(lo) + 1, frac)])
    taps = []
    for st, wt in axes[2]:
        for sy, wy in axes[1]:
            for sx, wx in axes[0]:
                w = wx * wy * wt
                if w > 0.0:
                    taps.append((sx, sy, st, w))
    return taps


def _margins_for_plane(plane: int, params: LbpTopParams) -> tuple[int, int, int]:
    """(x, y, t) margins required to sample this plane."""
    if plane == PLANE_XY:
        return params.r_x, params.r_y, 0
    if plane == PLANE_XT:
        return params.r_x, 0, params.r_t
    return 0, params.r_y, params.r_t


def lbp_code(
    volume: np.ndarray, x: int, y: int, t: int, plane: int, params: LbpTopParams
) -> int:
    """LBP code of the voxel (x, y, t) on one orthogonal plane."""
    volume = np.asarray(volume, dtype=np.float64)
    depth, height, width = volume.shape
    mx, my, mt = _margins_for_plane(plane, params)
    if not (mx <= x < width - mx and my <= y < height - my and mt <= t < depth - mt):
        raise ValueError(
            f"centre ({x},{y},{t}) too close to the border for plane {plane}"
        )
    centre = volume[t, y, x]
    code = 0
    for bit, offset in enumerate(_neighbour_offsets(plane, params)):
        sampled = 0.0
        for sx, sy, st, w in _taps(offset):
            sampled += w * volume[t + st, y + sy, x + sx]
        if sampled >= centre:
            code += 1 << bit
    return code


def block_edges(size: int, n_blocks: int) -> list[int]:
    """Partition boundaries of one axis; remainder pixels join the last block."""
    if n_blocks > size:
        raise ValueError(f"cannot split {size} pixels into {n_blocks} blocks")
    base = size // n_blocks
    return [i * base for i in range(n_blocks)] + [size]

def block_index(positions: np.ndarray, size: int, n_blocks: int) -> np.ndarray:
    """Block index of each pixel position along one axis."""
    base = size // n_blocks
    return np.minimum(np.asarray(positions) // base, n_blocks - 1)


def block_histograms(volume: np.ndarray, params: LbpTopParams) -> np.ndarray:
    """Normalized per-block, per-plane LBP histograms of a video volume.

    Args:
        volume: (T, H, W) float array.
        params: LbpTopParams; the central region must be non-empty and the
            XY plane at least n_blocks pixels in each direction.

    Returns:
        (N, N, 3, bins_per_plane) array; axis 0 is the block row, axis 1 the
        block column.  Every (block, plane) histogram sums to 1, except
        histograms that received no counts, which stay all-zero.
    """
    volume = np.asarray(volume, dtype=np.float64)
    depth, height, width = volume.shape
    n = params.n_blocks
    x_lo, x_hi = params.r_x, width - params.r_x
    y_lo, y_hi = params.r_y, height - params.r_y
    t_lo, t_hi = params.r_t, depth - params.r_t
    if x_lo >= x_hi or y_lo >= y_hi or t_lo >= t_hi:
        raise ValueError(
            f"volume {width}x{height}x{depth} too small for radii "
            f"({params.r_x},{params.r_y},{params.r_t})"
        )
    block_edges(width, n)
    block_edges(height, n)

    centre = volume[t_lo:t_hi, y_lo:y_hi, x_lo:x_hi]
    row_block = block_index(np.arange(y_lo, y_hi), height, n)
    col_block = block_index(np.arange(x_lo, x_hi), width, n)
    block_id = (row_block[:, None] * n + col_block[None, :])[None, :, :]

    hists = np.zeros((n, n, 3, params.bins_per_plane))
    for plane in (PLANE_XY, PLANE_XT, PLANE_YT):
        n_codes = 2 ** params.neighbours(plane)
        codes = np.zeros(centre.shape, dtype=np.int64)
        for bit, offset in enumerate(_neighbour_offsets(plane, params)):
            sampled = np.zeros(centre.shape)
            for sx, sy, st, w in _taps(offset):
                sampled += w * volume[
                    t_lo + st:t_hi + st, y_lo + sy:y_hi + sy, x_lo + sx:x_hi + sx
                ]
            codes += (sampled >= centre).astype(np.int64) << bit

        flat = (block_id * n_codes + codes).ravel()
        counts = np.bincount(flat, minlength=n * n * n_codes).reshape(n, n, n_codes)
        counts = counts[:, :, :params.bins_per_plane].astype(np.float64)
        sums = counts.sum(axis=2, keepdims=True)
        hists[:, :, plane, :] = np.divide(
            counts, sums, out=np.zeros_like(counts), where=sums > 0
        )
    return hists


def zero_noise_blocks(hists: np.ndarray, enabled: bool = True) -> np.ndarray:
    """Zero the two bottom-corner block histograms across all planes.

    The bottom-left and bottom-right blocks pick up background and headset
    artifacts; zeroing them keeps the descriptor dimension unchanged.
    """
    out = np.array(hists, copy=True)
    if not enabled:
        return out
    n = out.shape[0]
    if n < 2:
        raise ValueError("noise-block removal needs a block grid of at least 2x2")
    out[n - 1, 0, :, :] = 0.0
    out[n - 1, n - 1, :, :] = 0.0
    return out


def flatten_histograms(hists: np.ndarray) -> np.ndarray:
    """Concatenate histograms in (block row, block column, plane, bin) order."""
    return np.ascontiguousarray(hists).ravel().copy()
