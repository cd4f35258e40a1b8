"""Strain-weighted block LBP-TOP features.

Block LBP-TOP treats every block of the face equally, but subtle motion is
highly localized.  This module computes one weight per block as the mean
strain magnitude over the block's full spatio-temporal extent (spatial mean
pooling per map, then temporal mean pooling across maps) and scales the
XY-plane histograms by it; the XT/YT planes pass through unchanged.
"""

from __future__ import annotations

import numpy as np

from .evaluate import FeatureVector
from .imaging import FrameSequence, gaussian_filter
from .lbptop import LbpTopParams, block_edges, block_histograms, flatten_histograms, zero_noise_blocks
from .osf import preprocess_strain_maps
from .strain import StrainMap, strain_sequence


def spatial_pool(strain: StrainMap | np.ndarray, n_blocks: int) -> np.ndarray:
    """Mean strain magnitude per block of an n_blocks x n_blocks grid.

    Entry (i, j) averages the magnitudes of block row i, block column j;
    remainder pixels belong to the last block of each axis.
    """
    mag = strain.magnitude if isinstance(strain, StrainMap) else np.asarray(strain, dtype=np.float64)
    height, width = mag.shape
    if n_blocks > min(width, height):
        raise ValueError(
            f"{n_blocks}x{n_blocks} blocks do not fit a {width}x{height} map"
        )
    rows = block_edges(height, n_blocks)
    cols = block_edges(width, n_blocks)
    means = np.empty((n_blocks, n_blocks))
    for i in range(n_blocks):
        for j in range(n_blocks):
            means[i, j] = mag[rows[i]:rows[i + 1], cols[j]:cols[j + 1]].mean()
    return means


def temporal_pool(block_means: list[np.ndarray]) -> np.ndarray:
    """Entrywise mean of per-map block means: the video's weight matrix."""
    if not block_means:
        raise ValueError("need at least one block-mean matrix")
    return np.mean(block_means, axis=0)


def weight_xy_histograms(hists: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Scale each block's XY-plane histogram by its weight.

    XT and YT plane histograms are returned bit-for-bit unchanged.
    """
    if weights.shape != hists.shape[:2]:
        raise ValueError(
            f"weight grid {weights.shape} does not match block grid {hists.shape[:2]}"
        )
    out = np.array(hists, copy=True)
    out[:, :, 0, :] = weights[:, :, None] * out[:, :, 0, :]
    return out


def osw_vector(
    seq: FrameSequence,
    params: LbpTopParams | None = None,
    window: int = 5,
    smooth: bool = True,
    smooth_size: int = 5,
    smooth_sigma: float = 0.5,
    zero_noise: bool = False,
    preprocess_weights: bool = False,
    edge_quantile: float = 0.9,
    rho_l: float = 0.05,
    rho_u: float = 0.05,
) -> FeatureVector:
    """Strain-weighted LBP-TOP feature vector of one video.

    Pipeline: Gaussian-filter the frames (on by default; the same filtered
    frames feed both the texture codes and the weight strain) ->
    block_histograms -> optional noise-block zeroing -> per-pair strain maps
    -> spatial then temporal mean pooling into the weight matrix -> scale
    the XY-plane histograms -> flatten in (block row, block column, plane,
    bin) order.  Output length is n_blocks^2 * 3 * bins_per_plane.

    `preprocess_weights` additionally applies the edge-suppression and
    band-clipping steps to the strain maps before pooling.
    """
    if params is None:
        params = LbpTopParams()

    frames = seq.frames
    if smooth:
        frames = [gaussian_filter(f, smooth_size, smooth_sigma) for f in frames]
        seq = FrameSequence(seq.video_id, seq.subject_id, seq.label, frames, seq.fps)

    volume = np.stack(frames)
    hists = block_histograms(volume, params)
    hists = zero_noise_blocks(hists, enabled=zero_noise)

    maps = strain_sequence(seq, window=window)
    if preprocess_weights:
        maps = preprocess_strain_maps(maps, frames[:-1], edge_quantile, rho_l, rho_u)
    weights = temporal_pool([spatial_pool(m, params.n_blocks) for m in maps])

    weighted = weight_xy_histograms(hists, weights)
    return FeatureVector(
        values=flatten_histograms(weighted),
        video_id=seq.video_id,
        subject_id=seq.subject_id,
        label=seq.label,
    )
