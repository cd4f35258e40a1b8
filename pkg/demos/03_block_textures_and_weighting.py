"""Block LBP-TOP histograms and strain weighting (OSW).

Shows the three-plane block histograms of a video volume, the block weight
matrix pooled from its strain maps, and how weighting rescales only the
appearance (XY) plane.
"""

import tempfile

import numpy as np

from optstrain import load_sequence, osw_vector
from optstrain.imaging import gaussian_filter
from optstrain.lbptop import LbpTopParams, block_histograms
from optstrain.osw import spatial_pool, temporal_pool, weight_xy_histograms
from optstrain.strain import strain_sequence
from optstrain.synthetic import generate_synthetic

with tempfile.TemporaryDirectory() as tmp:
    entries = generate_synthetic(tmp, n_classes=2, n_subjects=2, videos_per_subject=1,
                                 size=64, n_frames=10, seed=8)
    entry = entries[0]
    seq = load_sequence(entry)
    print(f"video {entry.video_id}: label {entry.label}")

    params = LbpTopParams()  # 4 neighbours per plane, radii (1, 1, 4), 5x5 blocks
    frames = [gaussian_filter(f) for f in seq.frames]
    volume = np.stack(frames)
    hists = block_histograms(volume, params)
    print(f"histograms: {hists.shape} = (block row, block col, plane, bin)")
    print(f"every populated histogram sums to 1: "
          f"{np.allclose(hists.sum(axis=3), 1.0)}")

    smoothed = seq.__class__(seq.video_id, seq.subject_id, seq.label, frames, seq.fps)
    maps = strain_sequence(smoothed)
    weights = temporal_pool([spatial_pool(m, params.n_blocks) for m in maps])
    print("block weight matrix (mean strain per block, x1000):")
    for row in weights:
        print("   " + " ".join(f"{1000 * w:6.2f}" for w in row))
    peak = np.unravel_index(weights.argmax(), weights.shape)
    print(f"strongest motion in block ({int(peak[0])}, {int(peak[1])}) (row, col)")

    weighted = weight_xy_histograms(hists, weights)
    print(f"XY plane rescaled by weights: {np.allclose(weighted[:, :, 0], weights[:, :, None] * hists[:, :, 0])}")
    print(f"XT/YT planes untouched: {np.array_equal(weighted[:, :, 1:], hists[:, :, 1:])}")

    fv = osw_vector(seq, params)
    print(f"OSW vector: length {len(fv)} = 5*5 blocks x 3 planes x 15 bins")
