import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from optstrain.imaging import FrameSequence


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def textured_frame(rng, height=32, width=32):
    """Random frame with structure at a scale the flow estimator can use."""
    from scipy import ndimage

    smooth = ndimage.gaussian_filter(rng.standard_normal((height, width)), 1.5, mode="nearest")
    lo, hi = smooth.min(), smooth.max()
    return (smooth - lo) / (hi - lo)


def make_sequence(frames, video_id="v0", subject_id="s0", label="a"):
    return FrameSequence(video_id=video_id, subject_id=subject_id, label=label, frames=list(frames))
