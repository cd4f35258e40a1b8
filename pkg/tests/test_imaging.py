import math
import os

import numpy as np
import pytest
from PIL import Image

from optstrain.imaging import (
    FrameDecodeError,
    FrameSequence,
    FrameSizeMismatchError,
    SequenceTooShortError,
    gaussian_filter,
    gaussian_kernel,
    load_sequence,
    resize_bilinear,
    sobel_vertical,
    to_grayscale,
    write_pgm,
)
from oracles import hand_convolve_sobel_vertical


class Entry:
    def __init__(self, frame_dir, onset=None, offset=None):
        self.video_id = "v0"
        self.subject_id = "s0"
        self.label = "a"
        self.frame_dir = str(frame_dir)
        self.onset = onset
        self.offset = offset


def write_frames(directory, arrays):
    os.makedirs(directory, exist_ok=True)
    for i, arr in enumerate(arrays):
        write_pgm(arr, os.path.join(directory, f"f_{i:03d}.pgm"))


class TestLoadSequence:
    def test_identical_frames(self, tmp_path):
        frame = np.full((64, 64), 128, dtype=np.uint8)
        write_frames(tmp_path / "vid", [frame] * 10)
        seq = load_sequence(Entry(tmp_path / "vid"))
        assert len(seq) == 10
        for f in seq.frames:
            assert np.array_equal(f, seq.frames[0])
        assert abs(seq.frames[0][0, 0] - 128 / 255) < 1e-12

    def test_single_frame_rejected(self, tmp_path):
        write_frames(tmp_path / "vid", [np.zeros((8, 8), dtype=np.uint8)])
        with pytest.raises(SequenceTooShortError):
            load_sequence(Entry(tmp_path / "vid"))

    def test_dimension_mismatch(self, tmp_path):
        write_frames(tmp_path / "vid", [np.zeros((64, 64), dtype=np.uint8)])
        write_pgm(np.zeros((32, 32), dtype=np.uint8), tmp_path / "vid" / "f_999.pgm")
        with pytest.raises(FrameSizeMismatchError):
            load_sequence(Entry(tmp_path / "vid"))

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_sequence(Entry(tmp_path / "nope"))

    def test_undecodable_file(self, tmp_path):
        write_frames(tmp_path / "vid", [np.zeros((8, 8), dtype=np.uint8)] * 2)
        (tmp_path / "vid" / "f_zzz.png").write_bytes(b"not an image")
        with pytest.raises(FrameDecodeError):
            load_sequence(Entry(tmp_path / "vid"))

    def test_lexicographic_order(self, tmp_path):
        d = tmp_path / "vid"
        os.makedirs(d)
        for name, value in [("b.pgm", 20), ("a.pgm", 10), ("c.pgm", 30)]:
            write_pgm(np.full((4, 4), value, dtype=np.uint8), d / name)
        seq = load_sequence(Entry(d))
        values = [round(f[0, 0] * 255) for f in seq.frames]
        assert values == [10, 20, 30]

    def test_onset_offset_trim(self, tmp_path):
        frames = [np.full((4, 4), v, dtype=np.uint8) for v in range(10)]
        write_frames(tmp_path / "vid", frames)
        seq = load_sequence(Entry(tmp_path / "vid", onset=3, offset=6))
        assert len(seq) == 4
        assert round(seq.frames[0][0, 0] * 255) == 3

    def test_color_png_luma(self, tmp_path):
        d = tmp_path / "vid"
        os.makedirs(d)
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        rgb[..., 0], rgb[..., 1], rgb[..., 2] = 100, 150, 200
        for i in range(2):
            Image.fromarray(rgb).save(d / f"f_{i}.png")
        seq = load_sequence(Entry(d))
        expected = (0.299 * 100 + 0.587 * 150 + 0.114 * 200) / 255
        assert abs(seq.frames[0][0, 0] - expected) < 1e-12


class TestSequenceInvariants:
    def test_too_short(self):
        with pytest.raises(SequenceTooShortError):
            FrameSequence("v", "s", "a", [np.zeros((4, 4))])

    def test_mismatch(self):
        with pytest.raises(FrameSizeMismatchError):
            FrameSequence("v", "s", "a", [np.zeros((4, 4)), np.zeros((4, 5))])


class TestGaussian:
    def test_constant_invariance(self):
        frame = np.full((12, 12), 0.5)
        out = gaussian_filter(frame)
        assert np.allclose(out, 0.5, atol=1e-12)

    def test_max_value_unchanged(self):
        out = gaussian_filter(np.ones((9, 9)))
        assert np.allclose(out, 1.0, atol=1e-12)

    def test_impulse_reproduces_analytic_kernel(self):
        # expected kernel computed here from the Gaussian formula directly
        size, sigma = 5, 0.5
        expected = np.empty((size, size))
        for i in range(size):
            for j in range(size):
                dy, dx = i - size // 2, j - size // 2
                expected[i, j] = math.exp(-(dx * dx + dy * dy) / (2 * sigma * sigma))
        expected /= expected.sum()

        frame = np.zeros((9, 9))
        frame[4, 4] = 1.0
        out = gaussian_filter(frame, size, sigma)
        assert abs(out.sum() - 1.0) < 1e-9
        assert np.allclose(out[2:7, 2:7], expected, atol=1e-12)
        assert abs(out[4, 4] - expected[2, 2]) < 1e-12

    def test_even_size_rejected(self):
        with pytest.raises(ValueError):
            gaussian_filter(np.zeros((8, 8)), size=4)
        with pytest.raises(ValueError):
            gaussian_kernel(5, sigma=0.0)

    def test_linearity(self, rng):
        f1 = rng.random((10, 10))
        f2 = rng.random((10, 10))
        a, b = 0.3, 1.7
        lhs = gaussian_filter(a * f1 + b * f2)
        rhs = a * gaussian_filter(f1) + b * gaussian_filter(f2)
        assert np.allclose(lhs, rhs, atol=1e-9)

    def test_range_preserved(self, rng):
        frame = rng.random((16, 16))
        out = gaussian_filter(frame)
        assert out.min() >= frame.min() - 1e-12
        assert out.max() <= frame.max() + 1e-12


class TestSobelVertical:
    def test_constant_zero(self):
        assert np.allclose(sobel_vertical(np.full((8, 8), 0.3)), 0.0)

    def test_vertical_step_matches_hand_convolution(self):
        frame = np.zeros((8, 8))
        frame[:, 4:] = 1.0
        out = sobel_vertical(frame)
        expected = hand_convolve_sobel_vertical(frame)
        assert np.allclose(out, expected, atol=1e-12)
        assert out[:, 3:5].min() > 0  # maximal response along the step
        assert np.allclose(out[:, 0], 0.0)
        assert np.allclose(out[:, 7], 0.0)

    def test_horizontal_step_zero(self):
        frame = np.zeros((8, 8))
        frame[4:, :] = 1.0
        assert np.allclose(sobel_vertical(frame), 0.0)

    def test_undersized_rejected(self):
        with pytest.raises(ValueError):
            sobel_vertical(np.zeros((2, 5)))

    def test_translation_equivariance(self, rng):
        frame = rng.random((16, 16))
        shifted = np.roll(frame, 1, axis=1)
        a = sobel_vertical(frame)
        b = sobel_vertical(shifted)
        assert np.allclose(a[2:-2, 2:-3], b[2:-2, 3:-2], atol=1e-12)


class TestResize:
    def test_constant(self):
        out = resize_bilinear(np.full((80, 100), 0.7), 50, 50)
        assert out.shape == (50, 50)
        assert np.allclose(out, 0.7, atol=1e-12)

    def test_identity(self, rng):
        frame = rng.random((13, 17))
        out = resize_bilinear(frame, 17, 13)
        assert np.array_equal(out, frame)

    def test_2x2_upsample_hand_values(self):
        frame = np.array([[0.0, 1.0], [0.0, 1.0]])
        out = resize_bilinear(frame, 4, 4)
        # corner-aligned sampling puts columns at x = 0, 1/3, 2/3, 1
        expected_cols = np.array([0.0, 1 / 3, 2 / 3, 1.0])
        for row in out:
            assert np.allclose(row, expected_cols, atol=1e-12)
        assert np.all(np.diff(out, axis=1) >= 0)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros((4, 4)), 0, 4)

    def test_range_preserved(self, rng):
        frame = rng.random((20, 30))
        out = resize_bilinear(frame, 11, 7)
        assert out.min() >= frame.min() - 1e-12
        assert out.max() <= frame.max() + 1e-12


def test_grayscale_weights():
    rgb = np.zeros((2, 2, 3))
    rgb[..., 0], rgb[..., 1], rgb[..., 2] = 255, 0, 0
    assert np.allclose(to_grayscale(rgb), 0.299, atol=1e-12)
