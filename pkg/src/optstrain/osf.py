"""Composite strain-map features of a whole video.

Per frame pair the strain map is pre-processed in two steps: pixels on
strong vertical image edges are zeroed (edges contribute irrelevant local
maxima, not tissue deformation), then magnitudes outside a band-local
threshold interval are clipped to zero.  The per-pair maps are averaged
over time, max-normalized, resized to a fixed square grid and vectorized.
The defaults produce a 50 x 50 = 2500-dimension vector in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluate import FeatureVector
from .imaging import FrameSequence, gaussian_filter, resize_bilinear, sobel_vertical
from .strain import StrainMap, strain_sequence

DEFAULT_RHO = 0.05
DEFAULT_EDGE_QUANTILE = 0.9
DEFAULT_OSF_SIZE = 50


@dataclass(frozen=True)
class ClipThresholds:
    """Band-local clipping interval derived from observed magnitude extrema.

    t_lower = eps_min + rho_lower * (eps_max - eps_min)
    t_upper = eps_max - rho_upper * (eps_max - eps_min)
    """

    t_lower: float
    t_upper: float
    rho_lower: float
    rho_upper: float
    eps_min: float
    eps_max: float

    @classmethod
    def from_magnitudes(cls, magnitudes: np.ndarray, rho_lower: float, rho_upper: float):
        eps_min = float(np.min(magnitudes))
        eps_max = float(np.max(magnitudes))
        span = eps_max - eps_min
        return cls(
            t_lower=eps_min + rho_lower * span,
            t_upper=eps_max - rho_upper * span,
            rho_lower=rho_lower,
            rho_upper=rho_upper,
            eps_min=eps_min,
            eps_max=eps_max,
        )


def suppress_vertical_edges(
    strain: StrainMap, source: np.ndarray, edge_quantile: float = DEFAULT_EDGE_QUANTILE
) -> StrainMap:
    """Zero strain at pixels lying on strong vertical edges of the source frame.

    The threshold is the given quantile of the nonzero vertical-Sobel
    responses of `source`; pixels at or above it are zeroed.  A source with
    no edge response leaves the strain untouched.
    """
    if not 0.0 < edge_quantile < 1.0:
        raise ValueError(f"edge_quantile must be in (0, 1), got {edge_quantile}")
    source = np.asarray(source, dtype=np.float64)
    if source.shape != strain.magnitude.shape:
        raise ValueError(
            f"source shape {source.shape} does not match strain "
            f"{strain.magnitude.shape}"
        )
    response = sobel_vertical(source)
    nonzero = response[response > 0.0]
    if nonzero.size == 0:
        return strain.masked(np.ones_like(response, dtype=bool))
    threshold = np.quantile(nonzero, edge_quantile)
    return strain.masked(response < threshold)


def band_slices(height: int) -> list[slice]:
    """Three horizontal bands of equal height; remainder rows join the last."""
    if height < 3:
        raise ValueError(f"need at least 3 rows to form bands, got {height}")
    third = height // 3
    return [slice(0, third), slice(third, 2 * third), slice(2 * third, height)]


def clip_by_region(
    strain: StrainMap, rho_l: float = DEFAULT_RHO, rho_u: float = DEFAULT_RHO
) -> StrainMap:
    """Clip magnitudes to zero outside each horizontal band's threshold interval.

    The map is split into three horizontal bands (top, middle, bottom) and
    each band is clipped against thresholds computed from its own extrema,
    which stops one dominant region from drowning out the others.  Values
    inside [t_lower, t_upper] are kept as-is.
    """
    keep = np.zeros_like(strain.magnitude, dtype=bool)
    for band in band_slices(strain.height):
        mag = strain.magnitude[band]
        thresholds = ClipThresholds.from_magnitudes(mag, rho_l, rho_u)
        keep[band] = (mag >= thresholds.t_lower) & (mag <= thresholds.t_upper)
    return strain.masked(keep)


def preprocess_strain_maps(
    maps: list[StrainMap],
    sources: list[np.ndarray],
    edge_quantile: float = DEFAULT_EDGE_QUANTILE,
    rho_l: float = DEFAULT_RHO,
    rho_u: float = DEFAULT_RHO,
) -> list[StrainMap]:
    """Edge suppression followed by band clipping, per strain map.

    `sources[j]` is the first frame of the pair that produced `maps[j]`.
    """
    out = []
    for strain, source in zip(maps, sources):
        cleaned = suppress_vertical_edges(strain, source, edge_quantile)
        out.append(clip_by_region(cleaned, rho_l, rho_u))
    return out


def composite_strain_map(maps: list[StrainMap]) -> np.ndarray:
    """Temporal mean of strain magnitudes, max-normalized.

    An all-zero mean map is returned as-is rather than divided by zero.
    """
    if not maps:
        raise ValueError("need at least one strain map")
    mean = np.mean([m.magnitude for m in maps], axis=0)
    peak = mean.max()
    return mean / peak if peak > 0 else mean


def osf_vector(
    seq: FrameSequence,
    window: int = 5,
    edge_quantile: float = DEFAULT_EDGE_QUANTILE,
    rho_l: float = DEFAULT_RHO,
    rho_u: float = DEFAULT_RHO,
    out_size: int = DEFAULT_OSF_SIZE,
    smooth: bool = False,
    smooth_size: int = 5,
    smooth_sigma: float = 0.5,
) -> FeatureVector:
    """Full composite strain feature vector of one video.

    Pipeline: per-pair strain maps -> vertical-edge suppression -> band
    clipping -> temporal mean -> max-normalize -> bilinear resize to
    out_size x out_size -> renormalize so the peak is exactly 1 -> row-major
    vectorize.  Values lie in [0, 1]; the output length is out_size**2.

    When `smooth` is set the frames are Gaussian filtered before flow
    estimation.
    """
    frames = seq.frames
    if smooth:
        frames = [gaussian_filter(f, smooth_size, smooth_sigma) for f in frames]
        seq = FrameSequence(seq.video_id, seq.subject_id, seq.label, frames, seq.fps)

    maps = strain_sequence(seq, window=window)
    cleaned = preprocess_strain_maps(maps, frames[:-1], edge_quantile, rho_l, rho_u)
    composite = composite_strain_map(cleaned)
    resized = resize_bilinear(composite, out_size, out_size)
    peak = resized.max()
    if peak > 0:
        resized = resized / peak
    return FeatureVector(
        values=resized.ravel().copy(),
        video_id=seq.video_id,
        subject_id=seq.subject_id,
        label=seq.label,
    )
