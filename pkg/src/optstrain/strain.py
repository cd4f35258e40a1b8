"""Lagrangian strain tensor and strain magnitude of a dense flow field.

With a fixed unit time step, displacement and flow coincide numerically, so
the strain components are spatial derivatives of the flow planes:

    exx = dp/dx        exy = eyx = 0.5 * (dp/dy + dq/dx)
    eyy = dq/dy        magnitude = sqrt(exx^2 + eyy^2 + exy^2 + eyx^2)

Derivatives use unit-spaced central differences in the interior and
one-sided differences on the borders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import FlowField, estimate_flow
from .imaging import FrameSequence, gradient, save_grayscale_png


@dataclass
class StrainMap:
    """Per-pixel strain tensor components and magnitude (all dimensionless)."""

    exx: np.ndarray
    eyy: np.ndarray
    exy: np.ndarray
    eyx: np.ndarray
    magnitude: np.ndarray

    @property
    def height(self) -> int:
        return self.magnitude.shape[0]

    @property
    def width(self) -> int:
        return self.magnitude.shape[1]

    def masked(self, keep: np.ndarray) -> "StrainMap":
        """Return a copy with all grids zeroed where `keep` is False."""
        keep = keep.astype(np.float64)
        return StrainMap(
            exx=self.exx * keep,
            eyy=self.eyy * keep,
            exy=self.exy * keep,
            eyx=self.eyx * keep,
            magnitude=self.magnitude * keep,
        )


def compute_strain(flow: FlowField) -> StrainMap:
    """Build the strain map of one flow field."""
    dpdx = gradient(flow.p, axis=1)
    dpdy = gradient(flow.p, axis=0)
    dqdx = gradient(flow.q, axis=1)
    dqdy = gradient(flow.q, axis=0)

    exx = dpdx
    eyy = dqdy
    shear = 0.5 * (dpdy + dqdx)
    magnitude = np.sqrt(exx * exx + eyy * eyy + 2.0 * shear * shear)
    return StrainMap(exx=exx, eyy=eyy, exy=shear, eyx=shear.copy(), magnitude=magnitude)


def strain_sequence(seq: FrameSequence, window: int = 5) -> list[StrainMap]:
    """Strain maps for every consecutive frame pair of a sequence.

    Returns exactly len(seq) - 1 maps; map j comes from frames (j, j+1).
    """
    maps = []
    for f1, f2 in zip(seq.frames[:-1], seq.frames[1:]):
        maps.append(compute_strain(estimate_flow(f1, f2, window=window)))
    return maps


def save_strain_png(strain: StrainMap, path) -> None:
    """Dump a strain magnitude grid as a max-normalized 8-bit grayscale PNG."""
    save_grayscale_png(strain.magnitude, path, normalize=True)
