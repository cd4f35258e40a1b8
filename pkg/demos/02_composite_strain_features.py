"""Composite strain features (OSF) stage by stage.

Generates one synthetic micro-motion video and walks the OSF pipeline:
strain maps per frame pair, vertical-edge suppression, band clipping,
temporal pooling, resize, vectorize.  Saves the intermediate images.
"""

import os
import tempfile

import numpy as np

from optstrain import load_sequence, osf_vector
from optstrain.imaging import save_grayscale_png
from optstrain.osf import clip_by_region, composite_strain_map, suppress_vertical_edges
from optstrain.strain import strain_sequence
from optstrain.synthetic import generate_synthetic

OUT = os.path.join(os.path.dirname(__file__), "output", "02_osf")
os.makedirs(OUT, exist_ok=True)

with tempfile.TemporaryDirectory() as tmp:
    entries = generate_synthetic(tmp, n_classes=2, n_subjects=2, videos_per_subject=1,
                                 size=64, n_frames=10, seed=4)
    entry = entries[0]
    print(f"video {entry.video_id}: label {entry.label} (motion near the upper face)")
    seq = load_sequence(entry)

    maps = strain_sequence(seq)
    print(f"{len(maps)} strain maps from {len(seq)} frames")

    cleaned = []
    for strain, source in zip(maps, seq.frames[:-1]):
        no_edges = suppress_vertical_edges(strain, source)
        cleaned.append(clip_by_region(no_edges))
    removed = (maps[4].magnitude > 0).sum() - (cleaned[4].magnitude > 0).sum()
    print(f"pre-processing zeroed {removed} pixels of map 4 (edges + clipped extremes)")

    composite = composite_strain_map(cleaned)
    rows = composite.shape[0] // 3
    for name, band in [("top", composite[:rows]), ("middle", composite[rows:2 * rows]),
                       ("bottom", composite[2 * rows:])]:
        print(f"composite mean in {name} band: {band.mean():.3f}")

    fv = osf_vector(seq)
    print(f"OSF vector: length {len(fv)}, max {fv.values.max():.1f}, "
          f"nonzero {np.count_nonzero(fv.values)}")

    save_grayscale_png(seq.frames[0], os.path.join(OUT, "first_frame.png"), normalize=True)
    save_grayscale_png(maps[4].magnitude, os.path.join(OUT, "strain_raw.png"), normalize=True)
    save_grayscale_png(cleaned[4].magnitude, os.path.join(OUT, "strain_cleaned.png"), normalize=True)
    save_grayscale_png(composite, os.path.join(OUT, "composite.png"), normalize=True)
    save_grayscale_png(fv.values.reshape(50, 50), os.path.join(OUT, "osf_grid.png"), normalize=True)
    print(f"stage images written to {OUT}")
