"""Finite point samples with window and provenance."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PointConfiguration:
    """Points of one replica; complex for planar models, real for the lattice.

    Every point lies strictly inside ``window_radius`` (``inf`` means the sample
    is not windowed). ``metadata`` holds sampler diagnostics such as the number
    of roots dropped on the window boundary.
    """

    points: np.ndarray
    window_radius: float
    model_tag: str
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points)
        if self.points.size and np.any(np.abs(self.points) >= self.window_radius):
            raise ValueError("points must lie inside the window")

    def __len__(self):
        return int(self.points.size)

    def count_in_disk(self, radius):
        return int(np.count_nonzero(np.abs(self.points) < radius))

    def to_csv(self):
        """CSV text with columns re, im (CRLF line endings, shortest round-trip floats)."""
        z = self.points.astype(complex)
        rows = ["re,im"] + [f"{repr(float(p.real))},{repr(float(p.imag))}" for p in z]
        return "\r\n".join(rows) + "\r\n"
