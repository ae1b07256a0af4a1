"""Single-channel intensity planes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class LumaFrame:
    """A luma plane with its bit depth.

    ``samples`` is stored as a 2-D float64 array of shape ``(height, width)``.
    """

    samples: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ValueError("luma samples must be a 2-D array")
        if self.bit_depth not in (8, 10, 16):
            raise ValueError(f"unsupported bit depth {self.bit_depth}")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def peak(self) -> float:
        return float(2 ** self.bit_depth - 1)


def as_array(frame) -> np.ndarray:
    if isinstance(frame, LumaFrame):
        return frame.samples
    return np.asarray(frame, dtype=np.float64)


def peak_of(frame, bit_depth=None) -> float:
    if bit_depth is None:
        bit_depth = frame.bit_depth if isinstance(frame, LumaFrame) else 8
    return float(2 ** bit_depth - 1)
