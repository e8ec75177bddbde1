"""Shared domain types: complex images, block partitions and SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidBlockSize, ZeroReference

#: SNR value reported for an exact reconstruction (zero error norm).
EXACT = math.inf


def as_image(x, name="image"):
    """Return ``x`` as a finite 2-D complex128 array, raising on bad input."""
    arr = np.asarray(x)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def frobenius_norm_sq(x) -> float:
    x = np.asarray(x)
    return float(np.sum(x.real**2 + x.imag**2))


def snr_db(truth, estimate) -> float:
    """Reconstruction SNR in dB, ``10 log10(||X||_F^2 / ||X_hat - X||_F^2)``.

    Returns :data:`EXACT` (``math.inf``) when the error norm is exactly zero.
    """
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    if truth.shape != estimate.shape:
        raise DimensionMismatch(f"truth {truth.shape} vs estimate {estimate.shape}")
    ref = frobenius_norm_sq(truth)
    if ref == 0.0:
        raise ZeroReference("reference image has zero energy")
    err = frobenius_norm_sq(estimate - truth)
    if err == 0.0:
        return EXACT
    return 10.0 * math.log10(ref / err)


@dataclass(frozen=True)
class Block:
    offset: int
    size: int

    @property
    def stop(self):
        return self.offset + self.size

    @property
    def slice(self):
        return slice(self.offset, self.offset + self.size)


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous, non-overlapping blocks covering ``[0, total)``."""

    blocks: tuple

    def __post_init__(self):
        pos = 0
        for b in self.blocks:
            if b.offset != pos or b.size < 1:
                raise InvalidBlockSize(f"block {b} breaks contiguity at row {pos}")
            pos += b.size
        if pos == 0:
            raise InvalidBlockSize("partition is empty")

    @property
    def total(self):
        return self.blocks[-1].stop

    @property
    def sizes(self):
        return np.array([b.size for b in self.blocks], dtype=np.int64)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def rows(self, indices):
        """Concatenated row indices of the given blocks, in the given order."""
        if len(indices) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([np.arange(self.blocks[i].offset, self.blocks[i].stop) for i in indices])


def make_partition(n: int, block_size: int) -> BlockPartition:
    """Uniform partition of ``n`` rows; a short final block absorbs any remainder."""
    if not 1 <= block_size <= n:
        raise InvalidBlockSize(f"block_size must lie in [1, {n}], got {block_size}")
    return BlockPartition(tuple(Block(o, min(block_size, n - o)) for o in range(0, n, block_size)))
