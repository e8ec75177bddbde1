"""Sensing-matrix generation and scan-based acquisition.

Every generator draws from ``numpy.random.Generator(Philox(seed))`` so results
depend only on the explicit seed, never on global RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_image, frobenius_norm_sq
from .errors import DimensionMismatch, InvalidDims, InvalidK, ZeroSignal

KINDS = ("gaussian", "bernoulli", "custom")


def make_rng(seed) -> np.random.Generator:
    """The library's one RNG: counter-based Philox keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """An ``m x n`` mask matrix; each row is one mask pattern.

    ``kind`` is ``"gaussian"``, ``"bernoulli"`` (with ``k`` ones per column) or
    ``"custom"`` for hand-built matrices.
    """

    data: np.ndarray
    kind: str = "custom"
    k: int | None = None

    def __post_init__(self):
        data = as_image(self.data, "sensing matrix")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if self.kind not in KINDS:
            raise ValueError(f"unknown sensing kind {self.kind!r}")
        if self.kind == "bernoulli":
            if self.k is None:
                raise InvalidK("bernoulli sensing matrix needs k")
            if not np.all((data == 0) | (data == 1)):
                raise InvalidK("bernoulli entries must be 0 or 1")
            if np.any(data.real.sum(axis=0) != self.k):
                raise InvalidK(f"every column must hold exactly {self.k} ones")

    @property
    def m(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def _check_dims(m, n):
    if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))) or not 1 <= m <= n:
        raise InvalidDims(f"need 1 <= m <= n, got m={m}, n={n}")


def gen_gaussian_complex(m: int, n: int, seed: int) -> SensingMatrix:
    """Entries with i.i.d. standard-normal real and imaginary parts (no 1/sqrt(2))."""
    _check_dims(m, n)
    rng = make_rng(seed)
    re = rng.standard_normal((m, n))
    im = rng.standard_normal((m, n))
    return SensingMatrix(re + 1j * im, "gaussian")


def gen_bernoulli_k(m: int, n: int, k: int, seed: int) -> SensingMatrix:
    """0/1 matrix with exactly ``k`` ones per column at uniform random rows."""
    _check_dims(m, n)
    if not 1 <= k <= m:
        raise InvalidK(f"need 1 <= k <= m={m}, got k={k}")
    rng = make_rng(seed)
    data = np.zeros((m, n), dtype=np.complex128)
    rows = np.arange(m)
    for col in range(n):
        # partial Fisher-Yates: the first k slots end up a uniform k-subset
        for i in range(k):
            j = int(rng.integers(i, m))
            rows[i], rows[j] = rows[j], rows[i]
        data[rows[:k], col] = 1.0
    return SensingMatrix(data, "bernoulli", k)


def _phi_array(phi):
    return phi.data if isinstance(phi, SensingMatrix) else as_image(phi, "phi")


def acquire_scan(phi, x) -> np.ndarray:
    """Column-by-column measurements ``Y = Phi X`` (shape ``m x cols``)."""
    p = _phi_array(phi)
    x = as_image(x)
    if p.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"phi has {p.shape[1]} columns but image has {x.shape[0]} rows")
    return p @ x


def kron_identity(phi, cols: int) -> np.ndarray:
    """The flattened-architecture operator ``I_cols (x) Phi``."""
    return np.kron(np.eye(cols), _phi_array(phi))


def acquire_kronecker(phi, x) -> np.ndarray:
    """``(I_cols (x) Phi) vec(X)`` with ``vec`` stacking columns.

    The block-diagonal operator acts on each column separately, so this is the
    column-stacked scan product; it is never formed explicitly.
    """
    p = _phi_array(phi)
    x = as_image(x)
    if p.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"phi has {p.shape[1]} columns but image has {x.shape[0]} rows")
    return vec(p @ x)


def vec(x) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def compression_ratio_scan(n: int, m: int) -> float:
    _check_dims(m, n)
    return (n - m) / n


def compression_ratio_flat(n: int, s: int) -> float:
    """Compression ratio of the flattened N^2-pixel architecture, ``(N^2 - S)/N^2``."""
    if not 1 <= s <= n * n:
        raise InvalidDims(f"need 1 <= S <= N^2, got S={s}")
    return (n * n - s) / (n * n)


def m_for_cr(n: int, cr: float) -> int:
    """Measurements per column for a target compression ratio (half rounds away from zero)."""
    if not 0.0 <= cr < 1.0:
        raise InvalidDims(f"compression ratio must lie in [0, 1), got {cr}")
    target = round(n * (1.0 - cr), 9)
    return int(min(max(math.floor(target + 0.5), 1), n))


def add_awgn(y, snr_db: float, seed: int) -> np.ndarray:
    """Add circular complex Gaussian noise at the requested SNR (dB).

    ``snr_db=math.inf`` returns an unchanged copy.
    """
    y = as_image(y, "measurements")
    energy = frobenius_norm_sq(y)
    if energy == 0.0:
        raise ZeroSignal("cannot scale noise to an all-zero signal")
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    var = energy / y.size / 10.0 ** (snr_db / 10.0)
    rng = make_rng(seed)
    noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    return y + math.sqrt(var / 2.0) * noise
