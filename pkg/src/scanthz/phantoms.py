"""Synthetic complex-valued phantoms: geometric shapes followed by a Gaussian low-pass."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve1d

from .acquisition import make_rng
from .errors import InvalidSpec

SHAPE_KINDS = ("rect", "disk", "cross", "ring")
DEFAULT_BLUR = 1.5
RING_INNER = 0.6  # inner radius as a fraction of the outer radius
CROSS_THICKNESS = 0.25  # bar thickness as a fraction of the bar length


@dataclass(frozen=True)
class Shape:
    """One filled shape; positions and sizes are fractions of the image size.

    ``extent`` is the height of a rect, the diameter of a disk or ring, and
    the bar length of a cross. ``aspect`` widens rects only.
    """

    kind: str
    center: tuple
    extent: float
    amplitude: complex = 1.0
    aspect: float = 1.0

    def validate(self):
        if self.kind not in SHAPE_KINDS:
            raise InvalidSpec(f"unknown shape kind {self.kind!r}; valid kinds: {', '.join(SHAPE_KINDS)}")
        if len(self.center) != 2 or not all(0.0 < c < 1.0 for c in self.center):
            raise InvalidSpec(f"shape center {self.center} must lie in (0, 1)^2")
        if not 0.0 < self.extent < 1.0:
            raise InvalidSpec(f"shape extent {self.extent} must lie in (0, 1)")
        if not 0.0 < self.extent * self.aspect <= 1.0:
            raise InvalidSpec(f"rect width extent*aspect = {self.extent * self.aspect} must lie in (0, 1]")


@dataclass(frozen=True)
class PhantomSpec:
    name: str
    size: int
    shapes: tuple = field(default_factory=tuple)
    blur_sigma: float = DEFAULT_BLUR

    def validate(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 8:
            raise InvalidSpec(f"phantom size must be an integer >= 8, got {self.size}")
        if self.blur_sigma < 0 or not math.isfinite(self.blur_sigma):
            raise InvalidSpec(f"blur_sigma must be finite and >= 0, got {self.blur_sigma}")
        for s in self.shapes:
            s.validate()


def _unit(phase):
    return cmath.exp(1j * phase)


_BUILTINS = {
    "s0": (Shape("rect", (0.5, 0.5), 0.25, _unit(0.7), aspect=1.6),),
    "s1": (
        Shape("disk", (0.32, 0.35), 0.28, _unit(1.2)),
        Shape("rect", (0.7, 0.65), 0.2, _unit(-0.5), aspect=1.5),
    ),
    "s2": (
        Shape("cross", (0.3, 0.68), 0.3, _unit(2.0)),
        Shape("ring", (0.66, 0.34), 0.38, _unit(-1.1)),
    ),
}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_spec(name: str, size: int = 64, blur_sigma: float = DEFAULT_BLUR) -> PhantomSpec:
    """The parametric stand-ins ``s0`` (rect), ``s1`` (disk + rect) and ``s2`` (cross + ring)."""
    if name not in _BUILTINS:
        raise InvalidSpec(f"unknown phantom {name!r}; valid names: {', '.join(BUILTIN_NAMES)}")
    return PhantomSpec(name, size, _BUILTINS[name], blur_sigma)


def random_spec(size: int, seed: int, n_shapes: int = 3, blur_sigma: float = DEFAULT_BLUR) -> PhantomSpec:
    """A ``custom`` spec with randomly placed shapes of unit magnitude."""
    rng = make_rng(seed)
    shapes = []
    for _ in range(n_shapes):
        kind = SHAPE_KINDS[int(rng.integers(len(SHAPE_KINDS)))]
        center = tuple(float(v) for v in rng.uniform(0.2, 0.8, size=2))
        extent = float(rng.uniform(0.1, 0.35))
        shapes.append(Shape(kind, center, extent, _unit(float(rng.uniform(-math.pi, math.pi)))))
    return PhantomSpec("custom", size, tuple(shapes), blur_sigma)


def shape_mask(shape: Shape, n: int) -> np.ndarray:
    """Boolean mask of pixels whose centres fall inside ``shape``."""
    coords = np.arange(n) + 0.5
    dy = coords[:, None] - shape.center[0] * n
    dx = coords[None, :] - shape.center[1] * n
    size = shape.extent * n
    if shape.kind == "rect":
        return (np.abs(dy) <= size / 2) & (np.abs(dx) <= size * shape.aspect / 2)
    if shape.kind == "disk":
        return dy**2 + dx**2 <= (size / 2) ** 2
    if shape.kind == "ring":
        r2 = dy**2 + dx**2
        return (r2 <= (size / 2) ** 2) & (r2 >= (RING_INNER * size / 2) ** 2)
    half_t = CROSS_THICKNESS * size / 2
    return ((np.abs(dy) <= size / 2) & (np.abs(dx) <= half_t)) | ((np.abs(dx) <= size / 2) & (np.abs(dy) <= half_t))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Unit-sum Gaussian taps truncated at radius ``ceil(3 sigma)``."""
    if sigma <= 0:
        return np.ones(1)
    radius = math.ceil(3 * sigma)
    t = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable truncated-Gaussian low-pass with zero padding, applied to re and im."""
    if sigma <= 0:
        return img.copy()
    k = gaussian_kernel(sigma)

    def _filter(a):
        a = convolve1d(a, k, axis=0, mode="constant", cval=0.0)
        return convolve1d(a, k, axis=1, mode="constant", cval=0.0)

    return _filter(img.real) + 1j * _filter(img.imag)


def rasterize(spec: PhantomSpec) -> np.ndarray:
    n = spec.size
    canvas = np.zeros((n, n), dtype=np.complex128)
    for shape in spec.shapes:
        canvas[shape_mask(shape, n)] = shape.amplitude
    return canvas


def gen_phantom(spec: PhantomSpec, seed: int = 0) -> np.ndarray:
    """Rasterize the shapes (later ones on top) and low-pass filter.

    The output is a deterministic function of ``spec``; ``seed`` is accepted
    for interface symmetry with randomized specs built by :func:`random_spec`.
    """
    spec.validate()
    return blur(rasterize(spec), spec.blur_sigma)
