"""Domain types and the angle / normal / gradient conversions shared by every stage.

Angle conventions:

* slant -- angle between the x axis and the projection of the normal onto the
  image plane, wrapped to (-pi, pi].
* tilt -- angle between the normal and the z axis, in [0, pi/2).

Grids are row-major numpy arrays indexed ``[i, j]`` with x along columns (j)
and y along rows (i); row 0 is y_min.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonVisibleNormal

TWO_PI = 2.0 * math.pi
TILT_CAP = math.pi / 2 - 1e-6


def wrap_angle(a: float) -> float:
    """Wrap a finite angle into (-pi, pi]."""
    if -math.pi < a <= math.pi:
        return a
    a = a % TWO_PI
    if a > math.pi:
        a -= TWO_PI
    return a


def wrap_angle_diff(a: float, b: float) -> float:
    """(a - b) wrapped into (-pi, pi]; the signed shorter arc from b to a."""
    return wrap_angle(a - b)


def wrap_angles(a: np.ndarray) -> np.ndarray:
    """Vectorised :func:`wrap_angle`; values already in range pass through untouched."""
    a = np.asarray(a, dtype=np.float64)
    out = a.copy()
    bad = ~((a > -math.pi) & (a <= math.pi))
    if np.any(bad):
        r = np.mod(a[bad], TWO_PI)
        r[r > math.pi] -= TWO_PI
        out[bad] = r
    return out


@dataclass(frozen=True)
class Orientation:
    slant: float
    tilt: float

    def __post_init__(self):
        if not (-math.pi < self.slant <= math.pi):
            raise ValueError(f"slant {self.slant!r} outside (-pi, pi]")
        if not (0.0 <= self.tilt < math.pi / 2):
            raise ValueError(f"tilt {self.tilt!r} outside [0, pi/2)")


@dataclass(frozen=True)
class Normal:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"normal is not unit length (|n| = {n!r})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class LightSource:
    direction: tuple = (0.0, 0.0, 1.0)
    k_max: float = 1.0

    def __post_init__(self):
        d = tuple(float(c) for c in self.direction)
        if len(d) != 3:
            raise ValueError("light direction must be a 3-vector")
        if abs(math.sqrt(sum(c * c for c in d)) - 1.0) > 1e-9:
            raise ValueError("light direction must be unit length")
        if not self.k_max > 0:
            raise ValueError("k_max must be positive")
        object.__setattr__(self, "direction", d)

    @classmethod
    def toward(cls, x: float, y: float, z: float, k_max: float = 1.0) -> "LightSource":
        n = math.sqrt(x * x + y * y + z * z)
        return cls((x / n, y / n, z / n), k_max)


def _grid(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D grid, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Normalised intensities in [0, 1], shape (height, width)."""

    intensities: np.ndarray

    def __post_init__(self):
        a = _grid(self.intensities, "intensities")
        if not np.all((a >= 0.0) & (a <= 1.0)):
            raise ValueError("intensities must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "intensities", a)

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @property
    def width(self) -> int:
        return self.intensities.shape[1]


@dataclass(frozen=True, eq=False)
class DepthMap:
    z: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        z = _grid(self.z, "z")
        if not np.all(np.isfinite(z)):
            raise ValueError("depth values must be finite")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def height(self) -> int:
        return self.z.shape[0]

    @property
    def width(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True, eq=False)
class OrientationField:
    """A grid of orientations, stored as two parallel arrays."""

    slant: np.ndarray
    tilt: np.ndarray

    def __post_init__(self):
        s = _grid(self.slant, "slant")
        t = _grid(self.tilt, "tilt")
        if s.shape != t.shape:
            raise ValueError("slant and tilt grids differ in shape")
        object.__setattr__(self, "slant", s)
        object.__setattr__(self, "tilt", t)

    @property
    def shape(self):
        return self.slant.shape

    def __getitem__(self, ij) -> Orientation:
        return Orientation(float(self.slant[ij]), float(self.tilt[ij]))


@dataclass(eq=False)
class NeedleMap:
    """Solver product: optional orientation per pixel plus the match distance.

    Unassigned cells hold NaN. ``boundary`` marks cells that were given as
    boundary conditions rather than solved.
    """

    slant: np.ndarray
    tilt: np.ndarray
    distance: np.ndarray
    boundary: np.ndarray = field(default=None)

    def __post_init__(self):
        self.slant = np.asarray(self.slant, dtype=np.float64)
        self.tilt = np.asarray(self.tilt, dtype=np.float64)
        self.distance = np.asarray(self.distance, dtype=np.float64)
        if self.boundary is None:
            self.boundary = np.zeros(self.slant.shape, dtype=bool)
        self.boundary = np.asarray(self.boundary, dtype=bool)
        shapes = {self.slant.shape, self.tilt.shape, self.distance.shape, self.boundary.shape}
        if len(shapes) != 1 or self.slant.ndim != 2:
            raise ValueError("needle map grids must share one 2-D shape")

    @classmethod
    def empty(cls, height: int, width: int) -> "NeedleMap":
        nan = np.full((height, width), np.nan)
        return cls(nan.copy(), nan.copy(), nan.copy(), np.zeros((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.slant.shape[0]

    @property
    def width(self) -> int:
        return self.slant.shape[1]

    @property
    def assigned(self) -> np.ndarray:
        return ~np.isnan(self.slant)

    @property
    def solved(self) -> np.ndarray:
        return self.assigned & ~self.boundary

    def orientations(self) -> OrientationField:
        return OrientationField(self.slant, self.tilt)

    def __eq__(self, other):
        if not isinstance(other, NeedleMap):
            return NotImplemented
        return (
            np.array_equal(self.slant, other.slant, equal_nan=True)
            and np.array_equal(self.tilt, other.tilt, equal_nan=True)
            and np.array_equal(self.distance, other.distance, equal_nan=True)
            and np.array_equal(self.boundary, other.boundary)
        )


def normal_from_angles(o: Orientation) -> Normal:
    st = math.sin(o.tilt)
    return Normal(st * math.cos(o.slant), st * math.sin(o.slant), math.cos(o.tilt))


def angles_from_normal(n: Normal) -> Orientation:
    if not n.z > 0:
        raise NonVisibleNormal(f"normal z-component {n.z!r} is not positive")
    slant, tilt = angles_from_normals(np.array(n.x), np.array(n.y), np.array(n.z))
    return Orientation(float(slant), float(tilt))


def normal_from_depth_gradient(zx: float, zy: float) -> Normal:
    n = math.sqrt(zx * zx + zy * zy + 1.0)
    return Normal(-zx / n, -zy / n, 1.0 / n)


def normals_from_angles(slant, tilt):
    """Array form of :func:`normal_from_angles`; returns (nx, ny, nz)."""
    st = np.sin(tilt)
    return st * np.cos(slant), st * np.sin(slant), np.cos(tilt)


def angles_from_normals(nx, ny, nz):
    """Array form of :func:`angles_from_normal`; returns (slant, tilt).

    tilt uses atan2(|n_xy|, n_z), which equals arccos(n_z) for unit normals but
    keeps full precision near the zenith. Zenith normals get slant 0.
    """
    nx = np.asarray(nx, dtype=np.float64)
    ny = np.asarray(ny, dtype=np.float64)
    nz = np.asarray(nz, dtype=np.float64)
    tilt = np.arctan2(np.hypot(nx, ny), nz)
    slant = np.arctan2(ny, nx)
    slant = np.where(slant == -math.pi, math.pi, slant)
    slant = np.where(tilt == 0.0, 0.0, slant)
    return slant, tilt


def normals_from_gradient(zx, zy):
    """Array form of :func:`normal_from_depth_gradient`."""
    zx = np.asarray(zx, dtype=np.float64)
    zy = np.asarray(zy, dtype=np.float64)
    inv = 1.0 / np.sqrt(zx * zx + zy * zy + 1.0)
    return -zx * inv, -zy * inv, inv


def angles_from_gradient(zx, zy, cap: float = TILT_CAP) -> OrientationField:
    """Orientation grid for a depth gradient field, tilt capped below pi/2."""
    slant, tilt = angles_from_normals(*normals_from_gradient(zx, zy))
    return OrientationField(slant, np.minimum(tilt, cap))
