"""Lambertian rendering under parallel projection, and tilt recovery from intensity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GrayImage, LightSource, Normal, DepthMap, normals_from_angles
from .errors import AllDark, InvalidMax
from .surfaces import depth_to_angles


@dataclass(frozen=True)
class RenderConfig:
    light: LightSource = field(default_factory=LightSource)
    clamp_negative: bool = True


def shade(n: Normal, c: RenderConfig = RenderConfig()) -> float:
    """Stored intensity E/K = cos(angle between N and S), clipped at 0 for attached shadow."""
    sx, sy, sz = c.light.direction
    cos_a = n.x * sx + n.y * sy + n.z * sz
    return max(0.0, cos_a) if c.clamp_negative else cos_a


def render(d: DepthMap, c: RenderConfig = RenderConfig(), mask=None) -> GrayImage:
    """Render a depth map. Pixels outside ``mask`` (if given) are black background."""
    o = depth_to_angles(d)
    nx, ny, nz = normals_from_angles(o.slant, o.tilt)
    sx, sy, sz = c.light.direction
    e = nx * sx + ny * sy + nz * sz
    if c.clamp_negative:
        e = np.maximum(e, 0.0)
    e = np.minimum(e, 1.0)
    if mask is not None:
        e = np.where(mask, e, 0.0)
    return GrayImage(e)


def tilt_from_intensity(e, e_max):
    """arccos(clip(E / E_max, 0, 1)); works elementwise on arrays."""
    if not np.all(np.asarray(e_max) > 0):
        raise InvalidMax(f"E_max must be positive, got {e_max!r}")
    r = np.clip(np.asarray(e, dtype=np.float64) / e_max, 0.0, 1.0)
    t = np.arccos(r)
    return float(t) if t.ndim == 0 else t


def estimate_emax(img: GrayImage, mask=None) -> float:
    vals = img.intensities if mask is None else img.intensities[np.asarray(mask, dtype=bool)]
    if vals.size == 0:
        raise ValueError("empty image or mask")
    m = float(vals.max())
    if m <= 0.0:
        raise AllDark("maximum intensity is zero")
    return m


def quantize(img: GrayImage, maxval: int = 255) -> GrayImage:
    """Round-half-up quantisation, as an 8-bit (or deeper) camera would store it."""
    return GrayImage(np.floor(img.intensities * maxval + 0.5) / maxval)


FRONTAL = RenderConfig()
