"""Training and test depth maps: the three analytic functions plus procedural
stand-ins for the measured depth matrices (vase, bust, coin) and a hemisphere
used as a photograph analogue."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DepthMap, OrientationField, angles_from_gradient


class SurfaceId(str, Enum):
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"


def _f1(x, y):
    return -x**2 - y**2


def _f2(x, y):
    return x * np.exp(x**2 - y**2)


def _f3(x, y):
    return np.sin(x) + np.sin(y)


_FUNCTIONS = {SurfaceId.F1: _f1, SurfaceId.F2: _f2, SurfaceId.F3: _f3}

DEFAULT_DOMAINS = {
    SurfaceId.F1: (-1.0, 1.0, -1.0, 1.0),
    SurfaceId.F2: (-2.0, 2.0, -2.0, 2.0),
    SurfaceId.F3: (-6.0, 6.0, -6.0, 6.0),
}


@dataclass(frozen=True)
class AnalyticSurface:
    id: SurfaceId
    domain: tuple = None
    resolution: tuple = (64, 64)

    def __post_init__(self):
        sid = SurfaceId(self.id)
        object.__setattr__(self, "id", sid)
        dom = self.domain if self.domain is not None else DEFAULT_DOMAINS[sid]
        dom = tuple(float(v) for v in dom)
        x0, x1, y0, y1 = dom
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate domain {dom}")
        w, h = (int(v) for v in self.resolution)
        if w < 2 or h < 2:
            raise ValueError("resolution must be at least 2x2")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "resolution", (w, h))

    def function(self):
        return _FUNCTIONS[self.id]


def sample_grid(domain, resolution):
    """Coordinates (X, Y) of a uniform grid; x along columns, row 0 at y_min."""
    x0, x1, y0, y1 = domain
    w, h = resolution
    x = np.linspace(x0, x1, w)
    y = np.linspace(y0, y1, h)
    return np.meshgrid(x, y, indexing="xy")


def eval_surface(s: AnalyticSurface) -> DepthMap:
    X, Y = sample_grid(s.domain, s.resolution)
    x0, x1 = s.domain[:2]
    spacing = (x1 - x0) / (s.resolution[0] - 1)
    return DepthMap(s.function()(X, Y), spacing)


def depth_gradient(d: DepthMap):
    """(dz/dx, dz/dy): central differences inside, one-sided on the edges."""
    zy, zx = np.gradient(d.z, d.spacing, edge_order=1)
    return zx, zy


def depth_to_angles(d: DepthMap) -> OrientationField:
    zx, zy = depth_gradient(d)
    return angles_from_gradient(zx, zy)


# Procedural stand-ins for the measured depth matrices. Each takes a
# resolution (w, h) and returns a DepthMap on a square grid.

def vase(resolution=(64, 64)) -> DepthMap:
    """Surface of revolution z = sqrt(r(y)^2 - x^2) over a flat z=0 backdrop."""
    X, Y = sample_grid((-0.5, 0.5, 0.0, 1.0), resolution)
    r = 0.15 - 0.1 * Y * (6 * Y + 1) ** 2 * (Y - 1) ** 2 * (3 * Y - 2) ** 2
    z = np.sqrt(np.clip(r**2 - X**2, 0.0, None))
    return DepthMap(z, 1.0 / (resolution[0] - 1))


def _bump(X, Y, cx, cy, sx, sy, amp):
    return amp * np.exp(-(((X - cx) / sx) ** 2 + ((Y - cy) / sy) ** 2))


def bust(resolution=(64, 64)) -> DepthMap:
    """Face-like relief: ellipsoidal head with brow, nose, cheeks, eye sockets, lips, chin."""
    X, Y = sample_grid((-1.0, 1.0, -1.0, 1.0), resolution)
    head = 0.8 * np.sqrt(np.clip(1.0 - (X / 0.75) ** 2 - (Y / 0.95) ** 2, 0.0, None))
    z = head
    z = z + _bump(X, Y, 0.0, 0.35, 0.45, 0.10, 0.08)      # brow
    z = z - _bump(X, Y, -0.25, 0.22, 0.12, 0.08, 0.10)    # eye sockets
    z = z - _bump(X, Y, 0.25, 0.22, 0.12, 0.08, 0.10)
    z = z + _bump(X, Y, 0.0, 0.0, 0.07, 0.22, 0.18)       # nose
    z = z + _bump(X, Y, -0.32, -0.10, 0.15, 0.15, 0.05)   # cheeks
    z = z + _bump(X, Y, 0.32, -0.10, 0.15, 0.15, 0.05)
    z = z + _bump(X, Y, 0.0, -0.38, 0.18, 0.05, 0.05)     # lips
    z = z + _bump(X, Y, 0.0, -0.70, 0.20, 0.12, 0.06)     # chin
    z = z + 0.02 * np.sin(9 * X) * np.cos(7 * Y) * (head > 0)  # hair/skin texture
    return DepthMap(z, 2.0 / (resolution[0] - 1))


def coin(resolution=(64, 64)) -> DepthMap:
    """Low-relief disc: raised rim, embossed profile and fine concentric ridges."""
    X, Y = sample_grid((-1.0, 1.0, -1.0, 1.0), resolution)
    R = np.hypot(X, Y)
    disc = 0.5 * (1.0 - np.tanh((R - 0.9) / 0.03))
    rim = 0.06 * np.exp(-(((R - 0.85) / 0.04) ** 2))
    profile = (
        _bump(X, Y, 0.05, 0.1, 0.25, 0.35, 0.07)
        + _bump(X, Y, -0.15, 0.05, 0.06, 0.06, 0.03)
        + _bump(X, Y, 0.1, -0.35, 0.2, 0.08, 0.03)
    )
    ridges = 0.008 * np.cos(40 * R) * (R < 0.75)
    z = 0.1 * disc + disc * (rim + profile + ridges)
    return DepthMap(z, 2.0 / (resolution[0] - 1))


def hemisphere(resolution=(64, 64), radius=0.8) -> DepthMap:
    X, Y = sample_grid((-1.0, 1.0, -1.0, 1.0), resolution)
    z = np.sqrt(np.clip(radius**2 - X**2 - Y**2, 0.0, None))
    return DepthMap(z, 2.0 / (resolution[0] - 1))


NAMED_SURFACES = {
    "silt": vase,
    "vase": vase,
    "mozart": bust,
    "penny": coin,
    "sphere": hemisphere,
}


def surface_names():
    return [s.value for s in SurfaceId] + sorted(NAMED_SURFACES)


def make_surface(name: str, resolution=(64, 64), domain=None) -> DepthMap:
    """Depth map for any registered name (analytic ids take an optional domain)."""
    key = name.lower()
    try:
        sid = SurfaceId(key)
    except ValueError:
        if key not in NAMED_SURFACES:
            raise KeyError(f"unknown surface {name!r}; choose from {surface_names()}") from None
        if domain is not None:
            raise ValueError(f"surface {name!r} has a fixed domain")
        return NAMED_SURFACES[key](tuple(resolution))
    return eval_surface(AnalyticSurface(sid, domain, tuple(resolution)))


def object_mask(d: DepthMap) -> np.ndarray:
    """Pixels belonging to an object standing on a z=0 backdrop."""
    return d.z > 0
