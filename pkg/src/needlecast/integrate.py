"""Horn-Brooks depth recovery from a needle map (Jacobi sweeps)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import DepthMap, NeedleMap, Orientation
from .errors import NotConverged, TooSmall
from .kernels import get_backend
from .kernels._numpy import converged as _converged

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    delta: float = 1.0
    g: float = 1.0
    tol: float = 1e-6
    max_iter: Optional[int] = None  # None: 50 * max(W, H)**2
    boundary_z: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.delta > 0 and self.g > 0 and self.tol > 0):
            raise ValueError("delta, g and tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


class Integration(NamedTuple):
    depth: DepthMap
    iterations: int
    residual: float
    history: np.ndarray


def pq_from_angles(o: Orientation):
    """(sin t cos s / cos t, sin t sin s / cos t) = tan(t) (cos s, sin s)."""
    t = math.tan(o.tilt)
    return t * math.cos(o.slant), t * math.sin(o.slant)


def pq_field(nm: NeedleMap):
    """Depth gradient (dz/dx, dz/dy) implied by the needle map.

    The (p, q) pair above is (N_x/N_z, N_y/N_z), which is minus the gradient of
    a height field with normal (-z_x, -z_y, 1); hence the negation. Unassigned
    pixels contribute a zero gradient.
    """
    t = np.tan(nm.tilt)
    zx = -t * np.cos(nm.slant)
    zy = -t * np.sin(nm.slant)
    zx = np.where(np.isnan(zx), 0.0, zx)
    zy = np.where(np.isnan(zy), 0.0, zy)
    return zx, zy


def integrate_gradient(zx, zy, cfg: IntegratorConfig, backend=None) -> Integration:
    zx = np.ascontiguousarray(zx, dtype=np.float64)
    zy = np.ascontiguousarray(zy, dtype=np.float64)
    h, w = zx.shape
    if h < 3 or w < 3:
        raise TooSmall("integration needs at least 3x3 pixels")
    max_iter = cfg.max_iter if cfg.max_iter is not None else 50 * max(h, w) ** 2
    z0 = np.zeros((h, w))
    dirichlet = cfg.boundary_z is not None
    if dirichlet:
        bz = np.broadcast_to(np.asarray(cfg.boundary_z, dtype=np.float64), (h, w))
        z0[0, :], z0[-1, :] = bz[0, :], bz[-1, :]
        z0[:, 0], z0[:, -1] = bz[:, 0], bz[:, -1]
    z, it, res, hist = get_backend(backend).jacobi(
        z0, zx, zy, float(cfg.delta), float(cfg.g), dirichlet, float(cfg.tol), int(max_iter)
    )
    if log.isEnabledFor(logging.DEBUG):
        for k, r in enumerate(hist, 1):
            log.debug("jacobi iter %d residual %.6e", k, r)
    out = Integration(DepthMap(z, cfg.delta), int(it), float(res), hist)
    if it >= max_iter and not (res == 0.0 or (len(hist) and _converged(res, hist, it, cfg.tol))):
        raise NotConverged(f"residual {res:.3e} above tol {cfg.tol:.1e} after {it} iterations", out)
    return out


def integrate(nm: NeedleMap, cfg: IntegratorConfig = IntegratorConfig(), backend=None) -> Integration:
    zx, zy = pq_field(nm)
    return integrate_gradient(zx, zy, cfg, backend)
