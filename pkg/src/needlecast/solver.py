"""Online phase: boundary conditions and nearest-neighbour slant propagation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import TILT_CAP, GrayImage, NeedleMap, OrientationField
from .errors import EmptyDb, MissingBorder, NoObject, OpenContour, Starved, TooSmall
from .exemplars import DistanceConfig, ExemplarDb
from .kernels import get_backend
from .render import estimate_emax, tilt_from_intensity

log = logging.getLogger(__name__)

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(eq=False)
class BoundaryCondition:
    """Known orientations on the one-pixel band around ``mask`` (NaN elsewhere)."""

    slant: np.ndarray
    tilt: np.ndarray
    mask: np.ndarray

    @property
    def band(self) -> np.ndarray:
        return border_band(self.mask)

    @property
    def known(self) -> np.ndarray:
        return ~np.isnan(self.slant)


def border_band(mask: np.ndarray) -> np.ndarray:
    """Mask pixels with an 8-neighbour outside the mask or beyond the image edge."""
    mask = np.asarray(mask, dtype=bool)
    inner = ndimage.binary_erosion(mask, structure=_EIGHT, border_value=0)
    return mask & ~inner


def boundary_from_truth(angles: OrientationField, mask=None) -> BoundaryCondition:
    mask = np.ones(angles.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != angles.shape:
        raise ValueError("mask and angle grid differ in shape")
    band = border_band(mask)
    if not np.any(mask & ~band):
        raise MissingBorder("region has no interior pixels (needs at least 3x3)")
    if np.any(np.isnan(angles.slant[band]) | np.isnan(angles.tilt[band])):
        raise MissingBorder("orientation unknown on part of the region border")
    slant = np.where(band, angles.slant, np.nan)
    tilt = np.where(band, angles.tilt, np.nan)
    return BoundaryCondition(slant, tilt, mask)


# Moore neighbourhood in (di, dj), walked in a fixed rotational order.
_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]


def trace_contour(fg: np.ndarray):
    """Ordered outer contour of a single 8-connected blob (Moore tracing,
    Jacob's stopping criterion). Returns a list of (i, j)."""
    h, w = fg.shape
    nz = np.argwhere(fg)
    start = (int(nz[0][0]), int(nz[0][1]))
    # raster-first pixel: its (0, -1) neighbour is background
    back = 0
    p = start
    contour = [p]
    first_move = None
    for _ in range(8 * fg.size + 8):
        found = None
        for step in range(1, 9):
            d = (back + step) % 8
            ni, nj = p[0] + _MOORE[d][0], p[1] + _MOORE[d][1]
            if 0 <= ni < h and 0 <= nj < w and fg[ni, nj]:
                found = d
                break
        if found is None:  # isolated pixel
            return contour
        nxt = (p[0] + _MOORE[found][0], p[1] + _MOORE[found][1])
        prev_d = (found - 1) % 8
        # backtrack relative to the new pixel: the last background cell examined
        bi, bj = p[0] + _MOORE[prev_d][0], p[1] + _MOORE[prev_d][1]
        back = _MOORE.index((bi - nxt[0], bj - nxt[1]))
        move = (p, nxt)
        if first_move is None:
            first_move = move
        elif move == first_move:
            contour.pop()
            return contour
        p = nxt
        contour.append(p)
    raise RuntimeError("contour tracing did not terminate")


def _outward_slants(contour, support=1):
    pts = np.array(contour, dtype=np.float64)  # (i, j) = (y, x)
    n = len(pts)
    y, x = pts[:, 0], pts[:, 1]
    area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    slants = np.empty(n)
    for k in range(n):
        s = support
        while True:
            ty = y[(k + s) % n] - y[(k - s) % n]
            tx = x[(k + s) % n] - x[(k - s) % n]
            if tx != 0 or ty != 0 or s >= n // 2:
                break
            s += 1
        # counter-clockwise loop (positive area): outward is the tangent turned clockwise
        nx, ny = (ty, -tx) if area2 > 0 else (-ty, tx)
        slants[k] = math.atan2(ny, nx)
    slants[slants == -math.pi] = math.pi
    return slants


def silhouette_mask(img: GrayImage, threshold: float) -> np.ndarray:
    fg = img.intensities > threshold
    if not np.any(fg):
        raise NoObject(f"no pixel brighter than {threshold}")
    labels, count = ndimage.label(fg, structure=_EIGHT)
    if count > 1:
        sizes = ndimage.sum(fg, labels, index=np.arange(1, count + 1))
        fg = labels == (1 + int(np.argmax(sizes)))
        log.info("silhouette: kept largest of %d components (%d px)", count, int(fg.sum()))
    fg = ndimage.binary_fill_holes(fg)
    if fg[0, :].any() or fg[-1, :].any() or fg[:, 0].any() or fg[:, -1].any():
        raise OpenContour("object touches the image frame; its contour is not closed")
    return fg


def boundary_from_silhouette(img: GrayImage, threshold: float = 0.0, support: int = 2) -> BoundaryCondition:
    """Occluding-contour boundary: slant points along the outward image-plane
    normal of the silhouette, tilt just below pi/2."""
    fg = silhouette_mask(img, threshold)
    band = border_band(fg)
    if not np.any(fg & ~band):
        raise MissingBorder("object has no interior pixels")
    contour = trace_contour(fg)
    if len(contour) < 3:
        raise MissingBorder("object contour too short")
    traced = _outward_slants(contour, support)
    slant = np.full(fg.shape, np.nan)
    ci = np.array([c[0] for c in contour])
    cj = np.array([c[1] for c in contour])
    # a pixel revisited by the trace keeps its first estimate
    for k in range(len(contour) - 1, -1, -1):
        slant[ci[k], cj[k]] = traced[k]
    # band pixels touching the background only diagonally are not traced
    rest = np.argwhere(band & np.isnan(slant))
    for i, j in rest:
        k = int(np.argmin((ci - i) ** 2 + (cj - j) ** 2))
        slant[i, j] = traced[k]
    slant = np.where(band, slant, np.nan)
    tilt = np.where(band, TILT_CAP, np.nan)
    return BoundaryCondition(slant, tilt, fg)


def propagate(img: GrayImage, bc: BoundaryCondition, db: ExemplarDb,
              cfg: DistanceConfig = DistanceConfig(), e_max=1.0, backend=None) -> NeedleMap:
    """Recover the needle map inside ``bc.mask``.

    Slant comes from the nearest exemplar of each ready pixel, tilt from the
    pixel's own intensity. ``e_max=None`` estimates it as the region maximum.
    """
    g = img.intensities
    h, w = g.shape
    if h < 3 or w < 3:
        raise TooSmall(f"solver needs at least 3x3 pixels, got {w}x{h}")
    if bc.mask.shape != g.shape:
        raise ValueError("boundary condition and image differ in shape")
    if len(db) == 0:
        raise EmptyDb("exemplar database is empty")
    if e_max is None:
        e_max = estimate_emax(img, bc.mask)

    known = bc.known & bc.mask
    todo = bc.mask & ~known
    slant0 = np.where(known, bc.slant, 0.0)
    kern = get_backend(backend)
    s, dist, solved = kern.propagate(
        np.ascontiguousarray(g), slant0, known, todo, db.inputs, db.outputs, cfg.include_center
    )
    log.debug("propagate: %d pixels solved against %d exemplars", int(solved.sum()), len(db))

    nm = NeedleMap.empty(h, w)
    nm.slant[known] = bc.slant[known]
    nm.tilt[known] = bc.tilt[known]
    nm.distance[known] = 0.0
    nm.boundary[:] = known
    nm.slant[solved] = s[solved]
    nm.tilt[solved] = np.minimum(tilt_from_intensity(g[solved], e_max), TILT_CAP)
    nm.distance[solved] = dist[solved]

    left = todo & ~solved
    if np.any(left):
        raise Starved(f"{int(left.sum())} pixels never became ready", nm)
    return nm
