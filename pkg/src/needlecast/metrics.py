"""Evaluation: average match distance, slant error, gauge-free depth RMSE."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .core import DepthMap, NeedleMap, OrientationField, wrap_angles
from .errors import DimensionMismatch, NoSolvedPixels


@dataclass(frozen=True)
class EvalReport:
    avg_match_distance: float
    avg_match_distance_rad: float
    pixels_evaluated: int
    mean_abs_slant_error: Optional[float] = None
    depth_rmse_aligned: Optional[float] = None

    @classmethod
    def build(cls, nm: NeedleMap, truth: Optional[OrientationField] = None,
              depth: Optional[DepthMap] = None, truth_depth: Optional[DepthMap] = None) -> "EvalReport":
        avg = avg_min_distance(nm)
        return cls(
            avg_match_distance=avg,
            avg_match_distance_rad=avg * math.pi,
            pixels_evaluated=int(nm.solved.sum()),
            mean_abs_slant_error=None if truth is None else slant_error(nm, truth),
            depth_rmse_aligned=(None if depth is None or truth_depth is None
                                else depth_rmse_aligned(depth, truth_depth)),
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name}={'na' if v is None else repr(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EvalReport":
        kv = {}
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            kv[k.strip()] = v.strip()
        known = {f.name for f in fields(cls)}
        unknown = set(kv) - known
        if unknown:
            raise ValueError(f"unknown report keys {sorted(unknown)}")

        def num(k, typ=float):
            v = kv.get(k, "na")
            return None if v == "na" else typ(v)

        return cls(num("avg_match_distance"), num("avg_match_distance_rad"),
                   num("pixels_evaluated", int), num("mean_abs_slant_error"),
                   num("depth_rmse_aligned"))


def avg_min_distance(nm: NeedleMap) -> float:
    """Mean match distance over solver-assigned pixels (boundary excluded)."""
    d = nm.distance[nm.solved]
    if d.size == 0:
        raise NoSolvedPixels("needle map has no solver-assigned pixels")
    return float(np.mean(d))


def slant_error(nm: NeedleMap, truth: OrientationField) -> float:
    if nm.slant.shape != truth.shape:
        raise DimensionMismatch(f"needle map {nm.slant.shape} vs truth {truth.shape}")
    sel = nm.solved
    if not np.any(sel):
        raise NoSolvedPixels("needle map has no solver-assigned pixels")
    diff = wrap_angles(nm.slant[sel] - truth.slant[sel])
    return float(np.mean(np.abs(diff)))


def depth_rmse_aligned(z: DepthMap, truth: DepthMap) -> float:
    """RMSE after removing the mean offset (the integration constant)."""
    a, b = np.asarray(z.z), np.asarray(truth.z)
    if a.shape != b.shape:
        raise DimensionMismatch(f"depth {a.shape} vs truth {b.shape}")
    diff = a - b
    diff = diff - diff.mean()
    return float(np.sqrt(np.mean(diff * diff)))


def depth_range(d: DepthMap) -> float:
    return float(np.ptp(d.z))
