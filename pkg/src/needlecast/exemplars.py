"""Offline phase: exemplar extraction, the normalised neighbourhood distance,
and exact nearest-neighbour lookup.

Stencil for pixel (i, j): its own gray level plus the gray level and slant of
(i, j+1), (i+1, j), (i+1, j+1) -- always in that order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import GrayImage, OrientationField, wrap_angle_diff
from .errors import EmptyDb, MixedMode, TooSmall
from .kernels import get_backend


class SamplingMode(str, Enum):
    OVERLAPPING = "overlapping"
    DISJOINT = "disjoint"


@dataclass(frozen=True)
class DistanceConfig:
    include_center: bool = True


@dataclass(frozen=True)
class Probe:
    g_center: float
    g_nbr: tuple
    s_nbr: tuple

    def as_array(self) -> np.ndarray:
        return np.array([self.g_center, *self.g_nbr, *self.s_nbr], dtype=np.float64)


@dataclass(frozen=True)
class Exemplar:
    g_center: float
    g_nbr: tuple
    s_nbr: tuple
    s_out: float

    @property
    def probe(self) -> Probe:
        return Probe(self.g_center, self.g_nbr, self.s_nbr)

    @classmethod
    def from_row(cls, inputs, output) -> "Exemplar":
        v = [float(x) for x in inputs]
        return cls(v[0], tuple(v[1:4]), tuple(v[4:7]), float(output))


def stencil_inputs(gray: np.ndarray, slant: np.ndarray, i, j) -> np.ndarray:
    """Input rows (n, 7) for stencil origins (i, j)."""
    return np.column_stack((
        gray[i, j], gray[i, j + 1], gray[i + 1, j], gray[i + 1, j + 1],
        slant[i, j + 1], slant[i + 1, j], slant[i + 1, j + 1],
    ))


def extract_arrays(img: GrayImage, angles: OrientationField, mode=SamplingMode.OVERLAPPING):
    """Exemplar table as arrays: inputs (n, 7) and outputs (n,)."""
    g = img.intensities
    if g.shape != angles.shape:
        raise ValueError(f"image {g.shape} and angle grid {angles.shape} differ")
    h, w = g.shape
    if h < 2 or w < 2:
        raise TooSmall(f"need at least 2x2 pixels, got {w}x{h}")
    step = 2 if SamplingMode(mode) is SamplingMode.DISJOINT else 1
    ii, jj = np.meshgrid(np.arange(0, h - 1, step), np.arange(0, w - 1, step), indexing="ij")
    i, j = ii.ravel(), jj.ravel()
    return stencil_inputs(g, angles.slant, i, j), angles.slant[i, j].copy()


def extract_exemplars(img: GrayImage, angles: OrientationField, mode=SamplingMode.OVERLAPPING):
    inputs, outputs = extract_arrays(img, angles, mode)
    return [Exemplar.from_row(r, o) for r, o in zip(inputs, outputs)]


class ExemplarDb:
    """Immutable, ordered exemplar table. Record order decides query ties."""

    def __init__(self, inputs, outputs, provenance=(), mode=SamplingMode.OVERLAPPING):
        inputs = np.ascontiguousarray(inputs, dtype=np.float64).reshape(-1, 7)
        outputs = np.ascontiguousarray(outputs, dtype=np.float64).reshape(-1)
        if inputs.shape[0] != outputs.shape[0]:
            raise ValueError("inputs and outputs differ in length")
        inputs.setflags(write=False)
        outputs.setflags(write=False)
        self.inputs = inputs
        self.outputs = outputs
        self.provenance = list(provenance)
        self.mode = SamplingMode(mode)

    @classmethod
    def from_exemplars(cls, records: Sequence[Exemplar], provenance=(), mode=SamplingMode.OVERLAPPING):
        inputs = np.array([[r.g_center, *r.g_nbr, *r.s_nbr] for r in records], dtype=np.float64)
        outputs = np.array([r.s_out for r in records], dtype=np.float64)
        return cls(inputs.reshape(-1, 7), outputs, provenance, mode)

    @classmethod
    def from_image(cls, name, img: GrayImage, angles: OrientationField, mode=SamplingMode.OVERLAPPING):
        inputs, outputs = extract_arrays(img, angles, mode)
        return cls(inputs, outputs, [name], mode)

    def __len__(self):
        return self.outputs.shape[0]

    def __getitem__(self, k) -> Exemplar:
        return Exemplar.from_row(self.inputs[k], self.outputs[k])

    @property
    def records(self):
        return [self[k] for k in range(len(self))]

    def __eq__(self, other):
        if not isinstance(other, ExemplarDb):
            return NotImplemented
        return (self.mode == other.mode and self.provenance == other.provenance
                and np.array_equal(self.inputs, other.inputs)
                and np.array_equal(self.outputs, other.outputs))

    def __repr__(self):
        return f"ExemplarDb(n={len(self)}, mode={self.mode.value}, sources={self.provenance})"


def distance(p: Probe, e: Exemplar, w: DistanceConfig = DistanceConfig()) -> float:
    """RMS of normalised component differences; always in [0, 1].

    Gray-level differences are already in [0, 1]; slant differences are taken
    along the shorter arc and divided by pi.
    """
    comps = []
    if w.include_center:
        comps.append(p.g_center - e.g_center)
    comps.extend(a - b for a, b in zip(p.g_nbr, e.g_nbr))
    comps.extend(abs(wrap_angle_diff(a, b)) / math.pi for a, b in zip(p.s_nbr, e.s_nbr))
    return math.sqrt(sum(c * c for c in comps) / len(comps))


def _check(db: ExemplarDb):
    if len(db) == 0:
        raise EmptyDb("exemplar database is empty")


def nearest(db: ExemplarDb, p: Probe, w: DistanceConfig = DistanceConfig(), backend=None):
    """Exhaustive scan; ties go to the lowest record index."""
    _check(db)
    idx, dist = nearest_many(db, p.as_array()[None, :], w, backend)
    return db[int(idx[0])], float(dist[0])


def nearest_many(db: ExemplarDb, probes: np.ndarray, w: DistanceConfig = DistanceConfig(), backend=None):
    """Indices and distances of the nearest record for each probe row (m, 7)."""
    _check(db)
    probes = np.ascontiguousarray(probes, dtype=np.float64).reshape(-1, 7)
    return get_backend(backend).nearest_batch(db.inputs, probes, w.include_center)


def merge(dbs: Sequence[ExemplarDb]) -> ExemplarDb:
    if not dbs:
        raise ValueError("nothing to merge")
    modes = {db.mode for db in dbs}
    if len(modes) != 1:
        raise MixedMode(f"cannot merge databases with modes {sorted(m.value for m in modes)}")
    if len(dbs) == 1:
        return dbs[0]
    provenance = []
    for db in dbs:
        provenance.extend(n for n in db.provenance if n not in provenance)
    return ExemplarDb(
        np.concatenate([db.inputs for db in dbs]),
        np.concatenate([db.outputs for db in dbs]),
        provenance,
        modes.pop(),
    )
