"""File formats: PGM images, depth matrices, exemplar databases, needle maps.

All text formats are ASCII with Unix newlines; ``#`` comment lines are allowed
after the header line. Floats are written with ``repr`` so they round-trip
exactly.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .core import DepthMap, GrayImage, NeedleMap
from .errors import DimensionMismatch, MalformedHeader, NonFiniteValue, TruncatedData
from .exemplars import ExemplarDb, SamplingMode


def _write_text(path, text):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _data_lines(lines):
    """Yield (lineno, stripped) skipping blank and comment lines."""
    for n, line in lines:
        s = line.strip()
        if s and not s.startswith("#"):
            yield n, s


# -- PGM ---------------------------------------------------------------------

def _pgm_tokens(data: bytes, count: int):
    """First ``count`` whitespace-separated header tokens, honouring ``#`` comments.
    Returns (tokens, offset just past the single whitespace after the last token)."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MalformedHeader("unexpected end of PGM header")
        tokens.append(data[start:pos])
    if pos < n:
        pos += 1
    return tokens, pos


def read_pgm_raw(path):
    """Raw samples (h, w) int array and maxval from a P2 or P5 file."""
    data = Path(path).read_bytes()
    if data[:2] not in (b"P2", b"P5"):
        raise MalformedHeader(f"{path}: not a P2/P5 PGM file")
    try:
        tokens, pos = _pgm_tokens(data, 4)
        w, h, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise MalformedHeader(f"{path}: bad PGM header") from exc
    if w < 1 or h < 1 or not 0 < maxval <= 65535:
        raise MalformedHeader(f"{path}: invalid size {w}x{h} or maxval {maxval}")
    if data[:2] == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        payload = data[pos:pos + need]
        if len(payload) < need:
            raise TruncatedData(f"{path}: expected {need} bytes of pixels, found {len(payload)}")
        raw = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[pos:])
        try:
            raw = np.array([int(t) for t in text.split()], dtype=np.int64)
        except ValueError as exc:
            raise MalformedHeader(f"{path}: non-integer sample") from exc
        if raw.size < w * h:
            raise TruncatedData(f"{path}: expected {w * h} samples, found {raw.size}")
        raw = raw[: w * h]
    if np.any(raw > maxval) or np.any(raw < 0):
        raise MalformedHeader(f"{path}: sample outside [0, {maxval}]")
    return raw.reshape(h, w), maxval


def read_pgm(path) -> GrayImage:
    raw, maxval = read_pgm_raw(path)
    return GrayImage(raw / maxval)


def to_raw(img: GrayImage, maxval: int = 255) -> np.ndarray:
    return np.floor(img.intensities * maxval + 0.5).astype(np.int64)


def write_pgm_raw(path, raw, maxval: int = 255):
    raw = np.asarray(raw, dtype=np.int64)
    h, w = raw.shape
    rows = "\n".join(" ".join(str(v) for v in row) for row in raw)
    _write_text(path, f"P2\n{w} {h}\n{maxval}\n{rows}\n")


def write_pgm(path, img: GrayImage, maxval: int = 255):
    """ASCII P2 with round-half-up quantisation."""
    if not 0 < maxval <= 65535:
        raise ValueError("maxval must be in 1..65535")
    write_pgm_raw(path, to_raw(img, maxval), maxval)


# -- depth matrices ------------------------------------------------------------

def format_depth(d: DepthMap) -> str:
    rows = "\n".join(" ".join(repr(float(v)) for v in row) for row in d.z)
    return f"{d.width} {d.height} {d.spacing!r}\n{rows}\n"


def parse_depth(text: str, name="<depth>") -> DepthMap:
    lines = iter(_data_lines(enumerate(text.splitlines(), 1)))
    try:
        _, head = next(lines)
        w_s, h_s, sp_s = head.split()
        w, h, spacing = int(w_s), int(h_s), float(sp_s)
    except (StopIteration, ValueError) as exc:
        raise MalformedHeader(f"{name}: header must be 'W H spacing'") from exc
    if w < 1 or h < 1 or not (spacing > 0 and math.isfinite(spacing)):
        raise MalformedHeader(f"{name}: invalid header values {w} {h} {spacing}")
    rows = []
    for n, line in lines:
        try:
            vals = [float(t) for t in line.split()]
        except ValueError as exc:
            raise MalformedHeader(f"{name}:{n}: non-numeric entry") from exc
        if len(vals) != w:
            raise DimensionMismatch(f"{name}:{n}: expected {w} values, found {len(vals)}")
        rows.append(vals)
    if len(rows) != h:
        raise DimensionMismatch(f"{name}: expected {h} rows, found {len(rows)}")
    z = np.array(rows, dtype=np.float64).reshape(h, w)
    if not np.all(np.isfinite(z)):
        raise NonFiniteValue(f"{name}: non-finite depth value")
    return DepthMap(z, spacing)


def write_depth(path, d: DepthMap):
    _write_text(path, format_depth(d))


def read_depth(path) -> DepthMap:
    return parse_depth(Path(path).read_text(encoding="ascii"), str(path))


# -- exemplar databases -------------------------------------------------------

_DB_HEAD = re.compile(r"^needlecast-db v1 mode=(overlapping|disjoint) n=(\d+)$")


def format_db(db: ExemplarDb) -> str:
    for s in db.provenance:
        if "," in s or "\n" in s:
            raise ValueError(f"source name {s!r} may not contain commas or newlines")
    out = [f"needlecast-db v1 mode={db.mode.value} n={len(db)}", "sources=" + ",".join(db.provenance)]
    for inp, o in zip(db.inputs, db.outputs):
        out.append(",".join(repr(float(v)) for v in (*inp, o)))
    return "\n".join(out) + "\n"


def parse_db(text: str, name="<db>") -> ExemplarDb:
    raw = text.splitlines()
    m = _DB_HEAD.match(raw[0].strip()) if raw else None
    if not m:
        raise MalformedHeader(f"{name}: bad database header")
    mode, n = SamplingMode(m.group(1)), int(m.group(2))
    body = list(_data_lines(enumerate(raw[1:], 2)))
    if not body or not body[0][1].startswith("sources="):
        raise MalformedHeader(f"{name}: missing sources line")
    src = body[0][1][len("sources="):]
    sources = src.split(",") if src else []
    rec = []
    for ln, line in body[1:]:
        parts = line.split(",")
        if len(parts) != 8:
            raise DimensionMismatch(f"{name}:{ln}: expected 8 fields, found {len(parts)}")
        try:
            rec.append([float(p) for p in parts])
        except ValueError as exc:
            raise MalformedHeader(f"{name}:{ln}: non-numeric field") from exc
    if len(rec) != n:
        raise TruncatedData(f"{name}: header declares {n} records, found {len(rec)}")
    arr = np.array(rec, dtype=np.float64).reshape(-1, 8)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name}: non-finite record field")
    return ExemplarDb(arr[:, :7], arr[:, 7], sources, mode)


def write_db(path, db: ExemplarDb):
    _write_text(path, format_db(db))


def read_db(path) -> ExemplarDb:
    return parse_db(Path(path).read_text(encoding="ascii"), str(path))


# -- needle maps ---------------------------------------------------------------

_NM_HEAD = re.compile(r"^needlecast-nm v1 w=(\d+) h=(\d+)$")


def _runs(row):
    """Column runs [(j0, j1)] where ``row`` is True."""
    idx = np.flatnonzero(row)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    ends = np.concatenate((idx[breaks], [idx[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def _encode_boundary(mask):
    parts = []
    for i, row in enumerate(mask):
        runs = _runs(row)
        if runs:
            parts.append(f"{i}:" + ",".join(f"{a}-{b}" for a, b in runs))
    return ";".join(parts)


def _decode_boundary(spec, shape):
    mask = np.zeros(shape, dtype=bool)
    for part in filter(None, spec.split(";")):
        i, _, runs = part.partition(":")
        for r in runs.split(","):
            a, _, b = r.partition("-")
            mask[int(i), int(a):int(b) + 1] = True
    return mask


def format_needle_map(nm: NeedleMap) -> str:
    """Header, a ``# boundary`` comment listing boundary-condition pixels as
    row runs, then ``i,j,slant,tilt,match_distance`` per assigned pixel in
    row-major order."""
    out = [f"needlecast-nm v1 w={nm.width} h={nm.height}",
           "# boundary " + _encode_boundary(nm.boundary & nm.assigned)]
    for i, j in np.argwhere(nm.assigned):
        d = nm.distance[i, j]
        out.append(f"{i},{j},{float(nm.slant[i, j])!r},{float(nm.tilt[i, j])!r},"
                   f"{float(0.0 if np.isnan(d) else d)!r}")
    return "\n".join(out) + "\n"


def parse_needle_map(text: str, name="<needle map>") -> NeedleMap:
    raw = text.splitlines()
    m = _NM_HEAD.match(raw[0].strip()) if raw else None
    if not m:
        raise MalformedHeader(f"{name}: bad needle-map header")
    w, h = int(m.group(1)), int(m.group(2))
    nm = NeedleMap.empty(h, w)
    for ln, line in enumerate(raw[1:], 2):
        s = line.strip()
        if s.startswith("# boundary"):
            try:
                nm.boundary[:] = _decode_boundary(s[len("# boundary"):].strip(), (h, w))
            except (ValueError, IndexError) as exc:
                raise MalformedHeader(f"{name}:{ln}: bad boundary comment") from exc
            continue
        if not s or s.startswith("#"):
            continue
        parts = s.split(",")
        if len(parts) != 5:
            raise DimensionMismatch(f"{name}:{ln}: expected 5 fields, found {len(parts)}")
        try:
            i, j = int(parts[0]), int(parts[1])
            sl, ti, di = (float(p) for p in parts[2:])
        except ValueError as exc:
            raise MalformedHeader(f"{name}:{ln}: bad field") from exc
        if not (0 <= i < h and 0 <= j < w):
            raise DimensionMismatch(f"{name}:{ln}: pixel ({i},{j}) outside {w}x{h}")
        if not all(math.isfinite(v) for v in (sl, ti, di)):
            raise NonFiniteValue(f"{name}:{ln}: non-finite value")
        nm.slant[i, j], nm.tilt[i, j], nm.distance[i, j] = sl, ti, di
    nm.boundary &= nm.assigned
    return nm


def write_needle_map(path, nm: NeedleMap):
    _write_text(path, format_needle_map(nm))


def read_needle_map(path) -> NeedleMap:
    return parse_needle_map(Path(path).read_text(encoding="ascii"), str(path))


def needle_panels(nm: NeedleMap) -> np.ndarray:
    """Slant, tilt and match-distance panels side by side, each scaled to [0, 1]."""
    slant = np.nan_to_num((nm.slant + math.pi) / (2 * math.pi), nan=0.0)
    tilt = np.nan_to_num(nm.tilt / (math.pi / 2), nan=0.0)
    dist = np.nan_to_num(nm.distance, nan=0.0)
    return np.clip(np.hstack((slant, tilt, dist)), 0.0, 1.0)


def render_needle_visualization(nm: NeedleMap, path, maxval: int = 255):
    if nm.width == 0 or nm.height == 0:
        raise ValueError("empty needle map")
    write_pgm(path, GrayImage(needle_panels(nm)), maxval)
