"""Command-line driver.

Exit codes: 0 success, 1 domain error, 2 usage error, 3 integration did not
converge (partial output written).
"""
from __future__ import annotations

import argparse
import datetime
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .core import LightSource
from .errors import NeedlecastError, NotConverged
from .exemplars import DistanceConfig, ExemplarDb, SamplingMode, merge
from .integrate import IntegratorConfig, integrate
from .metrics import EvalReport
from .render import RenderConfig, render
from .solver import boundary_from_silhouette, boundary_from_truth, propagate
from .surfaces import depth_to_angles, make_surface, object_mask, surface_names

log = logging.getLogger("needlecast")

EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


class UsageError(Exception):
    pass


# -- argument types ------------------------------------------------------------

def _floats(text, n, what):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return vals


def domain_arg(text):
    x0, x1, y0, y1 = _floats(text, 4, "domain")
    if not (x0 < x1 and y0 < y1):
        raise argparse.ArgumentTypeError(f"domain: need x_min<x_max and y_min<y_max, got {text!r}")
    return (x0, x1, y0, y1)


def resolution_arg(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must look like 64x64, got {text!r}")
    if w < 2 or h < 2:
        raise argparse.ArgumentTypeError("resolution must be at least 2x2")
    return (w, h)


def light_arg(text):
    x, y, z = _floats(text, 3, "light")
    if not z > 0 or math.sqrt(x * x + y * y + z * z) == 0:
        raise argparse.ArgumentTypeError("light must point toward the viewer (z > 0)")
    return LightSource.toward(x, y, z)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# -- key=value configs ---------------------------------------------------------

def read_keyvalue(path) -> dict:
    kv = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, _, v = s.partition("=")
        kv[k.strip()] = v.strip()
    return kv


@dataclass
class PipelineConfig:
    train: list = field(default_factory=lambda: ["f1"])
    test: list = field(default_factory=lambda: ["f2"])
    resolution: tuple = (64, 64)
    sampling_mode: SamplingMode = SamplingMode.OVERLAPPING
    include_center_gray: bool = True
    light: LightSource = field(default_factory=LightSource)
    boundary: str = "truth"
    threshold: float = 0.0
    g: float = 1.0
    tol: float = 1e-6
    max_iter: int = None
    out: str = None

    _PARSERS = {
        "train": lambda v: [s.strip() for s in v.split(",") if s.strip()],
        "test": lambda v: [s.strip() for s in v.split(",") if s.strip()],
        "resolution": resolution_arg,
        "sampling_mode": SamplingMode,
        "include_center_gray": _bool,
        "light": light_arg,
        "boundary": lambda v: {"truth": "truth", "silhouette": "silhouette"}[v],
        "threshold": float,
        "g": float,
        "tol": float,
        "max_iter": int,
        "out": str,
    }

    @classmethod
    def from_mapping(cls, kv: dict, base_dir: Path = None) -> "PipelineConfig":
        unknown = set(kv) - set(cls._PARSERS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        args = {}
        for k, v in kv.items():
            try:
                args[k] = cls._PARSERS[k](v)
            except (ValueError, KeyError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {k}: {v!r} ({exc})") from None
        cfg = cls(**args)
        if not cfg.train or not cfg.test:
            raise UsageError("train and test must each name at least one source")
        for name in cfg.train + cfg.test:
            _check_source(name, base_dir)
        return cfg

    def items(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(v)
            elif isinstance(v, tuple):
                v = f"{v[0]}x{v[1]}"
            elif isinstance(v, SamplingMode):
                v = v.value
            elif isinstance(v, LightSource):
                v = ",".join(repr(c) for c in v.direction)
            elif v is None:
                continue
            yield f.name, v


def _check_source(name, base_dir=None):
    if name.lower() in surface_names():
        return
    p = Path(name)
    if base_dir is not None and not p.is_absolute():
        p = base_dir / p
    if not p.is_file():
        raise UsageError(f"source {name!r} is neither a known surface nor an existing depth file")


def bundled_config(name):
    """Path of a bundled case config (e.g. ``case1`` or ``case1.cfg``)."""
    fname = name if name.endswith(".cfg") else name + ".cfg"
    ref = resources.files("needlecast") / "configs" / fname
    return Path(str(ref)) if ref.is_file() else None


def _resolve_config(path):
    p = Path(path)
    if p.is_file():
        return p
    b = bundled_config(path)
    if b is None:
        raise UsageError(f"config {path!r} not found (bundled: case1..case6)")
    return b


# -- sources -------------------------------------------------------------------

def load_source_depth(name, resolution=(64, 64), base_dir=None):
    if name.lower() in surface_names():
        return make_surface(name, resolution)
    p = Path(name)
    if base_dir is not None and not p.is_absolute():
        p = base_dir / p
    return io.read_depth(p)


def _stem(name):
    return Path(name).stem if ("/" in name or "." in name) else name.lower()


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def db_from_depths(named_depths, mode=SamplingMode.OVERLAPPING, light=None):
    rc = RenderConfig(light or LightSource())
    parts = []
    for name, d in named_depths:
        parts.append(ExemplarDb.from_image(name, render(d, rc), depth_to_angles(d), mode))
        log.info("exemplars from %s: %d", name, len(parts[-1]))
    return merge(parts)


def reconstruct_depth(d, db, boundary="truth", threshold=0.0, dist_cfg=DistanceConfig(), light=None):
    """Render ``d``, build the boundary, propagate. Returns (needle map, truth angles)."""
    rc = RenderConfig(light or LightSource())
    truth = depth_to_angles(d)
    if boundary == "truth":
        img = render(d, rc)
        nm = propagate(img, boundary_from_truth(truth), db, dist_cfg, e_max=1.0)
    else:
        # treat the rendered object as a photograph: black background, unknown E_max
        img = render(d, rc, mask=object_mask(d))
        bc = boundary_from_silhouette(img, threshold)
        nm = propagate(img, bc, db, dist_cfg, e_max=None)
    return nm, truth


def _write_reconstruction(out, nm, report):
    io.write_needle_map(out / "needlemap.txt", nm)
    io.render_needle_visualization(nm, out / "needles.pgm")
    io._write_text(out / "report.txt", report.to_text())
    return ["needlemap.txt", "needles.pgm", "report.txt"]


def _integrator_config(kv, delta):
    parsers = {"delta": float, "g": float, "tol": float, "max_iter": int}
    unknown = set(kv) - set(parsers)
    if unknown:
        raise UsageError(f"unknown integrator keys: {', '.join(sorted(unknown))}")
    try:
        vals = {k: parsers[k](v) for k, v in kv.items() if v is not None}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    vals.setdefault("delta", delta)
    try:
        return IntegratorConfig(**vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_integration(out, res, stem="depth"):
    io.write_depth(out / f"{stem}.txt", res.depth)
    io._write_text(out / "residuals.txt", "".join(f"{k} {r!r}\n" for k, r in enumerate(res.history, 1)))
    return [f"{stem}.txt", "residuals.txt"]


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args):
    d = make_surface(args.surface, args.res, args.domain)
    out = _out_dir(args.out) / f"{args.surface.lower()}.depth"
    io.write_depth(out, d)
    print(out)
    return 0


def cmd_render(args):
    d = io.read_depth(args.depth)
    img = render(d, RenderConfig(args.light), mask=object_mask(d) if args.object_mask else None)
    out = _out_dir(args.out) / (Path(args.depth).stem + ".pgm")
    io.write_pgm(out, img, args.maxval)
    print(out)
    return 0


def cmd_build_db(args):
    named = [(Path(p).stem, io.read_depth(p)) for p in args.depths]
    db = db_from_depths(named, args.mode, args.light)
    out = _out_dir(args.out) / args.name
    io.write_db(out, db)
    print(f"{len(db)} exemplars -> {out}")
    return 0


def cmd_reconstruct(args):
    db = io.read_db(args.db)
    dist_cfg = DistanceConfig(include_center=not args.exclude_center_gray)
    src = Path(args.source)
    if src.suffix.lower() in (".pgm", ".pnm"):
        if args.boundary == "truth":
            raise UsageError("an image source has no ground truth; use --boundary silhouette")
        img = io.read_pgm(src)
        bc = boundary_from_silhouette(img, args.threshold)
        nm = propagate(img, bc, db, dist_cfg, e_max=None)
        report = EvalReport.build(nm)
    else:
        d = load_source_depth(args.source)
        nm, truth = reconstruct_depth(d, db, args.boundary, args.threshold, dist_cfg, args.light)
        report = EvalReport.build(nm, truth)
    out = _out_dir(args.out)
    _write_reconstruction(out, nm, report)
    sys.stdout.write(report.to_text())
    return 0


def cmd_integrate(args):
    kv = read_keyvalue(args.config) if args.config else {}
    for k in ("delta", "g", "tol", "max_iter"):
        v = getattr(args, k)
        if v is not None:
            kv[k] = v
    cfg = _integrator_config(kv, 1.0)
    nm = io.read_needle_map(args.needle_map)
    out = _out_dir(args.out)
    try:
        res = integrate(nm, cfg)
    except NotConverged as exc:
        _write_integration(out, exc.result)
        print(f"NotConverged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    _write_integration(out, res)
    print(f"converged after {res.iterations} iterations (residual {res.residual:.3e})")
    return 0


def cmd_evaluate(args):
    nm = io.read_needle_map(args.needle_map)
    truth_d = io.read_depth(args.truth) if args.truth else None
    truth = depth_to_angles(truth_d) if truth_d is not None else None
    depth = io.read_depth(args.depth) if args.depth else None
    report = EvalReport.build(nm, truth, depth, truth_d)
    text = report.to_text()
    if args.out:
        io._write_text(_out_dir(args.out) / "report.txt", text)
    sys.stdout.write(text)
    return 0


def run_pipeline(cfg: PipelineConfig, out: Path, base_dir: Path = None, config_text: str = ""):
    """Full gen -> render -> build-db -> reconstruct -> integrate -> evaluate run.
    Returns (exit code, {test name: EvalReport})."""
    out = _out_dir(out)
    artifacts, metrics, status = [], {}, 0
    (out / "sources").mkdir(exist_ok=True)

    def source(name):
        d = load_source_depth(name, cfg.resolution, base_dir)
        stem = _stem(name)
        io.write_depth(out / "sources" / f"{stem}.depth", d)
        io.write_pgm(out / "sources" / f"{stem}.pgm", render(d, RenderConfig(cfg.light)))
        artifacts.extend([f"sources/{stem}.depth", f"sources/{stem}.pgm"])
        return stem, d

    train = [source(n) for n in cfg.train]
    db = db_from_depths(train, cfg.sampling_mode, cfg.light)
    io.write_db(out / "db.txt", db)
    artifacts.append("db.txt")
    dist_cfg = DistanceConfig(cfg.include_center_gray)

    for name in cfg.test:
        stem, d = source(name)
        tdir = out / f"test_{stem}"
        tdir.mkdir(exist_ok=True)
        nm, truth = reconstruct_depth(d, db, cfg.boundary, cfg.threshold, dist_cfg, cfg.light)
        icfg = IntegratorConfig(delta=d.spacing, g=cfg.g, tol=cfg.tol, max_iter=cfg.max_iter)
        try:
            res = integrate(nm, icfg)
        except NotConverged as exc:
            log.warning("%s: %s", name, exc)
            res, status = exc.result, EXIT_NOT_CONVERGED
        report = EvalReport.build(nm, truth, res.depth, d)
        written = _write_reconstruction(tdir, nm, report) + _write_integration(tdir, res)
        artifacts.extend(f"test_{stem}/{f}" for f in written)
        metrics[stem] = report

    lines = [f"created={datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}"]
    lines += [f"config.{k}={v}" for k, v in cfg.items()]
    lines += [f"exemplars={len(db)}"]
    lines += [f"artifact={a}" for a in artifacts]
    for stem, rep in metrics.items():
        lines += [f"metric.{stem}.{ln}" for ln in rep.to_text().splitlines()]
    lines.append(f"status={status}")
    io._write_text(out / "manifest.txt", "\n".join(lines) + "\n")
    return status, metrics


def cmd_pipeline(args):
    path = _resolve_config(args.config)
    kv = read_keyvalue(path)
    cfg = PipelineConfig.from_mapping(kv, path.parent)
    status, metrics = run_pipeline(cfg, Path(args.out or cfg.out), path.parent)
    for stem, rep in metrics.items():
        print(f"{stem}: avg_match_distance={rep.avg_match_distance:.6g} "
              f"({rep.avg_match_distance_rad:.4g} rad) depth_rmse_aligned={rep.depth_rmse_aligned}")
    return status


# -- entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="needlecast", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="sample an analytic or stand-in surface into a depth file")
    s.add_argument("surface", choices=surface_names(), type=str.lower)
    s.add_argument("--domain", type=domain_arg, help="x_min,x_max,y_min,y_max (analytic surfaces)")
    s.add_argument("--res", type=resolution_arg, default=(64, 64))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("render", help="Lambertian rendering of a depth file to PGM")
    s.add_argument("depth")
    s.add_argument("--light", type=light_arg, default=LightSource())
    s.add_argument("--maxval", type=int, default=255)
    s.add_argument("--object-mask", action="store_true", help="black out the z<=0 backdrop")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("build-db", help="offline phase: exemplar database from depth files")
    s.add_argument("depths", nargs="+")
    s.add_argument("--mode", type=SamplingMode, default=SamplingMode.OVERLAPPING,
                   choices=list(SamplingMode))
    s.add_argument("--light", type=light_arg, default=LightSource())
    s.add_argument("--name", default="db.txt")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build_db)

    s = sub.add_parser("reconstruct", help="online phase: needle map for a depth or PGM source")
    s.add_argument("source", help="depth file, surface name, or .pgm image")
    s.add_argument("--db", required=True)
    s.add_argument("--boundary", choices=["truth", "silhouette"], default="truth")
    s.add_argument("--threshold", type=float, default=0.0)
    s.add_argument("--exclude-center-gray", action="store_true")
    s.add_argument("--light", type=light_arg, default=LightSource())
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("integrate", help="Horn-Brooks integration of a needle map")
    s.add_argument("needle_map")
    s.add_argument("--config")
    s.add_argument("--delta", type=float)
    s.add_argument("--g", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int, dest="max_iter")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("evaluate", help="metrics for a needle map against a truth depth")
    s.add_argument("needle_map")
    s.add_argument("--truth", help="ground-truth depth file")
    s.add_argument("--depth", help="integrated depth file")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("pipeline", help="run a whole experiment from a key=value config")
    s.add_argument("--config", required=True, help="config file or bundled name case1..case6")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NeedlecastError, KeyError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
