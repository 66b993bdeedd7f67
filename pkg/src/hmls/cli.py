"""Command-line front end: ``hmls {filter,noise,metrics,surface-demo}``.

Length-like options are multiples of the input mesh's mean edge length.
Exit codes: 0 success, 1 usage or parameter error, 2 I/O error, 3 numeric
failure (at least one vertex system could not be solved).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .filtering import FilterParams, filter_mesh
from .mesh import MeshFormatError, load_mesh, save_mesh
from .metrics import (NoiseSpec, add_noise, curvature_colors, displacement_report,
                      mean_curvature, signed_distance_map)
from .surface import grid_mesh, torus_samples

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "HMLS_THREADS"

_MODEL_ALIASES = {
    "uniform-normal": "uniform-normal-direction",
    "uniform-normal-direction": "uniform-normal-direction",
    "gaussian": "gaussian-random-direction",
    "gaussian-random-direction": "gaussian-random-direction",
}

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="hmls", description=__doc__.splitlines()[0], formatter_class=fmt)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("filter", formatter_class=fmt, help="run the H-MLS filter on a mesh")
    f.add_argument("input")
    f.add_argument("output")
    f.add_argument("--iters", type=int, default=1, help="filter iterations")
    f.add_argument("--kernel", choices=["anisotropic", "isotropic"], default="anisotropic")
    f.add_argument("--sigma-s", type=float, default=None,
                   help="anisotropic kernel width / l_e (default: half of --noise-mag)")
    f.add_argument("--sigma-r", type=float, default=None, help="isotropic kernel width / l_e")
    f.add_argument("--noise-mag", type=float, default=None,
                   help="maximum noise magnitude / l_e, used when --sigma-s is omitted")
    f.add_argument("--radius", type=float, default=None,
                   help="neighborhood radius / l_e (default 2, or 2*sigma_r when isotropic)")
    f.add_argument("--m", type=int, default=100, help="maximum neighborhood size")
    f.add_argument("--gamma", type=float, default=1000.0, help="line constraint strength")
    f.add_argument("--eta", type=float, default=0.001, help="floor of d_ij / l_e")
    f.add_argument("--c-floor", type=float, default=0.001, help="floor of c_ij")
    f.add_argument("--constraint", choices=["vertex", "centroid"], default="vertex",
                   help="line constraint anchor")
    f.add_argument("--exclude-self", action="store_true",
                   help="leave the center vertex out of its own neighborhood")
    f.add_argument("--threads", type=_positive_int, default=_default_threads(),
                   help=f"worker threads for neighbor search (env {THREADS_ENV})")
    f.set_defaults(func=cmd_filter)

    n = sub.add_parser("noise", formatter_class=fmt, help="add synthetic noise")
    n.add_argument("input")
    n.add_argument("output")
    n.add_argument("--model", choices=sorted(_MODEL_ALIASES), default="uniform-normal")
    n.add_argument("--mag", type=float, required=True,
                   help="noise magnitude / l_e (Gaussian sigma or uniform max deviation)")
    n.add_argument("--seed", type=int, required=True, help="random seed")
    n.set_defaults(func=cmd_noise)

    m = sub.add_parser("metrics", formatter_class=fmt, help="compare two meshes")
    m.add_argument("a", help="reference/noisy mesh")
    m.add_argument("b", help="compared/filtered mesh with the same vertex count")
    m.add_argument("--report", default=None, help="write JSON report here")
    m.add_argument("--per-vertex", action="store_true", help="include per-vertex arrays")
    m.add_argument("--signed-colors", default=None,
                   help="PLY output of mesh a colored by signed distance to mesh b")
    m.add_argument("--curvature-colors", default=None,
                   help="PLY output of mesh b colored by mean curvature")
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("surface-demo", formatter_class=fmt,
                       help="evaluate the H-MLS torus surface and write it as a mesh")
    s.add_argument("output")
    s.add_argument("--mu", type=float, default=1.25, help="balance factor (0 gives a B-spline)")
    s.add_argument("--n-minor", type=int, default=10, help="samples around the tube")
    s.add_argument("--n-major", type=int, default=20, help="samples around the axis")
    s.add_argument("--major", type=float, default=3.0, help="torus major radius")
    s.add_argument("--minor", type=float, default=1.0, help="torus minor radius")
    s.add_argument("--res-u", type=int, default=100, help="output grid resolution around the tube")
    s.add_argument("--res-v", type=int, default=200, help="output grid resolution around the axis")
    s.set_defaults(func=cmd_surface_demo)
    return p


def _load(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such file: {path}")
    return load_mesh(path)


def cmd_filter(args):
    params = FilterParams(
        iterations=args.iters,
        sigma_s_factor=args.sigma_s,
        sigma_r_factor=args.sigma_r,
        radius_factor=args.radius,
        kernel=args.kernel,
        m=args.m,
        gamma=args.gamma,
        eta_factor=args.eta,
        c_floor=args.c_floor,
        constraint=args.constraint,
        noise_magnitude_factor=args.noise_mag,
        include_self=not args.exclude_self,
    )
    mesh = _load(args.input)
    failures = 0

    def progress(r):
        nonlocal failures
        failures += r.solve_failures
        print(f"iter {r.iteration}: {r.seconds:.3f}s  max displacement {r.max_displacement:.6g}"
              f"  failures {r.solve_failures}  skipped {r.skipped}")

    out = filter_mesh(mesh, params, progress=progress, workers=args.threads)
    save_mesh(out, args.output)
    return EXIT_NUMERIC if failures else EXIT_OK


def cmd_noise(args):
    spec = NoiseSpec(_MODEL_ALIASES[args.model], args.mag, args.seed)
    mesh = _load(args.input)
    save_mesh(add_noise(mesh, spec), args.output)
    return EXIT_OK


def cmd_metrics(args):
    a, b = _load(args.a), _load(args.b)
    report = displacement_report(a, b)
    print(f"displacement mean {report.mean:.6g}  max {report.max:.6g}"
          f"  rms {report.rms:.6g}  count {report.count}")
    signed = curv = None
    if args.signed_colors:
        signed, colors = signed_distance_map(a, b)
        print(f"signed distance min {signed.min():.6g}  max {signed.max():.6g}")
        save_mesh(a, args.signed_colors, "ply", colors=colors)
    if args.curvature_colors:
        curv, _ = mean_curvature(b)
        save_mesh(b, args.curvature_colors, "ply", colors=curvature_colors(curv))
    if args.report:
        if signed is not None or curv is not None:
            report = replace(report, signed_distances=signed, curvature=curv)
        with open(args.report, "w") as fh:
            fh.write(report.to_json(per_vertex=args.per_vertex, indent=2) + "\n")
    return EXIT_OK


def cmd_surface_demo(args):
    if args.n_minor < 4 or args.n_major < 4:
        raise ValueError("the torus needs at least 4 samples in each direction")
    samples = torus_samples(args.n_minor, args.n_major, args.major, args.minor, args.mu)
    save_mesh(grid_mesh(samples, args.res_u, args.res_v), args.output)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with np.errstate(all="ignore"):
            return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, MeshFormatError) as exc:
        print(f"hmls: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"hmls: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"hmls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"hmls: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
