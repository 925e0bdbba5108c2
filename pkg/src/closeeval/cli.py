"""Command-line driver for the convergence studies.

    closeeval sweep-eps   --domain peanut --approx 2 --point A --out eps.csv
    closeeval sweep-grid  --domain peanut --approx 2 --n-list 16,32,64,128 --point A
    closeeval field-slice --domain peanut --approx 2 --plane z=0 --resolution 50
    closeeval gauss-law   --domain sphere --point 0,0,0 --n 16
    closeeval fit eps.csv --floor 1e-13
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from .geometry import get_domain, surface_frame, evaluation_point
from .harness import (
    DEFAULT_EPS_COUNT,
    DEFAULT_EPS_RANGE,
    DEFAULT_N,
    DEFAULT_SLOPE_FLOOR,
    LABELLED_POINTS,
    ConfigError,
    SweepConfig,
    default_eps_values,
    read_csv,
    run_epsilon_sweep,
    run_field_slice,
    run_grid_sweep,
    slopes_by_series,
    write_csv,
)
from .potentials import gauss_law_check
from .quadrature import InvalidOrderError, product_rule

logger = logging.getLogger("closeeval")


def _floats(text: str, count: int, what: str):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be {count} comma-separated numbers, got {text!r}") from None
    if len(values) != count:
        raise argparse.ArgumentTypeError(f"{what} must be {count} comma-separated numbers, got {text!r}")
    return values


def _point(text: str):
    if text.strip() in ("A", "B", "C"):
        return text.strip()
    return _floats(text, 3, "--point")


def _angles(text: str):
    return _floats(text, 2, "--point-angles")


def _int_list(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n-list must be comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, approx=True):
    p.add_argument("--domain", choices=("sphere", "peanut", "mushroom"), default="peanut")
    if approx:
        p.add_argument("--approx", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--n", type=int, default=DEFAULT_N, help="Gauss-Legendre order N (grid is N x 2N)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--workers", type=int, default=1)


def _sweep_args(p: argparse.ArgumentParser):
    p.add_argument("--eps-min", type=float, default=DEFAULT_EPS_RANGE[0])
    p.add_argument("--eps-max", type=float, default=DEFAULT_EPS_RANGE[1])
    p.add_argument("--eps-count", type=int, default=DEFAULT_EPS_COUNT)
    p.add_argument("--point", type=_point, action="append", default=[], help="x,y,z on the surface, or A/B/C")
    p.add_argument("--point-angles", type=_angles, action="append", default=[], help="theta,phi")
    p.add_argument("--approx1-frame", choices=("rotated", "unrotated"), default="rotated")
    p.add_argument("--floor", type=float, default=DEFAULT_SLOPE_FLOOR)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="closeeval", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-eps", help="error versus eps at fixed N")
    _common(p)
    _sweep_args(p)

    p = sub.add_parser("sweep-grid", help="error over an (N, eps) grid")
    _common(p)
    _sweep_args(p)
    p.add_argument("--n-list", type=_int_list, default=(16, 32, 64, 128, 192, 256))

    p = sub.add_parser("field-slice", help="error on an axis-aligned plane through the domain")
    _common(p)
    p.add_argument("--plane", default="z=0", help="e.g. z=0, x=0.25")
    p.add_argument("--resolution", type=int, default=50)

    p = sub.add_parser("gauss-law", help="double-layer potential of the unit density")
    _common(p, approx=False)
    p.add_argument("--point", type=lambda s: _floats(s, 3, "--point"), action="append", default=[],
                   help="evaluation point x,y,z (unrotated grid)")
    p.add_argument("--point-angles", type=_angles, action="append", default=[],
                   help="boundary point theta,phi; evaluates at distance --eps inside, rotated grid")
    p.add_argument("--eps", type=float, default=1e-3)

    p = sub.add_parser("fit", help="fit log-log slopes to a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--floor", type=float, default=DEFAULT_SLOPE_FLOOR)
    return parser


def _sweep_config(args, n_values) -> SweepConfig:
    points = list(args.point) + list(args.point_angles)
    if not points:
        points = sorted(LABELLED_POINTS.get(args.domain, {}))
    return SweepConfig(
        domain=args.domain,
        approx=args.approx,
        n_values=tuple(n_values),
        eps_values=default_eps_values(args.eps_min, args.eps_max, args.eps_count),
        points=tuple(points),
        output_path=args.out,
        approx1_frame=args.approx1_frame,
    )


def _emit(records, path):
    write_csv(records, path if path else sys.stdout)


def _report_slopes(records, floor):
    for (domain, approx, n, pid), slope in slopes_by_series(records, floor).items():
        text = "n/a (fewer than 3 errors above floor)" if math.isnan(slope) else f"{slope:.3f}"
        print(f"{domain} approx={approx} n={n} point={pid}: slope {text}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "sweep-eps":
            config = _sweep_config(args, [args.n])
            records = run_epsilon_sweep(config, workers=args.workers)
            _emit(records, args.out)
            _report_slopes(records, args.floor)
        elif args.command == "sweep-grid":
            config = _sweep_config(args, args.n_list)
            records = run_grid_sweep(config, workers=args.workers)
            _emit(records, args.out)
        elif args.command == "field-slice":
            product_rule(args.n)
            records = run_field_slice(args.domain, args.approx, args.n, args.plane, args.resolution, workers=args.workers)
            _emit(records, args.out)
        elif args.command == "gauss-law":
            domain = get_domain(args.domain)
            rule = product_rule(args.n)
            if not args.point and not args.point_angles:
                raise ConfigError("gauss-law needs --point or --point-angles")
            for x in args.point:
                value = gauss_law_check(domain, np.asarray(x), rule)
                print(f"x={x}: {value:.17g}")
            for theta, phi in args.point_angles:
                if args.eps <= 0:
                    raise ConfigError("--eps must be positive")
                x = evaluation_point(surface_frame(domain, theta, phi, allow_pole=True), args.eps, domain.ell)
                value = gauss_law_check(domain, x, rule, (theta, phi))
                print(f"theta={theta:g} phi={phi:g} eps={args.eps:g}: {value:.17g}")
        elif args.command == "fit":
            records = read_csv(args.csv)
            for (domain, approx, n, pid), slope in slopes_by_series(records, args.floor).items():
                text = "nan" if math.isnan(slope) else f"{slope:.6f}"
                print(f"{domain},{approx},{n},{pid},{text}")
    except (ConfigError, InvalidOrderError) as exc:
        print(f"closeeval: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"closeeval: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
