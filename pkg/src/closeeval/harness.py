"""Convergence studies: epsilon sweeps, (N, eps) grids, interior error slices.

Results are flat :class:`ErrorRecord` rows; :func:`write_csv` fixes the file
format. Evaluation failures are recorded per row (``status`` plus NaN fields)
instead of aborting a run.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .geometry import (
    DOMAINS,
    NotInteriorError,
    OffSurfaceError,
    SurfaceDomain,
    closest_boundary_point,
    get_domain,
    inverse_parameterize,
    is_interior,
    parameterize,
    surface_residual,
)
from .potentials import Target, evaluate, evaluate_approx1, make_target, sample_nodes
from .quadrature import product_rule
from .reference import DensityPair, densities_from_exact, exact_solution

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "domain",
    "approx",
    "n",
    "eps",
    "point_id",
    "theta_star",
    "phi_star",
    "u_exact",
    "u_numeric",
    "abs_error",
    "log10_error",
)
LOG10_FLOOR = 1e-17
DEFAULT_N = 128
DEFAULT_EPS_RANGE = (1e-6, 1e-1)
DEFAULT_EPS_COUNT = 20
DEFAULT_SLOPE_FLOOR = 1e-13

# Reference boundary points A, B, C per domain, given to 4 digits.
LABELLED_POINTS = {
    "peanut": {"A": (-0.0894, 0.4040, 0.0), "B": (-0.4349, 0.0, 1.1819), "C": (0.0, 1.0456, 0.8032)},
    "mushroom": {"A": (-1.5559, 2.4816, 0.0), "B": (-1.8307, 0.0, 0.7412), "C": (0.0, 0.7601, 1.1446)},
}


class ConfigError(ValueError):
    pass


class InsufficientPointsError(ValueError):
    pass


PointSpec = Union[str, Tuple[float, float], Tuple[float, float, float]]


@dataclass(frozen=True)
class BoundaryPoint:
    point_id: str
    theta: float
    phi: float
    residual: float = 0.0


@dataclass(frozen=True)
class SweepConfig:
    """One convergence study.

    ``points`` entries are a label from :data:`LABELLED_POINTS`, a Cartesian
    triple on the surface, or a ``(theta*, phi*)`` pair.
    """

    domain: str
    approx: int
    n_values: Tuple[int, ...] = (DEFAULT_N,)
    eps_values: Tuple[float, ...] = ()
    points: Tuple[PointSpec, ...] = ()
    output_path: Optional[str] = None
    approx1_frame: str = "rotated"
    on_surface_tol: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "eps_values", tuple(float(e) for e in self.eps_values) or default_eps_values())
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def surface(self) -> SurfaceDomain:
        return get_domain(self.domain)

    def validate(self) -> None:
        if self.domain not in DOMAINS:
            raise ConfigError(f"unknown domain {self.domain!r}")
        if self.approx not in (1, 2, 3):
            raise ConfigError(f"approx must be 1, 2 or 3, got {self.approx!r}")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n_values must be positive integers")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ConfigError("n_values must be strictly increasing")
        if min(self.eps_values) <= 0:
            raise ConfigError("eps values must be positive")
        if any(b >= a for a, b in zip(self.eps_values, self.eps_values[1:])):
            raise ConfigError("eps_values must be strictly decreasing")
        if not self.points:
            raise ConfigError("at least one evaluation point is required")
        if self.approx1_frame not in ("rotated", "unrotated"):
            raise ConfigError("approx1_frame must be 'rotated' or 'unrotated'")
        self.resolve_points()

    def resolve_points(self) -> List[BoundaryPoint]:
        return [resolve_point(self.surface, p, i, self.on_surface_tol) for i, p in enumerate(self.points)]


def default_eps_values(lo: float = DEFAULT_EPS_RANGE[0], hi: float = DEFAULT_EPS_RANGE[1], count: int = DEFAULT_EPS_COUNT):
    """Log-spaced, strictly decreasing."""
    if count < 1 or not 0 < lo <= hi:
        raise ConfigError(f"bad eps range [{lo}, {hi}] x {count}")
    if count == 1:
        return (float(hi),)
    return tuple(float(e) for e in np.logspace(math.log10(hi), math.log10(lo), count))


def resolve_point(domain: SurfaceDomain, spec: PointSpec, index: int = 0, tol: float = 1e-3) -> BoundaryPoint:
    """Turn a point specification into boundary parameters.

    Labelled points that miss the surface by more than ``tol`` are
    replaced by their nearest boundary point and the miss is logged; any
    other Cartesian point must lie on the surface.
    """
    if isinstance(spec, str):
        table = LABELLED_POINTS.get(domain.name, {})
        if spec not in table:
            raise ConfigError(f"no labelled point {spec!r} for domain {domain.name}")
        p = np.asarray(table[spec], dtype=float)
        residual = surface_residual(domain, p)
        if residual <= tol:
            theta, phi = inverse_parameterize(domain, p, tol)
            return BoundaryPoint(spec, theta, phi, residual)
        try:
            ystar, eps = closest_boundary_point(domain, p)
        except NotInteriorError:
            theta, phi = inverse_parameterize(domain, p, tol=np.inf)
            logger.warning("point %s is %.3e outside the surface; using the radial projection", spec, residual)
            return BoundaryPoint(spec, theta, phi, residual)
        logger.warning("point %s is %.3e off the surface; using its nearest boundary point", spec, eps * domain.ell)
        return BoundaryPoint(spec, ystar.theta, ystar.phi, eps * domain.ell)
    values = tuple(float(v) for v in spec)
    if len(values) == 2:
        theta, phi = values
        if not (0.0 <= theta <= np.pi and -np.pi <= phi <= np.pi):
            raise ConfigError(f"angles {values} outside [0, pi] x [-pi, pi]")
        return BoundaryPoint(f"p{index}", theta, phi, 0.0)
    if len(values) == 3:
        try:
            theta, phi = inverse_parameterize(domain, values, tol)
        except OffSurfaceError as exc:
            raise ConfigError(str(exc)) from None
        return BoundaryPoint(f"p{index}", theta, phi, surface_residual(domain, values))
    raise ConfigError(f"point must be a label, (theta, phi) or (x, y, z); got {spec!r}")


@dataclass
class ErrorRecord:
    domain: str
    approx: int
    n: int
    eps: float
    point_id: str
    theta_star: float
    phi_star: float
    u_exact: float
    u_numeric: float
    abs_error: float = field(init=False)
    log10_error: float = field(init=False)
    status: str = "ok"

    def __post_init__(self):
        self.abs_error = abs(self.u_exact - self.u_numeric)
        if math.isnan(self.abs_error):
            self.log10_error = math.nan
        else:
            self.log10_error = math.log10(max(self.abs_error, LOG10_FLOOR))

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _failed(domain, approx, n, eps, pid, theta, phi, u_exact=math.nan, status="failed") -> ErrorRecord:
    return ErrorRecord(domain, approx, n, eps, pid, theta, phi, u_exact, math.nan, status=status)


def _default_densities(config: SweepConfig, densities: Optional[DensityPair]) -> DensityPair:
    return densities if densities is not None else densities_from_exact(config.surface)


def _point_records(config, densities, solution, bp: BoundaryPoint, n: int) -> List[ErrorRecord]:
    domain = config.surface
    rule = product_rule(n)
    out = []
    try:
        if config.approx == 1 and config.approx1_frame == "unrotated":
            samples = sample_nodes(domain, densities, rule, 0.0, 0.0)
        else:
            samples = sample_nodes(domain, densities, rule, bp.theta, bp.phi)
    except (ValueError, ArithmeticError) as exc:
        logger.warning("sampling failed at %s, n=%d: %s", bp.point_id, n, exc)
        return [_failed(config.domain, config.approx, n, e, bp.point_id, bp.theta, bp.phi) for e in config.eps_values]
    for eps in config.eps_values:
        u_exact = math.nan
        try:
            target = make_target(domain, bp.theta, bp.phi, eps)
            u_exact = float(solution(target.x))
            if config.approx == 1 and config.approx1_frame == "unrotated":
                u_num = evaluate_approx1(domain, densities, target.x, rule, None, samples)
            else:
                u_num = evaluate(config.approx, domain, densities, target, rule, samples)
        except (ValueError, ArithmeticError) as exc:
            logger.warning("evaluation failed at %s, n=%d, eps=%g: %s", bp.point_id, n, eps, exc)
            out.append(_failed(config.domain, config.approx, n, eps, bp.point_id, bp.theta, bp.phi, u_exact))
            continue
        out.append(ErrorRecord(config.domain, config.approx, n, eps, bp.point_id, bp.theta, bp.phi, u_exact, u_num))
    return out


def _run(config, tasks, densities, solution, workers):
    def job(task):
        bp, n = task
        return _point_records(config, densities, solution, bp, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, tasks))
    else:
        chunks = [job(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def run_epsilon_sweep(
    config: SweepConfig,
    densities: Optional[DensityPair] = None,
    solution: Callable = exact_solution,
    workers: int = 1,
) -> List[ErrorRecord]:
    """Error versus eps at fixed N; ordered by point, then eps descending."""
    config.validate()
    if len(config.n_values) != 1:
        raise ConfigError("an eps sweep takes exactly one N; use run_grid_sweep for several")
    points = config.resolve_points()
    tasks = [(bp, config.n_values[0]) for bp in points]
    return _run(config, tasks, _default_densities(config, densities), solution, workers)


def run_grid_sweep(
    config: SweepConfig,
    densities: Optional[DensityPair] = None,
    solution: Callable = exact_solution,
    workers: int = 1,
) -> List[ErrorRecord]:
    """Error over the (N, eps) cross product; per point, N outer and eps inner."""
    config.validate()
    points = config.resolve_points()
    tasks = [(bp, n) for bp in points for n in config.n_values]
    return _run(config, tasks, _default_densities(config, densities), solution, workers)


def parse_plane(plane) -> Tuple[int, float]:
    """``"z=0"`` or ``("z", 0.0)`` to ``(axis_index, value)``."""
    if isinstance(plane, str):
        try:
            axis, value = plane.split("=")
            value = float(value)
        except ValueError:
            raise ConfigError(f"plane must look like 'z=0', got {plane!r}") from None
    else:
        axis, value = plane
    axis = str(axis).strip().lower()
    if axis not in ("x", "y", "z"):
        raise ConfigError(f"plane axis must be x, y or z, got {axis!r}")
    return "xyz".index(axis), float(value)


def _extent(domain: SurfaceDomain) -> np.ndarray:
    theta = np.linspace(0.0, np.pi, 721)
    phi = np.linspace(-np.pi, np.pi, 1441)
    pts = parameterize(domain, theta[:, None], phi[None, :])
    return np.max(np.abs(pts), axis=(0, 1))


def slice_grid(domain: SurfaceDomain, plane, resolution: int):
    """Cell-centred ``resolution x resolution`` grid on an axis-aligned plane."""
    axis, value = parse_plane(plane)
    if resolution < 1:
        raise ConfigError("resolution must be positive")
    ext = _extent(domain)
    if abs(value) >= ext[axis]:
        raise ConfigError(f"plane {plane!r} misses the {domain.name} interior")
    others = [k for k in range(3) if k != axis]
    u = -ext[others[0]] + (np.arange(resolution) + 0.5) * 2 * ext[others[0]] / resolution
    v = -ext[others[1]] + (np.arange(resolution) + 0.5) * 2 * ext[others[1]] / resolution
    pts = np.empty((resolution, resolution, 3))
    pts[..., axis] = value
    pts[..., others[0]] = u[:, None]
    pts[..., others[1]] = v[None, :]
    return pts


def run_field_slice(
    domain: Union[str, SurfaceDomain],
    approx: int,
    n: int,
    plane,
    resolution: int,
    densities: Optional[DensityPair] = None,
    solution: Callable = exact_solution,
    workers: int = 1,
) -> List[ErrorRecord]:
    """Error at every interior grid point of a planar slice.

    Each point is evaluated through its own nearest boundary point. Points
    outside the surface come back with ``status="masked"``.
    """
    if isinstance(domain, str):
        domain = get_domain(domain)
    if approx not in (1, 2, 3):
        raise ConfigError(f"approx must be 1, 2 or 3, got {approx!r}")
    pts = slice_grid(domain, plane, resolution)
    densities = densities if densities is not None else densities_from_exact(domain)
    rule = product_rule(n)
    inside = is_interior(domain, pts)
    name = domain.name

    def job(ij):
        i, j = ij
        pid = f"r{i}c{j}"
        if not inside[i, j]:
            return _failed(name, approx, n, math.nan, pid, math.nan, math.nan, status="masked")
        try:
            ystar, eps = closest_boundary_point(domain, pts[i, j])
            target = Target(ystar, eps, domain.ell)
        except (ValueError, ArithmeticError) as exc:
            logger.warning("closest point failed at %s: %s", pid, exc)
            return _failed(name, approx, n, math.nan, pid, math.nan, math.nan)
        u_exact = float(solution(target.x))
        try:
            u_num = evaluate(approx, domain, densities, target, rule)
        except (ValueError, ArithmeticError) as exc:
            logger.warning("evaluation failed at %s: %s", pid, exc)
            return _failed(name, approx, n, eps, pid, ystar.theta, ystar.phi, u_exact)
        return ErrorRecord(name, approx, n, eps, pid, ystar.theta, ystar.phi, u_exact, u_num)

    cells = [(i, j) for i in range(resolution) for j in range(resolution)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, cells))
    return [job(c) for c in cells]


def fit_slope(eps_values: Sequence[float], errors: Sequence[float], floor: float = DEFAULT_SLOPE_FLOOR) -> float:
    """Least-squares slope of log10(error) against log10(eps), ignoring errors at or below ``floor``."""
    eps = np.asarray(eps_values, dtype=float)
    err = np.asarray(errors, dtype=float)
    if eps.shape != err.shape:
        raise ValueError("eps_values and errors differ in length")
    keep = np.isfinite(err) & (err > floor) & (eps > 0)
    if np.count_nonzero(keep) < 3:
        raise InsufficientPointsError(f"need at least 3 errors above {floor:g}, have {np.count_nonzero(keep)}")
    slope, _ = np.polyfit(np.log10(eps[keep]), np.log10(err[keep]), 1)
    return float(slope)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(records: Iterable[ErrorRecord], path) -> None:
    """Write records under the fixed header; reals carry 17 significant digits.

    ``path`` may also be an open text stream.
    """

    def dump(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, name)) for name in CSV_HEADER])

    if hasattr(path, "write"):
        dump(path)
        return
    try:
        with open(path, "w", newline="") as fh:
            dump(fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> List[ErrorRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            d = dict(zip(CSV_HEADER, row))
            u_numeric = float(d["u_numeric"])
            eps = float(d["eps"])
            if not math.isnan(u_numeric):
                status = "ok"
            elif math.isnan(eps) and math.isnan(float(d["u_exact"])):
                status = "masked"
            else:
                status = "failed"
            out.append(
                ErrorRecord(
                    d["domain"],
                    int(d["approx"]),
                    int(d["n"]),
                    eps,
                    d["point_id"],
                    float(d["theta_star"]),
                    float(d["phi_star"]),
                    float(d["u_exact"]),
                    u_numeric,
                    status=status,
                )
            )
    return out


def slopes_by_series(records: Iterable[ErrorRecord], floor: float = DEFAULT_SLOPE_FLOOR):
    """Fitted slope for every (domain, approx, n, point_id) series, in first-seen order."""
    series = {}
    for rec in records:
        if rec.ok:
            series.setdefault((rec.domain, rec.approx, rec.n, rec.point_id), []).append(rec)
    out = {}
    for key, recs in series.items():
        try:
            out[key] = fit_slope([r.eps for r in recs], [r.abs_error for r in recs], floor)
        except InsufficientPointsError:
            out[key] = math.nan
    return out

