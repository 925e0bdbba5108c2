"""Benchmark surfaces given by a radial profile over the unit sphere.

Every surface is written as

    y(theta, phi) = r(theta) * (a1 sin(theta) cos(phi), a2 sin(theta) sin(phi), a3 cos(theta))

with ``(a1, a2, a3)`` the axis scale. The three profiles used here depend on
``theta`` only through ``c = cos(theta)``, so they are stored as ``R(c)`` with
analytic first and second derivatives in ``c``. That keeps the surface, its
normal and the closest-point iteration smooth through the poles.

All functions accept numpy arrays and broadcast over ``theta`` and ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

__all__ = [
    "SurfaceDomain",
    "SurfacePoint",
    "SPHERE",
    "PEANUT",
    "MUSHROOM",
    "DOMAINS",
    "get_domain",
    "DegeneratePoleError",
    "OffSurfaceError",
    "NotInteriorError",
    "radial_profile",
    "parameterize",
    "parameter_derivatives",
    "surface_frame",
    "frame_arrays",
    "inverse_parameterize",
    "surface_residual",
    "evaluation_point",
    "closest_boundary_point",
    "is_interior",
]


class DegeneratePoleError(ValueError):
    """A normal or Jacobian was requested exactly at theta = 0 or pi."""


class OffSurfaceError(ValueError):
    """A Cartesian point is too far from the surface to be parameterized."""


class NotInteriorError(ValueError):
    """A point expected strictly inside the domain is outside or on the boundary."""


PROFILE_KINDS = ("sphere", "peanut", "mushroom")


@dataclass(frozen=True)
class SurfaceDomain:
    """Closed star-shaped surface ``r(theta) * diag(axis_scale) * v(theta, phi)``."""

    profile_kind: str
    axis_scale: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    ell: float = 1.0

    def __post_init__(self):
        if self.profile_kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.profile_kind!r}")
        if len(self.axis_scale) != 3 or min(self.axis_scale) <= 0:
            raise ValueError("axis_scale must be three positive numbers")
        if self.ell <= 0:
            raise ValueError("ell must be positive")

    @property
    def name(self) -> str:
        return self.profile_kind

    @property
    def scale(self) -> np.ndarray:
        return np.asarray(self.axis_scale, dtype=float)


SPHERE = SurfaceDomain("sphere", (1.0, 1.0, 1.0), 1.0)
PEANUT = SurfaceDomain("peanut", (1.0, 2.0, 1.0), 1.0)
MUSHROOM = SurfaceDomain("mushroom", (1.0, 2.0, 1.0), 1.0)
DOMAINS = {d.profile_kind: d for d in (SPHERE, PEANUT, MUSHROOM)}


def get_domain(name: str) -> SurfaceDomain:
    try:
        return DOMAINS[name]
    except KeyError:
        raise ValueError(f"unknown domain {name!r}; choose from {sorted(DOMAINS)}") from None


@dataclass(frozen=True)
class SurfacePoint:
    """A boundary sample with its outward unit normal and Jacobian factor.

    ``jacobian`` is ``J`` in ``d(sigma) = J sin(theta) d(theta) d(phi)``.
    """

    theta: float
    phi: float
    position: np.ndarray
    normal: np.ndarray
    jacobian: float

    def __post_init__(self):
        for name in ("position", "normal"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


# ---------------------------------------------------------------------------
# Radial profiles as functions of c = cos(theta)
# ---------------------------------------------------------------------------


def _profile_c(kind: str, c):
    """Return ``(R, dR/dc, d2R/dc2)`` for the profile ``r(theta) = R(cos theta)``."""
    c = np.asarray(c, dtype=float)
    if kind == "sphere":
        one = np.ones_like(c)
        return one, np.zeros_like(c), np.zeros_like(c)
    if kind == "peanut":
        # r^2 = cos(2 theta) + sqrt(1.1 - sin^2(2 theta))
        #     = 2c^2 - 1 + sqrt(1.1 - 4c^2 + 4c^4)
        c2 = c * c
        q = 1.1 - 4.0 * c2 + 4.0 * c2 * c2
        dq = -8.0 * c + 16.0 * c2 * c
        ddq = -8.0 + 48.0 * c2
        sq = np.sqrt(q)
        g = 2.0 * c2 - 1.0 + sq
        dg = 4.0 * c + dq / (2.0 * sq)
        ddg = 4.0 + ddq / (2.0 * sq) - dq * dq / (4.0 * q * sq)
        R = np.sqrt(g)
        dR = dg / (2.0 * R)
        ddR = ddg / (2.0 * R) - dg * dg / (4.0 * R**3)
        return R, dR, ddR
    if kind == "mushroom":
        h = 1.0 + 100.0 * (1.0 - c)
        return 2.0 - 1.0 / h, -100.0 / h**2, -20000.0 / h**3
    raise ValueError(f"unknown profile kind {kind!r}")


def radial_profile(domain: SurfaceDomain, theta):
    """Return ``(r(theta), r'(theta))``."""
    theta = np.asarray(theta, dtype=float)
    R, dR, _ = _profile_c(domain.profile_kind, np.cos(theta))
    r_prime = -np.sin(theta) * dR
    if r_prime.ndim == 0:
        return float(R), float(r_prime)
    return R, r_prime


def _radial_second(domain: SurfaceDomain, theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    _, dR, ddR = _profile_c(domain.profile_kind, c)
    return s * s * ddR - c * dR


# ---------------------------------------------------------------------------
# Parameterization, derivatives, normals
# ---------------------------------------------------------------------------


def _direction(theta, phi):
    st = np.sin(theta)
    return np.stack(np.broadcast_arrays(st * np.cos(phi), st * np.sin(phi), np.cos(theta)), axis=-1)


def parameterize(domain: SurfaceDomain, theta, phi) -> np.ndarray:
    """Surface position ``y(theta, phi)``; shape ``broadcast(theta, phi) + (3,)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    R, _, _ = _profile_c(domain.profile_kind, np.cos(theta))
    return (R[..., None] * domain.scale) * _direction(theta, phi)


def parameter_derivatives(domain: SurfaceDomain, theta, phi):
    """Analytic ``(dy/dtheta, dy/dphi)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r, dr = radial_profile(domain, theta)
    r = np.asarray(r)[..., None]
    dr = np.asarray(dr)[..., None]
    a = domain.scale
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    v = _direction(theta, phi) * a
    v_theta = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st), axis=-1) * a
    v_phi = np.stack(np.broadcast_arrays(-st * sp, st * cp, 0.0 * st * cp), axis=-1) * a
    return dr * v + r * v_theta, r * v_phi


def frame_arrays(domain: SurfaceDomain, theta, phi):
    """Return ``(position, normal, jacobian)`` arrays.

    ``J = |y_theta x y_phi| / sin(theta)`` is formed from ``y_phi / sin(theta)``,
    which has a finite limit, so the result is regular at the poles too.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    y = parameterize(domain, theta, phi)
    y_theta, _ = parameter_derivatives(domain, theta, phi)
    r, _ = radial_profile(domain, theta)
    a = domain.scale
    cp, sp = np.cos(phi), np.sin(phi)
    y_phi_over_sin = np.asarray(r)[..., None] * np.stack(
        np.broadcast_arrays(-sp * a[0], cp * a[1], 0.0 * cp), axis=-1
    )
    cross = np.cross(y_theta, y_phi_over_sin)
    jac = np.linalg.norm(cross, axis=-1)
    normal = cross / jac[..., None]
    # star-shaped about the origin: outward means n . y > 0
    flip = np.sum(normal * y, axis=-1) < 0
    normal = np.where(flip[..., None], -normal, normal)
    return y, normal, jac


def surface_frame(domain: SurfaceDomain, theta: float, phi: float, allow_pole: bool = False) -> SurfacePoint:
    """Boundary point with outward normal and Jacobian.

    Raises :class:`DegeneratePoleError` at ``theta in {0, pi}`` unless
    ``allow_pole`` is set, in which case the polar limits are returned.
    """
    theta = float(theta)
    phi = float(phi)
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta={theta} outside [0, pi]")
    if not allow_pole and (theta == 0.0 or theta == np.pi):
        raise DegeneratePoleError(f"normal/Jacobian requested at the pole theta={theta}")
    y, n, j = frame_arrays(domain, theta, phi)
    return SurfacePoint(theta, phi, y, n, float(j))


def inverse_parameterize(domain: SurfaceDomain, p, tol: float = 1e-3) -> Tuple[float, float]:
    """Recover ``(theta, phi)`` of a Cartesian point on the surface.

    The direction of ``p / axis_scale`` fixes both angles. ``phi`` is 0 on the
    polar axis. Raises :class:`OffSurfaceError` if the reconstructed point is
    farther than ``tol`` from ``p``.
    """
    theta, phi = _direction_angles(np.asarray(p, dtype=float) / domain.scale)
    residual = float(np.linalg.norm(parameterize(domain, theta, phi) - np.asarray(p, dtype=float)))
    if residual > tol:
        raise OffSurfaceError(f"point {tuple(p)} is {residual:.3e} from the {domain.name} surface (tol {tol:g})")
    return theta, phi


def surface_residual(domain: SurfaceDomain, p) -> float:
    """Distance between ``p`` and the surface point on the same ray."""
    theta, phi = _direction_angles(np.asarray(p, dtype=float) / domain.scale)
    return float(np.linalg.norm(parameterize(domain, theta, phi) - np.asarray(p, dtype=float)))


def _direction_angles(q):
    rho = np.hypot(q[0], q[1])
    theta = float(np.arctan2(rho, q[2]))
    phi = float(np.arctan2(q[1], q[0])) if rho > 0 else 0.0
    if phi == -np.pi:
        phi = np.pi
    return theta, phi


def evaluation_point(ystar: SurfacePoint, eps: float, ell: float = 1.0) -> np.ndarray:
    """Interior point at normal distance ``eps * ell`` from ``ystar``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return ystar.position - eps * ell * ystar.normal


# ---------------------------------------------------------------------------
# Inside test and closest point
# ---------------------------------------------------------------------------


def is_interior(domain: SurfaceDomain, x, margin: float = 1e-13):
    """True where ``x`` lies strictly inside the surface (vectorized over ``x[..., :]``)."""
    q = np.asarray(x, dtype=float) / domain.scale
    rad = np.linalg.norm(q, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(rad > 0, q[..., 2] / np.where(rad > 0, rad, 1.0), 1.0)
    R, _, _ = _profile_c(domain.profile_kind, np.clip(c, -1.0, 1.0))
    return rad < R - margin


SCAN_SHAPE = (64, 128)
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50


@lru_cache(maxsize=None)
def _scan_grid(domain: SurfaceDomain):
    n_theta, n_phi = SCAN_SHAPE
    theta = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    phi = -np.pi + 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    pts = parameterize(domain, tt, pp)
    pts.setflags(write=False)
    return tt, pp, pts


def _surface_on_direction(domain: SurfaceDomain, w):
    """Position and first/second directional derivatives of ``Y(w) = R(w3) A w``."""
    a = domain.scale
    R, dR, ddR = (float(v) for v in _profile_c(domain.profile_kind, w[2]))
    Aw = a * w
    return R * Aw, R, dR, ddR, Aw


def _tangent_basis(w):
    helper = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(w, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(w, e1)
    return e1, e2


def _newton_on_sphere(domain: SurfaceDomain, x, w):
    """Damped Newton for min 0.5|Y(w) - x|^2 over unit directions ``w``.

    Returns ``(w, converged)``.
    """
    a = domain.scale

    def objective(w):
        y, *_ = _surface_on_direction(domain, w)
        d = y - x
        return 0.5 * float(d @ d)

    f = objective(w)
    for _ in range(NEWTON_MAXITER):
        y, R, dR, ddR, Aw = _surface_on_direction(domain, w)
        d = y - x
        e1, e2 = _tangent_basis(w)
        basis = (e1, e2)
        dY = [dR * e[2] * Aw + R * a * e for e in basis]
        grad = np.array([d @ dY[0], d @ dY[1]])
        if np.max(np.abs(grad)) < NEWTON_TOL:
            return w, True
        # second derivative of w(alpha, beta) = normalize(w + alpha e1 + beta e2) is -w delta_ij
        dYw = dR * w[2] * Aw + R * a * w
        hess = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                ei, ej = basis[i], basis[j]
                d2 = ddR * ei[2] * ej[2] * Aw + dR * (ei[2] * a * ej + ej[2] * a * ei)
                if i == j:
                    d2 = d2 - dYw
                hess[i, j] = dY[i] @ dY[j] + d @ d2
        try:
            evals = np.linalg.eigvalsh(hess)
            if evals[0] <= 0:
                raise np.linalg.LinAlgError
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -grad / max(np.linalg.norm(grad), 1e-300) * 1e-2
        lam = 1.0
        while True:
            w_new = w + lam * (step[0] * e1 + step[1] * e2)
            w_new /= np.linalg.norm(w_new)
            f_new = objective(w_new)
            if f_new <= f or lam < 1e-12:
                break
            lam *= 0.5
        if lam < 1e-12 and f_new > f:
            # no descent direction left at working precision
            return w, np.max(np.abs(grad)) < 1e-9
        if np.linalg.norm(lam * step) < 1e-16:
            return w_new, True
        w, f = w_new, f_new
    return w, False


def closest_boundary_point(domain: SurfaceDomain, x) -> Tuple[SurfacePoint, float]:
    """Nearest boundary point to an interior ``x`` and the scaled distance ``eps``.

    A 64 x 128 parameter scan seeds a damped Newton iteration on the squared
    distance. Newton runs on unit directions rather than on ``(theta, phi)``
    so that minimizers at the poles converge too. If Newton fails the scan
    minimum is returned.
    """
    x = np.asarray(x, dtype=float)
    if not bool(is_interior(domain, x)):
        raise NotInteriorError(f"{tuple(x)} is not strictly inside the {domain.name} surface")
    tt, pp, pts = _scan_grid(domain)
    dist2 = np.sum((pts - x) ** 2, axis=-1)
    # ties up to roundoff go to the first cell in row-major order
    k = int(np.flatnonzero(dist2 <= dist2.min() * (1.0 + 1e-12))[0])
    theta0, phi0 = float(tt.flat[k]), float(pp.flat[k])
    w0 = _direction(theta0, phi0)
    w, converged = _newton_on_sphere(domain, x, w0)
    if converged:
        theta, phi = _direction_angles(w)
    else:
        theta, phi = theta0, phi0
    ystar = surface_frame(domain, theta, phi, allow_pole=True)
    eps = float(np.linalg.norm(x - ystar.position)) / domain.ell
    return ystar, eps
