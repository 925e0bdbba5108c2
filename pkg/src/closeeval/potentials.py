"""Laplace layer potentials evaluated near the boundary.

Three discretizations of the interior representation formula

    u(x) = -(1/4pi) int n(y).(x - y)/|x - y|^3 mu(y) dsigma + (1/4pi) int rho(y)/|x - y| dsigma

are provided, all integrated with the rotated product rule:

* :func:`evaluate_approx1` -- the formula as written (O(1) error close to B),
* :func:`evaluate_approx2` -- the double layer written against ``mu - mu(y*)``
  using Gauss' law (O(eps) error),
* :func:`evaluate_approx3` -- additionally the single layer replaced by its
  first-order expansion in ``eps`` about ``y*`` (O(eps^2) error).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .geometry import SurfaceDomain, SurfacePoint, frame_arrays, surface_frame
from .quadrature import ProductRule, quadrature_weights, rotated_nodes
from .reference import DensityPair

__all__ = [
    "CoincidentPointsError",
    "Target",
    "make_target",
    "NodeSamples",
    "sample_nodes",
    "dlp_kernel",
    "slp_kernel",
    "evaluate_approx1",
    "evaluate_approx2",
    "evaluate_approx3",
    "evaluate",
    "gauss_law_check",
]

_TINY = 1e-300


class CoincidentPointsError(ValueError):
    pass


@dataclass(frozen=True)
class Target:
    """Close evaluation point ``x = y* - eps * ell * n*``."""

    ystar: SurfacePoint
    eps: float
    ell: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def x(self) -> np.ndarray:
        return self.ystar.position - self.eps * self.ell * self.ystar.normal


def make_target(domain: SurfaceDomain, theta_star: float, phi_star: float, eps: float) -> Target:
    return Target(surface_frame(domain, theta_star, phi_star, allow_pole=True), float(eps), domain.ell)


@dataclass(frozen=True)
class NodeSamples:
    """Surface data at the nodes of a product rule rotated to ``(theta*, phi*)``."""

    theta_star: float
    phi_star: float
    weights: np.ndarray
    position: np.ndarray
    normal: np.ndarray
    jacobian: np.ndarray
    mu: np.ndarray
    rho: np.ndarray


def sample_nodes(
    domain: SurfaceDomain, densities: DensityPair, rule: ProductRule, theta_star: float = 0.0, phi_star: float = 0.0
) -> NodeSamples:
    """Evaluate geometry and densities once; reusable across every ``eps`` at one ``y*``."""
    theta, phi = rotated_nodes(rule, theta_star, phi_star)
    y, n, jac = frame_arrays(domain, theta, phi)
    mu = np.broadcast_to(densities.mu(theta, phi), theta.shape)
    rho = np.broadcast_to(densities.rho(theta, phi), theta.shape)
    return NodeSamples(float(theta_star), float(phi_star), quadrature_weights(rule), y, n, jac, mu, rho)


def _check_distance(r):
    if np.min(r) < _TINY:
        raise CoincidentPointsError("evaluation point coincides with a boundary node")


def dlp_kernel(y, n_y, x):
    """``n_y . (x - y) / |x - y|^3``, vectorized over leading axes of ``y`` and ``n_y``."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(diff, axis=-1)
    _check_distance(r)
    out = np.sum(np.asarray(n_y, dtype=float) * diff, axis=-1) / r**3
    return float(out) if out.ndim == 0 else out


def slp_kernel(y, x):
    """``1 / |x - y|``."""
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)
    _check_distance(r)
    out = 1.0 / r
    return float(out) if out.ndim == 0 else out


def _samples_for(domain, densities, rule, theta_star, phi_star, samples):
    if samples is None:
        return sample_nodes(domain, densities, rule, theta_star, phi_star)
    if (samples.theta_star, samples.phi_star) != (float(theta_star), float(phi_star)):
        raise ValueError("node samples were taken for a different rotation centre")
    return samples


def evaluate_approx1(
    domain: SurfaceDomain,
    densities: DensityPair,
    x,
    rule: ProductRule,
    frame_angles: Optional[Tuple[float, float]] = None,
    samples: Optional[NodeSamples] = None,
) -> float:
    """Representation formula with no subtraction.

    ``frame_angles`` centres the rotated grid; ``None`` uses the plain
    ``(theta, phi)`` grid.
    """
    theta_star, phi_star = frame_angles if frame_angles is not None else (0.0, 0.0)
    smp = _samples_for(domain, densities, rule, theta_star, phi_star, samples)
    x = np.asarray(x, dtype=float)
    diff = x - smp.position
    r = np.linalg.norm(diff, axis=-1)
    _check_distance(r)
    k = np.sum(smp.normal * diff, axis=-1) / r**3
    integrand = smp.jacobian * (-k * smp.mu + smp.rho / r)
    return float(np.sum(smp.weights * integrand))


def _target_geometry(target: Target, smp: NodeSamples):
    ystar = target.ystar
    d0 = ystar.position - smp.position
    d = d0 - target.eps * target.ell * ystar.normal
    r = np.linalg.norm(d, axis=-1)
    _check_distance(r)
    return d0, d, r


def evaluate_approx2(
    domain: SurfaceDomain,
    densities: DensityPair,
    target: Target,
    rule: ProductRule,
    samples: Optional[NodeSamples] = None,
) -> float:
    """``mu(y*)`` plus the subtracted double layer and the plain single layer."""
    ystar = target.ystar
    smp = _samples_for(domain, densities, rule, ystar.theta, ystar.phi, samples)
    mu_star = float(densities.mu(ystar.theta, ystar.phi))
    _, d, r = _target_geometry(target, smp)
    k = np.sum(smp.normal * d, axis=-1) / r**3
    integrand = smp.jacobian * (-k * (smp.mu - mu_star) + smp.rho / r)
    return mu_star + float(np.sum(smp.weights * integrand))


def evaluate_approx3(
    domain: SurfaceDomain,
    densities: DensityPair,
    target: Target,
    rule: ProductRule,
    samples: Optional[NodeSamples] = None,
) -> float:
    """As :func:`evaluate_approx2` with the single layer expanded to first order in ``eps``.

    The single layer becomes its on-surface value plus ``eps * ell`` times the
    normal-derivative kernel at ``eps = 0``, minus ``(eps * ell / 2) rho(y*)``.
    The two weakly singular integrands are handled by the same rule.
    """
    ystar = target.ystar
    smp = _samples_for(domain, densities, rule, ystar.theta, ystar.phi, samples)
    mu_star = float(densities.mu(ystar.theta, ystar.phi))
    rho_star = float(densities.rho(ystar.theta, ystar.phi))
    h = target.eps * target.ell
    d0, d, r = _target_geometry(target, smp)
    r0 = np.linalg.norm(d0, axis=-1)
    _check_distance(r0)
    k = np.sum(smp.normal * d, axis=-1) / r**3
    k0_star = np.sum(ystar.normal * d0, axis=-1) / r0**3
    integrand = smp.jacobian * (-k * (smp.mu - mu_star) + smp.rho / r0 + h * k0_star * smp.rho)
    return mu_star - 0.5 * h * rho_star + float(np.sum(smp.weights * integrand))


def evaluate(
    approx: int,
    domain: SurfaceDomain,
    densities: DensityPair,
    target: Target,
    rule: ProductRule,
    samples: Optional[NodeSamples] = None,
) -> float:
    """Dispatch on ``approx`` in {1, 2, 3} for a close target."""
    if approx == 1:
        ystar = target.ystar
        return evaluate_approx1(domain, densities, target.x, rule, (ystar.theta, ystar.phi), samples)
    if approx == 2:
        return evaluate_approx2(domain, densities, target, rule, samples)
    if approx == 3:
        return evaluate_approx3(domain, densities, target, rule, samples)
    raise ValueError(f"approx must be 1, 2 or 3, got {approx!r}")


def gauss_law_check(
    domain: SurfaceDomain, x, rule: ProductRule, frame_angles: Optional[Tuple[float, float]] = None
) -> float:
    """Double-layer potential of the unit density: -1 inside, 0 outside."""
    theta_star, phi_star = frame_angles if frame_angles is not None else (0.0, 0.0)
    theta, phi = rotated_nodes(rule, theta_star, phi_star)
    y, n, jac = frame_arrays(domain, theta, phi)
    k = dlp_kernel(y, n, x)
    return float(np.sum(quadrature_weights(rule) * jac * k))
