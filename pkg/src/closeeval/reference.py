"""Manufactured harmonic solution, boundary densities and unit-sphere kernel oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import SurfaceDomain, frame_arrays, parameterize

__all__ = [
    "DensityPair",
    "exact_solution",
    "exact_gradient",
    "densities_from_exact",
    "constant_densities",
    "sphere_kernel_oracles",
]


@dataclass(frozen=True)
class DensityPair:
    """Dirichlet density ``mu`` and Neumann density ``rho`` as fields of ``(theta, phi)``.

    Both callables must accept numpy arrays and broadcast.
    """

    mu: Callable
    rho: Callable


def exact_solution(x) -> np.ndarray:
    """``u(x) = exp(x3) (sin x1 + sin x2)``, harmonic in all of R^3."""
    x = np.asarray(x, dtype=float)
    return np.exp(x[..., 2]) * (np.sin(x[..., 0]) + np.sin(x[..., 1]))


def exact_gradient(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = np.exp(x[..., 2])
    return np.stack([e * np.cos(x[..., 0]), e * np.cos(x[..., 1]), e * (np.sin(x[..., 0]) + np.sin(x[..., 1]))], axis=-1)


def densities_from_exact(domain: SurfaceDomain, solution=exact_solution, gradient=exact_gradient) -> DensityPair:
    """Boundary trace ``mu = u(y)`` and normal derivative ``rho = n . grad u(y)``."""

    def mu(theta, phi):
        return solution(parameterize(domain, theta, phi))

    def rho(theta, phi):
        y, n, _ = frame_arrays(domain, theta, phi)
        return np.sum(n * gradient(y), axis=-1)

    return DensityPair(mu, rho)


def constant_densities(mu_value: float = 1.0, rho_value: float = 0.0) -> DensityPair:
    def mu(theta, phi):
        return np.full(np.broadcast(theta, phi).shape, float(mu_value))

    def rho(theta, phi):
        return np.full(np.broadcast(theta, phi).shape, float(rho_value))

    return DensityPair(mu, rho)


def sphere_kernel_oracles(s, eps):
    """Closed forms on the unit sphere for ``x = (0, 0, 1 - eps)`` and ``y`` at polar angle ``s``.

    Returns ``(K_sin, G_sin)`` with

        K_sin = (2 eps - eps^2) sin(s) / d^3
        G_sin = sin(s) / d,     d^2 = 2 (1 - eps)(1 - cos s) + eps^2.

    ``K_sin`` is the Poisson-kernel form; the raw double-layer kernel
    ``n . (x - y) / |x - y|^3`` equals ``-(K_sin + G_sin) / (2 sin s)`` here.
    """
    s = np.asarray(s, dtype=float)
    eps = np.asarray(eps, dtype=float)
    d2 = 2.0 * (1.0 - eps) * (1.0 - np.cos(s)) + eps * eps
    sin_s = np.where(s == np.pi, 0.0, np.sin(s))
    k_sin = (2.0 * eps - eps * eps) * sin_s * d2**-1.5
    g_sin = sin_s * d2**-0.5
    if k_sin.ndim == 0:
        return float(k_sin), float(g_sin)
    return k_sin, g_sin
