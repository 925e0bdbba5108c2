"""Gauss-Legendre rules and the rotated spherical product rule.

The polar integral is taken in the angle ``s`` itself (``s = pi (z + 1) / 2``
with ``z`` the Gauss-Legendre nodes), not in ``cos(s)``; the azimuth uses a
``2N``-point periodic trapezoid rule. Neither end of ``(0, pi)`` is ever
sampled, so the peak of a nearly singular integrand at ``s = 0`` is never
evaluated.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rotation import rotated_angles

__all__ = [
    "InvalidOrderError",
    "ProductRule",
    "gauss_legendre",
    "product_rule",
    "rotated_nodes",
    "integrate_rotated",
    "MAX_ORDER",
]

MAX_ORDER = 2048
_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


class InvalidOrderError(ValueError):
    pass


def _legendre_and_derivative(n: int, x: np.ndarray):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(n: int):
    """Nodes (ascending) and weights of the ``n``-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on the three-term recurrence, started from
    ``cos(pi (i - 1/4) / (n + 1/2))``.
    """
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_ORDER:
        raise InvalidOrderError(f"Gauss-Legendre order must be an integer in [1, {MAX_ORDER}], got {n!r}")
    n = int(n)
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce the exact symmetry of the rule
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@dataclass(frozen=True)
class ProductRule:
    n: int
    polar_nodes: np.ndarray
    polar_weights: np.ndarray
    azimuth_nodes: np.ndarray

    @property
    def prefactor(self) -> float:
        return np.pi / (8.0 * self.n)


_cache: dict = {}
_cache_lock = threading.Lock()


def product_rule(n: int) -> ProductRule:
    """Cached ``N x 2N`` product rule; arrays are read-only."""
    with _cache_lock:
        rule = _cache.get(n)
    if rule is not None:
        return rule
    z, w = gauss_legendre(n)
    s = np.pi * (z + 1.0) / 2.0
    t = -np.pi + np.pi * np.arange(2 * n) / n
    for arr in (s, w, t):
        arr.setflags(write=False)
    rule = ProductRule(int(n), s, w, t)
    with _cache_lock:
        return _cache.setdefault(n, rule)


def rotated_nodes(rule: ProductRule, theta_star: float, phi_star: float):
    """Parameter-space ``(theta, phi)`` of every node, shape ``(N, 2N)``."""
    ss, tt = np.meshgrid(rule.polar_nodes, rule.azimuth_nodes, indexing="ij")
    return rotated_angles(ss, tt, theta_star, phi_star)


def quadrature_weights(rule: ProductRule) -> np.ndarray:
    """``(pi / 8N) w_i sin(s_i)`` broadcast over the azimuth, shape ``(N, 2N)``."""
    col = rule.prefactor * rule.polar_weights * np.sin(rule.polar_nodes)
    return np.broadcast_to(col[:, None], (rule.n, 2 * rule.n))


def integrate_rotated(rule: ProductRule, theta_star: float, phi_star: float, f: Callable) -> float:
    """``(1/4pi) * integral of f over the sphere``, on the grid rotated to ``(theta*, phi*)``.

    ``f(theta, phi)`` is called once with ``(N, 2N)`` arrays.
    """
    theta, phi = rotated_nodes(rule, theta_star, phi_star)
    vals = np.broadcast_to(np.asarray(f(theta, phi), dtype=float), theta.shape)
    inner = vals.sum(axis=1)
    return float(rule.prefactor * np.sum(rule.polar_weights * np.sin(rule.polar_nodes) * inner))
