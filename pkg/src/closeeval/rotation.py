"""Rotation that moves a chosen point of the parameter sphere to the north pole.

For a boundary point with parameters ``(theta*, phi*)`` the rotated frame has

    e1 = ( cos(theta*) cos(phi*), cos(theta*) sin(phi*), -sin(theta*))
    e2 = (-sin(phi*),             cos(phi*),              0          )
    e3 = ( sin(theta*) cos(phi*), sin(theta*) sin(phi*),  cos(theta*))

as the columns of ``R``, so that ``v(theta, phi) = R v(s, t)`` and ``s = 0``
lands on ``(theta*, phi*)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RotationFrame", "rotation_matrix", "rotated_angles", "unit_vector"]


@dataclass(frozen=True)
class RotationFrame:
    theta_star: float
    phi_star: float
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def unit_vector(theta, phi) -> np.ndarray:
    """``(sin theta cos phi, sin theta sin phi, cos theta)`` stacked on the last axis."""
    st = np.sin(theta)
    return np.stack(np.broadcast_arrays(st * np.cos(phi), st * np.sin(phi), np.cos(theta)), axis=-1)


def rotation_matrix(theta_star: float, phi_star: float) -> RotationFrame:
    ct, st = np.cos(theta_star), np.sin(theta_star)
    cp, sp = np.cos(phi_star), np.sin(phi_star)
    m = np.array(
        [
            [ct * cp, -sp, st * cp],
            [ct * sp, cp, st * sp],
            [-st, 0.0, ct],
        ]
    )
    return RotationFrame(float(theta_star), float(phi_star), m)


def rotated_angles(s, t, theta_star: float, phi_star: float):
    """Map rotated-frame angles ``(s, t)`` back to ``(theta, phi)``.

    Both angles use the two-argument arctangent, giving ``theta`` in
    ``[0, pi]`` and ``phi`` in ``(-pi, pi]``; ``phi`` is 0 on the polar axis.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    ct, st = np.cos(theta_star), np.sin(theta_star)
    cp, sp = np.cos(phi_star), np.sin(phi_star)
    ss, cs = np.sin(s), np.cos(s)
    sct, sst = ss * np.cos(t), ss * np.sin(t)
    xi = ct * cp * sct - sp * sst + st * cp * cs
    eta = ct * sp * sct + cp * sst + st * sp * cs
    zeta = -st * sct + ct * cs
    rho = np.hypot(xi, eta)
    theta = np.arctan2(rho, zeta)
    phi = np.where(rho > 0, np.arctan2(eta, xi), 0.0)
    phi = np.where(phi == -np.pi, np.pi, phi)
    if theta.ndim == 0:
        return float(theta), float(phi)
    return theta, phi
