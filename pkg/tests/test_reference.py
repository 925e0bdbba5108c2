import math

import numpy as np
import pytest

from closeeval.geometry import DOMAINS, PEANUT, surface_frame
from closeeval.reference import (
    constant_densities,
    densities_from_exact,
    exact_gradient,
    exact_solution,
    sphere_kernel_oracles,
)
from closeeval.rotation import unit_vector


def test_spot_values():
    assert exact_solution([0.0, 0.0, 0.0]) == 0.0
    assert exact_solution([math.pi / 2, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-16)
    assert exact_solution([0.0, math.pi / 2, 1.0]) == pytest.approx(math.e, abs=1e-15)


def test_vectorized():
    x = np.random.default_rng(0).normal(size=(4, 5, 3))
    assert exact_solution(x).shape == (4, 5)
    assert exact_gradient(x).shape == (4, 5, 3)


def test_harmonic():
    rng = np.random.default_rng(1)
    h = 1e-3
    for x in rng.uniform(-2, 2, size=(20, 3)):
        lap = sum(
            exact_solution(x + h * e) - 2 * exact_solution(x) + exact_solution(x - h * e) for e in np.eye(3)
        ) / h**2
        assert abs(lap) < 1e-5


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    h = 1e-6
    for x in rng.uniform(-2, 2, size=(20, 3)):
        fd = [(exact_solution(x + h * e) - exact_solution(x - h * e)) / (2 * h) for e in np.eye(3)]
        np.testing.assert_allclose(exact_gradient(x), fd, atol=1e-8)


@pytest.mark.parametrize("domain", list(DOMAINS.values()))
def test_boundary_data(domain):
    dens = densities_from_exact(domain)
    for theta, phi in [(0.3, 0.1), (math.pi / 2, 1.987), (2.8, -2.0)]:
        sp = surface_frame(domain, theta, phi)
        assert dens.mu(theta, phi) == pytest.approx(exact_solution(sp.position), abs=1e-15)
        assert dens.rho(theta, phi) == pytest.approx(sp.normal @ exact_gradient(sp.position), abs=1e-14)


def test_peanut_point_a_trace():
    mu = densities_from_exact(PEANUT).mu(math.pi / 2, math.atan2(0.2020, -0.0894))
    # the surface point sits within 1e-4 of the printed coordinates
    assert mu == pytest.approx(math.sin(-0.0894) + math.sin(0.4040), abs=2e-4)


def test_constant_densities_broadcast():
    dens = constant_densities(2.0, -1.0)
    theta = np.zeros((3, 4))
    assert np.all(dens.mu(theta, 0.0) == 2.0)
    assert dens.rho(theta, theta).shape == (3, 4)


class TestSphereOracles:
    def test_against_direct_geometry(self):
        rng = np.random.default_rng(3)
        for s, eps in zip(rng.uniform(0.01, math.pi - 0.01, 100), 10 ** rng.uniform(-6, -0.5, 100)):
            x = np.array([0.0, 0.0, 1.0 - eps])
            y = unit_vector(s, 0.4)
            r = np.linalg.norm(x - y)
            dlp = y @ (x - y) / r**3
            k_sin, g_sin = sphere_kernel_oracles(s, eps)
            assert g_sin == pytest.approx(math.sin(s) / r, rel=1e-12)
            assert dlp * math.sin(s) == pytest.approx(-(k_sin + g_sin) / 2, rel=1e-9)
            assert -(2 * dlp + 1 / r) * math.sin(s) == pytest.approx(k_sin, rel=1e-9, abs=1e-12)

    def test_near_surface_peak(self):
        eps = 1e-3
        k_sin, _ = sphere_kernel_oracles(eps, eps)
        assert k_sin > 100
        assert sphere_kernel_oracles(0.0, eps)[0] == 0.0

    def test_poisson_kernel_mass(self):
        # (1/2) int_0^pi K_sin ds = 1 for the Poisson kernel of the unit ball
        from numpy.polynomial.legendre import leggauss

        z, w = leggauss(400)
        s = math.pi * (z + 1) / 2
        for eps in (0.5, 0.1):
            k_sin, _ = sphere_kernel_oracles(s, eps)
            assert 0.5 * (math.pi / 2) * np.sum(w * k_sin) == pytest.approx(1.0, abs=1e-10)

    def test_unit_radius_limit(self):
        k_sin, g_sin = sphere_kernel_oracles(np.array([0.5, 1.0]), 1.0)
        np.testing.assert_allclose(k_sin, np.sin([0.5, 1.0]), atol=1e-15)
        np.testing.assert_allclose(g_sin, np.sin([0.5, 1.0]), atol=1e-15)
