import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closeeval.rotation import rotated_angles, rotation_matrix, unit_vector

angle_theta = st.floats(min_value=0.0, max_value=math.pi)
angle_phi = st.floats(min_value=-math.pi, max_value=math.pi)


def test_identity_at_north_pole():
    np.testing.assert_allclose(rotation_matrix(0.0, 0.0).matrix, np.eye(3), atol=1e-16)


def test_columns_are_local_frame():
    theta, phi = 1.1, -0.7
    m = rotation_matrix(theta, phi).matrix
    np.testing.assert_allclose(m[:, 2], unit_vector(theta, phi), atol=1e-16)
    np.testing.assert_allclose(m[:, 1], [-math.sin(phi), math.cos(phi), 0.0], atol=1e-16)
    np.testing.assert_allclose(
        m[:, 0], [math.cos(theta) * math.cos(phi), math.cos(theta) * math.sin(phi), -math.sin(theta)], atol=1e-16
    )


def test_random_rotations_are_orthogonal():
    rng = np.random.default_rng(0)
    for theta, phi in zip(rng.uniform(0, math.pi, 1000), rng.uniform(-math.pi, math.pi, 1000)):
        m = rotation_matrix(theta, phi).matrix
        assert np.max(np.abs(m.T @ m - np.eye(3))) < 1e-14
        assert abs(np.linalg.det(m) - 1) < 1e-14


def test_matrix_is_read_only():
    with pytest.raises(ValueError):
        rotation_matrix(0.3, 0.4).matrix[0, 0] = 1.0


def test_rotated_pole_maps_to_centre():
    assert rotated_angles(0.0, 0.0, math.pi / 2, 0.0) == pytest.approx((math.pi / 2, 0.0), abs=1e-15)


def test_equator_example():
    theta, phi = rotated_angles(math.pi / 2, 0.0, 0.0, 0.0)
    assert theta == pytest.approx(math.pi / 2, abs=1e-15)
    assert phi == pytest.approx(0.0, abs=1e-15)


def test_axis_gets_zero_azimuth():
    assert rotated_angles(0.0, 0.3, 0.0, 0.0) == (0.0, 0.0)


@settings(max_examples=300, deadline=None)
@given(angle_theta, angle_phi, angle_phi)
def test_centre_is_fixed(theta_star, phi_star, t):
    theta, phi = rotated_angles(0.0, t, theta_star, phi_star)
    assert abs(theta - theta_star) < 1e-12
    if 1e-6 < theta_star < math.pi - 1e-6:
        assert abs(math.remainder(phi - phi_star, 2 * math.pi)) < 1e-9


@settings(max_examples=300, deadline=None)
@given(angle_theta, angle_phi, angle_theta, angle_phi)
def test_consistent_with_matrix(theta_star, phi_star, s, t):
    theta, phi = rotated_angles(s, t, theta_star, phi_star)
    assert 0.0 <= theta <= math.pi
    assert -math.pi < phi <= math.pi
    expected = rotation_matrix(theta_star, phi_star).matrix @ unit_vector(s, t)
    np.testing.assert_allclose(unit_vector(theta, phi), expected, atol=1e-12)


def test_vectorized_shapes():
    s = np.linspace(0, math.pi, 7)[:, None]
    t = np.linspace(-math.pi, math.pi, 5)[None, :]
    theta, phi = rotated_angles(s, t, 0.4, 2.0)
    assert theta.shape == phi.shape == (7, 5)
