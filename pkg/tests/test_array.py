import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ncdoa.array import UlaGeometry, manifold, steering_vector
from ncdoa.errors import DomainError

angles = st.floats(0.01, 179.99)


def scalar_steering(m, spacing, theta_deg):
    # element-by-element evaluation, independent of the vectorized path
    tau = 2 * math.pi * spacing * math.cos(math.radians(theta_deg))
    return [cmath.exp(1j * k * tau) for k in range(m)]


def test_broadside_is_flat():
    assert_allclose(steering_vector(UlaGeometry(4, 0.5), 90.0), np.ones(4), atol=1e-15)


def test_quarter_turn_ramp():
    assert_allclose(steering_vector(UlaGeometry(3, 0.5), 60.0), [1, 1j, -1], atol=1e-15)


def test_matches_scalar_oracle():
    a = steering_vector(UlaGeometry(5, 0.5), 35.0)
    assert_allclose(a, scalar_steering(5, 0.5, 35.0), rtol=0, atol=1e-14)
    assert a[0] == 1


@pytest.mark.parametrize("bad", [0.0, 180.0, -3.0, 200.0, float("nan")])
def test_out_of_range_angle(bad):
    with pytest.raises(DomainError):
        steering_vector(UlaGeometry(4), bad)


@pytest.mark.parametrize("m, d", [(1, 0.5), (4, 0.0), (4, -1.0)])
def test_bad_geometry(m, d):
    with pytest.raises(DomainError):
        UlaGeometry(m, d)


def test_manifold_columns():
    g = UlaGeometry(6)
    thetas = [35.0, 65.0, 75.0, 85.0]
    a = manifold(g, thetas)
    assert a.shape == (6, 4)
    for i, t in enumerate(thetas):
        assert_allclose(a[:, i], steering_vector(g, t))
    assert np.linalg.svd(a, compute_uv=False)[-1] > 1e-6
    assert_allclose(manifold(g, thetas[::-1]), a[:, ::-1])
    assert_allclose(manifold(g, [40.0]), steering_vector(g, 40.0)[:, None])


def test_manifold_rejects_duplicates():
    with pytest.raises(DomainError):
        manifold(UlaGeometry(4), [30.0, 50.0, 30.0])


@given(angles, st.integers(2, 12), st.floats(0.05, 1.0))
def test_unit_modulus(theta, m, d):
    assert_allclose(np.abs(steering_vector(UlaGeometry(m, d), theta)), 1.0, atol=1e-12)


@given(angles, angles)
def test_injective_half_wavelength(t1, t2):
    if abs(t1 - t2) < 0.1:
        return
    g = UlaGeometry(4, 0.5)
    assert np.linalg.norm(steering_vector(g, t1) - steering_vector(g, t2)) > 0


@settings(max_examples=30)
@given(st.lists(angles, min_size=1, max_size=6, unique=True), st.randoms(use_true_random=False))
def test_permutation_equivariance(thetas, rnd):
    g = UlaGeometry(5)
    perm = list(range(len(thetas)))
    rnd.shuffle(perm)
    assert_allclose(manifold(g, [thetas[i] for i in perm]), manifold(g, thetas)[:, perm])
