import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import disk_points
from wbinterp.weights import (
    Weight,
    alpha_shift,
    green_mean,
    green_potential,
    parse_weight,
    perturbed_standard_weight,
    potential_gradient_bound,
    radial_bump_weight,
    standard_weight,
    transport_weight,
    weight_mean,
    zero_weight,
)

TEST_WEIGHTS = [standard_weight(1.0), standard_weight(2.5), perturbed_standard_weight(1.0, 0.4),
                radial_bump_weight(1.0, 0.5)]


def test_standard_weight_examples():
    phi = standard_weight(1.0)
    assert phi.value(np.array([0.0]))[0] == 0.0
    assert phi.value(np.sqrt(0.75)) == pytest.approx(np.log(4), abs=1e-14)
    assert np.all(phi.lap(np.array([0.1, 0.5j, -0.9])) == 1.0)
    assert phi.m == phi.M == 1.0
    assert phi.laplacian_source == "analytic"
    with pytest.raises(ValueError):
        standard_weight(0.0)


def test_alpha_shift_examples():
    tau = alpha_shift(standard_weight(1.3), 1.3)
    z = np.array([0.2, 0.5 + 0.5j, -0.9j])
    assert np.allclose(tau(z), 0.0, atol=1e-15)
    assert alpha_shift(Weight(lambda z: 2 * np.abs(z) ** 2, m=2.0, M=5.0), 1.0).bounds == (1.0, 4.0)
    lhs, rhs = alpha_shift(standard_weight(1.0), 0.5).identity_sides(0.3 + 0.4j, 2.0)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_alpha_shift_identity_random_points():
    rng = np.random.default_rng(0)
    z = 0.99 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    for phi in TEST_WEIGHTS:
        lhs, rhs = alpha_shift(phi, 0.7).identity_sides(z, 1.5)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_weight_mean_examples():
    r = 0.6
    assert weight_mean(standard_weight(1.5), r) == pytest.approx(1.5 * np.log(1 / (1 - r * r)), abs=1e-13)
    harmonic = Weight(lambda z: np.real(z**3 + 2 * z))
    assert abs(weight_mean(harmonic, r)) < 1e-14
    assert weight_mean(Weight(lambda z: np.abs(z) ** 2), r) == pytest.approx(r * r, abs=1e-14)


def test_green_mean_examples():
    assert green_mean(standard_weight(2.0), 0.5) == pytest.approx(2 * np.log(4 / 3), abs=1e-10)
    assert green_mean(standard_weight(2.0), 0.5) == pytest.approx(0.575364, abs=1e-6)
    harmonic = Weight(lambda z: np.real(z), laplacian=lambda z: np.zeros(np.shape(z)))
    assert green_mean(harmonic, 0.7) == 0.0


@pytest.mark.parametrize("phi", TEST_WEIGHTS, ids=lambda w: w.name)
@pytest.mark.parametrize("r", [0.3, 0.5, 0.7, 0.9])
def test_green_and_circle_means_agree(phi, r):
    assert green_mean(phi, r) == pytest.approx(weight_mean(phi, r), abs=1e-4)


@pytest.mark.parametrize("phi", TEST_WEIGHTS, ids=lambda w: w.name)
def test_weight_mean_nondecreasing(phi):
    vals = [weight_mean(phi, r) for r in np.linspace(0.05, 0.95, 19)]
    assert np.all(np.diff(vals) >= -1e-12)


def test_weight_bounds_hold_on_samples():
    rng = np.random.default_rng(1)
    z = 0.95 * np.sqrt(rng.uniform(size=200)) * np.exp(2j * np.pi * rng.uniform(size=200))
    for phi in TEST_WEIGHTS:
        assert phi.check_bounds(z)
    fd = Weight(TEST_WEIGHTS[3].value, m=TEST_WEIGHTS[3].m, M=TEST_WEIGHTS[3].M)
    assert fd.laplacian_source == "finite-difference"
    assert fd.check_bounds(z[:40], tol=1e-4)


def test_parse_weight():
    assert parse_weight("standard:1.5").M == 1.5
    assert parse_weight("perturbed-standard:1:0.2").m == 1.0
    assert parse_weight("zero").M == 0.0
    for bad in ("standard", "standard:x", "circle:1", "perturbed-standard:1"):
        with pytest.raises(ValueError):
            parse_weight(bad)


@settings(max_examples=40, deadline=None)
@given(disk_points(0.8), st.floats(0.1, 0.9))
def test_transport_keeps_laplacian_and_centered_mean(a, r):
    phi = perturbed_standard_weight(1.2, 0.3)
    pa = transport_weight(phi, a)
    z = np.array([0.1, 0.4j, -0.5 + 0.2j])
    assert np.allclose(pa.lap(z), 1.2)
    # phi o M_a has the same circle means as the standard weight up to a harmonic term
    assert weight_mean(pa, r) == pytest.approx(1.2 * np.log(1 / (1 - r * r)), abs=1e-9)


def test_green_potential_harmonic_is_zero():
    harmonic = Weight(lambda z: np.real(z), laplacian=lambda z: np.zeros(np.shape(z)))
    pot = green_potential(harmonic, 0.3, grid_res=16)
    assert np.allclose(pot(np.array([0.0, 0.5j, -0.4])), 0.0, atol=1e-14)


def test_green_potential_standard_at_origin():
    phi = standard_weight(1.0)
    pot = green_potential(phi, 0.0, grid_res=32)
    z = np.array([0.3, 0.5j, -0.2 + 0.6j])
    assert pot(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(pot(z), phi.value(z), atol=1e-5)


@pytest.mark.parametrize("phi", TEST_WEIGHTS[1:], ids=lambda w: w.name)
def test_green_potential_laplacian_and_positivity(phi):
    a = 0.3 + 0.2j
    pot = green_potential(phi, a, grid_res=32)
    assert pot.laplacian_error < 1e-3
    rng = np.random.default_rng(2)
    z = 0.9 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
    assert np.all(pot(z) >= -1e-3)
    assert pot.C >= 0 and np.isfinite(pot.C)
    assert np.all(np.isfinite(potential_gradient_bound(pot, z[:5])))


def test_zero_weight():
    phi = zero_weight()
    assert phi.value(np.array([0.5]))[0] == 0.0
    assert weight_mean(phi, 0.5) == 0.0
