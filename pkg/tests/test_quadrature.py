import math

import numpy as np
import pytest

from bml.quadrature import (
    NonFiniteIntegrand,
    build_grid,
    build_grid_p1,
    build_grid_p2,
    pairwise_sum,
)


def test_p1_volume_is_one(grid_p1):
    assert grid_p1.volume == pytest.approx(1.0, abs=1e-12)


def test_p1_inverse_power_moments(grid_p1):
    # int (1+|z|^2)^(-d) dmu = 1/(d+1) for the unit-volume study measure
    s = np.abs(grid_p1.nodes) ** 2
    for d in (1, 2, 3, 5):
        val = grid_p1.integrate((1.0 + s) ** (-d))
        assert val == pytest.approx(1.0 / (d + 1), rel=1e-12)


def test_p1_log_moment(grid_p1):
    # int log(1+|z|^2)/(1+|z|^2) dmu = int_1^inf t^-3 log t dt = 1/4
    s = np.abs(grid_p1.nodes) ** 2
    val = grid_p1.integrate(np.log1p(s) / (1.0 + s))
    assert val == pytest.approx(0.25, rel=1e-9)


def test_p1_odd_moment_vanishes(grid_p1):
    z = grid_p1.nodes
    val = grid_p1.integrate((z / (1.0 + np.abs(z) ** 2) ** 2).real)
    assert abs(val) < 1e-14


def test_p2_volume(grid_p2):
    # normalized so that the surface carries total mass 1/2
    assert grid_p2.volume == pytest.approx(0.5, rel=1e-10)


def test_pairwise_sum_matches_fsum(rng):
    vals = rng.normal(size=1001) * 10.0 ** rng.integers(-8, 8, size=1001)
    assert pairwise_sum(vals) == pytest.approx(math.fsum(vals), rel=1e-14)


def test_nonfinite_integrand_rejected(grid_p1):
    vals = np.ones(grid_p1.nodes.size)
    vals[3] = np.nan
    with pytest.raises(NonFiniteIntegrand):
        grid_p1.integrate(vals)


def test_build_grid_dispatch():
    assert build_grid("P1", n_radial=4, n_angular=8, depth=6).space_tag == "P1"
    assert build_grid("P2", n_simplex=3, n_angular=6, depth=4).space_tag == "P2"
    with pytest.raises(ValueError):
        build_grid("P3")


def test_refinement_converges():
    coarse = build_grid_p1(n_radial=4, n_angular=8, depth=6)
    fine = build_grid_p1(n_radial=8, n_angular=16, depth=10)
    f = lambda z: np.exp(-np.abs(z) ** 2) / (1.0 + np.abs(z) ** 2)
    a = coarse.integrate(f(coarse.nodes))
    b = fine.integrate(f(fine.nodes))
    assert a == pytest.approx(b, rel=1e-7)
