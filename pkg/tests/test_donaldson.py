import numpy as np
import pytest

from bml import bergman as bg
from bml import bundles as bd
from bml import donaldson as don


def closed_form(t: float) -> float:
    """Log-det energy of the weight-(1, -1) path on O at level one."""
    return 2.0 * t / np.tanh(2.0 * t) - 1.0 if t > 0 else 0.0


def line_pair():
    basis = bd.section_basis(bd.split(0), 1)
    return basis, bg.one_ps(np.diag([1.0, -1.0]))


def catalog_pair():
    basis = bd.section_basis(bd.split(0, 2), 3)
    return basis, bg.two_step_one_ps(basis, [1], (2.0 / 3.0, -1.0))


def test_m2_vanishes_at_identity(grid_p1):
    basis, _ = catalog_pair()
    assert don.m2_don(basis, grid_p1, bg.identity_form(basis.dimension)) == pytest.approx(0.0, abs=1e-12)


def test_m2_closed_form(grid_p1_fine):
    basis, ps = line_pair()
    ts = [0.25, 0.5, 1.0, 1.5, 2.0]
    vals = don.m2_along_path(basis, grid_p1_fine, ps, ts)
    for t, v in zip(ts, vals):
        assert v == pytest.approx(closed_form(t), abs=1e-8)


def test_m1_closed_form(grid_p1_fine):
    # for this self-dual path the curvature pairing equals the log-det energy
    basis, ps = line_pair()
    ts = [0.5, 1.0, 2.0]
    vals = don.m1_curve(basis, grid_p1_fine, ps, ts, n_path=48, method="analytic")
    for t, v in zip(ts, vals):
        assert v == pytest.approx(closed_form(t), abs=1e-6)


def test_curvature_degree_analytic(grid_p1):
    basis, _ = catalog_pair()
    f = don.curvature_field(basis, grid_p1, bg.identity_form(basis.dimension), method="analytic")
    deg = grid_p1.integrate(np.trace(f, axis1=1, axis2=2).real)
    assert deg == pytest.approx(2.0, abs=1e-9)


def test_curvature_fd_matches_analytic(grid_p1):
    basis, ps = catalog_pair()
    form = ps.form_at(0.5)
    fa = don.curvature_field(basis, grid_p1, form, method="analytic")
    ff = don.curvature_field(basis, grid_p1, form, method="fd")
    scale = np.abs(fa).max()
    assert np.abs(fa - ff).max() < 1e-4 * scale


def test_richardson_check(grid_p1):
    basis, _ = catalog_pair()
    deg = don.richardson_check_curvature(
        basis, grid_p1, bg.identity_form(basis.dimension), fd_step=1e-3
    )
    assert deg == pytest.approx(2.0, abs=1e-6)


def test_m1_rate_fd_matches_analytic(grid_p1):
    basis, ps = catalog_pair()
    a = don.m1_rate(basis, grid_p1, ps, 0.8, method="analytic")
    b = don.m1_rate(basis, grid_p1, ps, 0.8, method="fd")
    assert a == pytest.approx(b, rel=1e-6)


def test_curvature_requires_p1(grid_p2):
    basis = bd.section_basis(bd.euler_tp2(), 1)
    with pytest.raises(NotImplementedError):
        don.curvature_field(basis, grid_p2, bg.identity_form(basis.dimension))


def test_m_don_composition(grid_p1):
    from fractions import Fraction

    basis, ps = catalog_pair()
    t = 2.0
    combined = don.m_don(basis, grid_p1, ps, t, Fraction(1), n_path=32, method="analytic")
    m1 = don.m1_don(basis, grid_p1, ps, t, n_path=32, method="analytic")
    m2 = don.m2_along_path(basis, grid_p1, ps, [t])[0]
    assert combined == pytest.approx(m1 + m2, abs=1e-12)


def test_m2_slope_catalog(grid_p1):
    basis, ps = catalog_pair()
    ts = np.linspace(1.0, 12.0, 12)
    vals = don.m2_along_path(basis, grid_p1, ps, ts)
    fit = don.asymptotic_slope_fit(ts, vals, t_min=6.0)
    assert fit.slope == pytest.approx(-2.0 / 3.0, rel=1e-3)


def test_slope_fit_exact_line():
    ts = np.linspace(0.0, 10.0, 11)
    fit = don.asymptotic_slope_fit(ts, 3.0 * ts - 1.0, t_min=0.0)
    assert fit.slope == pytest.approx(3.0, abs=1e-12)
    assert fit.intercept == pytest.approx(-1.0, abs=1e-12)
    assert fit.residual < 1e-12


def test_slope_fit_needs_tail_samples():
    ts = np.linspace(0.0, 10.0, 11)
    with pytest.raises(don.InsufficientSamples):
        don.asymptotic_slope_fit(ts, ts, t_min=9.0)


def test_relative_error_property():
    from fractions import Fraction

    ts = np.linspace(0.0, 10.0, 11)
    fit = don.asymptotic_slope_fit(ts, -2.0 * ts, t_min=0.0, predicted=Fraction(-2))
    assert fit.relative_error == pytest.approx(0.0, abs=1e-14)
