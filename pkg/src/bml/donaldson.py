"""Energy functionals along metric paths and their asymptotic slopes.

Two ingredients make up the Donaldson-type energy of a path of
Fubini-Study metrics: the log-det part

    M2(H) = (1/Vol) int log det( h_H h_ref^{-1} ) dmu,

which is frame-independent, and the curvature pairing

    M1 = int_0^T dt int_X tr( g^{-1} dg/dt . F[g] ),

evaluated on the honest bundle metrics g.  The raw sandwich
h = Q* H Q transforms as the metric on the dual bundle, so the honest
metric is the transpose inverse (twisted back from E(k) to E); the
log-det energy of the honest path is exactly -M2 of the raw path, which
is why the combined energy below reads M1 + mu(E) * M2 in terms of the
raw log-det.  Along a degeneration generated by a rational weight
matrix, the combined energy grows linearly with the exact rational slope
computed in exactsheaf, which is what the slope-fit helpers verify.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .bergman import HermitianForm, OnePS, fs_metric
from .bundles import SectionBasis, dq_dz_field, h_ref_field, q_field
from .quadrature import QuadratureGrid


class InsufficientSamples(ValueError):
    pass


class StepTooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# Log-det energy


def _logdet_ratio(h: np.ndarray, href: np.ndarray) -> np.ndarray:
    sign_h, ld_h = np.linalg.slogdet(h)
    sign_r, ld_r = np.linalg.slogdet(href)
    if (sign_h <= 0).any() or (sign_r <= 0).any():
        raise ValueError("metric determinant lost positivity")
    return ld_h - ld_r


def m2_don(basis: SectionBasis, grid: QuadratureGrid, form: HermitianForm) -> float:
    """Normalized log-det energy of h_H against h_ref."""
    h = fs_metric(basis, grid, form).values
    href = h_ref_field(basis, grid)
    return grid.integrate(_logdet_ratio(h, href)) / grid.volume


def m2_along_path(
    basis: SectionBasis, grid: QuadratureGrid, ps: OnePS, ts: Sequence[float]
) -> np.ndarray:
    """M2 sampled at the given path times, sharing the Q evaluations."""
    q = q_field(basis, grid.nodes)
    href = np.einsum("mni,mnj->mij", q.conj(), q)
    lam = np.concatenate(
        [np.full(s.stop - s.start, w) for w, s in zip(ps.weights, ps.slices)]
    )
    vq = np.einsum("kn,mnr->mkr", ps.vectors.conj().T, q)
    out = []
    for t in ts:
        b = np.exp(lam * t)[None, :, None] * vq
        h = np.einsum("mki,mkj->mij", b.conj(), b)
        out.append(grid.integrate(_logdet_ratio(h, href)) / grid.volume)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# Curvature


def _honest_metric_eval(
    basis: SectionBasis, form: HermitianForm
) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluator z -> g(z) of the honest bundle metric on E: the
    transpose inverse of Q* H Q, twisted down by (1+|z|^2)^level."""
    k = basis.level

    def g_eval(z: np.ndarray) -> np.ndarray:
        q = q_field(basis, z)
        h = np.einsum("mni,nk,mkj->mij", q.conj(), form.matrix, q)
        tw = (1.0 + np.abs(z) ** 2) ** k
        return tw[:, None, None] * np.linalg.inv(np.swapaxes(h, -1, -2))

    return g_eval


def _fd4(f_plus1, f_minus1, f_plus2, f_minus2, step):
    return (8.0 * (f_plus1 - f_minus1) - (f_plus2 - f_minus2)) / (12.0 * step)


def curvature_field(
    basis: SectionBasis,
    grid: QuadratureGrid,
    form: HermitianForm,
    fd_step: float = 1e-3,
    method: str = "fd",
) -> np.ndarray:
    """Chern curvature density of the honest metric, shape (M, r, r).

    Normalized as a density against the quadrature measure:
    grid.integrate(trace of the result) equals the degree of E.  The
    default evaluates nested fourth-order central differences of
    A = g^{-1} dg/dz in the chart; method="analytic" uses the closed-form
    derivatives of Q instead and serves as an independent cross-check.
    """
    if grid.space_tag != "P1":
        raise NotImplementedError("curvature implemented on the P1 catalog")
    z = np.asarray(grid.nodes)
    if method == "analytic":
        f_dens = _curvature_analytic(basis, form, z)
    elif method == "fd":
        # chart-adapted step: the metric varies on the scale 1 + |z|, so a
        # relative step keeps both truncation and roundoff uniform
        step = fd_step * (1.0 + np.abs(z))
        f_dens = _curvature_fd(_honest_metric_eval(basis, form), z, step)
    else:
        raise ValueError(f"unknown method {method!r}")
    # convert the dx dy density to a density against the FS measure
    jac = np.pi * (1.0 + np.abs(z) ** 2) ** 2
    return jac[:, None, None] * f_dens


def _connection_fd(g_eval, z, step):
    sc = step[:, None, None]
    gs = {}
    for j in (-2, -1, 1, 2):
        gs[("x", j)] = g_eval(z + j * step)
        gs[("y", j)] = g_eval(z + 1j * j * step)
    gx = _fd4(gs[("x", 1)], gs[("x", -1)], gs[("x", 2)], gs[("x", -2)], sc)
    gy = _fd4(gs[("y", 1)], gs[("y", -1)], gs[("y", 2)], gs[("y", -2)], sc)
    gz = 0.5 * (gx - 1j * gy)
    return np.linalg.inv(g_eval(z)) @ gz


def _curvature_fd(g_eval, z, step):
    sc = step[:, None, None]
    a = {}
    for j in (-2, -1, 1, 2):
        a[("x", j)] = _connection_fd(g_eval, z + j * step, step)
        a[("y", j)] = _connection_fd(g_eval, z + 1j * j * step, step)
    ax = _fd4(a[("x", 1)], a[("x", -1)], a[("x", 2)], a[("x", -2)], sc)
    ay = _fd4(a[("y", 1)], a[("y", -1)], a[("y", 2)], a[("y", -2)], sc)
    azbar = 0.5 * (ax + 1j * ay)
    return -azbar / np.pi


def _curvature_analytic(basis: SectionBasis, form: HermitianForm, z: np.ndarray):
    """Closed-form curvature density via the holomorphic derivatives of Q."""
    k = basis.level
    q = q_field(basis, z)
    d = dq_dz_field(basis, z)
    hmat = form.matrix
    h = np.einsum("mni,nk,mkj->mij", q.conj(), hmat, q)
    ht = np.swapaxes(h, -1, -2)
    ht_inv = np.linalg.inv(ht)
    # derivatives of h^T_{ij} = sum_{n,k} Q_{n i} H^T_{n k} conj(Q)_{k j}
    dz_ht = np.einsum("mni,nk,mkj->mij", d, hmat.T, q.conj())
    dzbar_ht = np.einsum("mni,nk,mkj->mij", q, hmat.T, d.conj())
    dzdzbar_ht = np.einsum("mni,nk,mkj->mij", d, hmat.T, d.conj())
    term = (dzdzbar_ht - dz_ht @ ht_inv @ dzbar_ht) @ ht_inv
    u2 = np.abs(z) ** 2
    fs_part = k / (1.0 + u2) ** 2
    f_dens = -(fs_part[:, None, None] * np.eye(basis.rank)[None] - term) / np.pi
    return f_dens


def richardson_check_curvature(
    basis: SectionBasis,
    grid: QuadratureGrid,
    form: HermitianForm,
    fd_step: float,
    tol: float = 1e-4,
) -> float:
    """Compare the degree integral at the given step and half the step;
    raises StepTooLarge when they disagree beyond tol."""
    full = grid.integrate(
        np.trace(curvature_field(basis, grid, form, fd_step), axis1=1, axis2=2).real
    )
    half = grid.integrate(
        np.trace(curvature_field(basis, grid, form, fd_step / 2), axis1=1, axis2=2).real
    )
    if abs(full - half) > tol:
        raise StepTooLarge(f"degree integral moved {abs(full - half):.2e} on halving")
    return half


# ---------------------------------------------------------------------------
# Curvature pairing M1


def m1_rate(
    basis: SectionBasis,
    grid: QuadratureGrid,
    ps: OnePS,
    t: float,
    fd_step: float = 1e-3,
    method: str = "fd",
) -> float:
    """d/dt of the curvature-pairing energy at path time t:
    int_X tr( g^{-1} dg/dt . F[g] )."""
    form = ps.form_at(t)
    q = q_field(basis, grid.nodes)
    h = np.einsum("mni,nk,mkj->mij", q.conj(), form.matrix, q)
    u = 2.0 * ps.generator
    hdot = np.einsum("mni,nk,mkj->mij", q.conj(), form.matrix @ u, q)
    # honest-path logarithmic derivative: g^{-1} dg/dt = -(hdot h^{-1})^T
    g_dot = -np.swapaxes(np.linalg.inv(h) @ hdot, -1, -2)
    f = curvature_field(basis, grid, form, fd_step=fd_step, method=method)
    integrand = np.einsum("mij,mji->m", g_dot, f).real
    return grid.integrate(integrand)


def m1_curve(
    basis: SectionBasis,
    grid: QuadratureGrid,
    ps: OnePS,
    ts: Sequence[float],
    n_path: int = 64,
    fd_step: float = 1e-3,
    method: str = "fd",
) -> np.ndarray:
    """M1 at each requested time, as the cumulative t-integral of the
    rate over a shared Gauss-Legendre subdivision of [0, max(ts)]."""
    ts = np.asarray(sorted(ts), dtype=float)
    x, w = np.polynomial.legendre.leggauss(max(4, n_path // max(1, len(ts))))
    out = []
    total = 0.0
    lo = 0.0
    for t in ts:
        if t > lo:
            nodes = 0.5 * (t - lo) * (x + 1.0) + lo
            rates = [
                m1_rate(basis, grid, ps, tv, fd_step=fd_step, method=method)
                for tv in nodes
            ]
            total += 0.5 * (t - lo) * float(np.dot(w, rates))
            lo = t
        out.append(total)
    return np.asarray(out)


def m1_don(
    basis: SectionBasis,
    grid: QuadratureGrid,
    ps: OnePS,
    t_end: float,
    n_path: int = 64,
    fd_step: float = 1e-3,
    method: str = "fd",
) -> float:
    """Curvature-pairing energy from time 0 to t_end."""
    if t_end == 0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(n_path)
    nodes = 0.5 * t_end * (x + 1.0)
    rates = [
        m1_rate(basis, grid, ps, tv, fd_step=fd_step, method=method) for tv in nodes
    ]
    return 0.5 * t_end * float(np.dot(w, rates))


def m_don(
    basis: SectionBasis,
    grid: QuadratureGrid,
    ps: OnePS,
    t: float,
    mu_e: Fraction,
    n_path: int = 64,
    method: str = "fd",
) -> float:
    """Combined energy M1 - mu(E) * (honest log-det energy).

    The honest log-det energy is the negative of the raw m2_don (the raw
    sandwich is the dual metric), hence the plus sign below.
    """
    m1 = m1_don(basis, grid, ps, t, n_path=n_path, method=method)
    m2 = m2_along_path(basis, grid, ps, [t])[0]
    return m1 + float(mu_e) * m2


# ---------------------------------------------------------------------------
# Slope fitting


@dataclass(frozen=True)
class SlopeFit:
    times: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float
    predicted: Optional[Fraction] = None

    @property
    def relative_error(self) -> Optional[float]:
        if self.predicted is None or self.predicted == 0:
            return None
        return abs(self.slope - float(self.predicted)) / abs(float(self.predicted))


def asymptotic_slope_fit(
    times, values, t_min: float, predicted: Optional[Fraction] = None
) -> SlopeFit:
    """Affine least squares on the tail window t >= t_min."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = times >= t_min
    if sel.sum() < 5:
        raise InsufficientSamples("need at least 5 tail samples")
    tt, vv = times[sel], values[sel]
    a = np.stack([tt, np.ones_like(tt)], axis=1)
    coef, res, _, _ = np.linalg.lstsq(a, vv, rcond=None)
    fitted = a @ coef
    return SlopeFit(
        times=tt,
        values=vv,
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residual=float(np.sqrt(np.mean((fitted - vv) ** 2))),
        predicted=predicted,
    )
