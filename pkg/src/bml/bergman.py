"""Fubini-Study metrics, one-parameter degenerations and their limits.

A hermitian form H on the section space induces the fibre metric
h(x) = Q(x)* H Q(x).  A trace-free hermitian generator zeta drives the
path H(t) = e^{2 zeta t}; as t grows the path degenerates along the
weight filtration of zeta, and conjugating by the weight exponential in
an adapted frame produces a finite renormalized limit on the locus where
the filtration stays locally free.  This module also provides the two
pointwise operator identities that make these paths subgeodesics: the
pairwise commutation of the sandwiched moment matrices and the
factorization of the second time-derivative as F*F >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .bundles import SectionBasis, q_field, h_ref_field
from .quadrature import QuadratureGrid


class DegenerateMetric(ValueError):
    pass


class DegenerateSamples(ValueError):
    pass


class StepTooLarge(ValueError):
    pass


_CLUSTER_TOL = 1e-9


@dataclass(frozen=True)
class HermitianForm:
    """Positive-definite hermitian form on the section space."""

    matrix: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if np.abs(m - m.conj().T).max() > 1e-13 * max(1.0, np.abs(m).max()):
            raise ValueError("form must be hermitian")
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m).min() <= 0:
            raise ValueError("form must be positive definite")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def identity_form(n: int) -> HermitianForm:
    return HermitianForm(np.eye(n), provenance="identity")


@dataclass(frozen=True)
class OnePS:
    """Trace-free hermitian generator with clustered eigenvalues.

    ``weights`` are the distinct eigenvalues in strictly decreasing
    order (ties merged at tolerance 1e-9); ``vectors[:, i]`` spans the
    eigenspaces, grouped so that columns ``slices[i]`` belong to
    ``weights[i]``.  Construction rescales the generator so its operator
    norm is at most one and records the factor.
    """

    generator: np.ndarray
    weights: tuple
    slices: tuple
    vectors: np.ndarray
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def form_at(self, t: float) -> HermitianForm:
        """The path form H(t) = e^{2 zeta t}."""
        lam = np.concatenate(
            [np.full(s.stop - s.start, w) for w, s in zip(self.weights, self.slices)]
        )
        m = (self.vectors * np.exp(2.0 * lam * t)) @ self.vectors.conj().T
        return HermitianForm(0.5 * (m + m.conj().T), provenance=f"exp(t={t})")

    def flag_basis(self, i: int) -> np.ndarray:
        """Columns spanning the flag step of the first i+1 weight groups."""
        return self.vectors[:, : self.slices[i].stop]


def one_ps(zeta: np.ndarray, normalize: bool = True) -> OnePS:
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[0]
    if np.abs(zeta - zeta.conj().T).max() > 1e-12 * max(1.0, np.abs(zeta).max()):
        raise ValueError("generator must be hermitian")
    zeta = 0.5 * (zeta + zeta.conj().T)
    if abs(np.trace(zeta).real) > 1e-12 * n * max(1.0, np.abs(zeta).max()):
        raise ValueError("generator must be trace-free")
    scale = 1.0
    norm = np.abs(np.linalg.eigvalsh(zeta)).max() if np.abs(zeta).max() > 0 else 0.0
    if normalize and norm > 1.0 + 1e-12:
        scale = norm
        zeta = zeta / norm
    lam, vec = np.linalg.eigh(zeta)
    order = np.argsort(-lam)
    lam, vec = lam[order], vec[:, order]
    # cluster numerically equal eigenvalues into one weight
    weights, slices = [], []
    start = 0
    for i in range(1, n + 1):
        if i == n or lam[i] < lam[start] - _CLUSTER_TOL:
            weights.append(float(np.mean(lam[start:i])))
            slices.append(slice(start, i))
            start = i
    return OnePS(
        generator=zeta,
        weights=tuple(weights),
        slices=tuple(slices),
        vectors=vec,
        scale=scale,
    )


def two_step_one_ps(basis: SectionBasis, sub_columns, weights) -> OnePS:
    """Block-diagonal two-step generator: the first weight on the section
    block of the named summands, the second on the complement.

    ``sub_columns`` is a list of summand indices of a split bundle; the
    corresponding monomial blocks of the deterministic basis ordering
    get weight ``weights[0]``.
    """
    if basis.bundle.kind != "split_p1":
        raise ValueError("two-step generators are defined for split bundles")
    w1, w2 = float(weights[0]), float(weights[1])
    diag = np.full(basis.dimension, w2)
    for col in sub_columns:
        offset, coeffs = basis.data[col]
        diag[offset : offset + coeffs.size] = w1
    if abs(diag.sum()) > 1e-12 * basis.dimension:
        raise ValueError("weights are not trace-free for these block sizes")
    return one_ps(np.diag(diag))


def random_two_weight_ps(n: int, rng: np.random.Generator) -> OnePS:
    """Random trace-free generator with exactly two distinct weights and a
    Haar-random eigenframe; operator norm one."""
    m = int(rng.integers(1, n))
    w1, w2 = n - m, -m
    scale = max(abs(w1), abs(w2))
    lam = np.concatenate([np.full(m, w1 / scale), np.full(n - m, w2 / scale)])
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    u, _ = np.linalg.qr(g)
    return one_ps((u * lam) @ u.conj().T)


# ---------------------------------------------------------------------------
# Metric fields


@dataclass(frozen=True)
class MetricField:
    """Per-node positive hermitian fibre matrices on a quadrature grid."""

    grid: QuadratureGrid
    values: np.ndarray  # (M, r, r)
    mask: Optional[np.ndarray] = None  # True where the node is valid

    @property
    def rank(self) -> int:
        return self.values.shape[-1]

    def min_eigenvalue(self) -> float:
        vals = self.values if self.mask is None else self.values[self.mask]
        return float(np.linalg.eigvalsh(vals)[:, 0].min())


def fs_metric(basis: SectionBasis, grid: QuadratureGrid, form: HermitianForm) -> MetricField:
    """Fibrewise metric h(x) = Q(x)* H Q(x)."""
    q = q_field(basis, grid.nodes)
    h = np.einsum("mni,nk,mkj->mij", q.conj(), form.matrix, q)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    if np.linalg.eigvalsh(h)[:, 0].min() < 1e-300:
        raise DegenerateMetric("fibre metric underflowed to singular")
    return MetricField(grid=grid, values=h)


def bergman_path(basis: SectionBasis, grid: QuadratureGrid, ps: OnePS, t: float) -> MetricField:
    """Metric along the degeneration path at time t.

    Assembled from the square-root factor e^{zeta t} V* Q so the result is
    positive semidefinite by construction even when the weight spread
    makes the form e^{2 zeta t} numerically singular.
    """
    if t < 0:
        raise ValueError("path time must be nonnegative")
    lam = np.concatenate(
        [np.full(s.stop - s.start, w) for w, s in zip(ps.weights, ps.slices)]
    )
    half = np.exp(lam * t)[:, None] * ps.vectors.conj().T  # (N, N)
    q = q_field(basis, grid.nodes)
    b = np.einsum("kn,mnr->mkr", half, q)
    h = np.einsum("mki,mkj->mij", b.conj(), b)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    if np.linalg.eigvalsh(h)[:, 0].min() < 1e-300:
        raise DegenerateMetric("path metric underflowed to singular")
    return MetricField(grid=grid, values=h)


# ---------------------------------------------------------------------------
# Weight filtrations


def weight_filtration(
    basis: SectionBasis,
    ps: OnePS,
    sample_points,
    svd_tol: float = 1e-8,
):
    """Generic fibre ranks of the flag steps of the weight filtration.

    For each weight level the sections in the flag step are evaluated at
    the sample points; the rank of the spanned fibre subspace is the max
    numeric rank over samples.  Returns (ranks, v_dims, surviving), where
    surviving lists the levels whose graded rank is positive.
    """
    pts = np.asarray(sample_points)
    if pts.shape[0] < 5:
        raise ValueError("need at least a handful of sample points")
    q = q_field(basis, pts)  # (M, N, r)
    ranks = []
    for i in range(len(ps.weights)):
        flag = ps.flag_basis(i)  # (N, d_i)
        img = np.einsum("nd,mnr->mdr", flag, q)  # values of flag sections
        per_sample = []
        for m in range(img.shape[0]):
            s = np.linalg.svd(img[m], compute_uv=False)
            per_sample.append(int((s > svd_tol * max(s[0], 1e-300)).sum()))
        top = max(per_sample)
        if sum(r == top for r in per_sample) < 0.25 * len(per_sample):
            raise DegenerateSamples(
                f"generic rank attained at too few samples for level {i}"
            )
        ranks.append(top)
    v_dims = [s.stop for s in ps.slices]
    graded = [ranks[0]] + [b - a for a, b in zip(ranks, ranks[1:])]
    surviving = tuple(i for i, g in enumerate(graded) if g > 0)
    return ranks, v_dims, surviving


def renormalized_metric(
    basis: SectionBasis,
    grid: QuadratureGrid,
    ps: OnePS,
    t: float,
    pivot_tol: float = 1e-8,
) -> MetricField:
    """Path metric conjugated into finite range: e^{-wt} h_t e^{-wt} in a
    per-node frame adapted to the fibre images of the flag steps.

    Nodes where the adapted frame meets a small pivot (the filtration
    degenerates there) are masked out rather than reported.
    """
    r = basis.rank
    q = q_field(basis, grid.nodes)
    href = h_ref_field(basis, grid)
    h_t = bergman_path(basis, grid, ps, t).values
    m = q.shape[0]
    out = np.zeros((m, r, r), dtype=complex)
    mask = np.zeros(m, dtype=bool)
    for node in range(m):
        frame_cols = []
        frame_wts = []
        hr = href[node]
        for i, w in enumerate(ps.weights):
            flag = ps.flag_basis(i)
            img = (flag.T @ q[node]).T  # (r, d_i): fibre image columns
            for col in img.T:
                v = col.copy()
                for u in frame_cols:
                    v -= u * (u.conj() @ hr @ v)
                nrm = np.sqrt(max((v.conj() @ hr @ v).real, 0.0))
                ref = np.sqrt(max((col.conj() @ hr @ col).real, 1e-300))
                if nrm > pivot_tol * ref:
                    frame_cols.append(v / nrm)
                    frame_wts.append(w)
            if len(frame_cols) == r:
                break
        if len(frame_cols) < r:
            continue
        s = np.stack(frame_cols, axis=1)
        d = np.exp(-t * np.asarray(frame_wts))
        conj = s.conj().T @ h_t[node] @ s
        out[node] = d[:, None] * conj * d[None, :]
        mask[node] = True
    return MetricField(grid=grid, values=out, mask=mask)


# ---------------------------------------------------------------------------
# Subgeodesic operator identities


def _sandwich(q_x: np.ndarray, mat: np.ndarray) -> np.ndarray:
    return q_x.conj().T @ mat @ q_x


def commutator_residual(basis: SectionBasis, ps: OnePS, t: float, x) -> float:
    """Largest normalized commutator among the three sandwiched moment
    matrices Q* S Q, Q* S u Q, Q* S u^2 Q with S = e^{2 zeta t}, u = 2 zeta,
    regarded as endomorphisms in an h_ref-orthonormal frame at x.

    When the generator has at most two distinct weights every compression
    is an affine function of a single hermitian matrix, so the three
    commute exactly and the residual is floating noise; the same holds
    for generators acting as a constant scalar on each summand block of a
    split bundle.  Generators with three or more weights in generic
    position do not commute, and the residual measures the failure.
    """
    q_x = q_field(basis, np.asarray([x]))[0]
    href = q_x.conj().T @ q_x
    q_x = q_x @ np.linalg.inv(scipy.linalg.sqrtm(href))
    s = ps.form_at(t).matrix
    u = 2.0 * ps.generator
    mats = [_sandwich(q_x, s), _sandwich(q_x, s @ u), _sandwich(q_x, s @ u @ u)]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = mats[i], mats[j]
            denom = np.linalg.norm(a) * np.linalg.norm(b)
            if denom == 0:
                continue
            worst = max(worst, np.linalg.norm(a @ b - b @ a) / denom)
    return worst


def subgeodesic_residual(
    basis: SectionBasis,
    ps: OnePS,
    t: float,
    x,
    fd_step: float = 1e-4,
):
    """Check d/dt (h^{-1} dh/dt) = F* F at a point.

    With A = sigma Q, h = A*A and G = h^{-1} A* u A, the algebraic
    identity gives h^{1/2} G' h^{-1/2} = F*F for F = (u A - A G) h^{-1/2};
    the left side is measured by central finite differences and the right
    side is assembled analytically.  Returns (lhs, rhs, residual,
    min_eig_rhs); raises StepTooLarge when halving the step fails the
    second-order Richardson check.
    """
    q_x = q_field(basis, np.asarray([x]))[0]
    u = 2.0 * ps.generator

    def g_of(tv: float) -> np.ndarray:
        s = ps.form_at(tv).matrix
        h = _sandwich(q_x, s)
        return np.linalg.solve(h, _sandwich(q_x, s @ u))

    def lhs_of(step: float) -> np.ndarray:
        gdot = (g_of(t + step) - g_of(t - step)) / (2.0 * step)
        h = _sandwich(q_x, ps.form_at(t).matrix)
        hs = scipy.linalg.sqrtm(h)
        return hs @ gdot @ np.linalg.inv(hs)

    s = ps.form_at(t).matrix
    h = _sandwich(q_x, s)
    # factor S = sigma* sigma, with sigma hermitian here
    sigma = scipy.linalg.sqrtm(s)
    a = sigma @ q_x
    g = np.linalg.solve(h, a.conj().T @ (u @ a))
    h_inv_half = np.linalg.inv(scipy.linalg.sqrtm(h))
    f = (u @ a - a @ g) @ h_inv_half
    rhs = f.conj().T @ f

    lhs = lhs_of(fd_step)
    lhs_half = lhs_of(fd_step / 2.0)
    err_full = np.linalg.norm(lhs - rhs)
    err_half = np.linalg.norm(lhs_half - rhs)
    # second-order FD: halving the step should cut the error ~4x
    if err_full > 1e-9 and err_half > 0.5 * err_full:
        raise StepTooLarge(
            f"no second-order decay: {err_full:.3e} -> {err_half:.3e}"
        )
    scale = 1.0 + np.linalg.norm(rhs)
    residual = float(err_half / scale)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rhs + rhs.conj().T)).min())
    return lhs_half, rhs, residual, min_eig
