"""Quadrature grids for the Fubini-Study volume on P^1 and P^2.

Both grids live on the dense affine chart (the complement has measure
zero) and use the torus moment map to push the Fubini-Study volume to a
product measure: uniform in the angles, uniform on [0,1) (P^1) or on the
standard 2-simplex (P^2) in the moment coordinates.  Radial directions
carry composite Gauss-Legendre panels, geometrically graded toward the
chart boundary so that log-type layers (which appear in log-det
integrands along strongly degenerate metrics) are still resolved to
better than 1e-6.

The total mass is Vol_L = 1 on P^1 and 1/2 on P^2, i.e. int omega^n/n!
for omega in c1(O(1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidResolution(ValueError):
    pass


class NonFiniteIntegrand(ValueError):
    def __init__(self, index):
        super().__init__(f"integrand not finite at node {index}")
        self.index = index


def pairwise_sum(values: np.ndarray) -> float:
    """Fixed-order pairwise summation (deterministic regardless of how
    the integrand values were produced)."""
    v = np.asarray(values, dtype=float).ravel().copy()
    n = v.size
    while n > 1:
        m = n // 2
        v[:m] += v[n - m : n]
        n = n - m if 2 * m == n else n - m
    return float(v[0]) if v.size else 0.0


def _graded_panels(depth: int) -> list[float]:
    """Breakpoints of [0,1], geometrically refined toward both endpoints."""
    left = [2.0 ** (-j) for j in range(depth, 1, -1)]
    right = [1.0 - 2.0 ** (-j) for j in range(2, depth + 1)]
    return [0.0] + left + [0.5] + right + [1.0]


def _composite_gauss(npp: int, depth: int):
    x, w = np.polynomial.legendre.leggauss(npp)
    bps = _graded_panels(depth)
    nodes, weights = [], []
    for a, b in zip(bps[:-1], bps[1:]):
        nodes.append(0.5 * (b - a) * (x + 1.0) + a)
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes on the affine chart plus positive weights summing to Vol_L.

    nodes: complex array of shape (M,) on P^1 or (M, 2) on P^2.
    moment: the torus moment-map coordinates of each node, shape (M,) on
        P^1 (u = |z|^2/(1+|z|^2)) or (M, 2) on P^2.
    """

    space_tag: str
    nodes: np.ndarray
    weights: np.ndarray
    moment: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def volume(self) -> float:
        return 1.0 if self.space_tag == "P1" else 0.5

    @property
    def dim(self) -> int:
        return 1 if self.space_tag == "P1" else 2

    def integrate(self, values) -> float:
        """Weighted sum of per-node integrand values."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ValueError("integrand values must be one scalar per node")
        bad = ~np.isfinite(values)
        if bad.any():
            raise NonFiniteIntegrand(int(np.argmax(bad)))
        return pairwise_sum(values * self.weights)

    def integrate_f(self, f) -> float:
        return self.integrate(np.asarray([f(x) for x in self.nodes], dtype=float))


def build_grid_p1(n_radial: int = 8, n_angular: int = 32, depth: int = 20) -> QuadratureGrid:
    """Tensor grid on the chart of P^1.

    u = |z|^2/(1+|z|^2) carries ``n_radial`` Gauss-Legendre nodes per
    graded panel (2*depth panels), the angle carries the uniform
    trapezoid rule.  The FS measure is du dtheta / (2 pi), so weights
    are exact products and sum to 1.
    """
    if n_radial < 2 or n_angular < 4:
        raise InvalidResolution("need n_radial >= 2 and n_angular >= 4")
    u, wu = _composite_gauss(n_radial, depth)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    r = np.sqrt(u / (1.0 - u))
    z = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    um = np.repeat(u, n_angular)
    w = np.repeat(wu, n_angular) / n_angular
    return QuadratureGrid(
        space_tag="P1",
        nodes=z,
        weights=w,
        moment=um,
        params={"n_radial": n_radial, "n_angular": n_angular, "depth": depth},
    )


def build_grid_p2(n_simplex: int = 6, n_angular: int = 12, depth: int = 8) -> QuadratureGrid:
    """Tensor grid on the chart of P^2.

    The FS volume pushes forward to the uniform measure on the standard
    2-simplex under the torus moment map (v1, v2) = (|z1|^2, |z2|^2)/s
    with s = 1 + |z1|^2 + |z2|^2.  The simplex carries a collapsed
    (Duffy) Gauss product rule, symmetrized under v1 <-> v2 so that the
    node set is invariant under swapping the two chart coordinates; the
    angles carry the uniform trapezoid rule.
    """
    if n_simplex < 2 or n_angular < 4:
        raise InvalidResolution("need n_simplex >= 2 and n_angular >= 4")
    xi, wxi = _composite_gauss(n_simplex, depth)
    eta, weta = np.polynomial.legendre.leggauss(n_simplex)
    eta = 0.5 * (eta + 1.0)
    weta = 0.5 * weta
    # Duffy map of the unit square onto the simplex, Jacobian (1 - xi).
    v1 = np.repeat(xi, n_simplex)
    v2 = (np.repeat(1.0 - xi, n_simplex)) * np.tile(eta, xi.size)
    wv = np.repeat(wxi * (1.0 - xi), n_simplex) * np.tile(weta, xi.size)
    # Symmetrize under v1 <-> v2 with half weights.
    v1s = np.concatenate([v1, v2])
    v2s = np.concatenate([v2, v1])
    wvs = 0.5 * np.concatenate([wv, wv])

    th = 2.0 * np.pi * np.arange(n_angular) / n_angular
    th1 = np.repeat(th, n_angular)
    th2 = np.tile(th, n_angular)
    s = 1.0 - v1s - v2s
    r1 = np.sqrt(v1s / s)
    r2 = np.sqrt(v2s / s)
    z1 = (r1[:, None] * np.exp(1j * th1)[None, :]).ravel()
    z2 = (r2[:, None] * np.exp(1j * th2)[None, :]).ravel()
    nodes = np.stack([z1, z2], axis=-1)
    moment = np.stack(
        [np.repeat(v1s, th1.size), np.repeat(v2s, th1.size)], axis=-1
    )
    # Simplex weights sum to 1/2 = Vol_L; the torus factor is averaged.
    w = np.repeat(wvs, th1.size) / (n_angular * n_angular)
    return QuadratureGrid(
        space_tag="P2",
        nodes=nodes,
        weights=w,
        moment=moment,
        params={"n_simplex": n_simplex, "n_angular": n_angular, "depth": depth},
    )


def build_grid(space: str, **kwargs) -> QuadratureGrid:
    if space == "P1":
        return build_grid_p1(**kwargs)
    if space == "P2":
        return build_grid_p2(**kwargs)
    raise InvalidResolution(f"unknown space {space!r}")
