"""Least-norm interpolation over a scheme, and the O-interpolation reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InfeasibleConstraintsError, NonConvergenceError
from ..geometry import full_disk_grid, psh_distance
from ..schemes import InterpolationScheme, Jet, build_scheme, constrained_lp_min, coset_norm
from ..sequences import PointSet
from ..weights import Weight, zero_weight


@dataclass
class InterpolationSolution:
    coeffs: np.ndarray  # f(z) = sum coeffs[n] z^n
    achieved_norm: float
    residuals: np.ndarray
    K_estimate: float
    coset_norms: np.ndarray
    r_max: float
    tail_share: float
    iterations: int = 0

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def summary(self) -> dict:
        return {
            "achieved_norm": self.achieved_norm,
            "K_estimate": self.K_estimate,
            "max_residual": float(np.max(self.residuals)) if self.residuals.size else 0.0,
            "coset_norms": [float(x) for x in self.coset_norms],
            "r_max": self.r_max,
            "tail_share": self.tail_share,
            "degree": int(self.coeffs.size - 1),
        }


def _global_constraints(jets, dim: int, scale: np.ndarray):
    rows, rhs = [], []
    n = np.arange(dim)
    for jet in jets:
        for z0, d in zip(jet.points, jet.derivs):
            for order in range(d.size):
                fall = np.array([math.perm(int(k), order) for k in n], dtype=float)
                powers = np.where(n >= order, z0 ** np.maximum(n - order, 0), 0.0)
                rows.append(fall * powers * scale)
                rhs.append(d[order])
    return np.array(rows, dtype=complex), np.array(rhs, dtype=complex)


def solve_interpolation(
    I: InterpolationScheme,
    jets,
    phi: Weight | None = None,
    p: float = 2.0,
    alpha: float = 1.0,
    global_dim: int = 40,
    quad_res: int = 24,
    r_max: float = 0.999,
    coset_quad_res: int = 32,
    coset_basis_dim: int | None = None,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> InterpolationSolution:
    """Polynomial of degree < global_dim of least weighted norm meeting all jets.

    The norm is (integral over |z| <= r_max of |f e^(-phi)|^p
    (1-|z|^2)^(alpha p - 1) dA)^(1/p).  K_estimate divides it by
    (sum_k ||w_k||^p)^(1/p), the coset norms of the data on the scheme.
    """
    phi = zero_weight() if phi is None else phi
    jets = list(jets)
    if len(jets) != len(I):
        raise ValueError("one jet per scheme pair is required")
    for jet, cl in zip(jets, I.clusters):
        jet.check(cl)
    n_con = sum(j.length for j in jets)
    if n_con > global_dim:
        raise InfeasibleConstraintsError("more constraints than global basis functions")
    grid = full_disk_grid(r_max, quad_res, 256, 8)
    z = grid.nodes
    dens = grid.weights * np.exp(-p * np.real(phi.value(z))) * (1 - np.abs(z) ** 2) ** (alpha * p - 1)
    V = z[:, None] ** np.arange(global_dim)[None, :]
    # scale monomials to unit norm; they are nearly orthogonal for radial weights
    scale = 1.0 / np.sqrt(np.sum(dens[:, None] * np.abs(V) ** 2, axis=0))
    V = V * scale
    A, b = _global_constraints(jets, global_dim, scale)
    if np.linalg.matrix_rank(A) < n_con:
        raise InfeasibleConstraintsError("jet constraints are rank deficient in the global basis")
    if not np.any(b):
        c = np.zeros(global_dim, complex)
        return InterpolationSolution(c, 0.0, np.zeros(n_con), 0.0, np.zeros(len(I)), r_max, 0.0)
    c, val, it, _ = constrained_lp_min(V, dens, A, b, p, max_iter, tol)
    resid = np.abs(A @ c - b)
    contrib = dens * np.abs(V @ c) ** p
    tail = float(contrib[grid.panel == grid.panel.max()].sum() / contrib.sum())
    norms = np.array([
        coset_norm(g, cl, jet, phi, p, alpha, coset_basis_dim, coset_quad_res).norm
        for (g, cl), jet in zip(I.pairs, jets)
    ])
    denom = float(np.sum(norms**p) ** (1 / p))
    achieved = val ** (1 / p)
    K = achieved / denom if denom > 0 else 0.0
    return InterpolationSolution(c * scale, achieved, resid, K, norms, r_max, tail, it)


def merging_pair(separation: float) -> PointSet:
    """Two points symmetric about 0 at psh distance ``separation``."""
    # psi(t, -t) = 2t / (1 + t^2) = s  =>  t = (1 - sqrt(1 - s^2)) / s
    t = (1 - math.sqrt(1 - separation**2)) / separation
    return PointSet([-t, t])


@dataclass
class OInterpolationSetup:
    delta_a: np.ndarray
    n_a: np.ndarray
    terms: np.ndarray  # per-point summands of the finiteness sum
    finiteness_sum: float
    scheme: InterpolationScheme
    jets: list
    coset_norms: np.ndarray = field(default=None)
    cluster_bounds: np.ndarray = field(default=None)  # per-cluster sums of terms
    C_ratios: np.ndarray = field(default=None)  # ||w_k||^p / cluster bound

    def summary(self) -> dict:
        out = {
            "finiteness_sum": self.finiteness_sum,
            "n_points": int(self.delta_a.size),
            "n_clusters": len(self.scheme),
            "max_n_a": int(self.n_a.max()),
            "min_delta_a": float(self.delta_a.min()),
        }
        if self.C_ratios is not None:
            out["C_max"] = float(self.C_ratios.max())
            out["C_min"] = float(self.C_ratios.min())
        return out


def o_interpolation_setup(
    Z: PointSet,
    c,
    phi: Weight | None = None,
    p: float = 2.0,
    alpha: float = 0.0,
    delta: float = 0.25,
    eps: float = 0.1,
    R: float = 0.9,
    with_norms: bool = True,
    quad_res: int = 32,
) -> OInterpolationSetup:
    """Finiteness sum, admissible scheme, value jets and the per-cluster constants.

    delta_a is the psh distance from a to the nearest other point, n_a the
    number of points of Z with psi(z, a) < 1/2 (a itself included).
    """
    phi = zero_weight() if phi is None else phi
    if np.any(Z.mult > 1):
        raise ValueError("O-interpolation requires distinct points")
    if Z.n_distinct < 2:
        raise ValueError("O-interpolation needs at least two points")
    pts = Z.points
    c = np.broadcast_to(np.asarray(c, dtype=complex), pts.shape)
    d = psh_distance(pts[:, None], pts[None, :])
    n_a = np.sum(d < 0.5, axis=1)
    np.fill_diagonal(d, np.inf)
    delta_a = d.min(axis=1)
    terms = (np.abs(c) ** p * np.exp(-p * np.real(phi.value(pts)))
             * delta_a ** (-p * n_a) * (1 - np.abs(pts) ** 2))
    scheme = build_scheme(Z, delta, eps, R)
    lookup = {complex(z): v for z, v in zip(pts, c)}
    jets = [Jet.values(cl, [lookup[complex(z)] for z in cl.points]) for cl in scheme.clusters]
    out = OInterpolationSetup(delta_a, n_a, terms, float(terms.sum()), scheme, jets)
    if with_norms:
        idx = {complex(z): i for i, z in enumerate(pts)}
        bounds = np.array([sum(terms[idx[complex(z)]] for z in cl.points) for cl in scheme.clusters])
        norms = np.array([coset_norm(g, cl, jet, phi, p, alpha, None, quad_res).norm
                          for (g, cl), jet in zip(scheme.pairs, jets)])
        out.coset_norms = norms
        out.cluster_bounds = bounds
        with np.errstate(divide="ignore", invalid="ignore"):
            out.C_ratios = np.where(bounds > 0, norms**p / bounds, 0.0)
    return out


__all__ = [
    "InterpolationSolution",
    "OInterpolationSetup",
    "solve_interpolation",
    "o_interpolation_setup",
    "merging_pair",
    "NonConvergenceError",
]
