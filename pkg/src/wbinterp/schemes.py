"""Interpolation schemes: regions G_k carrying finite clusters Z_k.

A scheme is admissible when
  P1  every G_k has pseudohyperbolic diameter at most R,
  P2  every point of Z_k is at distance at least eps from the complement of G_k,
  P3  points of different clusters are at distance at least delta,
  P4  every cluster has at most B points (counted with multiplicity).
Cosets of functions vanishing on Z_k are represented by jets (Taylor data),
and their quotient norms are computed by constrained minimization over
polynomials on G_k.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.sparse import coo_matrix

from .errors import (
    ClusterTooLargeError,
    EmptyInputError,
    InfeasibleConstraintsError,
    NonConvergenceError,
)
from .geometry import DiskRegion, build_grid, full_disk_grid, mobius, psh_add, psh_distance
from .sequences import PointSet
from .weights import Weight, zero_weight


@dataclass(frozen=True)
class SchemeConstants:
    R: float
    eps: float
    delta: float
    B: int


@dataclass(frozen=True)
class InterpolationScheme:
    pairs: tuple  # of (DiskRegion, PointSet)
    constants: SchemeConstants

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((g, z) for g, z in self.pairs))
        for _, cl in self.pairs:
            if len(cl) == 0:
                raise EmptyInputError("every cluster must be nonempty")

    def __len__(self):
        return len(self.pairs)

    @property
    def regions(self):
        return [g for g, _ in self.pairs]

    @property
    def clusters(self):
        return [z for _, z in self.pairs]

    def all_points(self) -> PointSet:
        out = PointSet()
        for cl in self.clusters:
            out = out.union(cl)
        return out

    def to_json(self) -> dict:
        return {
            "pairs": [
                {
                    "center": [g.center.real, g.center.imag],
                    "radius": g.radius,
                    "cluster": cl.to_records(),
                }
                for g, cl in self.pairs
            ],
            "constants": {
                "R": self.constants.R,
                "eps": self.constants.eps,
                "delta": self.constants.delta,
                "B": self.constants.B,
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "InterpolationScheme":
        pairs = []
        for rec in data["pairs"]:
            c = rec["center"]
            pairs.append((DiskRegion(complex(c[0], c[1]), rec["radius"]),
                          PointSet.from_records(rec["cluster"])))
        k = data["constants"]
        return cls(tuple(pairs), SchemeConstants(float(k["R"]), float(k["eps"]),
                                                 float(k["delta"]), int(k["B"])))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "InterpolationScheme":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class AdmissibilityReport:
    p1: bool
    p2: bool
    p3: bool
    p4: bool
    R_star: float
    eps_star: float
    delta_star: float
    B_star: int
    overlap: int
    # witnesses: index of the extremal pair (or pair of pairs) for each axiom
    p1_witness: int = -1
    p2_witness: int = -1
    p3_witness: tuple = ()
    p4_witness: int = -1

    @property
    def passed(self) -> bool:
        return self.p1 and self.p2 and self.p3 and self.p4

    def to_json(self) -> dict:
        def fin(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "pass": self.passed,
            "p1": self.p1, "p2": self.p2, "p3": self.p3, "p4": self.p4,
            "measured": {"R": fin(self.R_star), "eps": fin(self.eps_star),
                         "delta": fin(self.delta_star), "B": self.B_star},
            "overlap": self.overlap,
            "witness": {"p1": self.p1_witness, "p2": self.p2_witness,
                        "p3": list(self.p3_witness), "p4": self.p4_witness},
        }


def _region_probes(g: DiskRegion, n_ring: int = 24) -> np.ndarray:
    # center plus three rings strictly inside the disk
    c, rho = g.euclidean()
    th = 2 * np.pi * np.arange(n_ring) / n_ring
    rings = [c + f * rho * np.exp(1j * th) for f in (0.33, 0.66, 0.99)]
    return np.concatenate([[c], *rings])


def overlap_count(regions: Sequence[DiskRegion], probes=None) -> int:
    """max over probe points of the number of regions containing it."""
    if not regions:
        return 0
    if probes is None:
        probes = np.concatenate([_region_probes(g) for g in regions])
    probes = np.asarray(probes, dtype=complex)
    cs = np.array([g.euclidean()[0] for g in regions])
    rs = np.array([g.euclidean()[1] for g in regions])
    tree = cKDTree(np.column_stack([cs.real, cs.imag]))
    near = tree.query_ball_point(np.column_stack([probes.real, probes.imag]), rs.max())
    best = 0
    for z, idx in zip(probes, near):
        idx = np.asarray(idx, dtype=int)
        best = max(best, int(np.sum(np.abs(z - cs[idx]) < rs[idx])))
    return best


def _inter_cluster_distance(clusters):
    """Minimum psh distance between points of different clusters, with the pair indices."""
    pts = np.concatenate([c.points for c in clusters])
    owner = np.concatenate([np.full(c.n_distinct, k) for k, c in enumerate(clusters)])
    best, wit = np.inf, ()
    for i in range(pts.size):
        other = owner != owner[i]
        if not np.any(other):
            continue
        d = psh_distance(pts[other], pts[i])
        j = int(np.argmin(d))
        if d[j] < best:
            best, wit = float(d[j]), (int(owner[i]), int(owner[other][j]))
    return best, wit


def check_admissible(I: InterpolationScheme, tol: float = 1e-12) -> AdmissibilityReport:
    """Measure the tightest constants of I and compare with the claimed ones."""
    k = I.constants
    diam = np.array([g.diameter for g, _ in I.pairs])
    margins = np.array([float(np.min(g.margin(cl.points))) for g, cl in I.pairs])
    sizes = np.array([len(cl) for _, cl in I.pairs])
    if len(I) > 1:
        delta_star, p3w = _inter_cluster_distance(I.clusters)
    else:
        delta_star, p3w = math.inf, ()
    R_star = float(diam.max())
    eps_star = float(margins.min())
    B_star = int(sizes.max())
    return AdmissibilityReport(
        p1=R_star <= k.R + tol,
        p2=eps_star >= k.eps - tol,
        p3=delta_star >= k.delta - tol,
        p4=B_star <= k.B,
        R_star=R_star,
        eps_star=eps_star,
        delta_star=delta_star,
        B_star=B_star,
        overlap=overlap_count(I.regions),
        p1_witness=int(np.argmax(diam)),
        p2_witness=int(np.argmin(margins)),
        p3_witness=p3w,
        p4_witness=int(np.argmax(sizes)),
    )


def chebyshev_center(points: np.ndarray) -> tuple[complex, float]:
    """Point minimizing the largest psh distance to ``points``, and that distance."""
    points = np.asarray(points, dtype=complex)
    if points.size == 1:
        return complex(points[0]), 0.0
    # work in the frame where the first point sits at 0; the set is then small
    base = complex(points[0])
    local = mobius(base, points)

    def radius(x):
        c = complex(x[0], x[1])
        if abs(c) >= 0.999999:
            return 10.0
        return float(np.max(psh_distance(local, c)))

    start = np.mean(local)
    res = minimize(radius, [start.real, start.imag], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    c_local = complex(res.x[0], res.x[1])
    if radius(res.x) > radius([start.real, start.imag]):
        c_local = start
    c = mobius(base, c_local)
    return c, float(np.max(psh_distance(points, c)))


def _components(Z: PointSet, delta: float):
    pts = Z.points
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    # any pair with psh distance < delta is within Euclidean distance 2 delta
    pairs = tree.query_pairs(2.0 * delta, output_type="ndarray")
    if pairs.size:
        d = psh_distance(pts[pairs[:, 0]], pts[pairs[:, 1]])
        pairs = pairs[d < delta]
    n = pts.size
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])) if len(pairs) else
                       (np.zeros(0), (np.zeros(0, int), np.zeros(0, int))), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    # relabel by first occurrence in canonical order so output is reproducible
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    return remap[labels]


def build_scheme(Z: PointSet, delta: float, eps: float, R: float = 0.9) -> InterpolationScheme:
    """Split Z into single-linkage components at scale delta and cover each.

    Every component Z_k gets the disk centered at its psh Chebyshev center
    with radius (cluster radius) + eps in the psh sense, so each point is at
    least eps from the boundary.  Components of a single-linkage graph are
    automatically delta-separated.
    """
    if len(Z) == 0:
        raise EmptyInputError("cannot build a scheme from an empty set")
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("delta and eps must lie in (0, 1)")
    labels = _components(Z, delta)
    pairs = []
    for k in range(labels.max() + 1):
        sel = labels == k
        cl = PointSet(Z.points[sel], Z.mult[sel])
        c, rho = chebyshev_center(cl.points)
        radius = psh_add(rho, eps * (1 + 1e-9))
        g = DiskRegion(c, radius)
        if g.diameter > R:
            raise ClusterTooLargeError(
                f"cluster {k} needs diameter {g.diameter:.4f} > R = {R}; lower delta or eps")
        pairs.append((g, cl))
    B = max(len(cl) for _, cl in pairs)
    return InterpolationScheme(tuple(pairs), SchemeConstants(R, eps, delta, B))


def subscheme(I: InterpolationScheme, keep) -> InterpolationScheme:
    """Reduce every cluster to a sub-multiset; ``None`` drops the pair."""
    if len(keep) != len(I):
        raise ValueError("keep must have one entry per pair")
    pairs = []
    for (g, cl), kp in zip(I.pairs, keep):
        if kp is None:
            continue
        if len(kp) == 0:
            raise EmptyInputError("kept cluster is empty; pass None to drop the pair")
        if not kp.issubset(cl):
            raise ValueError("kept points must form a sub-multiset of the cluster")
        pairs.append((g, kp))
    if not pairs:
        raise EmptyInputError("subscheme would be empty")
    return InterpolationScheme(tuple(pairs), I.constants)


def transform_scheme(I: InterpolationScheme, a) -> InterpolationScheme:
    """Image of I under M_a.  Psh disks map to psh disks, so all constants are unchanged."""
    pairs = tuple((DiskRegion(mobius(a, g.center), g.radius), PointSet(mobius(a, cl.points), cl.mult))
                  for g, cl in I.pairs)
    return InterpolationScheme(pairs, I.constants)


@dataclass
class PerturbedScheme:
    scheme: InterpolationScheme
    eta_star: float


def perturb_scheme(I: InterpolationScheme, factors, n_samples: int = 256) -> PerturbedScheme:
    """Scale pair k radially by factors[k]: D_k = r_k G_k and W_k = r_k Z_k.

    eta* is the largest psh distance between z and r_k z over sampled
    z in G_k.  That distance grows with |z|, so boundary samples suffice.
    """
    factors = np.asarray(factors, dtype=float)
    if factors.size != len(I):
        raise ValueError("one factor per pair is required")
    if np.any(factors <= 0) or np.any(factors > 1):
        raise ValueError("factors must lie in (0, 1]")
    pairs, eta = [], 0.0
    th = 2 * np.pi * np.arange(n_samples) / n_samples
    for (g, cl), r in zip(I.pairs, factors):
        c, rho = g.euclidean()
        samples = np.concatenate([[c], c + rho * (1 - 1e-12) * np.exp(1j * th)])
        eta = max(eta, float(np.max(psh_distance(r * samples, samples))))
        new_g = g if r == 1 else DiskRegion.from_euclidean(r * c, r * rho)
        pairs.append((new_g, PointSet(r * cl.points, cl.mult)))
    return PerturbedScheme(InterpolationScheme(tuple(pairs), I.constants), eta)


# ---------------------------------------------------------------- cosets


@dataclass(frozen=True)
class Jet:
    """Taylor data on a cluster: derivs[i][j] is the j-th derivative at points[i]
    (not divided by j!), for j below the multiplicity of points[i]."""

    points: np.ndarray
    derivs: tuple

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "derivs", tuple(np.asarray(d, dtype=complex) for d in self.derivs))
        if len(self.derivs) != pts.size:
            raise ValueError("one derivative list per point is required")

    @property
    def length(self) -> int:
        return sum(d.size for d in self.derivs)

    def check(self, cluster: PointSet) -> None:
        if not np.array_equal(self.points, cluster.points):
            raise ValueError("jet points differ from the cluster points")
        for d, m in zip(self.derivs, cluster.mult):
            if d.size != m:
                raise ValueError("jet length at a point must equal its multiplicity")

    def scaled(self, c) -> "Jet":
        return Jet(self.points, tuple(c * d for d in self.derivs))

    @classmethod
    def zeros(cls, cluster: PointSet) -> "Jet":
        return cls(cluster.points, tuple(np.zeros(m, complex) for m in cluster.mult))

    @classmethod
    def values(cls, cluster: PointSet, vals) -> "Jet":
        """Jet prescribing values only; requires simple points."""
        if np.any(cluster.mult > 1):
            raise ValueError("value-only jets need simple points")
        vals = np.broadcast_to(np.asarray(vals, dtype=complex), cluster.points.shape)
        return cls(cluster.points, tuple(np.array([v]) for v in vals))


def jet_from_function(f: Callable, cluster: PointSet, n: int = 128) -> Jet:
    """Jet of an analytic f on the cluster via Cauchy integrals on small circles."""
    derivs = []
    th = 2 * np.pi * np.arange(n) / n
    for z0, m in zip(cluster.points, cluster.mult):
        rho = 0.25 * (1 - abs(z0))
        coef = np.fft.fft(np.asarray(f(z0 + rho * np.exp(1j * th)), dtype=complex)) / n
        j = np.arange(m)
        derivs.append(coef[:m] * np.array([math.factorial(k) for k in j]) / rho**j)
    return Jet(cluster.points, tuple(derivs))


@dataclass
class CosetNormResult:
    norm: float
    coeffs: np.ndarray  # coefficients of g(z) = sum coeffs[j] ((z - center)/scale)^j
    center: complex
    scale: float
    quad_res: int
    basis_dim: int
    jet_residual: float
    iterations: int = 0
    converged: bool = True

    def __call__(self, z):
        u = (np.asarray(z, dtype=complex) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    @property
    def norm_p(self):
        return self.norm


def _constraint_matrix(jet: Jet, basis_dim: int, center: complex, scale: float):
    rows, rhs = [], []
    j = np.arange(basis_dim)
    for z0, d in zip(jet.points, jet.derivs):
        u0 = (z0 - center) / scale
        for order in range(d.size):
            # d^order/dz^order of u^j, with u = (z - center)/scale
            fall = np.array([math.perm(int(k), order) for k in j], dtype=float)
            powers = np.where(j >= order, u0 ** np.maximum(j - order, 0), 0.0)
            rows.append(fall * powers / scale**order)
            rhs.append(d[order])
    return np.array(rows, dtype=complex), np.array(rhs, dtype=complex)


def _solve_weighted(V, w, A, b):
    """min sum w |V c|^2 subject to A c = b; returns c."""
    Q, Rm = np.linalg.qr(A.conj().T, mode="reduced")
    # c = Q y0 + N t with A Q y0 = b
    y0 = np.linalg.solve(Rm.conj().T, b)
    c0 = Q @ y0
    N = null_space(A)
    sw = np.sqrt(w)[:, None]
    t, *_ = np.linalg.lstsq(sw * (V @ N), -(sw[:, 0] * (V @ c0)), rcond=None)
    return c0 + N @ t


def coset_norm(
    G: DiskRegion,
    cluster: PointSet,
    jet: Jet,
    phi: Weight | None = None,
    p: float = 2.0,
    alpha: float = 1.0,
    basis_dim: int | None = None,
    quad_res: int = 32,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> CosetNormResult:
    """Quotient norm of the coset given by ``jet`` on G.

    Minimizes (integral over G of |g e^(-phi)|^p (1-|z|^2)^(alpha p - 1) dA)^(1/p)
    over polynomials g of degree < basis_dim in the variable (z - c)/rho,
    where (c, rho) is the Euclidean center and radius of G, subject to the
    jet constraints.  p = 2 is solved exactly by constrained least squares.
    Other p use iteratively reweighted least squares started from the
    p = 2 solution; the value is an upper bound for the true infimum.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    phi = zero_weight() if phi is None else phi
    jet.check(cluster)
    n_con = jet.length
    basis_dim = max(2 * n_con, 12) if basis_dim is None else int(basis_dim)
    if basis_dim < n_con:
        raise InfeasibleConstraintsError("basis_dim is below the jet length")
    center, scale = G.euclidean()
    grid = build_grid(G, quad_res, "area")
    z = grid.nodes
    u = (z - center) / scale
    V = u[:, None] ** np.arange(basis_dim)[None, :]
    dens = grid.weights * np.exp(-p * np.real(phi.value(z))) * (1 - np.abs(z) ** 2) ** (alpha * p - 1)
    A, b = _constraint_matrix(jet, basis_dim, center, scale)
    if np.linalg.matrix_rank(A) < n_con:
        raise InfeasibleConstraintsError("jet constraints are rank deficient")

    if not np.any([np.any(d) for d in jet.derivs]):
        c = np.zeros(basis_dim, complex)
        return CosetNormResult(0.0, c, center, scale, quad_res, basis_dim, 0.0)
    try:
        c, val, it, _ = constrained_lp_min(V, dens, A, b, p, max_iter, tol)
    except NonConvergenceError as exc:
        c, val, it = exc.best
        res = CosetNormResult(val ** (1 / p), c, center, scale, quad_res, basis_dim,
                              float(np.max(np.abs(A @ c - b))), it, False)
        raise NonConvergenceError(str(exc), best=res) from None
    resid = float(np.max(np.abs(A @ c - b)))
    return CosetNormResult(val ** (1 / p), c, center, scale, quad_res, basis_dim, resid, it, True)


def constrained_lp_min(V, dens, A, b, p: float, max_iter: int = 500, tol: float = 1e-8):
    """min sum dens |V c|^p subject to A c = b.

    p = 2 is exact.  Other p run iteratively reweighted least squares from
    the p = 2 solution and stop when the relative decrease of the objective
    falls below ``tol``.  Returns (c, objective, iterations, converged);
    raises NonConvergenceError carrying (best c, objective, iterations).
    """

    def value(c):
        return float(np.sum(dens * np.abs(V @ c) ** p))

    c = _solve_weighted(V, dens, A, b)
    if p == 2:
        return c, value(c), 0, True
    best_c, best = c, value(c)
    floor = 1e-12 * max(np.max(np.abs(V @ c)), 1e-300)
    for it in range(1, max_iter + 1):
        w = dens * np.maximum(np.abs(V @ c), floor) ** (p - 2)
        c_new = _solve_weighted(V, w, A, b)
        v_new = value(c_new)
        if v_new < best:
            change = (best - v_new) / best
            best_c, best = c_new, v_new
            if change < tol:
                return best_c, best, it, True
        elif abs(v_new - best) <= tol * best:
            return best_c, best, it, True
        else:
            break
        c = c_new
    raise NonConvergenceError("reweighted minimization did not reach the tolerance",
                              best=(best_c, best, it))


def weighted_norm_p(f: Callable, phi: Weight | None = None, p: float = 2.0, alpha: float = 1.0,
                    r_max: float = 1 - 1e-12, n_radial: int = 24, n_angular: int = 256,
                    n_panels: int = 16) -> float:
    """integral over the disk of |f e^(-phi)|^p (1-|z|^2)^(alpha p - 1) dA."""
    phi = zero_weight() if phi is None else phi
    grid = full_disk_grid(r_max, n_radial, n_angular, n_panels)
    z = grid.nodes
    vals = np.abs(f(z) * np.exp(-np.real(phi.value(z)))) ** p * (1 - np.abs(z) ** 2) ** (alpha * p - 1)
    return float(grid.integrate(vals))


@dataclass
class PhiCheck:
    lhs: float
    rhs: float
    overlap: int
    norms: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-8)


def phi_operator_norm_check(I: InterpolationScheme, f: Callable, phi: Weight | None = None,
                            p: float = 2.0, alpha: float = 1.0, quad_res: int = 32,
                            basis_dim: int = 24) -> PhiCheck:
    """Both sides of sum_k ||w_k||^p <= M ||f||^p, w_k the coset of f on Z_k."""
    phi = zero_weight() if phi is None else phi
    norms = []
    for g, cl in I.pairs:
        jet = jet_from_function(f, cl)
        norms.append(coset_norm(g, cl, jet, phi, p, alpha, basis_dim, quad_res).norm)
    M = overlap_count(I.regions)
    lhs = float(np.sum(np.array(norms) ** p))
    rhs = M * weighted_norm_p(f, phi, p, alpha)
    return PhiCheck(lhs, rhs, M, norms)
