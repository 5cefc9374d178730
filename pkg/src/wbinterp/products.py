"""The product Psi_Z vanishing exactly on Z, and division by it.

Psi_Z(z) = z^m * prod over a != 0 of conj(a) M_a(z) exp(1 - conj(a) M_a(z)),
where m is the multiplicity of the origin.  The exponential factors make
the product converge whenever sum (1 - |a|^2)^2 is finite.  Everything is
accumulated in log-space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DiskDomainError, ProductDivisionError
from .geometry import _check_disk, full_disk_grid, psh_distance
from .sequences import PointSet, k_function
from .weights import Weight, zero_weight


@dataclass(frozen=True)
class ProductEvaluation:
    log_modulus: float  # -inf exactly on Z
    phase: complex
    terms_used: int
    is_zero: bool

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0j
        return self.phase * math.exp(self.log_modulus)


_TINY = np.finfo(float).tiny


def _log_terms(Z: PointSet, z):
    """Complex logs of every factor (repeated by multiplicity), shape (..., n_terms)."""
    z = np.asarray(z, dtype=complex)
    pts = Z.expanded()
    zz = z[..., None]
    origin = pts == 0
    if np.any(np.abs(pts[~origin]) < _TINY):
        # the factor scales like |a|, so Psi itself would be subnormal
        raise DiskDomainError("zero with subnormal modulus; use the origin instead")
    a = pts[~origin]
    m_a = (a - zz) / (1.0 - np.conj(a) * zz)
    q = np.conj(a) * m_a
    with np.errstate(divide="ignore"):
        logs = np.log(q) + 1.0 - q
        if np.any(origin):
            lz = np.log(np.broadcast_to(zz, zz.shape[:-1] + (int(origin.sum()),)))
            logs = np.concatenate([lz, logs], axis=-1)
    return logs


def psi_eval(Z: PointSet, z) -> ProductEvaluation:
    """Psi_Z at a single point, with compensated sums of the log terms."""
    z = complex(z)
    _check_disk(z)
    if len(Z) == 0:
        return ProductEvaluation(0.0, 1 + 0j, 0, False)
    if Z.multiplicity(z) > 0:
        return ProductEvaluation(-math.inf, 1 + 0j, len(Z), True)
    logs = _log_terms(Z, z)
    log_mod = math.fsum(logs.real.tolist())
    ang = math.fsum(logs.imag.tolist())
    return ProductEvaluation(log_mod, complex(np.exp(1j * ang)), logs.size, False)


def psi_values(Z: PointSet, z, chunk: int = 4096) -> np.ndarray:
    """Psi_Z on an array of points; exact zeros on Z."""
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    flat = z.ravel()
    out = np.ones(flat.size, dtype=complex)
    if len(Z) == 0:
        return out.reshape(z.shape)
    for s in range(0, flat.size, chunk):
        blk = flat[s:s + chunk]
        logs = _log_terms(Z, blk).sum(axis=-1)
        out[s:s + chunk] = np.exp(logs)
    out[np.isin(flat, Z.points)] = 0.0
    return out.reshape(z.shape)


def psi_at_zero(Z: PointSet, min_distance: float = 0.0) -> float:
    """|Psi_Z(0)| = prod |a|^2 exp(1 - |a|^2); Z must keep away from 0."""
    if len(Z) == 0:
        return 1.0
    d = np.abs(Z.points)
    if np.any(d == 0) or np.any(d < min_distance):
        raise DiskDomainError("Z meets the excluded disk about the origin")
    aa = np.repeat(d * d, Z.mult)
    return math.exp(math.fsum((np.log(aa) + 1.0 - aa).tolist()))


@dataclass(frozen=True)
class ZeroSpaceNorm:
    value: float
    tail_share: float  # fraction of the value carried by the outermost radial panel
    r_max: float


def zero_space_norm(
    F: Callable,
    Z: PointSet,
    phi: Weight | None = None,
    p: float = 2.0,
    alpha: float = 1.0,
    quad_res: int = 24,
    r_max: float = 0.999,
    n_angular: int = 256,
    n_panels: int = 8,
) -> ZeroSpaceNorm:
    """integral over |z| <= r_max of |F e^(-phi)|^p e^(p k_Z) (1-|z|^2)^(alpha p - 1) dA."""
    if p <= 0 or alpha <= 0:
        raise ValueError("p and alpha must be positive")
    phi = zero_weight() if phi is None else phi
    grid = full_disk_grid(r_max, quad_res, n_angular, n_panels)
    z = grid.nodes
    kz = np.concatenate([np.atleast_1d(k_function(Z, c)) for c in np.array_split(z, max(1, z.size // 8192))]) \
        if len(Z) else np.zeros(z.size)
    logw = p * (kz - np.real(phi.value(z))) + (alpha * p - 1) * np.log1p(-np.abs(z) ** 2)
    vals = np.abs(np.asarray(F(z), dtype=complex)) ** p * np.exp(logw)
    contrib = vals * grid.weights
    total = float(contrib.sum())
    tail = float(contrib[grid.panel == grid.panel.max()].sum())
    return ZeroSpaceNorm(total, tail / total if total > 0 else 0.0, r_max)


def _removal_radius(Z: PointSet) -> np.ndarray:
    """Half the psh distance from each point to its nearest neighbour in Z (0.5 if alone)."""
    pts = Z.points
    if pts.size == 1:
        return np.array([0.5])
    d = psh_distance(pts[:, None], pts[None, :])
    np.fill_diagonal(d, np.inf)
    return np.minimum(0.5, 0.5 * d.min(axis=1))


def _euclid_radius(a: complex, s: float) -> float:
    # smallest Euclidean distance from a to the boundary of D(a, s)
    aa = abs(a)
    return s * (1 - aa * aa) / (1 + s * aa)


def vanishing_residual(f: Callable, Z: PointSet, n: int = 128) -> float:
    """Largest relative size of the Taylor coefficients of f that must vanish on Z."""
    worst = 0.0
    rad = _removal_radius(Z)
    th = 2 * np.pi * np.arange(n) / n
    for a, m, s in zip(Z.points, Z.mult, rad):
        rho = 0.5 * _euclid_radius(a, s)
        vals = np.asarray(f(a + rho * np.exp(1j * th)), dtype=complex)
        coef = np.fft.fft(vals) / n
        scale = max(np.max(np.abs(vals)), 1e-300)
        worst = max(worst, float(np.max(np.abs(coef[:m]))) / scale)
    return worst


def divide_by_product(f: Callable, Z: PointSet, z, tol: float = 1e-8, n: int = 128,
                      check: bool = True):
    """g = f / Psi_Z at the points z.

    Away from Z the quotient is taken directly.  Inside the psh disk of
    radius s_a / 4 about each a in Z (s_a = half the distance to the
    nearest other point) g is recovered from its values on the circle of
    psh radius s_a by the Cauchy integral, so the removable singularities
    cost nothing in accuracy.
    """
    z = np.asarray(z, dtype=complex)
    if len(Z) == 0:
        return np.asarray(f(z), dtype=complex)
    if check:
        res = vanishing_residual(f, Z, n)
        if res > tol:
            raise ProductDivisionError(f"f does not vanish on Z to the required order (residual {res:.2e})")
    flat = z.ravel()
    out = np.empty(flat.size, dtype=complex)
    rad = _removal_radius(Z)
    near = np.full(flat.size, -1)
    for i, (a, s) in enumerate(zip(Z.points, rad)):
        inside = (near < 0) & (psh_distance(flat, a) < 0.25 * s)
        near[inside] = i
    far = near < 0
    if np.any(far):
        out[far] = np.asarray(f(flat[far]), dtype=complex) / psi_values(Z, flat[far])
    th = 2 * np.pi * np.arange(n) / n
    for i in np.unique(near[~far]):
        a = Z.points[i]
        # circle about a of Euclidean radius inside D(a, s); encloses D(a, s/4) with room to spare
        rho = _euclid_radius(a, rad[i])
        zeta = a + rho * np.exp(1j * th)
        g_circ = np.asarray(f(zeta), dtype=complex) / psi_values(Z, zeta)
        sel = near == i
        zz = flat[sel]
        out[sel] = np.mean(g_circ[None, :] * (zeta - a)[None, :] / (zeta[None, :] - zz[:, None]), axis=1)
    return out.reshape(z.shape) if z.ndim else complex(out[0])
