"""Solution operator for (1 - |z|^2) dbar u = f.

u(z) = (1/pi) sum_j g_j(z) int gamma_j(w) f(w) / g_j(w)
                 (1 - |w|^2)^(m-1) / ((z - w)(1 - conj(w) z)^m) dA(w).

With t = (1 - |w|^2)/(1 - conj(w) z) the kernel splits as
    (1 - |w|^2)^-1 [ 1/(z - w) + conj(w)/(1 - conj(w) z) * sum_{k<m} t^k ].
The first piece is a Cauchy transform, evaluated on the lattice by FFT
convolution with the node cell left out (its leading contribution
-h^2 dq/dz is added back as a local correction).  The second piece is
analytic in z and is summed as a power series whose coefficients are
moments of the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.signal import fftconvolve

from ..errors import ResolutionError
from ..sequences import PointSet, k_function
from ..weights import Weight, zero_weight
from .gfunc import construct_g
from .grid import GridFunction
from .pou import PartitionOfUnity


def cauchy_transform(q: np.ndarray, h: float, correction: bool = True) -> np.ndarray:
    """(1/pi) int q(w) / (z - w) dA(w) at the lattice nodes."""
    n = q.shape[0]
    off = np.arange(-(n - 1), n) * h
    kz = off[None, :] + 1j * off[:, None]
    kern = np.zeros_like(kz)
    nz = kz != 0
    kern[nz] = 1.0 / kz[nz]
    full = fftconvolve(q, kern, mode="full")
    out = full[n - 1:2 * n - 1, n - 1:2 * n - 1] * h * h / np.pi
    if correction:
        dq_dy, dq_dx = np.gradient(q, h)
        out -= h * h * 0.5 * (dq_dx - 1j * dq_dy) / np.pi
    return out


def analytic_part(q: np.ndarray, z: np.ndarray, w: np.ndarray, h: float, m: int,
                  tol: float = 1e-16) -> np.ndarray:
    """(1/pi) int q(w) conj(w) sum_{k<m} (1-|w|^2)^k / (1 - conj(w) z)^(k+1) dA(w)."""
    sel = q != 0
    if not np.any(sel):
        return np.zeros(z.shape, complex)
    qw, ww = q[sel], w[sel]
    rho_w = float(np.max(np.abs(ww)))
    rho_z = float(np.max(np.abs(z)))
    ratio = rho_w * rho_z
    n_terms = 1 if ratio == 0 else int(np.ceil(np.log(tol) / np.log(ratio))) + 8
    if n_terms > 20000:
        raise ResolutionError("data reach too close to the boundary for the series")
    cw = np.conj(ww)
    damp = 1.0 - np.abs(ww) ** 2
    coef = np.zeros(n_terms, complex)
    base = qw * cw * h * h / np.pi
    pw = np.ones_like(cw)
    for n in range(n_terms):
        # coefficient of z^n: sum_k C(n+k, k) int q conj(w)^(n+1) (1-|w|^2)^k
        mom = base * pw
        coef[n] = sum(comb(n + k, k) * np.sum(mom * damp**k) for k in range(m))
        pw = pw * cw
    return np.polynomial.polynomial.polyval(z, coef)


@dataclass
class DbarResult:
    u: GridFunction
    residual: GridFunction
    rel_residual: float
    norm_ratio: float
    kernel_order: int


def _interior(mask):
    inner = mask.copy()
    inner[1:-1, 1:-1] &= mask[2:, 1:-1] & mask[:-2, 1:-1] & mask[1:-1, 2:] & mask[1:-1, :-2]
    inner[0, :] = inner[-1, :] = inner[:, 0] = inner[:, -1] = False
    return inner


def dbar_residual(u: GridFunction, f: GridFunction):
    """(1 - |z|^2) dbar_fd u - f on nodes whose four neighbours are active."""
    h = u.h
    v = u.values
    dx = np.zeros_like(v)
    dy = np.zeros_like(v)
    dx[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
    dy[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * h)
    z = u.nodes
    inner = _interior(u.mask)
    r = np.where(inner, (1 - np.abs(z) ** 2) * 0.5 * (dx + 1j * dy) - f.values, 0.0)
    return GridFunction(r, h, u.r_max), inner


def weighted_grid_norm(v: GridFunction, Z: PointSet, phi: Weight, p: float, alpha: float) -> float:
    z = v.nodes
    act = v.mask
    zz = z[act]
    kz = np.atleast_1d(k_function(Z, zz)) if len(Z) else 0.0
    w = np.exp(p * (kz - np.real(phi.value(zz)))) * (1 - np.abs(zz) ** 2) ** (alpha * p - 1)
    return float((np.sum(np.abs(v.values[act]) ** p * w) * v.h**2) ** (1 / p))


def solve_dbar(
    f: GridFunction,
    Z: PointSet | None = None,
    phi: Weight | None = None,
    p: float = 2.0,
    alpha: float = 1.0,
    m: int = 3,
    pou: PartitionOfUnity | None = None,
    g_funcs=None,
    correction: bool = True,
) -> DbarResult:
    """Solve (1 - |z|^2) dbar u = f on the lattice of ``f``.

    Without ``pou`` the single-term operator (gamma = 1, g = 1) is used.
    With ``pou`` the callables ``g_funcs[j]`` (log of g_{a_j}, analytic and
    finite on the grid) multiply the j-th term, as in the formula above.
    """
    if m < 1:
        raise ValueError("kernel order m must be at least 1")
    Z = PointSet() if Z is None else Z
    phi = zero_weight() if phi is None else phi
    z = f.nodes
    mask = f.mask
    q_base = np.zeros(z.shape, complex)
    q_base[mask] = f.values[mask] / (1 - np.abs(z[mask]) ** 2)
    u = np.zeros(z.shape, complex)
    zin = z[mask]
    if pou is None:
        u = cauchy_transform(q_base, f.h, correction)
        u[mask] += analytic_part(q_base, zin, z, f.h, m)
    else:
        if g_funcs is None or len(g_funcs) != len(pou):
            raise ValueError("one log-g callable per partition center is required")
        gam = np.zeros(z.shape + (len(pou),))
        gam[mask] = pou(zin)
        for j, log_g in enumerate(g_funcs):
            lg = np.zeros(z.shape, complex)
            lg[mask] = log_g(zin)
            qj = np.where(mask, gam[..., j] * q_base * np.exp(-lg), 0.0)
            if not np.any(qj):
                continue
            term = cauchy_transform(qj, f.h, correction)
            term[mask] += analytic_part(qj, zin, z, f.h, m)
            u += np.exp(lg) * term
    ug = GridFunction(u, f.h, f.r_max)
    res, inner = dbar_residual(ug, f)
    fn = np.sqrt(np.sum(np.abs(f.values[inner]) ** 2))
    rel = float(np.sqrt(np.sum(np.abs(res.values[inner]) ** 2)) / fn) if fn > 0 else 0.0
    nf = weighted_grid_norm(f, Z, phi, p, alpha)
    ratio = weighted_grid_norm(ug, Z, phi, p, alpha) / nf if nf > 0 else 0.0
    return DbarResult(ug, res, rel, ratio, m)


def g_family(pou: PartitionOfUnity, Z: PointSet, phi: Weight, alpha: float, eps: float,
             r_grid: float, circle_res: int = 4096, n_sample: int = 256):
    """log g_{a_j} for every partition center, each built on a disk containing |z| <= r_grid."""
    logs, reports = [], []
    for a in pou.centers:
        reach = (abs(a) + r_grid) / (1 + abs(a) * r_grid)
        rho = min(1 - 1e-6, reach + 0.25 * (1 - reach))
        G = construct_g(a, Z, phi, alpha, eps, circle_res=circle_res, r_max=rho, n_sample=n_sample)
        logs.append(G.log_g)
        reports.append(G)
    return logs, reports


def smooth_bump(radius: float = 0.8, center: complex = 0.0):
    """exp(1 - 1/(1 - t^2)) with t = |z - center|/radius, zero for t >= 1."""

    def f(z):
        t2 = np.abs(np.asarray(z) - center) ** 2 / radius**2
        out = np.zeros(np.shape(z))
        inside = t2 < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
        return out

    return f
