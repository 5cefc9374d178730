"""Density functionals S(Z, r), S_phi(Z, r) and the uniform upper density.

Two routes are provided.  The mean route uses circle means (closed form
for k_Z, trapezoid rule for phi).  The Laplacian route integrates the
invariant Laplacian against the kernel log(r^2/|z|^2) with respect to the
invariant measure.  The two agree by Green's formula, and the tests
cross-check them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DiskDomainError
from .geometry import centered_grid, circle_mean, log_weight, mobius, psh_add
from .sequences import PointSet, hyperbolic_lattice, k_hat, k_laplacian, transform
from .weights import Weight, transport_weight, zero_weight


def log_scale(r: float) -> float:
    """log(1/(1 - r^2)), the normalizer of all density ratios."""
    if not 0.0 < r < 1.0:
        raise DiskDomainError("r must lie in (0, 1)")
    return float(-np.log1p(-r * r))


def _mean_nodes(rho: float) -> int:
    # trapezoid error for log|1 - conj(b) z|^2 decays like rho^n
    n = 1024
    while rho ** n > 1e-16 and n < 2**20:
        n *= 2
    return n


def phi_hat(phi: Weight, r: float, a=0.0) -> float:
    """Circle mean of phi o M_a at radius r minus phi(a)."""
    a = complex(a)
    n = _mean_nodes(psh_add(abs(a), r))
    f = phi.value if a == 0 else transport_weight(phi, a).value
    mean = float(np.real(circle_mean(f, r, n)))
    return mean - float(np.real(np.asarray(phi.value(np.array([a])))[0]))


def s_plain(Z: PointSet, r: float) -> float:
    return k_hat(Z, r) / log_scale(r)


def s_weighted(Z: PointSet, phi: Weight, r: float) -> float:
    """(k_hat(Z, r) - phi_hat(r)) / log(1/(1 - r^2))."""
    return (k_hat(Z, r) - phi_hat(phi, r)) / log_scale(r)


def s_transported(Z: PointSet, phi: Weight, a, r: float) -> float:
    """S_{phi_a}(Z_a, r), the density seen from the point a.

    phi_a differs from phi o M_a by a harmonic function, which does not
    change the mean relative to the center.
    """
    return (k_hat(transform(Z, a), r) - phi_hat(phi, r, a)) / log_scale(r)


def _kernel_grid(r: float, grid_res: int):
    grid = centered_grid(r, grid_res, "invariant")
    kern = np.log(r * r / np.abs(grid.nodes) ** 2) / (np.pi * log_scale(r))
    return grid, kern


def sigma_convolution(g: Callable, r: float, a=0.0, grid_res: int = 96) -> float:
    """(g * sigma_r)(a): integral of g(z) sigma_r(M_a z) d lambda(z).

    Evaluated after the substitution z = M_a(w), which leaves lambda
    invariant and puts the log singularity of sigma_r at w = 0.
    """
    a = complex(a)
    grid, kern = _kernel_grid(r, grid_res)
    z = mobius(a, grid.nodes) if a != 0 else -grid.nodes
    return float(np.real(grid.integrate(np.asarray(g(z)) * kern)))


def tau_laplacian(Z: PointSet, phi: Weight, alpha: float) -> Callable:
    """Lap~ of k_Z - phi - alpha log(1/(1-|z|^2))."""
    return lambda z: k_laplacian(Z, z) - phi.lap(z) - alpha


def tau_function(Z: PointSet, phi: Weight, alpha: float) -> Callable:
    from .sequences import k_function

    return lambda z: k_function(Z, z) - phi.value(z) - alpha * log_weight(z)


def s_via_laplacian(Z: PointSet, phi: Weight, alpha: float, a=0.0, r: float = 0.9,
                    grid_res: int = 96) -> float:
    """S_{phi_a}(Z_a, r) through the integral route.

    alpha + (1/(pi L(r))) * integral over D(a, r) of Lap~ tau(z) log(r^2/|M_a z|^2) d lambda.
    """
    return alpha + sigma_convolution(tau_laplacian(Z, phi, alpha), r, a, grid_res)


def convolution_gap(tau: Callable, r: float, samples, grid_res: int = 96) -> float:
    """max over samples of |tau(z) - (tau * sigma_r)(z)|."""
    samples = np.atleast_1d(np.asarray(samples, dtype=complex))
    gaps = [abs(float(np.real(tau(np.array([z]))[0])) - sigma_convolution(tau, r, z, grid_res))
            for z in samples]
    return float(max(gaps))


DEFAULT_R_GRID = (0.9, 0.925, 0.95, 0.975, 0.995)


def default_a_grid(spacing: float = 0.3, a_max: float = 0.95) -> np.ndarray:
    return hyperbolic_lattice(spacing, a_max).points


@dataclass
class DensityReport:
    r_grid: np.ndarray
    a_grid: np.ndarray
    values: np.ndarray  # shape (len(a_grid), len(r_grid)); nan where truncation is violated
    sup_per_r: np.ndarray
    estimate: float
    r0: float
    converged: bool
    truncation: float | None = None
    violations: np.ndarray = field(default=None)  # True where D(a, r) leaves the truncation disk
    tol: float = 0.05

    def rows(self):
        for i, a in enumerate(self.a_grid):
            for j, r in enumerate(self.r_grid):
                yield float(a.real), float(a.imag), float(r), float(self.values[i, j])

    def write_csv(self, path, header: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(header + "\n")
            w = csv.writer(fh)
            w.writerow(["a_re", "a_im", "r", "S_value"])
            for row in self.rows():
                w.writerow([repr(x) for x in row])

    def summary(self) -> dict:
        return {
            "estimate": self.estimate,
            "r0": self.r0,
            "converged": self.converged,
            "sup_per_r": [float(x) for x in self.sup_per_r],
            "r_grid": [float(x) for x in self.r_grid],
            "truncation": self.truncation,
            "n_violations": int(np.sum(self.violations)) if self.violations is not None else 0,
        }

    def write_json(self, path, extra: dict | None = None) -> None:
        data = self.summary()
        if extra:
            data.update(extra)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1)

    def argmax(self, r_min: float | None = None) -> tuple[complex, float]:
        """(a, r) cell attaining the estimate."""
        r_min = self.r0 if r_min is None else r_min
        vals = np.where(self.r_grid[None, :] >= r_min, self.values, -np.inf)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        return complex(self.a_grid[i]), float(self.r_grid[j])


def s_uniform_estimate(
    Z: PointSet,
    phi: Weight | None = None,
    r_grid=DEFAULT_R_GRID,
    a_grid=None,
    r0: float = 0.9,
    tol: float = 0.05,
) -> DensityReport:
    """Finite-grid estimate of the upper uniform density.

    For every a in a_grid and r in r_grid, S_{phi_a}(Z_a, r) is evaluated
    by the mean route.  ``sup_per_r`` is the max over a, and ``estimate``
    is the max of sup_per_r over r >= r0.  If Z carries a truncation
    radius T, cells with D(a, r) not inside |z| <= T are flagged and left
    out (their value is nan).  ``converged`` holds when the
    sup_per_r values over the top quartile of r_grid lie within ``tol``
    of each other.
    """
    phi = zero_weight() if phi is None else phi
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    a_grid = default_a_grid() if a_grid is None else np.atleast_1d(np.asarray(a_grid, dtype=complex))
    if r0 >= r_grid.max():
        raise ValueError("r0 must be below max(r_grid)")
    values = np.full((a_grid.size, r_grid.size), np.nan)
    viol = np.zeros(values.shape, dtype=bool)
    for i, a in enumerate(a_grid):
        Za = transform(Z, a)
        for j, r in enumerate(r_grid):
            if Z.truncation is not None and psh_add(abs(a), r) > Z.truncation:
                viol[i, j] = True
                continue
            values[i, j] = (k_hat(Za, r) - phi_hat(phi, r, a)) / log_scale(r)
    with np.errstate(all="ignore"):
        sup = np.array([np.nanmax(col) if np.any(~np.isnan(col)) else np.nan for col in values.T])
    tail = sup[r_grid >= r0]
    tail = tail[~np.isnan(tail)]
    estimate = float(tail.max()) if tail.size else float("nan")
    k = max(2, int(np.ceil(r_grid.size / 4)))
    top = sup[-k:]
    converged = bool(np.all(~np.isnan(top)) and (top.max() - top.min()) <= tol)
    return DensityReport(r_grid, a_grid, values, sup, estimate, r0, converged,
                         Z.truncation, viol, tol)
