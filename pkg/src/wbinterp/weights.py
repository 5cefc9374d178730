"""Subharmonic weights with bounded invariant Laplacian.

A weight is stored with its value, (optionally) its exact invariant
Laplacian, and the claimed bounds m <= Lap~ phi <= M.  When the Laplacian
is not supplied it is obtained by finite differences and the record says so.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ResolutionError
from .geometry import (
    centered_grid,
    circle_mean,
    full_disk_grid,
    invariant_laplacian_fd,
    log_weight,
    mobius,
    psh_distance,
)


@dataclass(frozen=True)
class Weight:
    value: Callable
    laplacian: Callable | None = None
    m: float = 0.0
    M: float = 0.0
    name: str = "custom"

    @property
    def laplacian_source(self) -> str:
        return "analytic" if self.laplacian is not None else "finite-difference"

    def __call__(self, z):
        return self.value(z)

    def lap(self, z):
        """Invariant Laplacian at z, exact when available."""
        if self.laplacian is not None:
            return self.laplacian(z)
        return invariant_laplacian_fd(self.value, z)

    def check_bounds(self, z, tol=1e-6) -> bool:
        vals = np.asarray(self.lap(z), dtype=float)
        return bool(np.all(vals >= self.m - tol) and np.all(vals <= self.M + tol))


def standard_weight(alpha: float) -> Weight:
    """alpha * log(1/(1 - |z|^2)); Laplacian identically alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return Weight(
        value=lambda z: alpha * log_weight(z),
        laplacian=lambda z: np.full(np.shape(z), float(alpha)),
        m=alpha,
        M=alpha,
        name=f"standard:{alpha:g}",
    )


def perturbed_standard_weight(alpha: float, amplitude: float) -> Weight:
    """Standard weight plus amplitude * Re(z^2), a harmonic perturbation."""
    base = standard_weight(alpha)
    return Weight(
        value=lambda z: base.value(z) + amplitude * np.real(np.asarray(z) ** 2),
        laplacian=base.laplacian,
        m=alpha,
        M=alpha,
        name=f"perturbed-standard:{alpha:g}:{amplitude:g}",
    )


def radial_bump_weight(alpha: float, beta: float) -> Weight:
    """alpha * log(1/(1-|z|^2)) + beta * |z|^2.

    Lap~ = alpha + beta (1 - |z|^2)^2, a non-constant Laplacian with
    closed-form circle means alpha log(1/(1-r^2)) + beta r^2.
    """
    if alpha <= 0 or beta < 0:
        raise ValueError("need alpha > 0 and beta >= 0")
    return Weight(
        value=lambda z: alpha * log_weight(z) + beta * np.abs(z) ** 2,
        laplacian=lambda z: alpha + beta * (1.0 - np.abs(z) ** 2) ** 2,
        m=alpha,
        M=alpha + beta,
        name=f"radial-bump:{alpha:g}:{beta:g}",
    )


def zero_weight() -> Weight:
    """phi = 0, the unweighted case.  Not strictly subharmonic (m = 0)."""
    return Weight(
        value=lambda z: np.zeros(np.shape(z)),
        laplacian=lambda z: np.zeros(np.shape(z)),
        m=0.0,
        M=0.0,
        name="zero",
    )


def parse_weight(spec: str) -> Weight:
    """Build a weight preset from a CLI string such as ``standard:1.5``."""
    kind, *args = spec.split(":")
    try:
        nums = [float(a) for a in args]
    except ValueError as exc:
        raise ValueError(f"bad weight spec {spec!r}") from exc
    table = {
        "standard": (standard_weight, 1),
        "perturbed-standard": (perturbed_standard_weight, 2),
        "radial-bump": (radial_bump_weight, 2),
        "zero": (zero_weight, 0),
    }
    if kind not in table or len(nums) != table[kind][1]:
        raise ValueError(f"bad weight spec {spec!r}")
    return table[kind][0](*nums)


def transport_weight(phi: Weight, a) -> Weight:
    """phi o M_a.

    The transported weight of the interpolation problem differs from this
    by a harmonic function, which is invisible to circle means taken
    relative to the center and to the invariant Laplacian.
    """
    a = complex(a)
    lap = None
    if phi.laplacian is not None:
        lap = lambda z: phi.laplacian(mobius(a, z))
    return Weight(
        value=lambda z: phi.value(mobius(a, z)),
        laplacian=lap,
        m=phi.m,
        M=phi.M,
        name=f"{phi.name}@{a}",
    )


@dataclass(frozen=True)
class NormalizedWeight:
    """tau = phi - alpha * log(1/(1 - |z|^2)) together with the shifted bounds."""

    base: Weight
    alpha: float

    def __call__(self, z):
        return self.base.value(z) - self.alpha * log_weight(z)

    @property
    def bounds(self) -> tuple[float, float]:
        return self.base.m - self.alpha, self.base.M - self.alpha

    def identity_sides(self, z, p: float):
        """Both sides of exp(-p phi)/(1-|z|^2) = exp(-p tau) (1-|z|^2)^(alpha p - 1)."""
        w = 1.0 - np.abs(np.asarray(z)) ** 2
        lhs = np.exp(-p * self.base.value(z)) / w
        rhs = np.exp(-p * self(z)) * w ** (self.alpha * p - 1.0)
        return lhs, rhs


def alpha_shift(phi: Weight, alpha: float) -> NormalizedWeight:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return NormalizedWeight(phi, alpha)


def weight_mean(phi: Weight, r: float, n: int = 2048) -> float:
    """Circle mean of phi at radius r minus phi(0)."""
    return float(np.real(circle_mean(phi.value, r, n)) - np.real(phi.value(np.zeros(1))[0]))


def green_mean(phi: Weight, r: float, grid_res: int = 64) -> float:
    """(1/pi) * integral over |z| < r of Lap~ phi(z) log(r^2/|z|^2) d lambda(z)."""
    grid = centered_grid(r, grid_res, "invariant")
    kernel = np.log(r * r / np.abs(grid.nodes) ** 2)
    return float(grid.integrate(phi.lap(grid.nodes) * kernel) / np.pi)


def _potential_kernel(zeta, u):
    """log psi(zeta,u)^2 + (1 - |u|^2) Re[(1 + conj(u) zeta)/(1 - conj(u) zeta)].

    The second term is harmonic in zeta and cancels the first-order decay
    of log psi^2 as |u| -> 1, so the kernel is integrable against
    d lambda(u); its only singularity is at u = zeta.
    """
    q = np.conj(u) * zeta
    log_psi2 = np.log(np.abs(zeta - u) ** 2) - np.log(np.abs(1.0 - q) ** 2)
    return log_psi2 + (1.0 - np.abs(u) ** 2) * np.real((1.0 + q) / (1.0 - q))


@dataclass
class GreenPotential:
    """tau_a = phi - h_a realised as a potential of Lap~ phi, normalized at a.

    ``shift`` is the constant added so that tau_a >= 0 on the sampled
    points; ``C`` is the measured ratio tau_a(a) / M.
    """

    phi: Weight
    a: complex
    grid_res: int
    r_max: float
    shift: float = 0.0
    C: float = float("nan")
    laplacian_error: float = float("nan")

    def _grid(self):
        return full_disk_grid(self.r_max, n_radial=max(self.grid_res // 4, 4),
                              n_angular=4 * self.grid_res, n_panels=12,
                              center_grading=8,
                              measure_tag="invariant")

    def _integral(self, zetas):
        grid = self._grid()
        out = np.empty(zetas.size)
        for i, zt in enumerate(zetas):
            # substitute u = M_zeta(v) so the log singularity sits at v = 0
            u = mobius(zt, grid.nodes) if zt != 0 else -grid.nodes
            dens = self.phi.lap(mobius(self.a, u))
            out[i] = grid.integrate(dens * _potential_kernel(zt, u)) / np.pi
        return out

    def raw(self, z):
        """Potential before the positivity shift; vanishes at a."""
        z = np.asarray(z, dtype=complex)
        zeta = np.atleast_1d(mobius(self.a, z)).ravel()
        vals = self._integral(zeta) - self._integral(np.zeros(1))[0]
        return vals.reshape(np.shape(z)) if np.ndim(z) else float(vals[0])

    def __call__(self, z):
        return self.raw(z) + self.shift


def green_potential(
    phi: Weight,
    a=0.0,
    grid_res: int = 64,
    r_max: float = 1.0 - 1e-10,
    samples=None,
    check_tol: float = 1e-3,
) -> GreenPotential:
    """Construct tau_a with Lap~ tau_a = Lap~ phi and tau_a >= 0 on samples.

    The potential is normalized by tau_a(a) = 0 before the positivity
    shift.  A finite-difference check of the Laplacian at interior sample
    points raises ResolutionError when it misses by more than check_tol.
    """
    a = complex(a)
    pot = GreenPotential(phi, a, grid_res, r_max)
    if samples is None:
        rr = np.array([0.0, 0.3, 0.6, 0.8])
        th = np.linspace(0, 2 * np.pi, 7, endpoint=False)
        w = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
        samples = mobius(a, w)
    samples = np.asarray(samples, dtype=complex)
    vals = pot.raw(samples)
    lo = float(np.min(vals))
    pot.shift = max(0.0, -lo)
    M = phi.M if phi.M > 0 else 1.0
    pot.C = float(pot(np.array([a]))[0] / M)

    probe = samples[np.abs(mobius(a, samples)) <= 0.6][:6]
    h = 0.05 * (1.0 - np.abs(probe) ** 2)
    fd = invariant_laplacian_fd(pot.raw, probe, h, order=4)
    err = float(np.max(np.abs(fd - phi.lap(probe))))
    pot.laplacian_error = err
    if err > check_tol:
        raise ResolutionError(f"Laplacian of tau_a misses by {err:.2e}; raise grid_res")
    return pot


def potential_gradient_bound(pot: GreenPotential, z, h=1e-4):
    """(1 - |z|^2) |dbar tau_a(z)| by central differences."""
    z = np.asarray(z, dtype=complex)
    fx = (pot.raw(z + h) - pot.raw(z - h)) / (2 * h)
    fy = (pot.raw(z + 1j * h) - pot.raw(z - 1j * h)) / (2 * h)
    return (1.0 - np.abs(z) ** 2) * np.abs(0.5 * (fx + 1j * fy))


__all__ = [
    "Weight",
    "NormalizedWeight",
    "GreenPotential",
    "standard_weight",
    "perturbed_standard_weight",
    "radial_bump_weight",
    "zero_weight",
    "parse_weight",
    "transport_weight",
    "alpha_shift",
    "weight_mean",
    "green_mean",
    "green_potential",
    "potential_gradient_bound",
    "psh_distance",
]
