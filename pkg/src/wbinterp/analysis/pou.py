"""Partition of unity subordinate to pseudohyperbolic disks D(a_j, rho)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CoverageError
from ..geometry import psh_distance
from ..sequences import hyperbolic_lattice


def bump(t):
    """(1 - t^2)^3 for t < 1, else 0; C^2 across the support boundary."""
    t = np.asarray(t, dtype=float)
    return np.where(t < 1.0, (1.0 - np.minimum(t, 1.0) ** 2) ** 3, 0.0)


@dataclass(frozen=True)
class PartitionOfUnity:
    centers: np.ndarray
    rho: float
    r_max: float

    def raw(self, z) -> np.ndarray:
        """Unnormalized bumps, shape z.shape + (n_centers,)."""
        z = np.asarray(z, dtype=complex)
        return bump(psh_distance(z[..., None], self.centers) / self.rho)

    def __call__(self, z) -> np.ndarray:
        """gamma_j(z) for every center j, shape z.shape + (n_centers,)."""
        b = self.raw(z)
        s = b.sum(axis=-1, keepdims=True)
        if np.any(s <= 0):
            raise CoverageError("point outside the union of the bump supports")
        return b / s

    def __len__(self):
        return self.centers.size


def partition_of_unity(spacing: float, rho: float, r_max: float, check_points: int = 4000,
                       seed: int = 0) -> PartitionOfUnity:
    """Bumps (1 - (psi(z, a_j)/rho)^2)^3 at lattice centers, normalized by their sum.

    Centers are the points of hyperbolic_lattice(spacing, .) whose disk
    D(a_j, rho) meets |z| <= r_max.  Covering is verified on a seeded
    random sample plus a polar sample of |z| <= r_max.
    """
    if not 0 < spacing < 1 or not 0 < rho < 1:
        raise ValueError("spacing and rho must lie in (0, 1)")
    if rho <= spacing / 2:
        raise CoverageError("rho must exceed spacing/2 for the disks to cover")
    reach = (r_max + rho) / (1 + r_max * rho)
    lat = hyperbolic_lattice(spacing, min(reach, 1 - 1e-12)).points
    r = np.abs(lat)
    gap = np.where(r > r_max, (r - r_max) / (1 - r * r_max), 0.0)
    centers = lat[gap < rho]
    pou = PartitionOfUnity(centers, rho, r_max)
    rng = np.random.default_rng(seed)
    sample = r_max * np.sqrt(rng.uniform(0, 1, check_points)) * np.exp(2j * np.pi * rng.uniform(0, 1, check_points))
    rr = np.linspace(0, r_max, 64)
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    polar = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
    for chunk in (sample, polar):
        if np.any(pou.raw(chunk).sum(axis=-1) <= 0):
            raise CoverageError("the bump supports do not cover |z| <= r_max; raise rho")
    return pou
