"""Functions sampled on a square lattice in the disk, and the m_q maximal function."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from ..errors import CoverageError
from ..geometry import DiskRegion


@dataclass
class GridFunction:
    """Values at nodes x_i + i y_j, x_i = -1 + (i + 1/2) h with h = 2/N.

    Only nodes with |z| <= r_max are active (``mask``); inactive values are 0.
    """

    values: np.ndarray
    h: float
    r_max: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.values.shape[0]
        if self.values.shape != (n, n):
            raise ValueError("values must be a square array")
        if self.h <= 0:
            raise ValueError("spacing must be positive")
        self.values = np.where(self.mask, self.values, 0.0)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def nodes(self) -> np.ndarray:
        return lattice_nodes(self.n)

    @property
    def mask(self) -> np.ndarray:
        return np.abs(lattice_nodes(self.values.shape[0])) <= self.r_max

    @classmethod
    def sample(cls, f: Callable, n: int, r_max: float) -> "GridFunction":
        z = lattice_nodes(n)
        mask = np.abs(z) <= r_max
        vals = np.zeros(z.shape, dtype=complex)
        vals[mask] = f(z[mask])
        return cls(vals, 2.0 / n, r_max)

    @classmethod
    def zeros(cls, n: int, r_max: float) -> "GridFunction":
        return cls(np.zeros((n, n), complex), 2.0 / n, r_max)

    def l2(self, weight=None) -> float:
        w = 1.0 if weight is None else weight
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * w) * self.h**2))

    def __add__(self, other):
        return GridFunction(self.values + other.values, self.h, self.r_max)

    def __sub__(self, other):
        return GridFunction(self.values - other.values, self.h, self.r_max)

    def __mul__(self, c):
        return GridFunction(self.values * c, self.h, self.r_max)

    __rmul__ = __mul__

    def save_npz(self, path) -> None:
        np.savez(path, values=self.values, h=self.h, r_max=self.r_max)

    @classmethod
    def load_npz(cls, path) -> "GridFunction":
        d = np.load(path)
        return cls(d["values"], float(d["h"]), float(d["r_max"]))

    def save_csv(self, path, header: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(header + "\n")
            fh.write(f"# n={self.n} h={self.h!r} r_max={self.r_max!r}\n")
            w = csv.writer(fh)
            w.writerow(["i", "j", "re", "im"])
            ii, jj = np.nonzero(self.mask)
            for i, j in zip(ii, jj):
                v = self.values[i, j]
                w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def load_csv(cls, path) -> "GridFunction":
        meta, rows = {}, []
        with open(path) as fh:
            for line in fh:
                if line.startswith("# n="):
                    meta = dict(kv.split("=") for kv in line[2:].split())
                elif line.startswith("#") or line.startswith("i,"):
                    continue
                else:
                    rows.append(line.strip().split(","))
        if not meta:
            raise ValueError("grid CSV lacks the '# n= h= r_max=' header")
        n = int(meta["n"])
        vals = np.zeros((n, n), complex)
        for i, j, re, im in rows:
            vals[int(i), int(j)] = complex(float(re), float(im))
        return cls(vals, float(meta["h"]), float(meta["r_max"]))


def lattice_nodes(n: int) -> np.ndarray:
    x = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    return x[None, :] + 1j * x[:, None]


def mq_maximal(f: GridFunction, q: float, points=None) -> GridFunction | np.ndarray:
    """m_q f(zeta) = (mean of |f|^q over D(zeta, 1/2))^(1/q); sup for q = inf.

    Means are node averages over the lattice points inside the Euclidean
    disk underlying D(zeta, 1/2).  Without ``points`` the result is a grid
    function on the nodes whose disk lies inside |z| <= r_max (other nodes
    are masked out by shrinking r_max).  Explicit ``points`` whose disk is
    not covered raise CoverageError.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    z = f.nodes
    act = f.mask
    tree = cKDTree(np.column_stack([z[act].real, z[act].imag]))
    absf = np.abs(f.values[act])

    def at(zeta):
        c, rho = _half_disk(zeta)
        idx = tree.query_ball_point([c.real, c.imag], rho)
        if not idx:
            raise CoverageError("no grid node inside D(zeta, 1/2); refine the grid")
        v = absf[idx]
        return float(v.max()) if np.isinf(q) else float(np.mean(v**q) ** (1.0 / q))

    def covered(zeta):
        c, rho = _half_disk(zeta)
        return abs(c) + rho <= f.r_max

    if points is not None:
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        if not all(covered(p) for p in pts):
            raise CoverageError("D(zeta, 1/2) leaves the grid for some query point")
        return np.array([at(p) for p in pts])
    # D(zeta, 1/2) lies in |z| <= r_max iff psh_add(|zeta|, 1/2) <= r_max
    inner = (f.r_max - 0.5) / (1 - 0.5 * f.r_max)
    if inner <= 0:
        raise CoverageError("r_max too small for any disk D(zeta, 1/2)")
    out = np.zeros(z.shape, complex)
    ok = np.abs(z) <= inner
    out[ok] = [at(p) for p in z[ok]]
    return GridFunction(out, f.h, inner)


def _half_disk(zeta):
    return DiskRegion(complex(zeta), 0.5).euclidean()
