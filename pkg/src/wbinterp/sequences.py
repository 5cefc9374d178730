"""Finite multisets of disk points and the k_Z machinery."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DiskDomainError, EmptyInputError
from .geometry import mobius, psh_add, psh_distance


def _canonical_order(points: np.ndarray) -> np.ndarray:
    # rounding keeps points of one lattice ring together despite float noise
    key_mod = np.round(np.abs(points), 12)
    key_arg = np.round(np.mod(np.angle(points), 2 * np.pi), 12)
    return np.lexsort((key_arg, key_mod))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Multiset of points in the open unit disk.

    Equal points are merged and their multiplicities added.  Points are
    stored in canonical order (modulus, then argument).  ``truncation``
    records the radius at which a generator cut an infinite sequence.
    """

    points: np.ndarray
    mult: np.ndarray
    truncation: float | None = field(default=None)

    def __init__(self, points=(), mult=None, truncation=None):
        pts = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        if mult is None:
            m = np.ones(pts.size, dtype=int)
        else:
            m = np.atleast_1d(np.asarray(mult, dtype=int)).ravel()
        if m.size != pts.size:
            raise ValueError("points and multiplicities differ in length")
        if np.any(m < 1):
            raise ValueError("multiplicities must be positive")
        if np.any(np.abs(pts) >= 1.0):
            raise DiskDomainError("PointSet points must satisfy |z| < 1")
        if pts.size:
            uniq, inv = np.unique(pts, return_inverse=True)
            m = np.bincount(inv.ravel(), weights=m).astype(int)
            pts = uniq
            order = _canonical_order(pts)
            pts, m = pts[order], m[order]
        pts.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mult", m)
        object.__setattr__(self, "truncation", truncation)

    def __len__(self):
        return int(self.mult.sum())

    @property
    def n_distinct(self) -> int:
        return self.points.size

    def expanded(self) -> np.ndarray:
        """Points repeated according to multiplicity."""
        return np.repeat(self.points, self.mult)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.mult, other.mult)

    def __hash__(self):
        return hash((self.points.tobytes(), self.mult.tobytes()))

    def union(self, other: "PointSet") -> "PointSet":
        """Multiset sum."""
        return PointSet(
            np.concatenate([self.points, other.points]),
            np.concatenate([self.mult, other.mult]),
        )

    def issubset(self, other: "PointSet") -> bool:
        lookup = dict(zip(other.points.tolist(), other.mult.tolist()))
        return all(lookup.get(p, 0) >= k for p, k in zip(self.points.tolist(), self.mult.tolist()))

    def multiplicity(self, z) -> int:
        hit = self.points == complex(z)
        return int(self.mult[hit].sum())

    def to_records(self) -> list[dict]:
        return [
            {"re": float(p.real), "im": float(p.imag), "mult": int(k)}
            for p, k in zip(self.points, self.mult)
        ]

    @classmethod
    def from_records(cls, records) -> "PointSet":
        if not isinstance(records, list):
            raise ValueError("point set JSON must be an array of {re, im, mult}")
        pts, mult = [], []
        for rec in records:
            pts.append(complex(float(rec["re"]), float(rec["im"])))
            mult.append(int(rec.get("mult", 1)))
        return cls(pts, mult)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_records(), indent=1))

    @classmethod
    def load(cls, path) -> "PointSet":
        return cls.from_records(json.loads(Path(path).read_text()))

    def __repr__(self):
        return f"PointSet(n={len(self)}, distinct={self.n_distinct})"


def _termwise(Z: PointSet, z, term, block: int = 4_000_000):
    """sum over a in Z of mult * term(a, z), in blocks of bounded memory."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.size)
    if Z.n_distinct == 0:
        return out.reshape(z.shape)
    step = max(1, block // Z.n_distinct)
    for s in range(0, flat.size, step):
        zz = flat[s:s + step, None]
        out[s:s + step] = (Z.mult * term(Z.points, zz)).sum(axis=-1)
    return out.reshape(z.shape)


def _k_term(a, z):
    return (1.0 - np.abs(a) ** 2) ** 2 / np.abs(1.0 - np.conj(a) * z) ** 2


def _lap_term(a, z):
    return ((1.0 - np.abs(a) ** 2) * (1.0 - np.abs(z) ** 2) / np.abs(1.0 - np.conj(a) * z) ** 2) ** 2


def k_function(Z: PointSet, z):
    """k_Z(z) = sum over a in Z of (1-|a|^2)^2 / |1 - conj(a) z|^2 * |z|^2 / 2."""
    z = np.asarray(z, dtype=complex)
    out = _termwise(Z, z, _k_term) * np.abs(z) ** 2 / 2.0
    return out if out.ndim else float(out)


def k_laplacian(Z: PointSet, z):
    """Invariant Laplacian of k_Z, which is (1/2) sum (1 - psi(a, z)^2)^2."""
    z = np.asarray(z, dtype=complex)
    out = 0.5 * _termwise(Z, z, _lap_term)
    return out if out.ndim else float(out)


def k_hat(Z: PointSet, r: float) -> float:
    """Closed-form circle mean of k_Z at radius r."""
    if not 0.0 < r < 1.0:
        raise DiskDomainError("r must lie in (0, 1)")
    aa = np.abs(Z.points) ** 2
    return float(r * r / 2.0 * np.sum(Z.mult * (1.0 - aa) ** 2 / (1.0 - aa * r * r)))


def _euclidean_disks(centers, R):
    # D(c, R) is the Euclidean disk with these center and radius
    c = np.asarray(centers, dtype=complex)
    aa = np.abs(c) ** 2
    denom = 1.0 - R * R * aa
    return c * (1.0 - R * R) / denom, R * (1.0 - aa) / denom


def _tree(points):
    return cKDTree(np.column_stack([points.real, points.imag]))


def _ball_members(tree, centers, R):
    """For each center, indices of tree points with psh distance <= R (Euclidean superset)."""
    ec, er = _euclidean_disks(centers, R)
    return tree.query_ball_point(np.column_stack([ec.real, ec.imag]), er * (1 + 1e-12))


def _pairs(members):
    """Flatten ragged neighbour lists into (owner, index) arrays."""
    lengths = np.fromiter((len(m) for m in members), dtype=int, count=len(members))
    owner = np.repeat(np.arange(len(members)), lengths)
    idx = np.fromiter((j for m in members for j in m), dtype=int, count=int(lengths.sum()))
    return owner, idx


def density_search_set(Z: PointSet, R: float) -> np.ndarray:
    """Candidate centers for density_count: Z itself plus the points of a
    lattice with spacing R/2 that lie within distance R of Z."""
    if Z.n_distinct == 0:
        return np.zeros(0, dtype=complex)
    top = float(np.max(np.abs(Z.points)))
    lat = hyperbolic_lattice(R / 2.0, min(0.999999, psh_add(top, R))).points
    _, idx = _pairs(_ball_members(_tree(lat), Z.points, R))
    near = np.unique(idx)
    return np.concatenate([Z.points, lat[near]])


def density_count(Z: PointSet, R: float, centers=None) -> int:
    """Largest multiplicity-counted number of points of Z in one disk D(a, R).

    The supremum over a is taken over a finite search set (by default Z
    plus a lattice of spacing R/2 near Z), so the result is a certified
    lower bound for the true supremum.  Disks are open: psh distance < R.
    """
    if not 0.0 < R < 1.0:
        raise ValueError("R must lie in (0, 1)")
    if Z.n_distinct == 0:
        return 0
    if centers is None:
        centers = density_search_set(Z, R)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    best = 0
    for chunk in np.array_split(centers, max(1, centers.size // 20000)):
        owner, idx = _pairs(_ball_members(_tree(Z.points), chunk, R))
        inside = psh_distance(Z.points[idx], chunk[owner]) < R
        counts = np.bincount(owner[inside], weights=Z.mult[idx][inside], minlength=chunk.size)
        best = max(best, int(round(counts.max())))
    return best


def separation(Z: PointSet) -> float:
    """Minimum pseudohyperbolic distance between distinct points; 0 with repeats."""
    if len(Z) < 2 or (Z.n_distinct < 2 and not np.any(Z.mult > 1)):
        raise EmptyInputError("separation needs at least two points")
    if np.any(Z.mult > 1):
        return 0.0
    pts = Z.points
    tree = _tree(pts)
    # Euclidean neighbours give an upper bound d0; every pair closer than
    # d0 then lies in one of the Euclidean disks D(z, d0).
    k = min(8, pts.size)
    _, nbr = tree.query(np.column_stack([pts.real, pts.imag]), k=k)
    d0 = float(np.min(psh_distance(pts[:, None], pts[nbr[:, 1:]])))
    owner, idx = _pairs(_ball_members(tree, pts, d0))
    keep = owner != idx
    if not np.any(keep):
        return d0
    return min(d0, float(np.min(psh_distance(pts[idx[keep]], pts[owner[keep]]))))


def transform(Z: PointSet, a) -> PointSet:
    """Image M_a(Z) with multiplicities kept."""
    if Z.n_distinct == 0:
        return Z
    return PointSet(mobius(complex(a), Z.points), Z.mult, Z.truncation)


def square_summability(Z: PointSet) -> float:
    return float(np.sum(Z.mult * (1.0 - np.abs(Z.points) ** 2) ** 2))


def hyperbolic_lattice(spacing: float, r_max: float) -> PointSet:
    """Rings about 0 with pseudohyperbolic spacing between neighbours.

    Ring j sits at radius tanh(j * artanh(spacing)), so consecutive rings
    are exactly ``spacing`` apart.  Each ring holds the largest number of
    equally spaced points whose neighbours are at least ``spacing`` apart;
    odd rings are rotated by half a step.  Separation is at least
    ``spacing``.
    """
    if not 0.0 < spacing < 1.0:
        raise ValueError("spacing must lie in (0, 1)")
    if not 0.0 < r_max < 1.0:
        raise ValueError("r_max must lie in (0, 1)")
    step = np.arctanh(spacing)
    pts = [0.0 + 0.0j]
    j = 1
    while True:
        rho = np.tanh(j * step)
        if rho > r_max:
            break
        # psi(rho, rho e^{it}) = spacing  <=>  sin(t/2) = spacing (1 - rho^2) / (2 rho sqrt(1 - spacing^2))
        arg = spacing * (1.0 - rho * rho) / (2.0 * rho * np.sqrt(1.0 - spacing * spacing))
        n = 1 if arg >= 1.0 else max(1, int(np.floor(np.pi / np.arcsin(arg))))
        offset = np.pi / n if j % 2 else 0.0
        theta = offset + 2.0 * np.pi * np.arange(n) / n
        pts.extend(rho * np.exp(1j * theta))
        j += 1
    return PointSet(np.array(pts), truncation=r_max)


def parse_points(spec: str) -> PointSet:
    """Point set from a JSON path or a generator spec ``lattice:<spacing>:<r_max>``."""
    if spec.startswith("lattice:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad generator spec {spec!r}")
        return hyperbolic_lattice(float(parts[1]), float(parts[2]))
    return PointSet.load(spec)


def random_pointset(rng: np.random.Generator, n: int, r_max: float = 0.95, max_mult: int = 1) -> PointSet:
    """n random points, uniform in hyperbolic radius up to r_max."""
    t = rng.uniform(0.0, np.arctanh(r_max), n)
    th = rng.uniform(0.0, 2 * np.pi, n)
    mult = rng.integers(1, max_mult + 1, n)
    return PointSet(np.tanh(t) * np.exp(1j * th), mult)
