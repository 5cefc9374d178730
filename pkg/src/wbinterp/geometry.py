"""Pseudohyperbolic geometry of the unit disk, quadrature grids and
finite-difference Wirtinger operators.

Points are plain Python / numpy complex numbers.  Every function accepts
scalars or arrays and broadcasts like numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import DiskDomainError, EmptyInputError, StencilError

MeasureTag = Literal["area", "invariant", "custom"]


def _check_disk(*zs, name="point"):
    for z in zs:
        if np.any(np.abs(z) >= 1.0):
            raise DiskDomainError(f"{name} must satisfy |z| < 1")


def psh_distance(z, w):
    """Pseudohyperbolic distance |z - w| / |1 - conj(w) z|."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_disk(z, w)
    d = np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)
    return d if d.ndim else float(d)


def mobius(a, z):
    """The involution M_a(z) = (a - z) / (1 - conj(a) z) exchanging a and 0."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_disk(a, z)
    out = (a - z) / (1.0 - np.conj(a) * z)
    return out if out.ndim else complex(out)


def psh_diameter(points):
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        raise EmptyInputError("psh_diameter of an empty set")
    if pts.size == 1:
        return 0.0
    return float(np.max(psh_distance(pts[:, None], pts[None, :])))


def psh_add(r, s):
    """Largest distance reachable by a step of length r then one of length s.

    This is the sharp form of the triangle inequality for the
    pseudohyperbolic metric, (r + s) / (1 + r s).
    """
    return (r + s) / (1.0 + r * s)


def log_weight(z):
    """log(1 / (1 - |z|^2)); its invariant Laplacian is identically 1."""
    z = np.asarray(z, dtype=complex)
    out = -np.log1p(-(z.real**2 + z.imag**2))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiskRegion:
    """Pseudohyperbolic disk D(center, radius)."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        _check_disk(self.center, name="region center")
        if not 0.0 < self.radius < 1.0:
            raise DiskDomainError("pseudohyperbolic radius must lie in (0, 1)")

    def euclidean(self) -> tuple[complex, float]:
        """Euclidean center and radius of the same set."""
        c, r = self.center, self.radius
        denom = 1.0 - r * r * abs(c) ** 2
        return c * (1.0 - r * r) / denom, r * (1.0 - abs(c) ** 2) / denom

    @classmethod
    def from_euclidean(cls, center: complex, radius: float) -> "DiskRegion":
        """Pseudohyperbolic description of a Euclidean disk inside the unit disk."""
        center = complex(center)
        rho = abs(center)
        if rho + radius >= 1.0:
            raise DiskDomainError("Euclidean disk is not contained in the unit disk")
        unit = center / rho if rho > 0 else 1.0
        x1, x2 = rho - radius, rho + radius
        d = psh_distance(x1, x2)
        r = (1.0 - np.sqrt(1.0 - d * d)) / d
        # walk distance r from x1 toward x2, in the frame where x1 sits at 0
        y = mobius(x1, x2)
        c_real = mobius(x1, r * np.sign(y.real))
        return cls(c_real.real * unit, r)

    @property
    def diameter(self) -> float:
        r = self.radius
        return 2.0 * r / (1.0 + r * r)

    def contains(self, z, strict=True):
        d = psh_distance(z, self.center)
        return d < self.radius if strict else d <= self.radius

    def margin(self, z):
        """Pseudohyperbolic distance from interior points z to the boundary circle."""
        s = psh_distance(z, self.center)
        r = self.radius
        return (r - s) / (1.0 - r * s)


@dataclass(frozen=True)
class DiskGrid:
    nodes: np.ndarray
    weights: np.ndarray
    measure_tag: MeasureTag
    # radial panel index per node, used for tail diagnostics on full-disk grids
    panel: np.ndarray | None = field(default=None, compare=False)

    def integrate(self, values) -> float | complex:
        v = np.asarray(values)
        return np.sum(v * self.weights)

    def __len__(self):
        return self.nodes.size


def _polar_nodes(resolution: int):
    # s = t^2 clusters radial nodes at the center, where log kernels sit
    t, wt = np.polynomial.legendre.leggauss(resolution)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    n_theta = 2 * resolution
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    return t, wt, theta


def build_grid(
    region: DiskRegion,
    resolution: int,
    measure_tag: MeasureTag = "area",
    density: Callable | None = None,
) -> DiskGrid:
    """Polar product rule on the Euclidean disk underlying ``region``.

    Radial nodes are Gauss-Legendre in t with s = rho * t**2 (resolution
    nodes), angular nodes are 2*resolution equispaced points.  Smooth
    integrands converge spectrally; a log singularity at the Euclidean
    center still converges at high algebraic order since s ds log s
    becomes t^3 log t dt.

    ``invariant`` multiplies area weights by (1 - |z|^2)^-2; ``custom``
    multiplies them by ``density(z)``.
    """
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    center, rho = region.euclidean()
    t, wt, theta = _polar_nodes(resolution)
    s = rho * t * t
    radial_w = 2.0 * rho * rho * t**3 * wt
    nodes = center + (s[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = (radial_w[:, None] * np.full(theta.size, 2.0 * np.pi / theta.size)).ravel()
    return _tag(nodes, weights, measure_tag, density)


def centered_grid(r: float, resolution: int, measure_tag: MeasureTag = "invariant") -> DiskGrid:
    """Grid on the pseudohyperbolic disk D(0, r) (same rule as build_grid)."""
    return build_grid(DiskRegion(0.0, r), resolution, measure_tag)


def full_disk_grid(
    r_max: float,
    n_radial: int = 24,
    n_angular: int = 256,
    n_panels: int = 8,
    measure_tag: MeasureTag = "area",
    density: Callable | None = None,
    center_grading: int = 0,
) -> DiskGrid:
    """Grid on |z| <= r_max graded toward the boundary.

    Radial variable u = log(1/(1 - s^2)) split into ``n_panels`` equal
    panels with ``n_radial`` Gauss nodes each; area element becomes
    exp(-u)/2 du dtheta, so weights like (1 - |z|^2)^(c) stay smooth.
    ``center_grading`` > 0 splits the first panel geometrically toward
    u = 0 (ratio 1/4), for integrands with a log singularity at the center.
    """
    u_max = -np.log1p(-r_max * r_max)
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    edges = np.linspace(0.0, u_max, n_panels + 1)
    if center_grading:
        inner = edges[1] * 0.25 ** np.arange(center_grading, 0, -1)
        edges = np.concatenate([[0.0], inner, edges[1:]])
        n_panels = edges.size - 1
    us, wus, pids = [], [], []
    for k in range(n_panels):
        a, b = edges[k], edges[k + 1]
        us.append(0.5 * (b - a) * x + 0.5 * (a + b))
        wus.append(0.5 * (b - a) * wx)
        pids.append(np.full(n_radial, k))
    u = np.concatenate(us)
    wu = np.concatenate(wus)
    pid = np.concatenate(pids)
    s = np.sqrt(-np.expm1(-u))
    radial_w = 0.5 * np.exp(-u) * wu
    theta = 2.0 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    nodes = (s[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = (radial_w[:, None] * np.full(n_angular, 2.0 * np.pi / n_angular)).ravel()
    grid = _tag(nodes, weights, measure_tag, density)
    return DiskGrid(grid.nodes, grid.weights, grid.measure_tag, np.repeat(pid, n_angular))


def _tag(nodes, weights, measure_tag, density):
    if measure_tag == "invariant":
        weights = weights / (1.0 - np.abs(nodes) ** 2) ** 2
    elif measure_tag == "custom":
        if density is None:
            raise ValueError("custom measure needs a density callable")
        weights = weights * np.asarray(density(nodes), dtype=float)
    elif measure_tag != "area":
        raise ValueError(f"unknown measure tag {measure_tag!r}")
    return DiskGrid(nodes, weights, measure_tag)


def circle_mean(f: Callable, r: float, n: int = 1024, center: complex = 0.0):
    """Trapezoidal mean of f over the circle |z - center| = r with n nodes."""
    if not 0.0 < r < 1.0:
        raise DiskDomainError("circle radius must lie in (0, 1)")
    if n < 16:
        raise ValueError("need at least 16 nodes")
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.mean(f(center + r * np.exp(1j * theta)))


def default_step(z):
    return 1e-4 * (1.0 - np.abs(z) ** 2)


def invariant_laplacian_fd(f: Callable, z, h=None, order: int = 2):
    """(1 - |z|^2)^2 * d dbar f at z by central differences.

    d dbar equals one quarter of the Euclidean Laplacian.  ``order=2`` is
    the 5-point stencil with O(h^2) error for C^4 functions; ``order=4``
    uses the 9-point cross stencil, O(h^4) for C^6 functions.
    """
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    if h is None:
        h = default_step(z)
    h = np.asarray(h, dtype=float)
    reach = h if order == 2 else 2 * h
    if np.any(np.abs(z) + reach >= 1.0):
        raise StencilError("stencil leaves the unit disk")
    if order == 2:
        lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)) / (h * h)
    elif order == 4:
        near = f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h)
        far = f(z + 2 * h) + f(z - 2 * h) + f(z + 2j * h) + f(z - 2j * h)
        lap = (16.0 * near - far - 60.0 * f(z)) / (12.0 * h * h)
    else:
        raise ValueError("order must be 2 or 4")
    out = (1.0 - np.abs(z) ** 2) ** 2 * lap / 4.0
    return out if np.ndim(out) else float(np.real(out))


def dbar_fd(f: Callable, z, h):
    """Central-difference dbar = (d/dx + i d/dy) / 2."""
    z = np.asarray(z, dtype=complex)
    return 0.5 * ((f(z + h) - f(z - h)) / (2 * h) + 1j * (f(z + 1j * h) - f(z - 1j * h)) / (2 * h))
