"""Holomorphic functions g_a controlling e^(k_Z - phi) from above.

Work in the variable w = M_a(z).  Let
    V(w) = k_Z(M_a w) - phi(M_a w) - (alpha - eps) log(1/(1 - |w|^2)).
On the circle |w| = rho the Fourier series of V is cancelled by the real
part of an analytic polynomial A (harmonic conjugation by FFT).  Then
    g_a(z) = exp(A(M_a z) + kappa)
and U = V + Re A + kappa equals log(|g_a e^(k_Z - phi)| (1 - |M_a z|^2)^(alpha - eps)).
kappa normalizes U(0) = 0, i.e. |g_a(a) e^(k_Z(a) - phi(a))| = 1.

The circle mean of U at radius s is L(s) (S_{phi_a}(Z_a, s) - alpha + eps),
so U stays bounded toward the boundary exactly when the density seen
from a stays below alpha - eps.  The report therefore compares the
largest value of U on the outer annulus with its largest value inside:
growth toward the boundary is the finite-radius signature of a failing
upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import log_weight, mobius
from ..sequences import PointSet, k_function
from ..weights import Weight


@dataclass
class GConstruction:
    a: complex
    rho: float
    alpha: float
    eps: float
    coeffs: np.ndarray  # A(w) = sum coeffs[n] (w / rho)^n
    kappa: float
    upper_max: float  # max over samples of |g e^(k - phi)| (1 - |M_a|^2)^(alpha - eps)
    value_at_a: float  # |g(a) e^(k(a) - phi(a))|
    growth: float  # max U on the outer annulus minus max U inside
    delta: float  # value_at_a / upper_max
    upper_ok: bool
    lower_ok: bool
    rho_inner: float
    profile: np.ndarray  # (radius, max U, mean U) per sample circle

    def log_g(self, z):
        w = mobius(self.a, np.asarray(z, dtype=complex))
        if np.any(np.abs(w) > self.rho):
            raise ValueError("g_a is only constructed on |M_a z| <= rho")
        return np.polynomial.polynomial.polyval(w / self.rho, self.coeffs) + self.kappa

    def __call__(self, z):
        return np.exp(self.log_g(z))

    @property
    def passed(self) -> bool:
        return self.upper_ok and self.lower_ok

    def summary(self) -> dict:
        return {
            "a": [self.a.real, self.a.imag], "rho": self.rho, "alpha": self.alpha, "eps": self.eps,
            "upper_max": self.upper_max, "value_at_a": self.value_at_a, "growth": self.growth,
            "delta": self.delta, "upper_ok": self.upper_ok, "lower_ok": self.lower_ok,
        }


def default_eps(alpha: float, s_plus: float, floor: float = 0.01) -> float:
    """Half the gap alpha - S+, or ``floor`` when the gap is not positive.

    A negative eps would lift the comparison exponent above alpha and blur
    the failing case, so it is never used.
    """
    gap = 0.5 * (alpha - s_plus)
    return gap if gap > floor else floor


def _k_flat(Z: PointSet, z):
    return np.atleast_1d(k_function(Z, np.asarray(z, dtype=complex).ravel()))


def construct_g(
    a,
    Z: PointSet,
    phi: Weight,
    alpha: float,
    eps: float,
    circle_res: int = 4096,
    r_max: float = 0.999,
    n_circles: int = 32,
    n_sample: int = 512,
    growth_tol: float = 0.0,
    delta_min: float = 1e-8,
) -> GConstruction:
    """Build g_a on |M_a z| <= r_max and check both bounds on sample circles.

    Sample circles are equispaced in hyperbolic radius up to r_max.  The
    outer annulus is rho_inner <= |w| <= r_max with
    log(1/(1 - rho_inner^2)) = log(1/(1 - r_max^2)) / 2.
    upper_ok means growth <= growth_tol.  lower_ok means delta >= delta_min.
    """
    a = complex(a)
    rho = float(r_max)
    n = int(circle_res)
    if n < 64 or n % n_sample:
        raise ValueError("circle_res must be at least 64 and a multiple of n_sample")
    s = alpha - eps
    th = 2 * np.pi * np.arange(n) / n

    def V(w):
        z = mobius(a, w)
        return _k_flat(Z, z) - np.real(phi.value(z)).ravel() - s * log_weight(w).ravel()

    vb = V(rho * np.exp(1j * th))
    c = np.fft.fft(vb) / n
    coeffs = np.zeros(n // 2, dtype=complex)
    coeffs[0] = -c[0]
    coeffs[1:] = -2.0 * c[1:n // 2]
    v0 = float(V(np.zeros(1))[0])
    kappa = -(v0 + coeffs[0].real)

    rho_inner = float(np.sqrt(-np.expm1(-0.5 * log_weight(rho))))
    radii = np.tanh(np.linspace(0, np.arctanh(rho), n_circles + 1)[1:])
    step = n // n_sample
    prof = []
    for r in radii:
        # A on the circle of radius r by one inverse FFT of the damped coefficients
        full = np.zeros(n, dtype=complex)
        full[: n // 2] = coeffs * (r / rho) ** np.arange(n // 2)
        re_a = np.real(np.fft.ifft(full) * n)[::step]
        w = r * np.exp(1j * th[::step])
        u = V(w) + re_a + kappa
        prof.append((r, float(u.max()), float(u.mean())))
    prof = np.array(prof)
    umax_all = max(0.0, float(prof[:, 1].max()))
    outer = prof[:, 0] >= rho_inner
    inner_max = max(0.0, float(prof[~outer, 1].max()) if np.any(~outer) else 0.0)
    growth = float(prof[outer, 1].max()) - inner_max
    upper_max = float(np.exp(umax_all))
    out = GConstruction(a, rho, alpha, eps, coeffs, kappa, upper_max, 0.0, growth, 0.0,
                        growth <= growth_tol, False, rho_inner, prof)
    # evaluate the lower bound directly from g rather than trusting the normalization
    za = np.array([a])
    out.value_at_a = float(np.exp(np.real(out.log_g(za))[0] + _k_flat(Z, za)[0] - np.real(phi.value(za))[0]))
    out.delta = out.value_at_a / upper_max
    out.lower_ok = out.delta >= delta_min
    return out
