"""Hopf-surface parameters, coordinate charts and the invariant metric ansatz.

On the diagonal Hopf surface ``C^2 \\ {0} / (z1, z2) ~ (alpha z1, beta z2)`` we use

* logarithmic coordinates ``w_i = log z_i``,
* invariant coordinates ``u1 = (b/a) w1 - w2``, ``u2 = w2``,
* the invariant variable ``x = u1 + conj(u1) = (b/a) log|z1|^2 - log|z2|^2``.

An invariant Hermitian metric is the 2x2 matrix ``[[k, n + i m], [n - i m, p]]``
in the ``u`` basis, with ``k, n, m, p`` real functions of ``x``.  Profile
functions are *jets*: callables returning ``(value, first, second)`` derivatives.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import AnsatzError, ChartDomainError, DegenerateMetricError, ParameterError

Jet = Tuple[float, float, float]
JetFn = Callable[[float], Jet]


@dataclass(frozen=True)
class SurfaceParams:
    """Parameters of a diagonal Hopf surface and the derived real constants."""

    alpha: complex
    beta: complex
    a: float
    b: float
    mu: float
    c_k: float

    @property
    def ratio(self) -> float:
        """``b/a``, the slope of ``log|z1|^2`` in the invariant variable."""
        return self.b / self.a

    @property
    def equal_moduli(self) -> bool:
        return self.a == self.b

    @property
    def generator(self) -> Tuple[float, float]:
        """Components ``(a, b)`` of the vector field generating the deck group."""
        return (self.a, self.b)


def surface_params(alpha: complex, beta: complex) -> SurfaceParams:
    """Build :class:`SurfaceParams` from the deck-transformation multipliers."""
    alpha = complex(alpha)
    beta = complex(beta)
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < abs(value) < 1.0:
            raise ParameterError(f"|{name}| must lie in (0, 1), got {abs(value)!r}")
    a = cmath.log(alpha).real
    b = cmath.log(beta).real
    c_k = a / b
    return SurfaceParams(alpha=alpha, beta=beta, a=a, b=b, mu=1.0 - c_k, c_k=c_k)


def params_from_ab(a: float, b: float) -> SurfaceParams:
    """Convenience constructor from the real constants ``a, b < 0``."""
    return surface_params(math.exp(a), math.exp(b))


# --------------------------------------------------------------------------
# Profiles
# --------------------------------------------------------------------------


def constant_jet(c: float) -> JetFn:
    def jet(x):
        zero = np.zeros_like(np.asarray(x, dtype=float))
        return (zero + c, zero, zero)

    return jet


def fd_jet(func: Callable[[float], float], h: float = 1e-4) -> JetFn:
    """Finite-difference jet of a plain scalar function (fallback only)."""

    def jet(x):
        f0 = func(x)
        fp = func(x + h)
        fm = func(x - h)
        return (f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2)

    return jet


def trig_jet(c0: float, amp: float, freq: float, phase: float = 0.0) -> JetFn:
    """Jet of ``c0 + amp sin(freq x + phase)``."""

    def jet(x):
        arg = freq * np.asarray(x, dtype=float) + phase
        s, c = np.sin(arg), np.cos(arg)
        return (c0 + amp * s, amp * freq * c, -amp * freq * freq * s)

    return jet


def random_trig_profile(rng: np.random.Generator) -> MetricProfile:
    """Smooth non-diagonal profile with ``p = 1`` and ``V >= 1`` everywhere."""
    k = trig_jet(2.0 + rng.uniform(0, 0.5), rng.uniform(0.1, 0.4), rng.uniform(0.5, 1.5), rng.uniform(0, 2 * np.pi))
    n = trig_jet(0.0, rng.uniform(0.1, 0.4), rng.uniform(0.5, 1.5), rng.uniform(0, 2 * np.pi))
    m = trig_jet(0.0, rng.uniform(0.1, 0.4), rng.uniform(0.5, 1.5), rng.uniform(0, 2 * np.pi))
    return MetricProfile(k, n, m, constant_jet(1.0))


def shifted_jet(jet: JetFn, shift: float) -> JetFn:
    return lambda x: jet(x + shift)


@dataclass(frozen=True)
class MetricProfile:
    """The four profile jets ``k, n, m, p`` of an invariant Hermitian metric.

    ``theta`` optionally carries the jet of ``log(k / (1 - k))`` at full
    precision; it is only meaningful for diagonal profiles ``k = n, m = 0``
    and lets tail computations avoid the cancellation in ``1 - k``.
    """

    k: JetFn
    n: JetFn
    m: JetFn
    p: JetFn
    theta: Optional[JetFn] = None

    def jets(self, x):
        return self.k(x), self.n(x), self.m(x), self.p(x)

    def shifted(self, shift: float) -> "MetricProfile":
        """The profile translated so that ``new(x) = old(x + shift)``."""
        theta = None if self.theta is None else shifted_jet(self.theta, shift)
        return MetricProfile(
            shifted_jet(self.k, shift),
            shifted_jet(self.n, shift),
            shifted_jet(self.m, shift),
            shifted_jet(self.p, shift),
            theta,
        )


def constant_profile(k: float = 1.0, n: float = 0.0, m: float = 0.0, p: float = 1.0) -> MetricProfile:
    return MetricProfile(constant_jet(k), constant_jet(n), constant_jet(m), constant_jet(p))


def diagonal_profile(k: JetFn, theta: Optional[JetFn] = None) -> MetricProfile:
    """Profile with ``n = k``, ``m = 0``, ``p = 1``: diagonal in ``z`` coordinates."""
    return MetricProfile(k, k, constant_jet(0.0), constant_jet(1.0), theta)


def _require_unit_p(profile: MetricProfile, x) -> None:
    p, dp, _ = profile.p(x)
    if np.any(p != 1.0) or np.any(dp != 0.0):
        raise AnsatzError("operation requires the pluriclosed normalization p == 1")


# --------------------------------------------------------------------------
# Metric matrices
# --------------------------------------------------------------------------


def volume_V(profile: MetricProfile, x: float) -> float:
    """``V = det g_u = k p - n^2 - m^2`` (reduces to ``k - n^2 - m^2`` when p == 1)."""
    k, n, m, p = (j[0] for j in profile.jets(x))
    return _det(k, n, m, p)


def _det(k, n, m, p):
    # k p - n^2 rearranged as k (p - n) + n (k - n): exact cancellation when n == k
    return k * (p - n) + n * (k - n) - m * m


def _check_positive(k, V) -> None:
    if k <= 0 or V <= 0:
        raise DegenerateMetricError(f"metric not positive definite (k={k!r}, V={V!r})")


def metric_u(profile: MetricProfile, x: float) -> np.ndarray:
    k, n, m, p = (float(j[0]) for j in profile.jets(x))
    _check_positive(k, _det(k, n, m, p))
    return np.array([[k, complex(n, m)], [complex(n, -m), p]], dtype=complex)


def chart_jacobian_w(params: SurfaceParams) -> np.ndarray:
    """Jacobian ``d(u1, u2)/d(w1, w2)``; real and constant."""
    return np.array([[params.ratio, -1.0], [0.0, 1.0]])


def metric_w(profile: MetricProfile, x: float, params: SurfaceParams) -> np.ndarray:
    """Metric coefficients in the ``dw`` basis: ``B^T g_u B`` with ``B`` the chart Jacobian."""
    B = chart_jacobian_w(params)
    return B.T @ metric_u(profile, x) @ B


def invariant_x(z1: complex, z2: complex, params: SurfaceParams) -> float:
    if z1 == 0 or z2 == 0:
        raise ChartDomainError("invariant chart excludes the coordinate axes")
    return params.ratio * math.log(abs(z1) ** 2) - math.log(abs(z2) ** 2)


def metric_z(profile: MetricProfile, z1: complex, z2: complex, params: SurfaceParams) -> np.ndarray:
    """Metric in the original ``(z1, z2)`` coordinates on ``(C^*)^2``.

    Entry layout follows the classical display: the (1,2) slot carries
    ``(b/a)(-k + n - i m) / (conj(z1) z2)``.  This equals ``J^H conj(g_u) J`` for
    the holomorphic chart Jacobian ``J = d(u)/d(z)``.
    """
    x = invariant_x(z1, z2, params)
    _require_unit_p(profile, x)
    k, n, m, _ = (float(j[0]) for j in profile.jets(x))
    _check_positive(k, _det(k, n, m, 1.0))
    r = params.ratio
    z1 = complex(z1)
    z2 = complex(z2)
    g11 = r * r * k / abs(z1) ** 2
    g12 = r * complex(-k + n, -m) / (z1.conjugate() * z2)
    g21 = r * complex(-k + n, m) / (z2.conjugate() * z1)
    g22 = (k - 2 * n + 1) / abs(z2) ** 2
    return np.array([[g11, g12], [g21, g22]], dtype=complex)


def chart_jacobian_z(z1: complex, z2: complex, params: SurfaceParams) -> np.ndarray:
    """Holomorphic Jacobian ``d(u1, u2)/d(z1, z2)``."""
    return np.array([[params.ratio / z1, -1.0 / z2], [0.0, 1.0 / z2]], dtype=complex)


def is_pluriclosed(profile: MetricProfile, grid, tol: float = 1e-12) -> Tuple[bool, float]:
    """Pluriclosed test for invariant metrics: ``p`` must be constant.

    On the compact surface the ``dd^c`` of the Kähler form is governed by the
    norm of the Killing field alone, so the residual is ``sup |p'|`` on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    dp = np.array([profile.p(x)[1] for x in grid], dtype=float)
    residual = float(np.max(np.abs(dp))) if dp.size else 0.0
    return residual <= tol, residual
