"""The steady soliton profile ``kappa``.

``kappa`` solves ``k' = k (1 - k) (mu k + c_k)`` with ``c_k = a/b`` and
``mu = 1 - a/b``.  For ``a != b`` separation of variables gives the implicit
relation ``x = F(k) - gauge`` with

    F(k) = -log(1 - k) + ((a - b)/a) log|a/(a - b) - k| + (b/a) log k,

and for ``a == b`` the profile is the logistic ``1 / (1 + C e^{-x})``.

All root finding is done in the logit variable ``theta = log(k / (1 - k))``:
``dF/dtheta = 1 / (mu k + c_k)`` is bounded above and below, so Newton in
``theta`` is globally well behaved and both ``k`` and ``1 - k`` keep full
relative precision in the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import expit

from .errors import DomainError, ParameterError, RootFindingError
from .geometry import MetricProfile, SurfaceParams, diagonal_profile

__all__ = [
    "SolitonProfile",
    "AsymptoticsReport",
    "profile_ode_rhs",
    "profile_ode_rhs_dk",
    "implicit_x",
    "solve_profile",
    "logistic_profile",
    "kappa_inverse",
    "check_asymptotics",
    "extension_r2",
]


def profile_ode_rhs(params: SurfaceParams, k):
    return k * (1.0 - k) * (params.mu * k + params.c_k)


def profile_ode_rhs_dk(params: SurfaceParams, k):
    """``d/dk`` of :func:`profile_ode_rhs`."""
    mu, c = params.mu, params.c_k
    return (1.0 - 2.0 * k) * (mu * k + c) + mu * k * (1.0 - k)


def _pole(params: SurfaceParams) -> float:
    # zero of mu k + c_k; lies outside [0, 1] because c_k > 0 and mu + c_k = 1
    return params.a / (params.a - params.b)


def implicit_x(params: SurfaceParams, k, gauge: float = 0.0):
    """Closed-form inverse of the soliton profile (up to the gauge constant)."""
    if params.equal_moduli:
        raise ParameterError("implicit form is singular for a == b; use logistic_profile")
    k = np.asarray(k, dtype=float)
    if np.any((k <= 0.0) | (k >= 1.0)):
        raise DomainError("implicit_x requires 0 < k < 1")
    a, b = params.a, params.b
    out = -np.log1p(-k) + ((a - b) / a) * np.log(np.abs(_pole(params) - k)) + (b / a) * np.log(k) - gauge
    return out[()] if out.ndim == 0 else out


def _x_of_theta(params: SurfaceParams, theta):
    """``F(sigma(theta))`` evaluated without forming ``1 - k``."""
    theta = np.asarray(theta, dtype=float)
    if params.equal_moduli:
        return theta.copy()
    a, b = params.a, params.b
    k = expit(theta)
    return (
        np.logaddexp(0.0, theta)
        + ((a - b) / a) * np.log(np.abs(_pole(params) - k))
        - (b / a) * np.logaddexp(0.0, -theta)
    )


def _theta_of_x(params: SurfaceParams, x, gauge: float, tol: float = 1e-15, maxiter: int = 200):
    """Invert ``F(sigma(theta)) - gauge = x`` by bracketed Newton in ``theta``."""
    x = np.asarray(x, dtype=float)
    if params.equal_moduli:
        return x + gauge
    mu, c = params.mu, params.c_k
    target = x + gauge
    x0 = float(_x_of_theta(params, 0.0))
    y = target - x0
    # dF/dtheta = 1/(mu k + c) lies between 1/max(c, 1) and 1/min(c, 1)
    s_lo, s_hi = 1.0 / max(c, 1.0), 1.0 / min(c, 1.0)
    lo = np.where(y >= 0, y / s_hi, y / s_lo) - 1.0
    hi = np.where(y >= 0, y / s_lo, y / s_hi) + 1.0
    theta = 0.5 * (lo + hi)
    active = np.ones(theta.shape, dtype=bool)
    for _ in range(maxiter):
        g = _x_of_theta(params, theta) - target
        k = expit(theta)
        hi = np.where(g > 0, theta, hi)
        lo = np.where(g <= 0, theta, lo)
        newton = theta - g * (mu * k + c)
        inside = (newton >= lo) & (newton <= hi)
        new = np.where(inside, newton, 0.5 * (lo + hi))
        step = np.abs(new - theta)
        theta = np.where(active, new, theta)
        # stop on a small step or once the residual is at rounding level
        noise = 8.0 * np.finfo(float).eps * (1.0 + np.abs(target))
        active = active & (step > tol * np.maximum(1.0, np.abs(theta))) & (np.abs(g) > noise)
        if not active.any():
            return theta
    raise RootFindingError("soliton profile inversion did not converge")


@dataclass(frozen=True)
class SolitonProfile:
    """The monotone soliton profile ``kappa: R -> (0, 1)`` for given parameters.

    ``gauge`` is the integration constant; the default ``F(1/2)`` puts
    ``kappa(0) = 1/2``.  ``grid`` and ``values`` hold the tabulation made by
    :func:`solve_profile` (if any); evaluation anywhere else is exact root
    finding, not interpolation.
    """

    params: SurfaceParams
    gauge: float
    grid: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def theta(self, x):
        out = _theta_of_x(self.params, x, self.gauge)
        return out[()] if np.ndim(out) == 0 else out

    def k_of_x(self, x):
        out = expit(self.theta(x))
        return out[()] if np.ndim(out) == 0 else out

    __call__ = k_of_x

    def x_of_k(self, k):
        if self.params.equal_moduli:
            k = np.asarray(k, dtype=float)
            if np.any((k <= 0.0) | (k >= 1.0)):
                raise DomainError("kappa_inverse requires 0 < k < 1")
            out = np.log(k) - np.log1p(-k) - self.gauge
            return out[()] if out.ndim == 0 else out
        return implicit_x(self.params, k, self.gauge)

    def x_of_theta(self, theta):
        """Inverse in the logit variable; accurate where ``k`` rounds to 0 or 1."""
        out = _x_of_theta(self.params, theta) - self.gauge
        return out[()] if np.ndim(out) == 0 else out

    def jet(self, x):
        """``(kappa, kappa', kappa'')`` with derivatives taken from the ODE."""
        # k (1 - k) through the logit keeps relative accuracy where k rounds to 1
        theta = self.theta(x)
        k, w = expit(theta), expit(theta) * expit(-theta)
        mu, c = self.params.mu, self.params.c_k
        dk = w * (mu * k + c)
        return k, dk, ((1.0 - 2.0 * k) * (mu * k + c) + mu * k * (1.0 - k)) * dk

    def theta_jet(self, x):
        theta = self.theta(x)
        k = expit(theta)
        mu, c = self.params.mu, self.params.c_k
        return theta, mu * k + c, mu * k * expit(-theta) * (mu * k + c)

    def metric_profile(self) -> MetricProfile:
        return diagonal_profile(self.jet, self.theta_jet)

    def with_gauge(self, gauge: float) -> "SolitonProfile":
        return SolitonProfile(self.params, gauge)


def default_gauge(params: SurfaceParams) -> float:
    return float(_x_of_theta(params, 0.0))


def solve_profile(params: SurfaceParams, grid=None, gauge: Optional[float] = None) -> SolitonProfile:
    """Construct the soliton profile and tabulate it on ``grid``.

    For ``a == b`` this is the logistic ``1/(1 + e^{-x})`` (``C = 1``).
    """
    if gauge is None:
        gauge = default_gauge(params)
    prof = SolitonProfile(params, gauge)
    if grid is None:
        return prof
    grid = np.asarray(grid, dtype=float)
    return SolitonProfile(params, gauge, grid, prof.k_of_x(grid))


def logistic_profile(C: float, x):
    if C <= 0:
        raise ParameterError("logistic constant C must be positive")
    return expit(np.asarray(x, dtype=float) - math.log(C))[()]


def kappa_inverse(profile: SolitonProfile, k):
    return profile.x_of_k(k)


def extension_r2(params: SurfaceParams, r1: float, k: float) -> float:
    """Squared radius ``r2^2`` at which the soliton takes the value ``k`` above ``|z1| = r1``."""
    if params.equal_moduli:
        raise ParameterError("extension formula requires a != b")
    if r1 <= 0:
        raise DomainError("r1 must be positive")
    if not 0.0 < k < 1.0:
        raise DomainError("k must lie in (0, 1)")
    a, b = params.a, params.b
    return (
        r1 ** (2 * b / a)
        * (1.0 - k)
        * abs(_pole(params) - k) ** (-(a - b) / a)
        * k ** (-b / a)
    )


# --------------------------------------------------------------------------
# Asymptotics near the two elliptic curves
# --------------------------------------------------------------------------


@dataclass
class AsymptoticsReport:
    """Values and pass flags of the eight necessary extension asymptotics.

    Items ``1*`` are evaluated at ``x = +L`` and items ``2*`` at ``x = -L``:
    ``a`` items are positivity of the rescaled leading term, ``b`` items are
    log-derivative limits (checked against ``tol``), ``c``/``d`` items are the
    off-diagonal ratios (checked against ``ratio_bound``).
    """

    L: float
    tol: float
    ratio_bound: float
    values: Dict[str, float]
    passed: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def rows(self):
        for item in sorted(self.values):
            yield item, self.values[item], self.passed[item]


def _log_derivatives(profile: MetricProfile, x: float) -> Tuple[float, float, float, float]:
    """``(log(k - 2n + 1), its derivative, log k, its derivative)`` at ``x``."""
    if profile.theta is not None:
        # diagonal profile: k - 2n + 1 = 1 - k, evaluated through the logit
        theta, dtheta, _ = profile.theta(x)
        log_1mk = -float(np.logaddexp(0.0, theta))
        log_k = -float(np.logaddexp(0.0, -theta))
        return log_1mk, -dtheta * float(expit(theta)), log_k, dtheta * float(expit(-theta))
    (k, dk, _), (n, dn, _) = profile.k(x), profile.n(x)
    q = k - 2 * n + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        return (
            float(np.log(q)),
            float((dk - 2 * dn) / q),
            float(np.log(k)),
            float(dk / k),
        )


def check_asymptotics(
    profile: MetricProfile,
    params: SurfaceParams,
    L: float,
    tol: float = 1e-6,
    ratio_bound: float = 10.0,
) -> AsymptoticsReport:
    if L <= 0:
        raise ParameterError("L must be positive")
    c = params.c_k
    values: Dict[str, float] = {}

    log_q, dlog_q, _, _ = _log_derivatives(profile, L)
    k, n, m = (float(j[0]) for j in (profile.k(L), profile.n(L), profile.m(L)))
    values["1a"] = math.exp(log_q + L)
    values["1b"] = dlog_q + 1.0
    values["1c"] = (k - n) * math.exp(L / 2)
    values["1d"] = m * math.exp(L / 2)

    _, _, log_k, dlog_k = _log_derivatives(profile, -L)
    k, n, m = (float(j[0]) for j in (profile.k(-L), profile.n(-L), profile.m(-L)))
    values["2a"] = math.exp(log_k + c * L)
    values["2b"] = dlog_k - c
    values["2c"] = (k - n) * math.exp(c * L / 2)
    values["2d"] = m * math.exp(c * L / 2)

    passed = {}
    for item, v in values.items():
        if item.endswith("a"):
            passed[item] = bool(np.isfinite(v) and v > 0)
        elif item.endswith("b"):
            passed[item] = bool(abs(v) <= tol)
        else:
            passed[item] = bool(abs(v) <= ratio_bound)
    return AsymptoticsReport(L=L, tol=tol, ratio_bound=ratio_bound, values=values, passed=passed)
