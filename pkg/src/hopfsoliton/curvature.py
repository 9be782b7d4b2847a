"""Bismut-Ricci curvature of invariant pluriclosed metrics.

All matrices here are coefficient matrices in the ``i du_i ^ dubar_j`` basis at
a point ``x``.  Two routes are provided for the (1,1)-part of the Bismut-Ricci
form: the closed form

    rho_B^{1,1} = -[[ (k'/V)',             ((n' + i m')/V)' ],
                    [ ((n' - i m')/V)',    0                ]]

and :func:`bismut_ricci_oracle`, which assembles
``rho_C - d d^* omega - dbar dbar^* omega`` by central differences of the two
torsion one-forms and therefore never touches the closed form.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import DegenerateMetricError, ParameterError
from .geometry import MetricProfile, _require_unit_p

__all__ = [
    "bismut_ricci",
    "chern_ricci",
    "torsion_one_forms",
    "bismut_ricci_oracle",
    "lie_derivative_Y",
    "soliton_residual",
]


def _as_metric(profile) -> MetricProfile:
    if isinstance(profile, MetricProfile):
        return profile
    return profile.metric_profile()


def _jets(profile: MetricProfile, x):
    _require_unit_p(profile, x)
    (k, dk, ddk), (n, dn, ddn), (m, dm, ddm), _ = profile.jets(x)
    if profile.theta is not None:
        # diagonal profile: V = k (1 - k) and its derivatives from the logit jet
        theta, dth, ddth = profile.theta(x)
        k = expit(theta)
        V = k * expit(-theta)
        dk = dn = V * dth
        ddk = ddn = V * (ddth + (1 - 2 * k) * dth * dth)
        dV = (1 - 2 * k) * dk
        ddV = (1 - 2 * k) * ddk - 2 * dk * dk
        return (k, dk, ddk), (k, dn, ddn), (m, dm, ddm), (V, dV, ddV)
    # k(1 - n) + n(k - n) == k - n^2, without cancellation when n == k -> 1
    V = k * (1 - n) + n * (k - n) - m * m
    if np.any(V <= 0):
        raise DegenerateMetricError(f"V = k - n^2 - m^2 must be positive, got {V!r}")
    dV = dk - 2 * (n * dn + m * dm)
    ddV = ddk - 2 * (dn * dn + n * ddn + dm * dm + m * ddm)
    return (k, dk, ddk), (n, dn, ddn), (m, dm, ddm), (V, dV, ddV)


def _flux_derivative(df, ddf, V, dV):
    """``(f'/V)'`` from jets of ``f`` and ``V``."""
    return ddf / V - df * dV / (V * V)


def bismut_ricci(profile, x: float) -> np.ndarray:
    profile = _as_metric(profile)
    (_, dk, ddk), (_, dn, ddn), (_, dm, ddm), (V, dV, _) = _jets(profile, x)
    r11 = _flux_derivative(dk, ddk, V, dV)
    r12 = complex(_flux_derivative(dn, ddn, V, dV), _flux_derivative(dm, ddm, V, dV))
    return -np.array([[r11, r12], [r12.conjugate(), 0.0]], dtype=complex)


def chern_ricci(profile, x: float) -> np.ndarray:
    """Chern-Ricci form ``-i d dbar log V``; only the (1,1) slot is non-zero."""
    profile = _as_metric(profile)
    _, _, _, (V, dV, ddV) = _jets(profile, x)
    out = np.zeros((2, 2), dtype=complex)
    out[0, 0] = -(ddV / V - (dV / V) ** 2)
    return out


def torsion_one_forms(profile, x: float):
    """Coefficients of ``(i/2) dbar log V + d^* omega`` and its conjugate partner.

    Returns ``(first, second)``: ``first`` in the ``(dubar_1, dubar_2)`` basis,
    ``second = (-i/2) d log V + dbar^* omega`` in the ``(du_1, du_2)`` basis.
    """
    profile = _as_metric(profile)
    (_, dk, _), (n, dn, _), (m, dm, _), (V, _, _) = _jets(profile, x)
    q = (dn * m - dm * n) / V
    first = np.array([complex(q, dk / (2 * V)), 1j * complex(dn, dm) / V])
    second = np.array([complex(q, -dk / (2 * V)), -1j * complex(dn, -dm) / V])
    return first, second


def bismut_ricci_oracle(profile, x: float, h: float) -> np.ndarray:
    """Finite-difference assembly of ``rho_B^{1,1} = -d(first) - dbar(second)``.

    Both one-forms depend on ``x = u1 + ubar1`` only, so ``d`` and ``dbar`` act
    by ``d/dx`` in the ``u1`` slot; the coefficient of ``du_i ^ dubar_j`` is
    ``-first_j'`` for ``i = 1`` plus ``second_i'`` for ``j = 1``.
    """
    if h <= 0:
        raise ParameterError("finite-difference step must be positive")
    profile = _as_metric(profile)
    for s in (x - h, x, x + h):
        # raises DegenerateMetricError if V <= 0 anywhere on the stencil
        _jets(profile, s)
    fp, sp = torsion_one_forms(profile, x + h)
    fm, sm = torsion_one_forms(profile, x - h)
    dfirst = (fp - fm) / (2 * h)
    dsecond = (sp - sm) / (2 * h)
    c = np.zeros((2, 2), dtype=complex)
    c[0, :] -= dfirst
    c[:, 0] += dsecond
    # coefficient of du_i ^ dubar_j divided by i
    return -1j * c


def lie_derivative_Y(profile, x: float) -> np.ndarray:
    """Lie derivative of the metric along the drift field ``Y``.

    Normalised so that the steady soliton equation is literally
    ``bismut_ricci == mu * lie_derivative_Y``, i.e. the system
    ``(f'/V)' = mu f'`` for ``f = k, n, m``.  The constant relating this to the
    naive ``L_Y g`` (``Y x = 2`` plus the sign of the curvature form) is
    absorbed into ``mu``.
    """
    profile = _as_metric(profile)
    _require_unit_p(profile, x)
    dk = profile.k(x)[1]
    dn = profile.n(x)[1]
    dm = profile.m(x)[1]
    return -np.array([[dk, complex(dn, dm)], [complex(dn, -dm), 0.0]], dtype=complex)


def soliton_residual(profile, mu: float, grid) -> float:
    """``sup`` over ``grid`` of ``|(f'/V)' - mu f'|`` for ``f in (k, n, m)``."""
    profile = _as_metric(profile)
    grid = np.asarray(grid, dtype=float)
    (_, dk, ddk), (_, dn, ddn), (_, dm, ddm), (V, dV, _) = _jets(profile, grid)
    res = 0.0
    for df, ddf in ((dk, ddk), (dn, ddn), (dm, ddm)):
        r = _flux_derivative(df, ddf, V, dV) - mu * df
        res = max(res, float(np.max(np.abs(r))))
    return res
