"""Verification suites shared by the CLI and the acceptance tests.

Each suite returns a list of :class:`Row` ``(check, point, residual, passed)``.
Sampled points come from a seeded ``numpy.random.Generator`` so reports are
reproducible.
"""

from __future__ import annotations

import math
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import expit

from .curvature import bismut_ricci, bismut_ricci_oracle, soliton_residual
from .geometry import (
    SurfaceParams,
    diagonal_profile,
    params_from_ab,
    random_trig_profile,
    trig_jet,
)
from .gkforms import (
    ddbar_log_phi,
    exterior_d,
    frobenius_residual,
    isotropy_residual,
    odd_type_residual,
    phi_identity_residual,
    phi_solve,
    projection_identity_residual,
    real_part_residual,
    torsion_forms,
)
from .soliton import check_asymptotics, solve_profile

ORACLE_STEPS = (1e-2, 5e-3, 2.5e-3)


class Row(NamedTuple):
    check: str
    point: str
    residual: float
    passed: bool


def _pt(x) -> str:
    if isinstance(x, (tuple, list)):
        return ";".join(_pt(v) for v in x)
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return f"{float(x):.17g}"


# --------------------------------------------------------------------------
# Soliton
# --------------------------------------------------------------------------


def integrate_profile_ode(params: SurfaceParams, x: np.ndarray, rtol: float = 1e-13, atol: float = 1e-14):
    """Independent reference: integrate ``theta' = mu k + c`` from ``theta(0) = 0``.

    In the logit variable the profile ODE ``k' = k (1 - k)(mu k + c)`` is
    non-stiff and both tails stay well scaled.
    """
    x = np.asarray(x, dtype=float)
    mu, c = params.mu, params.c_k
    out = np.empty_like(x)

    def rhs(_, th):
        return mu * expit(th) + c

    for mask, end in ((x >= 0, x.max()), (x < 0, x.min())):
        if not mask.any():
            continue
        pts = x[mask]
        order = np.argsort(pts) if end > 0 else np.argsort(-pts)
        sol = solve_ivp(rhs, (0.0, end), [0.0], method="DOP853", t_eval=pts[order], rtol=rtol, atol=atol)
        vals = np.empty(pts.size)
        vals[order] = sol.y[0]
        out[mask] = vals
    return expit(out)


def soliton_suite(params: SurfaceParams, L: float = 30.0, N: int = 6001, tol: float = 1e-8, asym_tol: float = 1e-6) -> List[Row]:
    grid = np.linspace(-L, L, N)
    sol = solve_profile(params, grid)
    rows = [
        Row("soliton_vs_ode", f"[{-L:g},{L:g}]", float(np.max(np.abs(sol.values - integrate_profile_ode(params, grid)))), False),
        Row("soliton_residual", f"[{-L:g},{L:g}]", soliton_residual(sol, params.mu, grid), False),
        Row("soliton_center", "0", abs(float(sol.k_of_x(0.0)) - 0.5), False),
    ]
    rows = [r._replace(passed=bool(r.residual < tol)) for r in rows]
    report = check_asymptotics(sol.metric_profile(), params, L, tol=asym_tol)
    for item, value, ok in report.rows():
        rows.append(Row(f"asymptotics_{item}", _pt(L if item.startswith("1") else -L), abs(value), ok))
    return rows


# --------------------------------------------------------------------------
# Curvature oracle
# --------------------------------------------------------------------------


def oracle_order(profile, x: float, steps: Sequence[float] = ORACLE_STEPS) -> float:
    """Least-squares slope of ``log err`` against ``log h`` for the finite-difference oracle."""
    exact = bismut_ricci(profile, x)
    errs = [np.max(np.abs(bismut_ricci_oracle(profile, x, h) - exact)) for h in steps]
    return float(np.polyfit(np.log(steps), np.log(errs), 1)[0])


def curvature_profiles(params: SurfaceParams, rng: np.random.Generator):
    """Soliton, three random non-diagonal trigonometric profiles and a non-soliton diagonal profile."""
    sol = solve_profile(params)
    out = [("soliton", sol.metric_profile())]
    for i in range(3):
        out.append((f"random_{i}", random_trig_profile(rng)))
    out.append(("diagonal_trig", diagonal_profile(trig_jet(0.5, 0.2, rng.uniform(0.5, 1.5), rng.uniform(0, 2 * np.pi)))))
    return out


def curvature_suite(params: SurfaceParams, rng: np.random.Generator, n_points: int = 3, band=(1.8, 2.2)) -> List[Row]:
    rows = []
    for name, prof in curvature_profiles(params, rng):
        for x in rng.uniform(-3.0, 3.0, n_points):
            order = oracle_order(prof, float(x))
            rows.append(Row(f"oracle_order_{name}", _pt(x), order, bool(band[0] <= order <= band[1])))
    return rows


# --------------------------------------------------------------------------
# Generalized Kahler structures
# --------------------------------------------------------------------------


def even_type_suite(
    params: SurfaceParams, rng: np.random.Generator, n_points: int = 20, tol: float = 1e-9, perturb: float = 0.0
) -> List[Row]:
    sol = solve_profile(params)
    xs = np.sort(rng.uniform(-10.0, 10.0, n_points))
    rows = []
    lams = []
    for x in xs:
        x = float(x)
        proj = projection_identity_residual(sol, x)
        lams.append(proj.multiple)
        for name, val in (
            ("frobenius", frobenius_residual(sol, x, perturb=perturb)),
            ("isotropy", isotropy_residual(sol, x)),
            ("real_part", real_part_residual(sol, x)),
            ("projection", proj.residual),
            ("projection_fit", proj.fit_residual),
        ):
            rows.append(Row(name, _pt(x), float(val), bool(val < tol)))
    spread = float(max(abs(l - lams[0]) for l in lams))
    rows.append(Row("lambda_constant", _pt(lams[0]), spread, bool(spread < tol)))
    return rows


def odd_type_profiles(params: SurfaceParams):
    sol = solve_profile(params)

    def tanh_jet(x):
        t = np.tanh(np.asarray(x, dtype=float))
        s = 1.0 - t * t
        return 0.5 + 0.3 * t, 0.3 * s, -0.6 * t * s

    def steep_logistic(x):
        e = expit(2.0 * np.asarray(x, dtype=float))
        return e, 2.0 * e * (1 - e), 4.0 * e * (1 - e) * (1 - 2 * e)

    return [
        ("soliton", sol.metric_profile()),
        ("tanh", diagonal_profile(tanh_jet)),
        ("steep_logistic", diagonal_profile(steep_logistic)),
        ("trig", diagonal_profile(trig_jet(0.5, 0.2, 0.7, 0.3))),
    ]


def odd_type_suite(params: SurfaceParams, rng: np.random.Generator, n_points: int = 20, tol: float = 1e-9) -> List[Row]:
    xs = np.sort(rng.uniform(-10.0, 10.0, n_points))
    rows = []
    for name, prof in odd_type_profiles(params):
        for x in xs:
            val = odd_type_residual(prof, float(x), params)
            rows.append(Row(f"odd_type_{name}", _pt(x), val, bool(val < tol)))
        h_i, _ = torsion_forms(prof, float(xs[0]), params)
        closed = exterior_d(h_i).max_abs()
        rows.append(Row(f"torsion_closed_{name}", _pt(xs[0]), closed, bool(closed < tol)))
    return rows


# --------------------------------------------------------------------------
# The automorphic function Phi
# --------------------------------------------------------------------------


def sample_points(rng: np.random.Generator, n: int, rmin: float = 0.2, rmax: float = 2.0):
    """Points of C^2 with ``rmin <= |z| <= rmax`` and both coordinates non-zero."""
    out = []
    while len(out) < n:
        v = rng.normal(size=4)
        v *= rng.uniform(rmin, rmax) / np.linalg.norm(v)
        z1, z2 = complex(v[0], v[1]), complex(v[2], v[3])
        if abs(z1) > 1e-3 and abs(z2) > 1e-3:
            out.append((z1, z2))
    return out


def phi_suite(
    params: SurfaceParams,
    rng: np.random.Generator,
    n_identity: int = 100,
    n_eig: int = 50,
    tol: float = 1e-12,
    closed_tol: float = 1e-10,
    eig_tol: float = 1e-6,
) -> List[Row]:
    rows = []
    a, b = params.a, params.b
    for z1, z2 in sample_points(rng, n_identity):
        phi = phi_solve(z1, z2, params)
        res = phi_identity_residual(z1, z2, params, phi)
        rows.append(Row("phi_identity", _pt((z1, z2)), res, bool(res < tol)))

    # closed forms: the axis z2 = 0, and the equal-moduli case
    equal = params_from_ab(a, a)
    for z1, z2 in sample_points(rng, 10):
        axis = phi_solve(z1, 0j, params)
        exact = abs(z1) ** ((a + b) / a)
        rel = abs(axis - exact) / exact
        rows.append(Row("phi_axis", _pt((z1, 0j)), rel, bool(rel < closed_tol)))
        eq = phi_solve(z1, z2, equal)
        exact = abs(z1) ** 2 + abs(z2) ** 2
        rel = abs(eq - exact) / exact
        rows.append(Row("phi_equal_moduli", _pt((z1, z2)), rel, bool(rel < closed_tol)))

    # deck transformation rescales Phi by a constant
    ratios = []
    for z1, z2 in sample_points(rng, 20):
        ratios.append(phi_solve(params.alpha * z1, params.beta * z2, params) / phi_solve(z1, z2, params))
    expected = math.exp(a + b)
    spread = max(abs(r - expected) / expected for r in ratios)
    rows.append(Row("phi_deck_ratio", _pt(expected), spread, bool(spread < closed_tol)))

    for z1, z2 in sample_points(rng, n_eig, rmin=0.5):
        eig = np.linalg.eigvalsh(ddbar_log_phi(z1, z2, params))
        rows.append(Row("ddbar_min_eig", _pt((z1, z2)), float(eig[0]), bool(eig[0] >= -eig_tol)))
        rows.append(Row("ddbar_max_eig", _pt((z1, z2)), float(eig[-1]), bool(eig[-1] > 0)))
    return rows


def run_all(params: SurfaceParams, seed: int = 0, perturb: float = 0.0, tol: float = 1e-9) -> List[Row]:
    """The full ``verify`` report: curvature oracle, even type, odd type, Phi."""
    rng = np.random.default_rng(seed)
    rows = []
    rows += curvature_suite(params, rng)
    rows += even_type_suite(params, rng, tol=tol, perturb=perturb)
    rows += odd_type_suite(params, rng, tol=tol)
    rows += phi_suite(params, rng)
    return rows

