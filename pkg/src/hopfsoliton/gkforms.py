"""A small exterior algebra of invariant complex forms on the ``w``-chart.

Forms are sums of wedge monomials in the basis ``dw1, dwbar1, dw2, dwbar2``
(indices 0..3) whose coefficients are *jets* in the invariant variable ``x``:
``c[0]`` is the value at the evaluation point, ``c[j]`` the ``j``-th
``x``-derivative.  Since ``x = (b/a)(w1 + wbar1) - (w2 + wbar2)``, the exterior
derivative of a coefficient is ``c' dx`` with

    dx = (b/a)(dw1 + dwbar1) - (dw2 + dwbar2),

and each application of ``d`` consumes one jet order.

Two complex structures appear: ``I`` (holomorphic differentials ``dw1, dw2``)
and ``J`` (``dw1, dwbar2``: the orientation of the ``z2``-plane reversed).
The twisted differential is ``d^c = i (dbar - d)`` with the splitting taken in
the respective structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, NamedTuple, Optional, Tuple

import numpy as np

from .errors import AnsatzError, ChartDomainError, DegenerateMetricError, ParameterError, RootFindingError
from .geometry import MetricProfile, SurfaceParams, chart_jacobian_w, metric_w

DW1, DWB1, DW2, DWB2 = 0, 1, 2, 3
HOLOMORPHIC_I = frozenset({DW1, DW2})
HOLOMORPHIC_J = frozenset({DW1, DWB2})
_CONJ = {DW1: DWB1, DWB1: DW1, DW2: DWB2, DWB2: DW2}

Monomial = Tuple[int, ...]


def _canonical(indices: Iterable[int]) -> Tuple[int, Optional[Monomial]]:
    """Sort a wedge monomial, returning ``(sign, sorted)``; ``(0, None)`` if degenerate."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def _jet_product(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = min(len(f), len(g))
    out = np.zeros(n, dtype=complex)
    for order in range(n):
        for j in range(order + 1):
            out[order] += math.comb(order, j) * f[j] * g[order - j]
    return out


@dataclass(frozen=True)
class InvariantForm:
    """Homogeneous-degree complex form with jet coefficients at one point ``x``."""

    degree: int
    terms: Dict[Monomial, np.ndarray] = field(default_factory=dict)
    ratio: float = 1.0
    x: float = 0.0

    def __post_init__(self):
        if not 0 <= self.degree <= 4:
            raise ParameterError(f"form degree must lie in 0..4, got {self.degree}")
        for mono in self.terms:
            if len(mono) != self.degree or list(mono) != sorted(set(mono)):
                raise ValueError(f"non-canonical monomial {mono!r} for degree {self.degree}")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_terms(cls, degree: int, raw, ratio: float, x: float = 0.0) -> "InvariantForm":
        """Accumulate ``{indices: jet}`` pairs in any order into canonical form."""
        terms: Dict[Monomial, np.ndarray] = {}
        for indices, jet in raw:
            sign, mono = _canonical(indices)
            if sign == 0:
                continue
            jet = sign * np.asarray(jet, dtype=complex)
            if mono in terms:
                n = min(len(terms[mono]), len(jet))
                terms[mono] = terms[mono][:n] + jet[:n]
            else:
                terms[mono] = jet
        return cls(degree, terms, ratio, x)

    def _like(self, degree: int, terms) -> "InvariantForm":
        return InvariantForm(degree, terms, self.ratio, self.x)

    # algebra ----------------------------------------------------------------

    def __add__(self, other: "InvariantForm") -> "InvariantForm":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        raw = list(self.terms.items()) + list(other.terms.items())
        return InvariantForm.from_terms(self.degree, raw, self.ratio, self.x)

    def __neg__(self) -> "InvariantForm":
        return self * -1.0

    def __sub__(self, other: "InvariantForm") -> "InvariantForm":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "InvariantForm":
        return self._like(self.degree, {m: scalar * c for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "InvariantForm") -> "InvariantForm":
        return wedge(self, other)

    def conj(self) -> "InvariantForm":
        raw = [(tuple(_CONJ[i] for i in mono), np.conj(c)) for mono, c in self.terms.items()]
        return InvariantForm.from_terms(self.degree, raw, self.ratio, self.x)

    def real(self) -> "InvariantForm":
        return (self + self.conj()) * 0.5

    def imag(self) -> "InvariantForm":
        return (self - self.conj()) * (-0.5j)

    def coefficient(self, *indices: int) -> complex:
        sign, mono = _canonical(indices)
        if sign == 0 or mono not in self.terms:
            return 0.0
        return sign * complex(self.terms[mono][0])

    def max_abs(self) -> float:
        """Largest coefficient modulus (value channel only)."""
        return max((abs(c[0]) for c in self.terms.values()), default=0.0)

    def bidegree_parts(self, holomorphic=HOLOMORPHIC_I) -> Dict[Tuple[int, int], "InvariantForm"]:
        parts: Dict[Tuple[int, int], Dict[Monomial, np.ndarray]] = {}
        for mono, c in self.terms.items():
            p = sum(1 for i in mono if i in holomorphic)
            parts.setdefault((p, self.degree - p), {})[mono] = c
        return {pq: self._like(self.degree, t) for pq, t in parts.items()}


def scalar_form(jet, ratio: float, x: float = 0.0) -> InvariantForm:
    return InvariantForm(0, {(): np.asarray(jet, dtype=complex)}, ratio, x)


def one_form(coeffs: Dict[int, object], ratio: float, x: float = 0.0) -> InvariantForm:
    """``sum_i coeffs[i] e_i``; a coefficient may be a number (constant jet) or a jet."""
    raw = []
    for i, c in coeffs.items():
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        if c.size == 1:
            c = np.concatenate([c, np.zeros(_CONST_ORDER - 1, dtype=complex)])
        raw.append(((i,), c))
    return InvariantForm.from_terms(1, raw, ratio, x)


# constant coefficients carry enough zero derivatives for any chain of d's used here
_CONST_ORDER = 5


def basis_form(*indices: int, ratio: float = 1.0, x: float = 0.0) -> InvariantForm:
    jet = np.zeros(_CONST_ORDER, dtype=complex)
    jet[0] = 1.0
    return InvariantForm.from_terms(len(indices), [(indices, jet)], ratio, x)


def dx_form(ratio: float, order: int, x: float = 0.0) -> InvariantForm:
    one = np.zeros(order, dtype=complex)
    one[0] = 1.0
    return InvariantForm.from_terms(
        1,
        [((DW1,), ratio * one), ((DWB1,), ratio * one), ((DW2,), -one), ((DWB2,), -one)],
        ratio,
        x,
    )


def wedge(f: InvariantForm, g: InvariantForm) -> InvariantForm:
    degree = f.degree + g.degree
    if degree > 4:
        raise ParameterError("wedge product exceeds top degree 4")
    raw = [
        (mf + mg, _jet_product(cf, cg))
        for mf, cf in f.terms.items()
        for mg, cg in g.terms.items()
    ]
    return InvariantForm.from_terms(degree, raw, f.ratio, f.x)


def exterior_d(f: InvariantForm) -> InvariantForm:
    if f.degree == 4:
        raise ParameterError("exterior_d of a top-degree form leaves the algebra")
    raw = []
    for mono, c in f.terms.items():
        if len(c) < 2:
            raise ParameterError("exterior_d needs coefficient jets of order >= 1")
        dc = c[1:]
        for i, w in ((DW1, f.ratio), (DWB1, f.ratio), (DW2, -1.0), (DWB2, -1.0)):
            raw.append(((i,) + mono, w * dc))
    return InvariantForm.from_terms(f.degree + 1, raw, f.ratio, f.x)


def _zero(f: InvariantForm, degree: int) -> InvariantForm:
    return InvariantForm(degree, {}, f.ratio, f.x)


def pq_project(f: InvariantForm, p: int, q: int, holomorphic=HOLOMORPHIC_I) -> InvariantForm:
    if p + q != f.degree:
        raise ParameterError(f"bidegree ({p},{q}) does not match form degree {f.degree}")
    return f.bidegree_parts(holomorphic).get((p, q), _zero(f, f.degree))


def d_c(f: InvariantForm, holomorphic=HOLOMORPHIC_I) -> InvariantForm:
    """``d^c = i (dbar - d)`` relative to the complex structure with the given holomorphic basis."""
    out = _zero(f, f.degree + 1)
    for (p, q), part in f.bidegree_parts(holomorphic).items():
        df = exterior_d(part)
        dpart = pq_project(df, p + 1, q, holomorphic)
        dbarpart = pq_project(df, p, q + 1, holomorphic)
        out = out + (dbarpart - dpart) * 1j
    return out


# --------------------------------------------------------------------------
# Profiles -> forms
# --------------------------------------------------------------------------


def _resolve(profile, params: Optional[SurfaceParams]) -> Tuple[MetricProfile, SurfaceParams]:
    if isinstance(profile, MetricProfile):
        if params is None:
            raise ParameterError("SurfaceParams required for a bare MetricProfile")
        return profile, params
    return profile.metric_profile(), params if params is not None else profile.params


def _k_jet(profile: MetricProfile, x: float) -> np.ndarray:
    return np.array([complex(v) for v in profile.k(x)])


def kahler_form_w(profile, x: float, params: Optional[SurfaceParams] = None, structure: str = "I") -> InvariantForm:
    """``omega = i sum G_w[i, j] dw_i ^ dwbar_j`` with jet coefficients.

    For ``structure="J"`` the ``dw2 ^ dwbar2`` block changes sign, which is the
    fundamental form of the same metric for the orientation-reversed structure.
    """
    profile, params = _resolve(profile, params)
    k, n, m, p = (np.array([complex(v) for v in jet]) for jet in profile.jets(x))
    gu = [[k, n + 1j * m], [n - 1j * m, p]]
    B = chart_jacobian_w(params)
    raw = []
    for i in range(2):
        for j in range(2):
            coeff = sum(B[a, i] * gu[a][c] * B[c, j] for a in range(2) for c in range(2))
            if structure == "J" and i == 1 and j == 1:
                coeff = -coeff
            raw.append(((2 * i, 2 * j + 1), 1j * coeff))
    return InvariantForm.from_terms(2, raw, params.ratio, x)


def omega_minus(params: SurfaceParams, x: float = 0.0) -> InvariantForm:
    return basis_form(DW1, DW2, ratio=params.ratio, x=x)


def omega_plus(profile, x: float, params: Optional[SurfaceParams] = None, perturb: float = 0.0):
    """``(Omega_+, phi1, phi2)`` with ``phi1 = dw1 - (a/b) dwbar2`` and
    ``phi2 = (b/a) k dwbar1 + (1 - k) dw2``.

    A non-zero ``perturb`` adds ``perturb * k * dwbar2`` to ``phi2``, which
    breaks involutivity (negative control).  Rescaling the two coefficients of
    ``phi2`` by arbitrary functions would not: modulo ``phi1`` the differential
    ``dx`` already lies in the span of ``dwbar1, dw2``.
    """
    profile, params = _resolve(profile, params)
    r = params.ratio
    k = _k_jet(profile, x)
    one = np.zeros_like(k)
    one[0] = 1.0
    phi1 = one_form({DW1: 1.0, DWB2: -1.0 / r}, r, x)
    coeffs = {DWB1: r * k, DW2: one - k}
    if perturb:
        coeffs[DWB2] = perturb * k
    phi2 = one_form(coeffs, r, x)
    return wedge(phi1, phi2), phi1, phi2


def frobenius_residual(profile, x: float, params: Optional[SurfaceParams] = None, perturb: float = 0.0) -> float:
    omega, phi1, phi2 = omega_plus(profile, x, params, perturb)
    return max(wedge(exterior_d(phi), omega).max_abs() for phi in (phi1, phi2))


def _covector_split(phi: InvariantForm) -> Tuple[np.ndarray, np.ndarray]:
    alpha = np.array([phi.coefficient(DW1), phi.coefficient(DW2)])
    beta = np.array([phi.coefficient(DWB1), phi.coefficient(DWB2)])
    return alpha, beta


def isotropy_residual(
    profile,
    x: float,
    params: Optional[SurfaceParams] = None,
    metric: Optional[MetricProfile] = None,
) -> float:
    """``max |g(phi_i, phi_j)|`` for the complex-bilinear extension of the metric.

    The metric is taken from ``metric`` if given, otherwise from ``profile``.
    With ``g(d_i, dbar_j) = G_w[i, j]`` the dual pairing of ``dw_i`` with
    ``dwbar_j`` is ``inv(G_w)[j, i]``.
    """
    mprofile, params = _resolve(profile, params)
    G = metric_w(metric if metric is not None else mprofile, x, params)
    if np.linalg.eigvalsh(G).min() <= 0:
        raise DegenerateMetricError("metric is not positive definite")
    H = np.linalg.inv(G).T
    _, phi1, phi2 = omega_plus(profile, x, params)
    split = [_covector_split(phi) for phi in (phi1, phi2)]
    worst = 0.0
    for a1, b1 in split:
        for a2, b2 in split:
            val = a1 @ H @ b2 + a2 @ H @ b1
            worst = max(worst, abs(val))
    return worst


def real_part_residual(profile, x: float, params: Optional[SurfaceParams] = None) -> float:
    _, params = _resolve(profile, params)
    omega, _, _ = omega_plus(profile, x, params)
    return (omega.real() - omega_minus(params, x).real()).max_abs()


class ProjectionCheck(NamedTuple):
    residual: float
    multiple: complex
    fit_residual: float


def projection_identity_residual(profile, x: float, params: Optional[SurfaceParams] = None) -> ProjectionCheck:
    """Compare ``-pi^{1,1} Im Omega_+`` with ``i((b/a) k dw1^dwbar1 + (a/b)(1-k) dw2^dwbar2)``.

    Also fits the single constant ``lam`` with ``-pi^{1,1} Im Omega_+ = lam * omega_w``.
    """
    mprofile, params = _resolve(profile, params)
    r = params.ratio
    omega, _, _ = omega_plus(profile, x, params)
    lhs = -pq_project(omega.imag(), 1, 1)
    k = _k_jet(mprofile, x)
    one = np.zeros_like(k)
    one[0] = 1.0
    target = InvariantForm.from_terms(
        2, [((DW1, DWB1), 1j * r * k), ((DW2, DWB2), 1j * (one - k) / r)], r, x
    )
    residual = (lhs - target).max_abs()
    kahler = kahler_form_w(mprofile, x, params)
    monos = sorted(set(lhs.terms) | set(kahler.terms))
    u = np.array([lhs.coefficient(*m) for m in monos])
    v = np.array([kahler.coefficient(*m) for m in monos])
    vv = np.vdot(v, v).real
    lam = np.vdot(v, u) / vv if vv > 0 else 0.0
    fit = float(np.max(np.abs(u - lam * v))) if len(monos) else 0.0
    return ProjectionCheck(residual, complex(lam), fit)


def _require_diagonal(profile: MetricProfile, x: float) -> None:
    k, n, m, p = profile.jets(x)
    if not (np.allclose(k, n, rtol=0, atol=0) and np.all(np.asarray(m) == 0)):
        raise AnsatzError("odd-type check requires a z-diagonal profile (n = k, m = 0)")
    if np.any(np.asarray(p[1:]) != 0):
        raise AnsatzError("odd-type check requires constant p")


def torsion_forms(profile, x: float, params: Optional[SurfaceParams] = None):
    """``(H_I, H_J) = (d^c_I omega_I, d^c_J omega_J)``."""
    mprofile, params = _resolve(profile, params)
    _require_diagonal(mprofile, x)
    omega_i = kahler_form_w(mprofile, x, params, "I")
    omega_j = kahler_form_w(mprofile, x, params, "J")
    return d_c(omega_i, HOLOMORPHIC_I), d_c(omega_j, HOLOMORPHIC_J)


def odd_type_residual(profile, x: float, params: Optional[SurfaceParams] = None) -> float:
    h_i, h_j = torsion_forms(profile, x, params)
    return (h_i + h_j).max_abs()


# --------------------------------------------------------------------------
# The automorphic function Phi
# --------------------------------------------------------------------------


def _phi_exponents(params: SurfaceParams) -> Tuple[float, float]:
    s = params.a + params.b
    return 2 * params.a / s, 2 * params.b / s


def phi_solve(z1: complex, z2: complex, params: SurfaceParams, tol: float = 1e-15, maxiter: int = 200) -> float:
    """Positive root of ``|z1|^2 Phi^(-2a/(a+b)) + |z2|^2 Phi^(-2b/(a+b)) = 1``.

    Solved for ``t = log Phi``; the left side is strictly decreasing in ``t``.
    Each term is at most 1 at the root, and one of them is at least 1/2, which
    gives the bracket.
    """
    r1, r2 = abs(z1) ** 2, abs(z2) ** 2
    if r1 == 0 and r2 == 0:
        raise ChartDomainError("Phi is undefined at the origin")
    p1, p2 = _phi_exponents(params)
    terms = [(r, p) for r, p in ((r1, p1), (r2, p2)) if r > 0]
    lo = max(math.log(r) / p for r, p in terms)
    hi = max((math.log(2 * r)) / p for r, p in terms)

    def f(t):
        return sum(r * math.exp(-p * t) for r, p in terms) - 1.0

    def fprime(t):
        return -sum(p * r * math.exp(-p * t) for r, p in terms)

    t = 0.5 * (lo + hi)
    for _ in range(maxiter):
        ft = f(t)
        if ft > 0:
            lo = t
        else:
            hi = t
        step = ft / fprime(t)
        new = t - step
        if not lo <= new <= hi:
            new = 0.5 * (lo + hi)
        if abs(new - t) <= tol * max(1.0, abs(t)) or abs(ft) <= 4.0 * np.finfo(float).eps:
            return math.exp(new)
        t = new
    raise RootFindingError("Phi root search did not converge")


def phi_identity_residual(z1: complex, z2: complex, params: SurfaceParams, phi: float) -> float:
    p1, p2 = _phi_exponents(params)
    return abs(abs(z1) ** 2 * phi ** (-p1) + abs(z2) ** 2 * phi ** (-p2) - 1.0)


def ddbar_log_phi(z1: complex, z2: complex, params: SurfaceParams, h: float = 1e-4) -> np.ndarray:
    """Finite-difference ``d dbar log Phi`` as the Hermitian matrix ``[d_i dbar_j log Phi]``.

    Uses the real Hessian in ``(Re z1, Im z1, Re z2, Im z2)`` and
    ``d_i dbar_j = (1/4)[(xx + yy) + i (x_i y_j - y_i x_j)]``.
    """
    p = np.array([complex(z1).real, complex(z1).imag, complex(z2).real, complex(z2).imag])
    if np.linalg.norm(p) <= 2 * h:
        raise ChartDomainError("finite-difference stencil reaches the origin")

    def f(q):
        return math.log(phi_solve(complex(q[0], q[1]), complex(q[2], q[3]), params))

    E = np.eye(4) * h
    f0 = f(p)
    hess = np.empty((4, 4))
    for i in range(4):
        hess[i, i] = (f(p + E[i]) - 2 * f0 + f(p - E[i])) / h**2
        for j in range(i + 1, 4):
            hess[i, j] = hess[j, i] = (
                f(p + E[i] + E[j]) - f(p + E[i] - E[j]) - f(p - E[i] + E[j]) + f(p - E[i] - E[j])
            ) / (4 * h * h)
    M = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            xi, yi, xj, yj = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
            M[i, j] = 0.25 * complex(hess[xi, xj] + hess[yi, yj], hess[xi, yj] - hess[yi, xj])
    return 0.5 * (M + M.conj().T)
