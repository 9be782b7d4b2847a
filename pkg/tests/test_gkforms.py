import math

import numpy as np
import pytest

from hopfsoliton.errors import AnsatzError, ChartDomainError, ParameterError
from hopfsoliton.geometry import constant_profile, diagonal_profile, random_trig_profile, trig_jet
from hopfsoliton.gkforms import (
    DW1,
    DW2,
    DWB1,
    DWB2,
    HOLOMORPHIC_J,
    InvariantForm,
    basis_form,
    ddbar_log_phi,
    dx_form,
    exterior_d,
    frobenius_residual,
    isotropy_residual,
    odd_type_residual,
    omega_minus,
    omega_plus,
    one_form,
    phi_identity_residual,
    phi_solve,
    pq_project,
    projection_identity_residual,
    real_part_residual,
    scalar_form,
    torsion_forms,
    wedge,
)
from hopfsoliton.soliton import solve_profile

R = 0.5


def random_form(rng, degree, order=4):
    from itertools import combinations

    raw = [
        (mono, rng.normal(size=order) + 1j * rng.normal(size=order))
        for mono in combinations(range(4), degree)
        if rng.random() < 0.8
    ]
    return InvariantForm.from_terms(degree, raw, R)


class TestWedge:
    def test_square_vanishes(self):
        e = basis_form(DW1, ratio=R)
        assert wedge(e, e).terms == {}

    def test_antisymmetry(self):
        a, b = basis_form(DW1, ratio=R), basis_form(DW2, ratio=R)
        assert (wedge(a, b) + wedge(b, a)).max_abs() == 0
        assert wedge(a, b).coefficient(DW1, DW2) == 1
        assert wedge(b, a).coefficient(DW1, DW2) == -1

    def test_product_rule(self):
        k = scalar_form([0.3, 0.7, -0.2], R)
        f = wedge(wedge(k, basis_form(DWB1, ratio=R)), basis_form(DW2, ratio=R))
        np.testing.assert_allclose(f.terms[(DWB1, DW2)], [0.3, 0.7, -0.2])

    @pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3)])
    def test_graded_commutativity(self, rng, p, q):
        f, g = random_form(rng, p), random_form(rng, q)
        lhs = wedge(f, g)
        rhs = wedge(g, f) * ((-1) ** (p * q))
        assert (lhs - rhs).max_abs() < 1e-13

    def test_conjugation_commutes(self, rng):
        f, g = random_form(rng, 1), random_form(rng, 2)
        assert (wedge(f, g).conj() - wedge(f.conj(), g.conj())).max_abs() < 1e-13

    def test_degree_overflow(self, rng):
        with pytest.raises(ParameterError):
            wedge(random_form(rng, 3), random_form(rng, 2))


class TestExteriorD:
    def test_constant(self):
        assert exterior_d(basis_form(DW1, DWB2, ratio=R)).max_abs() == 0

    def test_function(self):
        df = exterior_d(scalar_form([1.0, 2.0, 0.0], R))
        np.testing.assert_allclose(
            [df.coefficient(i) for i in range(4)], [2.0 * R, 2.0 * R, -2.0, -2.0]
        )
        assert (df - dx_form(R, 2) * 2.0).max_abs() == 0

    @pytest.mark.parametrize("degree", [0, 1, 2])
    def test_d_squared(self, rng, degree):
        assert exterior_d(exterior_d(random_form(rng, degree))).max_abs() < 1e-12

    def test_d_squared_k_dw2(self, soliton):
        k = np.array(soliton.jet(0.3), dtype=complex)
        f = one_form({DW2: k}, R)
        assert exterior_d(exterior_d(f)).max_abs() < 1e-15

    def test_leibniz(self, rng):
        f, g = random_form(rng, 1), random_form(rng, 1)
        lhs = exterior_d(wedge(f, g))
        rhs = wedge(exterior_d(f), g) - wedge(f, exterior_d(g))
        assert (lhs - rhs).max_abs() < 1e-12

    def test_top_degree(self):
        with pytest.raises(ParameterError):
            exterior_d(basis_form(0, 1, 2, 3, ratio=R))


class TestProjection:
    def test_vanishing_part(self):
        assert pq_project(basis_form(DW1, DWB2, ratio=R), 2, 0).max_abs() == 0

    def test_keeps_mixed(self):
        f = basis_form(DW1, DWB1, ratio=R) + basis_form(DW1, DW2, ratio=R)
        proj = pq_project(f, 1, 1)
        assert set(proj.terms) == {(DW1, DWB1)}

    def test_conj_swaps_bidegree(self, rng):
        f = random_form(rng, 2)
        for p in range(3):
            assert (pq_project(f, p, 2 - p).conj() - pq_project(f.conj(), 2 - p, p)).max_abs() < 1e-15

    def test_bad_bidegree(self):
        with pytest.raises(ParameterError):
            pq_project(basis_form(DW1, ratio=R), 1, 1)


class TestEvenType:
    xs = np.linspace(-10, 10, 20)

    def test_symmetric_point(self, equal_params):
        prof = constant_profile(0.5, 0.5, 0.0, 1.0)
        _, _, phi2 = omega_plus(prof, 0.0, equal_params)
        assert phi2.coefficient(DWB1) == 0.5
        assert phi2.coefficient(DW2) == 0.5

    def test_four_monomials(self, soliton):
        omega, _, _ = omega_plus(soliton, 0.4)
        assert set(omega.terms) <= {(DW1, DWB1), (DW1, DW2), (DWB1, DWB2), (DW2, DWB2)}

    def test_frobenius(self, soliton):
        assert max(frobenius_residual(soliton, x) for x in self.xs) < 1e-10

    def test_frobenius_constant(self, params):
        assert frobenius_residual(constant_profile(0.3, 0.3, 0.0, 1.0), 0.0, params) == 0

    def test_frobenius_negative_control(self, soliton):
        assert frobenius_residual(soliton, 0.7, perturb=0.3) > 1e-3

    def test_isotropy(self, soliton):
        assert max(isotropy_residual(soliton, x) for x in (-5.0, 0.0, 5.0)) < 1e-10

    def test_isotropy_symmetric_point(self, equal_params):
        prof = constant_profile(0.5, 0.5, 0.0, 1.0)
        assert isotropy_residual(prof, 0.0, equal_params) == 0

    def test_isotropy_wrong_metric(self, soliton, rng):
        other = diagonal_profile(trig_jet(0.5, 0.3, 1.3, 0.2))
        assert isotropy_residual(soliton, 0.9, metric=other) > 1e-3

    def test_real_parts(self, soliton):
        assert max(real_part_residual(soliton, x) for x in self.xs) < 1e-12

    def test_projection(self, soliton):
        checks = [projection_identity_residual(soliton, x) for x in self.xs]
        assert max(c.residual for c in checks) < 1e-10
        assert max(c.fit_residual for c in checks) < 1e-10
        lams = np.array([c.multiple for c in checks])
        assert np.ptp(lams.real) < 1e-10 and np.max(np.abs(lams.imag)) < 1e-12

    def test_fitted_multiple_logistic(self, equal_params):
        sol = solve_profile(equal_params)
        vals = [projection_identity_residual(sol, x).multiple for x in (-3.0, 0.0, 3.0)]
        assert max(abs(v - vals[0]) for v in vals) < 1e-10

    def test_omega_minus(self, params):
        assert omega_minus(params).coefficient(DW1, DW2) == 1


class TestOddType:
    xs = np.linspace(-10, 10, 20)

    def test_soliton(self, soliton, params):
        assert max(odd_type_residual(soliton, x) for x in self.xs) < 1e-10

    def test_constant(self, params):
        prof = constant_profile(0.4, 0.4, 0.0, 1.0)
        h_i, h_j = torsion_forms(prof, 0.0, params)
        assert h_i.max_abs() == 0 and h_j.max_abs() == 0

    def test_non_soliton(self, params):
        prof = diagonal_profile(trig_jet(0.5, 0.2, 0.9, 0.1))
        assert max(odd_type_residual(prof, x, params) for x in self.xs) < 1e-10
        assert torsion_forms(prof, 0.3, params)[0].max_abs() > 1e-3

    def test_torsion_closed(self, soliton):
        h_i, h_j = torsion_forms(soliton, 0.5)
        assert exterior_d(h_i).max_abs() < 1e-12
        assert exterior_d(h_j).max_abs() < 1e-12

    def test_structure_bidegrees(self, soliton):
        h_i, h_j = torsion_forms(soliton, 0.5)
        assert set(h_j.bidegree_parts(HOLOMORPHIC_J)) <= {(2, 1), (1, 2)}

    def test_ansatz(self, params, rng):
        with pytest.raises(AnsatzError):
            odd_type_residual(random_trig_profile(rng), 0.0, params)


class TestPhi:
    def test_identity(self, params, rng):
        for _ in range(50):
            z1, z2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            assert phi_identity_residual(z1, z2, params, phi_solve(z1, z2, params)) < 1e-12

    def test_axis(self, params):
        for z1 in (0.3, 1.0 + 1.0j, -2.5j):
            assert phi_solve(z1, 0.0, params) == pytest.approx(abs(z1) ** ((params.a + params.b) / params.a), rel=1e-12)

    def test_equal_moduli(self, equal_params):
        z1, z2 = 0.3 - 0.2j, 1.1j
        assert phi_solve(z1, z2, equal_params) == pytest.approx(abs(z1) ** 2 + abs(z2) ** 2, rel=1e-13)

    def test_deck_ratio(self, params, rng):
        ratios = []
        for _ in range(20):
            z1, z2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            ratios.append(phi_solve(params.alpha * z1, params.beta * z2, params) / phi_solve(z1, z2, params))
        assert np.ptp(ratios) < 1e-12
        assert ratios[0] == pytest.approx(math.exp(params.a + params.b), rel=1e-12)

    def test_origin(self, params):
        with pytest.raises(ChartDomainError):
            phi_solve(0.0, 0.0, params)

    def test_ddbar_equal_moduli(self, equal_params):
        z = np.array([0.6 + 0.2j, -0.3 + 0.9j])
        M = ddbar_log_phi(z[0], z[1], equal_params)
        n2 = np.vdot(z, z).real
        exact = np.eye(2) / n2 - np.outer(z.conj(), z) / n2**2
        np.testing.assert_allclose(M, exact, atol=1e-6)
        eig = np.linalg.eigvalsh(M)
        assert eig[0] >= -1e-8 and eig[1] > 0

    def test_ddbar_semipositive(self, params, rng):
        for _ in range(20):
            v = rng.normal(size=4)
            v *= rng.uniform(0.5, 2.0) / np.linalg.norm(v)
            eig = np.linalg.eigvalsh(ddbar_log_phi(complex(v[0], v[1]), complex(v[2], v[3]), params))
            assert eig[0] >= -1e-6 and eig[1] > 0

    def test_ddbar_axis_rank_one(self, params):
        eig = np.linalg.eigvalsh(ddbar_log_phi(0.8 + 0.3j, 0.0, params))
        assert abs(eig[0]) < 1e-6 < eig[1]

    def test_ddbar_near_origin(self, params):
        with pytest.raises(ChartDomainError):
            ddbar_log_phi(1e-5, 0.0, params)
