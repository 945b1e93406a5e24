"""The six (1,1) automorphism fields and the scaling-family admissibility checks."""

import numpy as np
import pytest

from contactgeo import expr
from contactgeo.calculus import lie_bracket, lie_derivative
from contactgeo.expr import EvalError
from contactgeo.hamiltonian import (IndexSubset, hamiltonian_vector_field,
                                    rotation_generator, scaling_generator)
from contactgeo.phase_space import (PhaseSpace, add_tensors, coframe,
                                    contact_form, frame, outer_11,
                                    sample_points, scale_tensor)
from contactgeo.structures import (LambdaFamily, StructureKind,
                                   build_structure,
                                   check_structure_identities,
                                   lambda_legendre_residual,
                                   lambda_scaling_residual, product_lambda)

SP1 = PhaseSpace(1)
SP2 = PhaseSpace(2)
PT = SP1.point(1.0, [2.0], [3.0])


class TestBuildStructure:
    def test_quarter_turn_action_on_frame(self):
        rng = np.random.default_rng(30)
        phi = build_structure(SP2, StructureKind.ALMOST_CONTACT)
        fields = frame(SP2)
        for pt in sample_points(SP2, rng, 10):
            m = phi.evaluate(pt)
            for a in (1, 2):
                Q, P = fields[a].evaluate(pt), fields[2 + a].evaluate(pt)
                assert np.max(np.abs(m @ Q + P)) < 1e-12   # phi(Q) = -P
                assert np.max(np.abs(m @ P - Q)) < 1e-12   # phi(P) = Q

    def test_reflection_and_composite_actions(self):
        rng = np.random.default_rng(31)
        fields = frame(SP2)
        actions = {
            StructureKind.PI_ROTATION: lambda Q, P: (-Q, -P),
            StructureKind.REFLECTION: lambda Q, P: (Q, -P),
            StructureKind.COMPOSITE: lambda Q, P: (P, Q),
        }
        for kind, act in actions.items():
            phi = build_structure(SP2, kind)
            for pt in sample_points(SP2, rng, 5):
                m = phi.evaluate(pt)
                for a in (1, 2):
                    Q, P = fields[a].evaluate(pt), fields[2 + a].evaluate(pt)
                    wantQ, wantP = act(Q, P)
                    assert np.max(np.abs(m @ Q - wantQ)) < 1e-12
                    assert np.max(np.abs(m @ P - wantP)) < 1e-12

    def test_scaled_family_action(self):
        phi = build_structure(SP1, StructureKind.LAMBDA, product_lambda(1))
        Q1 = frame(SP1)[1].evaluate(PT)
        assert np.allclose(phi.evaluate(PT) @ Q1, [18.0, 6.0, 0.0])  # 6 * Q1

    def test_every_kind_kills_reeb(self):
        rng = np.random.default_rng(32)
        xi = frame(SP2)[0]
        for kind in StructureKind:
            lam = product_lambda(2) if kind.value.startswith("lambda") else None
            phi = build_structure(SP2, kind, lam)
            for pt in sample_points(SP2, rng, 5):
                assert np.max(np.abs(phi.evaluate(pt) @ xi.evaluate(pt))) < 1e-15

    def test_lambda_required(self):
        with pytest.raises(ValueError, match="LambdaFamily"):
            build_structure(SP1, StructureKind.LAMBDA)

    def test_lambda_size_mismatch(self):
        with pytest.raises(ValueError, match="entries"):
            build_structure(SP2, StructureKind.LAMBDA, product_lambda(1))

    def test_reciprocal_blows_up_on_zero_locus(self):
        phi = build_structure(SP1, StructureKind.LAMBDA_BAR, product_lambda(1))
        with pytest.raises(EvalError, match="division by zero"):
            phi.evaluate(SP1.point(0.0, [0.0], [1.0]))


class TestDefiningIdentities:
    @pytest.mark.parametrize("kind", list(StructureKind))
    def test_identities_hold(self, kind):
        rng = np.random.default_rng(33)
        lam = product_lambda(2) if kind.value.startswith("lambda") else None
        report = check_structure_identities(SP2, kind, lam, rng=rng, count=100)
        assert report.max_residual < 1e-12
        assert report.points == 100

    def test_lambda_square_scales_quadratically(self):
        phi = build_structure(SP1, StructureKind.LAMBDA, product_lambda(1))
        m = phi.evaluate(PT)
        Q1 = frame(SP1)[1].evaluate(PT)
        assert np.allclose(m @ (m @ Q1), 36.0 * Q1)

    def test_duality_where_lambda_nonzero(self):
        rng = np.random.default_rng(34)
        lam = product_lambda(2)
        phiL = build_structure(SP2, StructureKind.LAMBDA, lam)
        phiB = build_structure(SP2, StructureKind.LAMBDA_BAR, lam)
        eta_xi = outer_11(contact_form(SP2), frame(SP2)[0])
        for pt in sample_points(SP2, rng, 25):
            target = np.eye(SP2.dim) - eta_xi.evaluate(pt)
            got = phiL.evaluate(pt) @ phiB.evaluate(pt)
            assert np.max(np.abs(got - target)) < 1e-12

    def test_composite_is_reflection_after_quarter_turn(self):
        rng = np.random.default_rng(35)
        phi = build_structure(SP2, StructureKind.ALMOST_CONTACT)
        phir = build_structure(SP2, StructureKind.REFLECTION)
        phis = build_structure(SP2, StructureKind.COMPOSITE)
        for pt in sample_points(SP2, rng, 10):
            composed = phir.evaluate(pt) @ phi.evaluate(pt)
            assert np.max(np.abs(composed - phis.evaluate(pt))) < 1e-15
            reverse = phi.evaluate(pt) @ phir.evaluate(pt)
            assert np.max(np.abs(reverse + phis.evaluate(pt))) < 1e-15


class TestSymmetriesUnderGenerators:
    def setup_method(self):
        self.rng = np.random.default_rng(36)
        self.m = 1
        self.XL = hamiltonian_vector_field(SP2, rotation_generator(self.m))
        self.XS = hamiltonian_vector_field(SP2, scaling_generator(2))
        self.pts = sample_points(SP2, self.rng, 15)

    def _assert_zero(self, field):
        for pt in self.pts:
            assert np.max(np.abs(field.evaluate(pt))) < 1e-12

    def test_quarter_turn_has_rotation_symmetry(self):
        phi = build_structure(SP2, StructureKind.ALMOST_CONTACT)
        self._assert_zero(lie_derivative(SP2, phi, self.XL))

    def test_half_turn_has_both_symmetries(self):
        phi_pi = build_structure(SP2, StructureKind.PI_ROTATION)
        self._assert_zero(lie_derivative(SP2, phi_pi, self.XL))
        self._assert_zero(lie_derivative(SP2, phi_pi, self.XS))

    def test_reflection_scaling_symmetry_and_rotation_defect(self):
        phi_r = build_structure(SP2, StructureKind.REFLECTION)
        self._assert_zero(lie_derivative(SP2, phi_r, self.XS))
        got = lie_derivative(SP2, phi_r, self.XL)
        co, fields = coframe(SP2), frame(SP2)
        # -2 (dp_i (x) Q_i + dq^i (x) P^i) on the rotated pairs only
        want = add_tensors(*[scale_tensor(add_tensors(outer_11(co[SP2.p_index(i)], fields[i]),
                                                      outer_11(co[SP2.q_index(i)], fields[2 + i])),
                                          -2.0)
                             for i in range(1, self.m + 1)])
        for pt in self.pts:
            assert np.max(np.abs(got.evaluate(pt) - want.evaluate(pt))) < 1e-12

    def test_reflection_rotation_defect_frozen_components(self):
        phi_r = build_structure(SP1, StructureKind.REFLECTION)
        XL1 = hamiltonian_vector_field(SP1, rotation_generator(1))
        got = lie_derivative(SP1, phi_r, XL1).evaluate(PT)
        # -2(dp (x) Q + dq (x) P) at (1,2,3): columns (q: -2P, p: -2Q)
        want = np.array([[0.0, 0.0, -6.0], [0.0, 0.0, -2.0], [0.0, -2.0, 0.0]])
        assert np.allclose(got, want)

    def test_composite_symmetric_under_generator_composition(self):
        phi_s = build_structure(SP2, StructureKind.COMPOSITE)
        inner_S = lie_derivative(SP2, phi_s, self.XS)
        self._assert_zero(lie_derivative(SP2, inner_S, self.XL))
        inner_L = lie_derivative(SP2, phi_s, self.XL)
        self._assert_zero(lie_derivative(SP2, inner_L, self.XS))
        bracket = lie_bracket(SP2, self.XL, self.XS)
        self._assert_zero(lie_derivative(SP2, phi_s, bracket))


class TestScalingCondition:
    def test_product_family_is_exact_solution(self):
        rng = np.random.default_rng(37)
        lam = product_lambda(2)
        for pt in sample_points(SP2, rng, 25):
            assert np.max(np.abs(lambda_scaling_residual(SP2, lam, pt))) < 1e-15

    def test_single_coordinate_fails(self):
        lam = LambdaFamily.of(["q1"])
        pt = SP1.point(0.0, [2.0], [3.0])
        assert lambda_scaling_residual(SP1, lam, pt)[0] == pytest.approx(-2.0)

    def test_w_only_family_passes(self):
        lam = LambdaFamily.of(["w"])
        rng = np.random.default_rng(38)
        for pt in sample_points(SP1, rng, 10):
            assert lambda_scaling_residual(SP1, lam, pt)[0] == 0.0

    def test_general_scaling_family_instances(self):
        # ratios and cross products of the scaling-invariant general form
        rng = np.random.default_rng(39)
        lam = LambdaFamily.of(["q1*p2", "q2/q1"])
        for pt in sample_points(SP2, rng, 25):
            assert np.max(np.abs(lambda_scaling_residual(SP2, lam, pt))) < 1e-12

    def test_separable_odd_family_breaks_scaling(self):
        lam = LambdaFamily.of(["(q1^3 + q1)*(p1^3 + p1)"])
        pt = SP1.point(0.0, [1.0], [2.0])
        # p f(q) g'(p) - q f'(q) g(p) = 2*2*13 - 1*4*10 = 12
        assert lambda_scaling_residual(SP1, lam, pt)[0] == pytest.approx(12.0)


class TestLegendreCondition:
    def test_product_family_passes(self):
        assert np.max(np.abs(
            lambda_legendre_residual(SP1, product_lambda(1), IndexSubset.of(1), PT))) == 0.0

    def test_cubed_family_passes(self):
        assert np.max(np.abs(
            lambda_legendre_residual(SP1, product_lambda(1, power=3), IndexSubset.of(1), PT))) == 0.0

    def test_even_family_fails_with_known_residual(self):
        res = lambda_legendre_residual(SP1, product_lambda(1, power=2), IndexSubset.of(1), PT)
        assert res[0] == pytest.approx(72.0)

    def test_separable_odd_family_passes(self):
        rng = np.random.default_rng(40)
        lam = LambdaFamily.of(["(q1^3 + q1)*(p1^3 + p1)"])
        for pt in sample_points(SP1, rng, 20):
            assert np.max(np.abs(
                lambda_legendre_residual(SP1, lam, IndexSubset.of(1), pt))) < 1e-10

    def test_untransformed_indices_must_be_unchanged(self):
        rng = np.random.default_rng(41)
        lam = product_lambda(2)
        for pt in sample_points(SP2, rng, 20):
            for I in (IndexSubset.of(1), IndexSubset.of(2), IndexSubset.of([1, 2])):
                assert np.max(np.abs(lambda_legendre_residual(SP2, lam, I, pt))) < 1e-12

    def test_claim_flags(self):
        assert product_lambda(2).claims_legendre_invariant
        assert product_lambda(2).claims_odd
        assert not product_lambda(2, power=2).claims_legendre_invariant
        assert product_lambda(2, power=3).claims_scaling_invariant
