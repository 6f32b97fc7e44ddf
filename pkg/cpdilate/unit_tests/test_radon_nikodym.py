import unittest

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cpdilate.algebra import CStarAlgebra
from cpdilate.cpmatrix import compatibility_residual, identity_pair, rotated, scaled, zero_pair
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.hilbert import FlagSpace, HilbertModule
from cpdilate.ksgns import build_dilation, pad_dilation, random_unitary, unitary_equivalence
from cpdilate.radon_nikodym import CommutantElement, Verdict, commutant_basis, commutant_closure_residual, \
    commutant_residual, deform, domination_check, domination_evidence, equivalence_check, order_inverse, \
    order_iso_roundtrip, random_commutant_element, rn_derivative, t_determines_n_residual
from cpdilate.unit_tests.test_cpmatrix import m2_pair, two_level_pair


class TestEquivalenceAndDomination(unittest.TestCase):

    def setUp(self):
        self.phi, self.Phi, _ = m2_pair(0)
        self.dil = build_dilation(self.phi, self.Phi)

    def test_equivalence(self):
        unitary = random_unitary(2, np.random.default_rng(1))
        turned = rotated(self.Phi, unitary)
        self.assertTrue(equivalence_check(self.Phi, self.Phi))
        self.assertTrue(equivalence_check(self.Phi, turned))
        self.assertTrue(equivalence_check(turned, self.Phi))
        self.assertFalse(equivalence_check(self.Phi, scaled(self.Phi, 2)))

        # transitivity through a second rotation
        twice = rotated(turned, random_unitary(2, np.random.default_rng(2)))
        self.assertTrue(equivalence_check(self.Phi, twice))

        with self.assertRaises(InvalidInputError) as context:
            equivalence_check(self.Phi, identity_pair(2)[1])
        self.assertEqual(context.exception.code, ErrorCode.SHAPE_MISMATCH)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_equivalence_matches_dilations(self, seed):
        phi, Phi, _ = m2_pair(seed)
        dil = build_dilation(phi, Phi)
        rng = np.random.default_rng(seed)

        turned = rotated(Phi, random_unitary(2, rng))
        self.assertTrue(equivalence_check(Phi, turned))
        witness = unitary_equivalence(dil, build_dilation(phi, turned), match_outputs=False)
        assert_allclose(witness.U1, np.eye(dil.dim_h), atol=1e-8)

        doubled = scaled(Phi, 2)
        self.assertFalse(equivalence_check(Phi, doubled))
        with self.assertRaises(VerdictError) as context:
            unitary_equivalence(dil, build_dilation(phi * 4, doubled), match_outputs=False)
        self.assertEqual(context.exception.code, ErrorCode.NOT_EQUIVALENT)

    def test_domination(self):
        self.assertEqual(domination_check(self.Phi, self.Phi), Verdict.CERTIFIED)
        half = deform(self.dil, np.eye(self.dil.dim_h) / 2, np.eye(self.dil.dim_k) / 2)
        self.assertEqual(domination_check(half, self.Phi), Verdict.CERTIFIED)
        self.assertEqual(domination_check(scaled(self.Phi, 2), self.Phi), Verdict.REFUTED)
        self.assertEqual(domination_check(scaled(self.Phi, 2), self.Phi, samples=0), Verdict.UNDECIDED)

        verdict, evidence = domination_evidence(scaled(self.Phi, 2), self.Phi, seed=3)
        self.assertIs(verdict, Verdict.REFUTED)
        self.assertLess(evidence['sampled_min_eigenvalue'], 0)
        verdict, evidence = domination_evidence(half, self.Phi)
        self.assertGreaterEqual(evidence['choi_min_eigenvalue'], -1e-9)

        # mutual domination gives equivalence
        turned = rotated(self.Phi, random_unitary(2, np.random.default_rng(5)))
        self.assertEqual(domination_check(turned, self.Phi), Verdict.CERTIFIED)
        self.assertEqual(domination_check(self.Phi, turned), Verdict.CERTIFIED)
        self.assertTrue(equivalence_check(turned, self.Phi))

        with self.assertRaises(InvalidInputError):
            domination_check(self.Phi, identity_pair(2)[1])


class TestCommutant(unittest.TestCase):

    def test_irreducible(self):
        dil = build_dilation(*identity_pair(2))
        basis = commutant_basis(dil)
        self.assertEqual(len(basis), 1)
        element = basis[0]
        assert_allclose(element.T, element.T[0, 0] * np.eye(2), atol=1e-10)
        assert_allclose(element.N, element.T, atol=1e-10)
        self.assertAlmostEqual(np.linalg.norm(element.vec()), 1)

    def test_two_copies(self):
        dil = build_dilation(*identity_pair(2, copies=2))
        basis = commutant_basis(dil)
        self.assertEqual(len(basis), 4)
        self.assertLess(commutant_closure_residual(basis), 1e-8)
        gram = np.array([[np.vdot(a.vec(), b.vec()) for b in basis] for a in basis])
        assert_allclose(gram, np.eye(4), atol=1e-10)

    def test_empty(self):
        algebra = CStarAlgebra.full_matrix(2)
        space = FlagSpace((2,))
        dil = build_dilation(*zero_pair(algebra, HilbertModule(algebra), space, space))
        self.assertEqual(commutant_basis(dil), [])
        self.assertEqual(commutant_closure_residual([]), 0.0)
        with self.assertRaises(InvalidInputError):
            random_commutant_element([], np.random.default_rng(0))

    def test_random_instance(self):
        phi, Phi, _ = m2_pair(2)
        dil = build_dilation(phi, Phi)
        basis = commutant_basis(dil)
        self.assertGreaterEqual(len(basis), 1)
        self.assertLess(commutant_closure_residual(basis), 1e-8)
        self.assertLess(t_determines_n_residual(basis), 1e-8)
        for element in basis:
            self.assertLess(commutant_residual(dil, element.T, element.N), 1e-8)
            self.assertLess(commutant_residual(dil, element.adjoint().T, element.adjoint().N), 1e-8)

        element = random_commutant_element(basis, np.random.default_rng(0))
        spectrum = np.concatenate([np.linalg.eigvalsh(element.T), np.linalg.eigvalsh(element.N)])
        self.assertGreaterEqual(spectrum.min(), -1e-9)
        self.assertLessEqual(spectrum.max(), 1 + 1e-9)
        product = element @ element
        self.assertLess(commutant_residual(dil, product.T, product.N), 1e-8)

        with self.assertRaises(InvalidInputError) as context:
            commutant_residual(dil, np.eye(dil.dim_h + 1), np.eye(dil.dim_k))
        self.assertEqual(context.exception.code, ErrorCode.DIMENSION_MISMATCH)

    def test_multi_level(self):
        phi, Phi, _ = two_level_pair(3)
        dil = build_dilation(phi, Phi)
        basis = commutant_basis(dil)
        self.assertLess(commutant_closure_residual(basis), 1e-8)
        element = random_commutant_element(basis, np.random.default_rng(1))
        Psi = order_inverse(dil, element.T, element.N)
        self.assertLess(Psi.flag_residual(), 1e-8)
        self.assertLess(compatibility_residual(Psi), 1e-8)


class TestDeformations(unittest.TestCase):

    def setUp(self):
        self.phi, self.Phi, _ = m2_pair(6)
        self.dil = build_dilation(self.phi, self.Phi)
        self.eye_h = np.eye(self.dil.dim_h)
        self.eye_k = np.eye(self.dil.dim_k)

    def test_deform(self):
        same = deform(self.dil, self.eye_h, self.eye_k)
        assert_allclose(same.values, self.Phi.values, atol=1e-10)
        assert_allclose(same.scalar_part.values, self.phi.values, atol=1e-10)

        zero = deform(self.dil, 0 * self.eye_h, 0 * self.eye_k)
        self.assertEqual(np.max(np.abs(zero.values)), 0)

        c = 0.6
        squeezed = deform(self.dil, c ** 2 * self.eye_h, c ** 2 * self.eye_k)
        assert_allclose(squeezed.values, c ** 2 * self.Phi.values, atol=1e-10)
        assert_allclose(squeezed.scalar_part.values, c ** 4 * self.phi.values, atol=1e-10)
        self.assertLess(compatibility_residual(squeezed), 1e-10)

    def test_deform_errors(self):
        dil = build_dilation(*identity_pair(2))
        with self.assertRaises(VerdictError) as context:
            deform(dil, np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
        self.assertEqual(context.exception.code, ErrorCode.NOT_IN_COMMUTANT)
        with self.assertRaises(VerdictError) as context:
            deform(dil, -np.eye(2), -np.eye(2))
        self.assertEqual(context.exception.code, ErrorCode.NOT_PSD)

    def test_rn_derivative(self):
        derivative = rn_derivative(self.dil, self.Phi)
        assert_allclose(derivative.Delta1, self.eye_h, atol=1e-8)
        assert_allclose(derivative.Delta2, self.eye_k, atol=1e-8)

        half = order_inverse(self.dil, self.eye_h / 2, self.eye_k / 2)
        assert_allclose(half.values, self.Phi.values / np.sqrt(2), atol=1e-10)
        derivative = rn_derivative(self.dil, half)
        assert_allclose(derivative.Delta1, self.eye_h / 2, atol=1e-8)
        assert_allclose(derivative.Delta2, self.eye_k / 2, atol=1e-8)
        self.assertLess(derivative.residuals['scalar_derivative'], 1e-8)
        self.assertLess(derivative.residuals['roundtrip_equivalence'], 1e-7)
        self.assertLess(commutant_residual(self.dil, derivative.as_commutant.T, derivative.as_commutant.N), 1e-8)
        self.assertEqual(sorted(derivative.get_json()), ['Delta1', 'Delta2', 'Q', 'R'])

        with self.assertRaises(VerdictError) as context:
            rn_derivative(self.dil, scaled(self.Phi, 2))
        self.assertEqual(context.exception.code, ErrorCode.NOT_DOMINATED)
        self.assertEqual(context.exception.details['verdict'], 'REFUTED')

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_rn_roundtrip(self, seed):
        basis = commutant_basis(self.dil)
        element = random_commutant_element(basis, np.random.default_rng(seed))
        Psi = order_inverse(self.dil, element.T, element.N)
        derivative = rn_derivative(self.dil, Psi, seed=seed)
        assert_allclose(derivative.Delta1, element.T, atol=1e-7)
        assert_allclose(derivative.Delta2, element.N, atol=1e-7)
        self.assertLess(derivative.residuals['roundtrip_equivalence'], 1e-7)
        # the equivalence class is recovered from the derivative alone
        recovered = order_inverse(self.dil, derivative.Delta1, derivative.Delta2)
        self.assertTrue(equivalence_check(recovered, Psi))


class TestOrderIsomorphism(unittest.TestCase):

    def test_roundtrip(self):
        dil = build_dilation(*m2_pair(0)[:2])
        report = order_iso_roundtrip(dil, trials=6, seed=0)
        self.assertEqual(report.trials, 6)
        self.assertLess(report.max_delta1_residual, 1e-7)
        self.assertLess(report.max_delta2_residual, 1e-7)
        self.assertLess(report.max_roundtrip_residual, 1e-7)
        self.assertEqual(report.monotone_refuted, 0)
        self.assertGreaterEqual(report.spectrum_min, -1e-9)
        self.assertLessEqual(report.spectrum_max, 1 + 1e-9)

        threaded = order_iso_roundtrip(dil, trials=6, seed=0, workers=3)
        self.assertEqual(threaded.commutant_dim, report.commutant_dim)
        self.assertEqual(threaded.monotone_certified, report.monotone_certified)
        self.assertAlmostEqual(threaded.max_delta1_residual, report.max_delta1_residual, places=12)

    def test_multi_level_roundtrip(self):
        dil = build_dilation(*two_level_pair(0)[:2])
        report = order_iso_roundtrip(dil, trials=4, seed=1)
        self.assertLess(report.max_delta1_residual, 1e-7)
        self.assertEqual(report.monotone_refuted, 0)

    def test_requires_minimal(self):
        dil = pad_dilation(build_dilation(*identity_pair(2)))
        with self.assertRaises(VerdictError) as context:
            order_iso_roundtrip(dil, trials=1)
        self.assertEqual(context.exception.code, ErrorCode.NOT_MINIMAL)

    def test_commutant_element_algebra(self):
        first = CommutantElement(np.array([[1, 1j], [0, 2]]), np.eye(1))
        self.assertEqual(first.adjoint().T[1, 0], -1j)
        self.assertEqual((first @ first).T[0, 1], 3j)
        self.assertEqual(first.vec().size, 5)


if __name__ == '__main__':
    unittest.main()
