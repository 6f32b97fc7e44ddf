import unittest
from dataclasses import replace

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cpdilate.algebra import CStarAlgebra
from cpdilate.cpmatrix import ModuleCPMatrix, identity_pair, random_cp_pair, scaled, trace_pair, transpose_map, \
    zero_pair
from cpdilate.exceptions import ErrorCode, VerdictError
from cpdilate.hilbert import FlagSpace, HilbertModule
from cpdilate.ksgns import DilationData, build_dilation, dilation_pair, level_projections, minimality_check, \
    nondegeneracy_check, pad_dilation, random_unitary, reconstruction_residual, representation_residuals, \
    rotate_dilation, unitary_equivalence
from cpdilate.unit_tests.test_cpmatrix import m2_pair, two_level_pair


def matrix_unit_gram_rank(d: int, h: int, phi) -> int:
    """ Rank of G[(k,l,p), (k',l',q)] = <e_p, phi(E_kl* E_k'l') e_q> over the
    matrix units of M_d, assembled entry by entry. """

    units = []
    for k in range(d):
        for l in range(d):
            unit = np.zeros((d, d))
            unit[k, l] = 1
            units.append(unit)
    gram = np.zeros((d * d * h, d * d * h), dtype=np.complex128)
    for b, first in enumerate(units):
        for c, second in enumerate(units):
            value = phi(first.conj().T @ second)
            for p in range(h):
                for q in range(h):
                    gram[b * h + p, c * h + q] = value[p, q]
    return int(np.linalg.matrix_rank(gram, tol=1e-9))


class TestKSGNS(unittest.TestCase):

    def test_canonical_dimensions(self):
        phi, Phi = identity_pair(2)
        dil = build_dilation(phi, Phi)
        self.assertEqual(dil.dim_h, 2)
        self.assertEqual(dil.dim_k, 2)
        self.assertEqual(dil.quotient.raw_dim, 8)

        phi, Phi = trace_pair(2)
        dil = build_dilation(phi, Phi)
        self.assertEqual(dil.dim_h, 4)
        self.assertEqual(dil.dim_k, 4)
        self.assertTrue(minimality_check(dil))

    def test_dimensions_match_gram_rank(self):
        for d in (2, 3):
            identity_rank = matrix_unit_gram_rank(d, d, lambda a: a)
            trace_rank = matrix_unit_gram_rank(d, 1, lambda a: np.trace(a).reshape(1, 1))
            self.assertEqual(identity_rank, d)
            self.assertEqual(trace_rank, d * d)
            self.assertEqual(build_dilation(*identity_pair(d)).dim_h, identity_rank)
            self.assertEqual(build_dilation(*trace_pair(d)).dim_h, trace_rank)

    def test_generic_dimension_bound(self):
        # eight copies of the identity representation leave room for all of (M_2 (x) C^2)^2
        algebra = CStarAlgebra.full_matrix(2)
        space = FlagSpace((2,))
        phi, Phi, _ = random_cp_pair(algebra, HilbertModule(algebra), space, space, 2, 16, 3)
        dil = build_dilation(phi, Phi)
        self.assertEqual(dil.dim_h, phi.n * phi.algebra.dim * phi.space.dim)
        self.assertEqual(dil.dim_h, dil.quotient.raw_dim)
        self.assertLess(max(reconstruction_residual(dil, phi, Phi)), 1e-8)

    def test_zero_instance(self):
        algebra = CStarAlgebra.full_matrix(2)
        space = FlagSpace((2,))
        phi, Phi = zero_pair(algebra, HilbertModule(algebra), space, space, 2)
        dil = build_dilation(phi, Phi)
        self.assertEqual(dil.dim_h, 0)
        self.assertEqual(dil.dim_k, 0)
        self.assertEqual(reconstruction_residual(dil, phi, Phi), (0.0, 0.0))
        self.assertTrue(minimality_check(dil))
        self.assertTrue(nondegeneracy_check(dil))

    def test_build_errors(self):
        transpose = transpose_map(2)
        module = HilbertModule(transpose.algebra)
        Phi = ModuleCPMatrix(module, transpose.space, transpose.space, np.zeros((1, 1, 4, 2, 2)), transpose)
        with self.assertRaises(VerdictError) as context:
            build_dilation(transpose, Phi)
        self.assertEqual(context.exception.code, ErrorCode.NOT_CP)
        self.assertAlmostEqual(context.exception.details['choi_min_eigenvalue'], -1)

        phi, Phi = identity_pair(2)
        doubled = ModuleCPMatrix(Phi.module, Phi.source, Phi.target, Phi.values * 2, phi)
        with self.assertRaises(VerdictError) as context:
            build_dilation(phi, doubled)
        self.assertEqual(context.exception.code, ErrorCode.COMPAT_FAIL)

    def test_reconstruction(self):
        phi, Phi, _ = m2_pair(0)
        dil = build_dilation(phi, Phi)
        res1, res2 = reconstruction_residual(dil, phi, Phi)
        self.assertLess(res1, 1e-8)
        self.assertLess(res2, 1e-8)
        for name, residual in representation_residuals(dil).items():
            self.assertLess(residual, 1e-8, name)
        self.assertTrue(minimality_check(dil))
        self.assertTrue(nondegeneracy_check(dil))
        self.assertLessEqual(dil.dim_h, phi.n * phi.algebra.dim * phi.space.dim)

        # zeroing S_1 loses every value of phi_11
        S = dil.S.copy()
        S[0] = 0
        res1, _ = reconstruction_residual(replace(dil, S=S), phi, Phi)
        self.assertGreaterEqual(res1, np.max(np.abs(phi.values[0, 0])))

    def test_multi_level(self):
        phi, Phi, _ = two_level_pair(7)
        dil = build_dilation(phi, Phi)
        self.assertLess(max(reconstruction_residual(dil, phi, Phi)), 1e-8)
        self.assertTrue(minimality_check(dil))
        h_projections, k_projections = level_projections(dil)
        self.assertEqual(len(h_projections), 2)
        assert_allclose(sum(h_projections), np.eye(dil.dim_h), atol=1e-8)
        assert_allclose(sum(k_projections), np.eye(dil.dim_k), atol=1e-8)
        assert_allclose(h_projections[0] @ h_projections[1], np.zeros((dil.dim_h, dil.dim_h)), atol=1e-8)

        self.assertEqual(level_projections(build_dilation(*identity_pair(2))), ((), ()))

    def test_equivalence_of_dilations(self):
        phi, Phi, _ = m2_pair(1)
        dil = build_dilation(phi, Phi)

        witness = unitary_equivalence(dil, dil)
        assert_allclose(witness.U1, np.eye(dil.dim_h), atol=1e-8)
        assert_allclose(witness.U2, np.eye(dil.dim_k), atol=1e-8)

        rng = np.random.default_rng(2)
        U1, U2 = random_unitary(dil.dim_h, rng), random_unitary(dil.dim_k, rng)
        witness = unitary_equivalence(dil, rotate_dilation(dil, U1, U2))
        assert_allclose(witness.U1, U1, atol=1e-8)
        assert_allclose(witness.U2, U2, atol=1e-8)
        for name, residual in witness.residuals.items():
            self.assertLess(residual, 1e-8, name)

        with self.assertRaises(VerdictError) as context:
            unitary_equivalence(dil, build_dilation(phi * 4, scaled(Phi, 2)))
        self.assertEqual(context.exception.code, ErrorCode.NOT_EQUIVALENT)

        padded = pad_dilation(dil)
        self.assertFalse(minimality_check(padded))
        self.assertLess(max(reconstruction_residual(padded, phi, Phi)), 1e-8)
        with self.assertRaises(VerdictError) as context:
            unitary_equivalence(padded, dil)
        self.assertEqual(context.exception.code, ErrorCode.NOT_MINIMAL)

    def test_json(self):
        phi, Phi, _ = m2_pair(3)
        dil = build_dilation(phi, Phi)
        loaded = DilationData.from_json(dil.get_json(), dil.algebra, dil.module, dil.source, dil.target, dil.n)
        self.assertTrue(np.array_equal(loaded.S, dil.S))
        self.assertTrue(np.array_equal(loaded.rep_pi_Phi, dil.rep_pi_Phi))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_uniqueness(self, seed):
        for phi, Phi, _ in (m2_pair(seed), two_level_pair(seed)):
            dil = build_dilation(phi, Phi)
            self.assertLess(max(reconstruction_residual(dil, phi, Phi)), 1e-8)
            # a second dilation built from the reproduced pair
            other = build_dilation(*dilation_pair(dil))
            witness = unitary_equivalence(dil, other)
            self.assertLess(max(witness.residuals.values()), 1e-7)


if __name__ == '__main__':
    unittest.main()
