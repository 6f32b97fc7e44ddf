import unittest

import numpy as np
from numpy.testing import assert_allclose

from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.linalg import Tolerances, gram_quotient, herm_eig, is_psd, lsq_define, min_eigenvalue, null_space, \
    numerical_rank, orthonormal_range, psd_sqrt, unitarity_residual


class TestLinalg(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(5)

    def random_psd(self, size: int, rank: int) -> np.ndarray:
        factor = self.rng.standard_normal((size, rank)) + 1j * self.rng.standard_normal((size, rank))
        return factor @ factor.conj().T

    def test_tolerances(self):
        tol = Tolerances()
        self.assertEqual(tol.rank_tol, 1e-9)
        self.assertEqual(tol.psd_tol, 1e-9)
        self.assertEqual(tol.residual_tol, 1e-7)
        self.assertEqual(tol.replace(residual_tol=1e-5, psd_tol=None).residual_tol, 1e-5)
        self.assertEqual(tol.replace(residual_tol=1e-5).psd_tol, 1e-9)
        for bad in (0, -1e-9, 0.5):
            with self.assertRaises(InvalidInputError) as context:
                Tolerances(residual_tol=bad)
            self.assertEqual(context.exception.code, ErrorCode.INVALID_TOLERANCE)

    def test_herm_eig(self):
        matrix = self.random_psd(4, 4) - 3 * np.eye(4)
        eigenvalues, vectors = herm_eig(matrix)
        self.assertTrue(np.all(np.diff(eigenvalues) <= 0))
        assert_allclose(vectors @ np.diag(eigenvalues) @ vectors.conj().T, matrix, atol=1e-10)
        self.assertAlmostEqual(min_eigenvalue(matrix), eigenvalues[-1])

        with self.assertRaises(VerdictError) as context:
            herm_eig(np.array([[0, 1], [0, 0]]))
        self.assertEqual(context.exception.code, ErrorCode.NON_HERMITIAN)
        with self.assertRaises(InvalidInputError) as context:
            herm_eig(np.zeros((2, 3)))
        self.assertEqual(context.exception.code, ErrorCode.NON_SQUARE)
        self.assertEqual(herm_eig(np.zeros((0, 0)))[0].size, 0)

    def test_is_psd(self):
        self.assertTrue(is_psd(self.random_psd(3, 2)))
        self.assertTrue(is_psd(np.diag([1.0, -1e-12])))
        self.assertFalse(is_psd(np.diag([1.0, -1e-3])))
        self.assertFalse(is_psd(np.array([[1, 1], [0, 1]])))

    def test_psd_sqrt(self):
        matrix = self.random_psd(5, 3)
        root = psd_sqrt(matrix)
        assert_allclose(root @ root, matrix, atol=1e-9)
        assert_allclose(root, root.conj().T, atol=1e-12)
        self.assertGreaterEqual(min_eigenvalue(root), -1e-9)
        assert_allclose(psd_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]), atol=1e-12)

        with self.assertLogs('cpdilate', level='WARNING') as logs:
            root = psd_sqrt(np.diag([4.0, -1e-12]))
        self.assertIn('Clamping', logs.output[0])
        assert_allclose(root, np.diag([2.0, 0.0]), atol=1e-12)

        with self.assertRaises(VerdictError) as context:
            psd_sqrt(np.diag([1.0, -0.5]))
        self.assertEqual(context.exception.code, ErrorCode.NOT_PSD)

    def test_gram_quotient(self):
        quotient = gram_quotient(np.ones((2, 2)))
        self.assertEqual(quotient.rank, 1)
        assert_allclose(np.abs(quotient.range_basis), [[1 / np.sqrt(2), 1 / np.sqrt(2)]], atol=1e-12)
        self.assertLess(quotient.gram_residual(), 1e-12)
        self.assertLess(quotient.coisometry_residual(), 1e-12)

        gram = self.random_psd(6, 3)
        quotient = gram_quotient(gram)
        self.assertEqual(quotient.rank, 3)
        self.assertEqual(quotient.raw_dim, 6)
        self.assertLess(quotient.gram_residual(), 1e-9)
        assert_allclose(quotient.coord_map @ quotient.coord_pinv, np.eye(3), atol=1e-9)

        self.assertEqual(gram_quotient(np.zeros((3, 3))).rank, 0)
        with self.assertRaises(VerdictError):
            gram_quotient(np.diag([1.0, -1.0]))

    def test_lsq_define(self):
        operator = self.rng.standard_normal((3, 4)) + 1j * self.rng.standard_normal((3, 4))
        generators = self.rng.standard_normal((4, 7))
        found, residual = lsq_define(generators, operator @ generators)
        assert_allclose(found, operator, atol=1e-10)
        self.assertLess(residual, 1e-10)

        # two equal inputs sent to different outputs cannot be matched
        _, residual = lsq_define(np.array([[1.0, 1.0]]), np.array([[1.0, 2.0]]))
        self.assertGreater(residual, 0.5)

        found, residual = lsq_define(np.zeros((0, 3)), np.zeros((2, 3)))
        self.assertEqual(found.shape, (2, 0))
        self.assertEqual(residual, 0.0)
        with self.assertRaises(InvalidInputError):
            lsq_define(np.zeros((2, 3)), np.zeros((2, 4)))

    def test_ranges(self):
        matrix = self.random_psd(5, 2)
        basis = orthonormal_range(matrix)
        self.assertEqual(basis.shape, (5, 2))
        assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-10)
        self.assertEqual(numerical_rank(matrix), 2)
        kernel = null_space(matrix)
        self.assertEqual(kernel.shape, (5, 3))
        assert_allclose(matrix @ kernel, np.zeros((5, 3)), atol=1e-9)
        self.assertEqual(null_space(np.zeros((2, 3))).shape, (3, 3))
        self.assertEqual(orthonormal_range(np.zeros((3, 2))).shape, (3, 0))

    def test_unitarity_residual(self):
        self.assertLess(unitarity_residual(np.linalg.qr(self.random_psd(3, 3))[0]), 1e-12)
        self.assertEqual(unitarity_residual(np.zeros((0, 0))), 0.0)
        self.assertEqual(unitarity_residual(np.zeros((2, 3))), float('inf'))
        self.assertAlmostEqual(unitarity_residual(2 * np.eye(2)), 3.0)


if __name__ == '__main__':
    unittest.main()
