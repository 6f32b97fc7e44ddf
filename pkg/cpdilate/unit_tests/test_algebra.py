import unittest

import numpy as np
from numpy.testing import assert_allclose

from cpdilate.algebra import AlgElement, CStarAlgebra, adjoint_permutation, element_product, positivity_check, \
    product_table, seminorm_eval
from cpdilate.exceptions import ErrorCode, InvalidInputError, VerdictError
from cpdilate.hilbert import FlagOperator, FlagSpace, HilbertModule, action_table, compatibility_mask, \
    flag_adjoint, flag_compat_check, flag_seminorm, fullness_check, inner_product_table, module_inner_product, \
    module_right_action


class TestAlgebra(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.two_level = CStarAlgebra((1, 2), ((0,), (0, 1)))

    def test_construction(self):
        algebra = CStarAlgebra((2,))
        self.assertEqual(algebra.chain, ((0,),))
        self.assertEqual(algebra, CStarAlgebra.full_matrix(2))
        self.assertEqual(self.two_level.dim, 5)
        self.assertEqual(self.two_level.rep_dim, 3)
        self.assertEqual(self.two_level.num_levels, 2)
        self.assertEqual(self.two_level.block_offsets, [0, 1])
        self.assertEqual(self.two_level.level_blocks(1), (0,))
        self.assertEqual(self.two_level.get_json(), {'block_dims': [1, 2], 'chain': [[0], [0, 1]]})

        with self.assertRaises(InvalidInputError) as context:
            CStarAlgebra((2, 2), ((1,), (0,)))
        self.assertEqual(context.exception.code, ErrorCode.LEVEL_OUT_OF_RANGE)
        with self.assertRaises(InvalidInputError) as context:
            CStarAlgebra((2, 2), ((0,),))
        self.assertEqual(context.exception.code, ErrorCode.LEVEL_OUT_OF_RANGE)
        with self.assertRaises(InvalidInputError) as context:
            CStarAlgebra((2,), ((0, 3),))
        self.assertEqual(context.exception.code, ErrorCode.INDEX_OUT_OF_RANGE)
        with self.assertRaises(InvalidInputError):
            CStarAlgebra(())
        with self.assertRaises(InvalidInputError):
            self.two_level.level_blocks(3)

    def test_element_arithmetic(self):
        a = self.two_level.random_element(self.rng)
        b = self.two_level.random_element(self.rng)
        product = a * b
        assert_allclose(product.blocks[1], a.blocks[1] @ b.blocks[1])
        assert_allclose((a * b).adjoint().vec(), (b.adjoint() * a.adjoint()).vec(), atol=1e-12)
        assert_allclose((a + b - b).vec(), a.vec(), atol=1e-12)
        assert_allclose((2 * a).vec(), (a * 2).vec())
        assert_allclose(self.two_level.from_vector(a.vec()).vec(), a.vec())
        assert_allclose((self.two_level.identity() * a).vec(), a.vec())

        with self.assertRaises(InvalidInputError) as context:
            element_product(a, CStarAlgebra((2,)).identity())
        self.assertEqual(context.exception.code, ErrorCode.ALGEBRA_MISMATCH)
        with self.assertRaises(InvalidInputError):
            AlgElement(self.two_level, [np.eye(1), np.eye(3)])
        with self.assertRaises(InvalidInputError):
            self.two_level.from_vector(np.zeros(4))

    def test_tables(self):
        table = product_table(self.two_level)
        permutation = adjoint_permutation(self.two_level)
        for _ in range(3):
            a = self.two_level.random_element(self.rng)
            b = self.two_level.random_element(self.rng)
            assert_allclose(np.einsum('b,c,bcd->d', a.vec(), b.vec(), table), (a * b).vec(), atol=1e-12)
            assert_allclose(a.vec().conj()[permutation], a.adjoint().vec(), atol=1e-12)
        self.assertIs(product_table(CStarAlgebra((1, 2), ((0,), (0, 1)))), table)

        a = self.two_level.random_element(self.rng)
        assert_allclose(self.two_level.left_multiplication(a) @ a.vec(), (a * a).vec(), atol=1e-12)
        self.assertEqual(self.two_level.identity_representation(a).shape, (3, 3))

    def test_positivity_and_seminorms(self):
        a = self.two_level.random_element(self.rng)
        self.assertTrue(positivity_check(a.adjoint() * a))
        self.assertFalse(positivity_check(a))
        self.assertFalse(positivity_check(-1 * self.two_level.identity()))

        element = AlgElement(self.two_level, [np.array([[3.0]]), np.diag([1.0, -5.0])])
        self.assertAlmostEqual(seminorm_eval(element, 1), 3.0)
        self.assertAlmostEqual(seminorm_eval(element, 2), 5.0)
        # p_alpha is a C*-seminorm
        self.assertAlmostEqual(seminorm_eval(a.adjoint() * a, 2), seminorm_eval(a, 2) ** 2)


class TestHilbert(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(13)
        self.algebra = CStarAlgebra((1, 2), ((0,), (0, 1)))

    def test_module_kinds(self):
        self_module = HilbertModule(self.algebra)
        self.assertEqual(self_module.rows, (1, 2))
        self.assertEqual(self_module.dim, self.algebra.dim)
        free = HilbertModule(self.algebra, 'free', 2)
        self.assertEqual(free.rows, (2, 4))
        self.assertEqual(free.dim, 10)
        self.assertEqual(free.get_json(), {'kind': 'free', 'multiplicity': 2})
        rect = HilbertModule(self.algebra, 'rect', rows=(0, 3))
        self.assertEqual(rect.dim, 6)
        self.assertEqual(rect.rep_dim, 3)
        self.assertEqual(rect.get_json(), {'kind': 'rect', 'rows': [0, 3]})

        with self.assertRaises(InvalidInputError) as context:
            HilbertModule(self.algebra, 'other')
        self.assertEqual(context.exception.code, ErrorCode.MODULE_MISMATCH)
        with self.assertRaises(InvalidInputError):
            HilbertModule(self.algebra, 'rect', rows=(1,))
        with self.assertRaises(InvalidInputError):
            HilbertModule(self.algebra, 'free', 0)

    def test_inner_product(self):
        module = HilbertModule(self.algebra, 'rect', rows=(2, 3))
        x, y = module.random_element(self.rng), module.random_element(self.rng)
        a = self.algebra.random_element(self.rng)

        # <x, y a> = <x, y> a and <x, y>* = <y, x>
        assert_allclose(module_inner_product(x, y * a).vec(), (module_inner_product(x, y) * a).vec(), atol=1e-12)
        assert_allclose(module_inner_product(x, y).adjoint().vec(), module_inner_product(y, x).vec(), atol=1e-12)
        self.assertTrue(positivity_check(module_inner_product(x, x)))

        inner = inner_product_table(module)
        assert_allclose(np.einsum('b,c,bcd->d', x.vec().conj(), y.vec(), inner),
                        module_inner_product(x, y).vec(), atol=1e-12)
        action = action_table(module)
        assert_allclose(np.einsum('b,c,bcd->d', x.vec(), a.vec(), action), module_right_action(x, a).vec(),
                        atol=1e-12)
        representation = module.identity_representation(x)
        assert_allclose(representation.conj().T @ module.identity_representation(y),
                        self.algebra.identity_representation(module_inner_product(x, y)), atol=1e-12)

    def test_fullness(self):
        self.assertTrue(fullness_check(HilbertModule(self.algebra)))
        self.assertTrue(fullness_check(HilbertModule(self.algebra, 'free', 2)))
        self.assertFalse(fullness_check(HilbertModule(self.algebra, 'rect', rows=(0, 1))))

    def test_flag_space(self):
        flag = FlagSpace((1, 3))
        self.assertEqual(flag.dim, 3)
        self.assertEqual(flag.level_dim(1), 1)
        self.assertEqual(flag.differences(), [(0, 1), (1, 3)])
        self.assertEqual(list(flag.coordinate_levels()), [0, 1, 1])
        self.assertEqual(FlagSpace.trivial(2, 3).flag_dims, (2, 2, 2))
        with self.assertRaises(InvalidInputError):
            FlagSpace((3, 1))
        with self.assertRaises(InvalidInputError):
            flag.level_dim(0)

        unitary = np.linalg.qr(self.rng.standard_normal((3, 3)))[0]
        canonical, rotation = FlagSpace.from_subspaces(3, [unitary[:, :1], unitary])
        self.assertEqual(canonical, flag)
        assert_allclose(np.abs(rotation @ unitary[:, 0]), [1, 0, 0], atol=1e-10)

    def test_flag_operators(self):
        source, target = FlagSpace((1, 3)), FlagSpace((2, 2))
        mask = compatibility_mask(source, target)
        self.assertEqual(mask.tolist(), [[True, False, False], [True, False, False]])

        matrix = np.zeros((2, 3), dtype=complex)
        matrix[:, 0] = [1, 2j]
        operator = FlagOperator(source, target, matrix)
        self.assertTrue(operator.is_compatible())
        self.assertAlmostEqual(flag_seminorm(operator, 1), np.sqrt(5))
        adjoint = flag_adjoint(operator)
        assert_allclose(adjoint.matrix, matrix.conj().T)
        assert_allclose(operator.inner(operator), matrix.conj().T @ matrix)
        self.assertEqual((adjoint @ operator).matrix.shape, (3, 3))

        matrix[0, 2] = 1
        self.assertFalse(flag_compat_check(matrix, source, target))
        with self.assertRaises(VerdictError) as context:
            flag_adjoint(FlagOperator(source, target, matrix))
        self.assertEqual(context.exception.code, ErrorCode.NOT_FLAG_COMPATIBLE)
        with self.assertRaises(InvalidInputError):
            FlagOperator(source, target, np.zeros((3, 2)))
        with self.assertRaises(InvalidInputError):
            compatibility_mask(source, FlagSpace((2,)))


if __name__ == '__main__':
    unittest.main()
