#!/usr/bin/env python3

import logging
import unittest

from cpdilate.unit_tests.test_algebra import TestAlgebra, TestHilbert
from cpdilate.unit_tests.test_cli import TestCommandLine
from cpdilate.unit_tests.test_cpmatrix import TestCPMatrix
from cpdilate.unit_tests.test_instance import TestCommands, TestGeneration, TestInstance
from cpdilate.unit_tests.test_ksgns import TestKSGNS
from cpdilate.unit_tests.test_linalg import TestLinalg
from cpdilate.unit_tests.test_radon_nikodym import TestCommutant, TestDeformations, TestEquivalenceAndDomination, \
    TestOrderIsomorphism

logging.getLogger('cpdilate').setLevel(logging.ERROR)

__all__ = ['TestAlgebra', 'TestHilbert', 'TestCommandLine', 'TestCPMatrix', 'TestCommands', 'TestGeneration',
           'TestInstance', 'TestKSGNS', 'TestLinalg', 'TestCommutant', 'TestDeformations',
           'TestEquivalenceAndDomination', 'TestOrderIsomorphism', 'start_tests']


def start_tests():
    unittest.main(module=__name__)
