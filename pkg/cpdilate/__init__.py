#!/usr/bin/env python3

"""This module provides :py:class:`cpdilate.CStarAlgebra`, :py:class:`cpdilate.HilbertModule`,
   :py:class:`cpdilate.FlagSpace`, the completely positive matrix classes :py:class:`cpdilate.NPositiveMatrixMap`
   and :py:class:`cpdilate.ModuleCPMatrix`, the dilation builder :py:func:`cpdilate.build_dilation` and the
   Radon-Nikodym tools in :py:obj:`cpdilate.radon_nikodym`.

Instances and certificates are read and written by :py:class:`cpdilate.Instance` and
:py:class:`cpdilate.Certificate`. Use python's built in help function for documentation."""

import logging

from cpdilate import utils
from cpdilate._internal import __version__
from cpdilate.algebra import AlgElement, CStarAlgebra
from cpdilate.certificate import Certificate, emit_report
from cpdilate.cpmatrix import ModuleCPMatrix, NPositiveMatrixMap, cp_check, random_cp_pair
from cpdilate.hilbert import FlagOperator, FlagSpace, HilbertModule, ModuleElement
from cpdilate.instance import Instance
from cpdilate.ksgns import DilationData, build_dilation, unitary_equivalence
from cpdilate.linalg import Tolerances
from cpdilate.radon_nikodym import Verdict, deform, domination_check, equivalence_check, order_inverse, rn_derivative
import cpdilate.definitions as definitions
import cpdilate.exceptions as exceptions
import cpdilate.radon_nikodym as radon_nikodym

# Set up logging
logger = logging.getLogger('cpdilate')

__all__ = ['CStarAlgebra', 'AlgElement', 'HilbertModule', 'ModuleElement', 'FlagSpace', 'FlagOperator',
           'NPositiveMatrixMap', 'ModuleCPMatrix', 'DilationData', 'Instance', 'Certificate', 'Tolerances',
           'Verdict', 'build_dilation', 'unitary_equivalence', 'cp_check', 'random_cp_pair', 'equivalence_check',
           'domination_check', 'deform', 'order_inverse', 'rn_derivative', 'emit_report', 'definitions', 'utils',
           'exceptions', 'radon_nikodym', '__version__']
