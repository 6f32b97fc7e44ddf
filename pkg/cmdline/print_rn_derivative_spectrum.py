#!/usr/bin/env python3

import os
import sys

import numpy as np

import cpdilate

if len(sys.argv) < 2:
    raise ValueError("You must provide an instance file with a second pair as the first argument.")

the_file = sys.argv[1]

if not os.path.isfile(the_file):
    raise IOError("The file you asked to read from does not exist.")

instance = cpdilate.Instance.from_file(the_file)
dilation = cpdilate.build_dilation(instance.phi, instance.require_pair())
derivative = cpdilate.rn_derivative(dilation, instance.require_pair(second=True))

# The derivatives are positive contractions, so every eigenvalue is in [0, 1]
print("Delta1: " + " ".join(f"{value:.6f}" for value in np.linalg.eigvalsh(derivative.Delta1)))
print("Delta2: " + " ".join(f"{value:.6f}" for value in np.linalg.eigvalsh(derivative.Delta2)))
