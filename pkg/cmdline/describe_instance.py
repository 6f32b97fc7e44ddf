#!/usr/bin/env python3

import os
import sys

import cpdilate
from cpdilate.cpmatrix import choi_min_eigenvalue

if len(sys.argv) < 2:
    raise ValueError("You must provide the instance file to read from as the first argument.")

the_file = sys.argv[1]

if not os.path.isfile(the_file):
    raise IOError("The file you asked to read from does not exist.")

instance = cpdilate.Instance.from_file(the_file)
print(f"algebra: {instance.algebra!r}")
print(f"module: {instance.module!r}")
print(f"H flags: {list(instance.source.flag_dims)}")
print(f"K flags: {list(instance.target.flag_dims)}")
print(f"n: {instance.n}")
print(f"phi completely positive: {cpdilate.cp_check(instance.phi)} "
      f"(smallest Choi eigenvalue {choi_min_eigenvalue(instance.phi):.3e})")
print(f"Phi present: {instance.Phi is not None}")
print(f"second pair present: {instance.second_Phi is not None}")
