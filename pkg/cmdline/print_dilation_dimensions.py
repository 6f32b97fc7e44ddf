#!/usr/bin/env python3

import os
import sys

import numpy as np

import cpdilate
from cpdilate.ksgns import level_projections

if len(sys.argv) < 2:
    raise ValueError("You must provide the instance file to read from as the first argument.")

the_file = sys.argv[1]

if not os.path.isfile(the_file):
    raise IOError("The file you asked to read from does not exist.")

instance = cpdilate.Instance.from_file(the_file)
dilation = cpdilate.build_dilation(instance.phi, instance.require_pair())
print(f"dim H_phi: {dilation.dim_h}")
print(f"dim K_Phi: {dilation.dim_k}")

# Each level of the chain contributes one orthogonal piece of the dilation spaces
h_projections, k_projections = level_projections(dilation)
if not h_projections:
    h_projections, k_projections = (np.eye(dilation.dim_h),), (np.eye(dilation.dim_k),)
for level, (h_projection, k_projection) in enumerate(zip(h_projections, k_projections), start=1):
    print(f"level {level}: {int(round(np.trace(h_projection).real))} "
          f"{int(round(np.trace(k_projection).real))}")
