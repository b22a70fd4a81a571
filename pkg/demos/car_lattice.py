"""The CAR lattice: modes M on the left, their mirror images on the right.

For each k the Fock frame is built, the standard-form facts are checked and a
single-mode amplitude damping channel is shown to satisfy detailed balance
with respect to the lattice copying map.
"""

import numpy as np

from fermiwasser.car_lattice import (LatticeConfig, build_frame, generalized_amplitude_damping,
                                     to_graded_system, verify_lattice_standard_form)
from fermiwasser.detailed_balance import check_fdb

for k in (1, 2, 3):
    rep = verify_lattice_standard_form(build_frame(LatticeConfig.random(k, k)))
    print(f"k={k}: ok={rep['ok']}  K^2=g {rep['K_squared_is_g']:.1e}  "
          f"KJ=gJK {rep['K_intertwines_J']:.1e}  KJ=JK {rep['K_commutes_J']:.2f}")

rep = verify_lattice_standard_form(build_frame(LatticeConfig.uniform(2), trivial_grading=True))
print("trivial grading control fails as expected:", not rep["ok"])

p = 0.3
frame = build_frame(LatticeConfig(1, (p, 1 - p)))
x = np.array([[0.0, 1.0], [1.0, 0.0]])
system = to_graded_system(frame, {"damping": generalized_amplitude_damping(0.25, p)}, [x])
print(f"amplitude damping FDB residual: {check_fdb(system).residual:.1e}")
