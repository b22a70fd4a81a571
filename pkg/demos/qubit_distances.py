"""Distances between two graded qubit systems and what the optimal plan looks like.

Run: python demos/qubit_distances.py
"""

import numpy as np

from fermiwasser import io
from fermiwasser.cli import fixture_path
from fermiwasser.sampling import random_system
from fermiwasser.wasserstein import cost, wasserstein_all

a, b = io.load_pair(fixture_path("qubit_pair"))
print("bundled pair: A and B on M_2, grading diag(1, -1)")
for cls, r in wasserstein_all(a, b).items():
    print(f"  W^{cls:<12} = {r.value:.10f}  ({r.status}, gap {r.solution.dual_gap:.1e})")

# the plan attaining the value is an even unital CP map; its cost can be
# recomputed in the cyclic representation of the plan
best = wasserstein_all(a, b)["Fsigmasigma"]
rep = cost(a, b, best.plan)
print(f"cost from the channel {rep.value:.10f}, from the GNS vectors {rep.norm_form:.10f}")

# without dynamics the classes can separate
rng = np.random.default_rng(1)
x, y = random_system(2, rng, d=2, dynamics=()), random_system(2, rng, d=2, dynamics=())
vals = {c: r.value for c, r in wasserstein_all(x, y).items()}
print("free pair:", ", ".join(f"{c}={v:.6f}" for c, v in vals.items()))
print("self distance:", f"{wasserstein_all(y, y)['Fsigmasigma'].value:.2e}")
